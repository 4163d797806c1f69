//! The bundled Paris project against the published reference tables.

mod common;

use common::*;

use indexmap::IndexMap;

use clca::engine::assess;
use clca::infra_allocation::{infra_breakdown, infra_ef_per_pkt, network_annual_impact};
use clca::io::{read_flows, read_survey_sums};
use clca::mode_factors::{vehicle_ef_per_pkt, Stage};
use clca::project::Project;
use clca::scenario_lab::{mix_model, sweep_servicing, Scenario};
use clca::street_inventory::{inventory_impact, FactorCoverage};
use clca::{Error, ModeId};

#[test]
fn paris_loads_without_warnings() {
    let project = paris();
    assert!(project.warnings.is_empty(), "{:?}", project.warnings);
    assert_eq!(project.profiles.len(), 13);
}

/// (mode, infra, 2017, 2018)
const ALLOCATION_FACTORS: [(&str, &str, f64, f64); 11] = [
    ("rer", "rer-track", 1.81e-10, 1.83e-10),
    ("metro", "metro-track", 1.23e-10, 1.26e-10),
    ("streetcar", "streetcar-track", 3.06e-9, 3.07e-9),
    ("bus", "bus-lane", 1.21e-9, 1.24e-9),
    ("bus", "roadway", 4.34e-10, 4.39e-10),
    ("taxi", "roadway", 4.34e-10, 4.39e-10),
    ("personal-car", "roadway", 4.33e-10, 4.39e-10),
    ("truck", "roadway", 4.34e-10, 4.39e-10),
    ("personal-motor-scooter", "roadway", 4.33e-10, 4.39e-10),
    ("personal-bicycle", "cycle-lane", 2.68e-9, 1.73e-9),
    ("walk", "sidewalk", 1.33e-9, 1.45e-9),
];

#[test]
fn allocation_factors_match_both_years() {
    let project = paris();
    for (year, pick) in [(2017, 0), (2018, 1)] {
        let traffic = project.traffic_for_year(year);
        for row in ALLOCATION_FACTORS {
            let want = if pick == 0 { row.2 } else { row.3 };
            let parts = infra_breakdown(&ModeId::new(row.0), &project.assets, &traffic).unwrap();
            let got = parts.iter().find(|c| c.infra == row.1).unwrap().allocation_factor;
            assert!(rel(got, want) < 0.01, "{year} {} on {}: {got:e} vs {want:e}", row.0, row.1);
        }
    }
    let traffic = project.traffic_for_year(2018);
    let ffes = infra_breakdown(&"ffes".into(), &project.assets, &traffic).unwrap();
    assert!(rel(ffes[0].allocation_factor, 1.73e-9) < 0.01);
}

/// vehicle, use, servicing, infrastructure
const STAGES: [(&str, [f64; 4]); 13] = [
    ("walk", [0.0, 0.0, 0.0, 2.23e-3]),
    ("metro", [6.70e-4, 4.45e-3, 0.0, 2.43e-3]),
    ("rer", [4.29e-4, 7.00e-3, 0.0, 1.37e-3]),
    ("personal-bicycle", [1.41e-2, 0.0, 0.0, 1.13e-3]),
    ("streetcar", [5.65e-3, 3.71e-3, 0.0, 1.08e-2]),
    ("shared-motor-scooter", [1.98e-2, 1.91e-3, 0.0, 6.03e-3]),
    ("shared-bicycle", [5.75e-2, 2.15e-4, 2.55e-4, 1.13e-3]),
    ("ffes", [5.56e-2, 1.21e-3, 5.14e-2, 1.13e-3]),
    ("bus", [1.55e-2, 1.11e-1, 0.0, 7.08e-3]),
    ("personal-motor-scooter", [2.21e-2, 1.07e-1, 0.0, 6.03e-3]),
    ("personal-car", [2.91e-2, 1.74e-1, 0.0, 6.03e-3]),
    ("taxi", [4.97e-2, 2.44e-1, 0.0, 6.03e-3]),
    ("ride-hailing", [4.97e-2, 2.44e-1, 0.0, 6.03e-3]),
];

#[test]
fn factor_stages_match_the_footprint_table() {
    let factors = paris().baseline(None).unwrap().factors().unwrap();
    for (mode, want) in STAGES {
        for (stage, w) in Stage::ALL.iter().zip(want) {
            let got = factors[mode].stage(*stage);
            if w == 0.0 {
                assert_eq!(got, 0.0, "{mode} {stage}");
            } else {
                assert!(rel(got, w) < 0.05, "{mode} {stage}: {got:e} vs {w:e}");
            }
        }
    }
}

#[test]
fn ffes_vehicle_stage_from_its_inventory_mass() {
    let project = paris();
    let ffes = project.profiles.iter().find(|p| p.mode.as_str() == "ffes").unwrap();
    let v = ffes.vehicle.as_ref().unwrap();
    assert_eq!(v.ef_one_vehicle_kg, 208.5);
    assert!(rel(vehicle_ef_per_pkt(v).unwrap(), 5.56e-2) < 1e-3);
}

#[test]
fn infrastructure_inversions_round_trip() {
    let project = paris();
    let traffic = project.traffic_for_year(2018);
    let sidewalk = project.assets.iter().find(|a| a.infra_id == "sidewalk").unwrap();
    assert!(rel(network_annual_impact(sidewalk), 1.536e6) < 0.01);
    for (mode, want) in [("walk", 2.23e-3), ("streetcar", 1.08e-2), ("metro", 2.43e-3), ("bus", 7.08e-3)] {
        let got = infra_ef_per_pkt(&mode.into(), &project.assets, &traffic).unwrap();
        assert!(rel(got, want) < 1e-4, "{mode}: {got:e}");
    }
}

#[test]
fn half_the_users_halve_the_impact() {
    let project = paris();
    let full = project.baseline(Some(1e6)).unwrap().assess().unwrap().total;
    let half = project.baseline(Some(5e5)).unwrap().assess().unwrap().total;
    assert!((half - full / 2.0).abs() <= 1e-12 * full.abs());
}

#[test]
fn identity_overrides_reproduce_the_baseline() {
    let project = paris();
    let baseline = project.baseline(None).unwrap();
    let total = baseline.assess().unwrap().total;
    let same_life = baseline.evaluate(&Scenario::lifetime(3750.0).unwrap()).unwrap();
    assert_eq!(same_life.total, total);
    let fr = project.mixes().unwrap().into_iter().find(|m| m.code == "FR").unwrap();
    assert_eq!(baseline.evaluate(&Scenario::mix(fr).unwrap()).unwrap().total, total);
}

#[test]
fn servicing_sweep() {
    let project = paris();
    let baseline = project.baseline(None).unwrap();
    let sweep = sweep_servicing(&baseline, &project.servicing).unwrap();
    let total = |name: &str| sweep.points.iter().find(|p| p.label == name).unwrap().total_kg;
    assert!(rel(total("LCV 90 km 50 ES"), 2.54e7) < 0.15);
    assert_eq!(total("LCV 90 km 100 ES"), baseline.assess().unwrap().total);
    for p in &sweep.points {
        assert!((sweep.fit.predict(p.parameter) - p.total_kg).abs() <= 1e-6 * total("LCV 90 km 50 ES"));
    }
    // With the published shift the low-servicing scenarios land just below
    // zero (about -0.5 kt) where the reference reports about +0.5 kt; the
    // gap is the same offset that separates the composed baseline from the
    // headline total.
    assert!(total("Walking juicer") < 0.0 && total("Walking juicer") > -1e6);
    assert!(total("No servicing") < 0.0 && total("No servicing") > -1e6);
}

#[test]
fn mix_model_signs() {
    let (alpha, beta) = mix_model(&paris().baseline(None).unwrap()).unwrap();
    assert!(alpha > 0.0, "the shift emits with carbon-free power");
    assert!(beta < 0.0, "the shift saves electricity on net");
}

#[test]
fn hma_plant_inventory_dot_product() {
    let flows = read_flows(&data_dir().join("paris-2019/lci/hma_plant.csv")).unwrap();
    assert_eq!(flows.len(), 14);
    let factors: IndexMap<String, f64> = [
        ("electricity, medium voltage", 0.0636),
        ("heat, light fuel oil, at boiler 100kW", 0.3),
        ("heat, lignite briquette, at stove 5-15kW", 0.4),
        ("heat, natural gas, at industrial furnace >100kW", 0.25),
        ("heat, light fuel oil, at industrial furnace 1MW", 0.3),
        ("heavy fuel oil, burned in refinery furnace", 0.3),
        ("tap water", 3e-4),
        ("wastewater, average", 0.5),
        ("Water, well, in ground", 0.0),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    // 7.25·0.0636 + 2.08·0.3 + 0.7·0.4 + 47.6·0.25 + 1.4·0.3 + 21·0.3
    // + 700·3e-4 + 2.32e-3·0.5, worked by hand.
    let want = 20.19626;
    let audit = inventory_impact(&flows, &factors, FactorCoverage::Audit).unwrap();
    assert!(rel(audit.total, want) < 1e-12);
    assert_eq!(audit.missing.len(), 5);
    assert!(matches!(
        inventory_impact(&flows, &factors, FactorCoverage::Strict),
        Err(Error::MissingFlowFactors(m)) if m.len() == 5
    ));
}

#[test]
fn ffes_inventory_keeps_waste_flows_negative() {
    let flows = read_flows(&data_dir().join("paris-2019/lci/ffes.csv")).unwrap();
    assert_eq!(flows.len(), 25);
    assert_eq!(flows.get("used Li-ion battery"), -1.159);
    assert_eq!(flows.get("battery cell, Li-ion"), 1.159);
    assert_eq!(flows.iter().filter(|(_, v)| *v < 0.0).count(), 4);
}

#[test]
fn survey_sums_fixture_is_the_published_column() {
    let sums = read_survey_sums(&data_dir().join("paris-2019/survey_sums.csv")).unwrap();
    assert_eq!(sums.len(), 13);
    assert_eq!(sums["ffes"], 9.73e4);
    assert_eq!(sums["metro"], -7.88e4);
}

fn copy_project(edit: impl Fn(&str, String) -> String) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(data_dir().join("paris-2019")).unwrap() {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            let name = entry.file_name().into_string().unwrap();
            let text = std::fs::read_to_string(entry.path()).unwrap();
            std::fs::write(dir.path().join(&name), edit(&name, text)).unwrap();
        }
    }
    dir
}

#[test]
fn unknown_survey_mode_is_a_link_error() {
    let dir = copy_project(|name, text| {
        if name == "survey_sums.csv" {
            text + "hoverboard,-1.0e2\n"
        } else {
            text
        }
    });
    match Project::load(&dir.path().join("project.toml")) {
        Err(Error::Link(msg)) => assert!(msg.contains("hoverboard"), "{msg}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_mixes_fail_at_use_not_at_load() {
    let dir = copy_project(|name, text| {
        if name == "project.toml" {
            text.replace("mixes = \"mixes.csv\"\n", "mixes = \"absent.csv\"\n")
        } else {
            text
        }
    });
    let project = Project::load(&dir.path().join("project.toml")).unwrap();
    assert!(project.baseline(None).unwrap().assess().is_ok());
    assert!(matches!(project.mixes(), Err(Error::Io { .. })));
}

#[test]
fn schema_errors_point_at_the_cell() {
    let dir = copy_project(|name, text| {
        if name == "traffic.csv" {
            text.replacen("5.48e9", "lots", 1)
        } else {
            text
        }
    });
    match Project::load(&dir.path().join("project.toml")) {
        Err(Error::Schema { file, row, column, .. }) => {
            assert!(file.ends_with("traffic.csv"));
            assert_eq!(row, 13);
            assert_eq!(column, "pkt");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn record_level_project_runs_the_cleaning_pipeline() {
    let project = Project::load(&data_dir().join("synthetic-survey/project.toml")).unwrap();
    let shift = project.shift(None).unwrap();
    let stats = shift.cleaning.unwrap();
    assert_eq!((stats.input, stats.kept), (12, 8));
    assert_eq!(shift.result.fallback_ids, vec!["s12".to_string()]);
    let report = assess(&shift.result.delta, &project.baseline(None).unwrap().factors().unwrap()).unwrap();
    assert!(report.total > 0.0);
}
