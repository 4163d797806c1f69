//! Fixture loading, independent oracles and generators shared by the
//! integration suites.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use proptest::prelude::*;

use clca::infra_allocation::TrafficRecord;
use clca::mode_factors::FactorTable;
use clca::project::Project;
use clca::survey_shift::{KinematicsTable, ModeKinematics};
use clca::{DeltaPkt, FrequencyClass, ModeId, SurveyRecord, TrafficClass};

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn paris() -> Project {
    Project::load(&data_dir().join("paris-2019").join("project.toml")).expect("paris-2019 loads")
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Prints the verdict line of an acceptance criterion and fails the test on
/// any failed check.
pub fn verdict(criterion: u32, title: &str, checks: &[(String, bool)]) {
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(d, _)| d.as_str()).collect();
    if failed.is_empty() {
        println!("PASS criterion {criterion}: {title}");
    } else {
        println!("FAIL criterion {criterion}: {title}: {}", failed.join("; "));
    }
    for (detail, ok) in checks {
        println!("    [{}] {detail}", if *ok { "ok" } else { "--" });
    }
    assert!(failed.is_empty(), "criterion {criterion} failed: {}", failed.join("; "));
}

pub fn within(label: &str, got: f64, want: f64, tol: f64) -> (String, bool) {
    let r = rel(got, want);
    (format!("{label}: {got:.4e} vs {want:.4e} (rel {r:.3}, tol {tol})"), r <= tol)
}

pub fn within_abs(label: &str, got: f64, want: f64, tol: f64) -> (String, bool) {
    let d = (got - want).abs();
    (format!("{label}: {got:.4} vs {want:.4} (diff {d:.4}, tol {tol})"), d <= tol)
}

// ---- independent oracles ----

/// Rides per year of a frequency answer, `None` when excluded.
pub fn oracle_weight(f: FrequencyClass) -> Option<f64> {
    match f.label() {
        "more than 5 times a week" => Some(312.0),
        "4 to 5 times a week" => Some(234.0),
        "two to three times a week" => Some(130.0),
        "once a week" => Some(52.0),
        "less than once a week" => Some(15.0),
        _ => None,
    }
}

/// Population-scaled shift computed term by term: for every mode `j`,
/// `N/n · Σ_i (δ(j, ffes)·d_ffes,i − δ(j, om_i)·d_om,i)·WF_i`.
pub fn brute_force_shift(
    records: &[SurveyRecord],
    population: f64,
    v_walk: f64,
    kin: &[(&str, f64, f64)],
    disruptive: &str,
) -> IndexMap<String, f64> {
    let mut modes: Vec<String> = vec![disruptive.to_string()];
    for r in records {
        if let Some(m) = &r.original_mode {
            if !modes.contains(&m.to_string()) {
                modes.push(m.to_string());
            }
        }
    }
    let n = records.len() as f64;
    let mut out = IndexMap::new();
    for j in &modes {
        let mut sum = 0.0;
        for r in records {
            let wf = oracle_weight(r.frequency).unwrap();
            let d_ffes = r.trip_distance_km - v_walk * r.access_walk_min / 60.0;
            if j == disruptive {
                sum += d_ffes * wf;
            }
            if r.original_mode.as_ref().map(|m| m.as_str()) == Some(j.as_str()) {
                let &(_, v, access_m) = kin.iter().find(|k| k.0 == j).unwrap();
                let residual_h = r.original_duration_min / 60.0 - access_m / 1000.0 / v_walk;
                let d_om = if residual_h > 0.0 { v * residual_h } else { d_ffes };
                sum -= d_om * wf;
            }
        }
        out.insert(j.clone(), population / n * sum);
    }
    out
}

pub fn naive_total(delta: &DeltaPkt, factors: &FactorTable) -> f64 {
    let mut total = 0.0;
    for (mode, dpkt) in delta.iter() {
        total += factors[mode].total * dpkt;
    }
    total
}

// ---- generators ----

pub const KINEMATICS: [(&str, f64, f64); 5] = [
    ("walk", 4.7, 0.0),
    ("personal-car", 15.0, 0.0),
    ("bus", 12.5, 400.0),
    ("metro", 30.0, 1200.0),
    ("rer", 49.5, 1200.0),
];

pub fn kinematics_table() -> KinematicsTable {
    KinematicsTable::new(
        KINEMATICS
            .iter()
            .map(|&(m, v, a)| ModeKinematics::new(ModeId::new(m), v, a).unwrap()),
    )
}

pub fn weighted_frequency() -> impl Strategy<Value = FrequencyClass> {
    prop::sample::select(vec![
        FrequencyClass::MoreThanFivePerWeek,
        FrequencyClass::FourToFivePerWeek,
        FrequencyClass::TwoToThreePerWeek,
        FrequencyClass::OncePerWeek,
        FrequencyClass::LessThanOncePerWeek,
    ])
}

pub fn any_frequency() -> impl Strategy<Value = FrequencyClass> {
    prop::sample::select(FrequencyClass::ALL.to_vec())
}

/// Records that survive cleaning: weighted, single-mode, at most 30 km/h and
/// with a positive ridden distance.
pub fn clean_record() -> impl Strategy<Value = SurveyRecord> {
    (
        weighted_frequency(),
        prop::option::weighted(0.9, prop::sample::select(KINEMATICS.iter().map(|k| k.0).collect::<Vec<_>>())),
        1.0..90.0f64,
        0.0..5.0f64,
        0.5..10.0f64,
        0.0..40.0f64,
    )
        .prop_map(|(frequency, mode, orig_min, walk_min, d, extra_min)| SurveyRecord {
            id: String::new(),
            frequency,
            original_mode: mode.map(ModeId::new),
            original_duration_min: if mode.is_some() { orig_min } else { 0.0 },
            access_walk_min: walk_min,
            trip_distance_km: d,
            trip_duration_min: d * 2.0 + 0.1 + extra_min,
            intermodal: false,
        })
}

pub fn numbered(mut records: Vec<SurveyRecord>) -> Vec<SurveyRecord> {
    for (i, r) in records.iter_mut().enumerate() {
        r.id = format!("r{i}");
    }
    records
}

/// Arbitrary well-formed records, including ones cleaning must drop.
pub fn raw_record() -> impl Strategy<Value = SurveyRecord> {
    (
        any_frequency(),
        prop::option::of(prop::sample::select(KINEMATICS.iter().map(|k| k.0).collect::<Vec<_>>())),
        0.0..90.0f64,
        0.0..15.0f64,
        0.0..15.0f64,
        0.0..60.0f64,
        any::<bool>(),
    )
        .prop_map(|(frequency, mode, orig_min, walk_min, d, dur, intermodal)| SurveyRecord {
            id: String::new(),
            frequency,
            original_mode: mode.map(ModeId::new),
            original_duration_min: orig_min,
            access_walk_min: walk_min,
            trip_distance_km: d,
            trip_duration_min: dur,
            intermodal,
        })
}

/// Traffic of 1 to 8 classes on one infrastructure, at least one with a
/// positive weighted VKT.
pub fn traffic_on_one_infra() -> impl Strategy<Value = Vec<TrafficRecord>> {
    prop::collection::vec((1e3..1e10f64, 0.0..5.0f64), 1..8)
        .prop_filter("some weighted traffic", |v| v.iter().any(|(vkt, w)| vkt * w > 0.0))
        .prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (vkt, weight))| TrafficRecord {
                    class: TrafficClass::single(ModeId::new(format!("m{i}"))),
                    infra: "road".into(),
                    pkt: vkt,
                    vkt,
                    weight,
                    year: 2018,
                })
                .collect()
        })
}
