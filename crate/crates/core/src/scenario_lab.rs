//! One-at-a-time sensitivity sweeps and break-even solvers.
//!
//! Every sweep starts from a [`Baseline`]: the modal shift plus everything
//! needed to recompose the emission factors. A [`Scenario`] overrides one or
//! more inputs (disruptive-mode lifetime mileage, its servicing logistics,
//! the electricity mix of all electrified modes, the user population) and the
//! assessment is rerun. Sweep points are independent and evaluated in
//! parallel; results keep the input order.

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{assess, MarginalReport};
use crate::error::{Error, Result};
use crate::mode::ModeId;
use crate::mode_factors::{
    compose, servicing_ef_per_pkt, ElectricityMix, FactorTable, ModeProfile, ServicingScenario,
};
use crate::survey_shift::DeltaPkt;

/// Lower and upper ends of the default lifetime-mileage grid (km).
pub const DEFAULT_LIFETIME_RANGE_KM: (f64, f64) = (300.0, 15_000.0);

/// Inputs for one mode of the baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeInputs {
    pub profile: ModeProfile,
    pub servicing: Option<ServicingScenario>,
    /// Infrastructure factor (kgCO₂eq/pkt) for the analysis year.
    pub infrastructure: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Overrides {
    pub lifetime_km: Option<f64>,
    pub servicing: Option<ServicingScenario>,
    pub mix: Option<ElectricityMix>,
    pub population: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub overrides: Overrides,
}

impl Scenario {
    pub fn new(name: impl Into<String>, overrides: Overrides) -> Result<Self> {
        let name = name.into();
        let o = &overrides;
        if o.lifetime_km.is_none() && o.servicing.is_none() && o.mix.is_none() && o.population.is_none() {
            return Err(Error::Input(format!("scenario `{name}` overrides nothing")));
        }
        if let Some(l) = o.lifetime_km {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Domain(format!("lifetime mileage must be > 0, got {l}")));
            }
        }
        if let Some(s) = &o.servicing {
            s.validate()?;
        }
        if let Some(m) = &o.mix {
            ElectricityMix::new(m.code.clone(), m.intensity_kg_kwh)?;
        }
        if let Some(p) = o.population {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::Domain(format!("population must be > 0, got {p}")));
            }
        }
        Ok(Scenario { name, overrides })
    }

    pub fn lifetime(km: f64) -> Result<Self> {
        Scenario::new(
            format!("lifetime {km} km"),
            Overrides {
                lifetime_km: Some(km),
                ..Default::default()
            },
        )
    }

    pub fn servicing(s: ServicingScenario) -> Result<Self> {
        Scenario::new(
            s.name.clone(),
            Overrides {
                servicing: Some(s),
                ..Default::default()
            },
        )
    }

    pub fn mix(mix: ElectricityMix) -> Result<Self> {
        Scenario::new(
            format!("mix {}", mix.code),
            Overrides {
                mix: Some(mix),
                ..Default::default()
            },
        )
    }

    pub fn population(population: f64) -> Result<Self> {
        Scenario::new(
            format!("population {population}"),
            Overrides {
                population: Some(population),
                ..Default::default()
            },
        )
    }
}

/// The reference assessment every scenario is compared against.
#[derive(Debug, Clone, PartialEq)]
pub struct Baseline {
    pub delta: DeltaPkt,
    pub modes: IndexMap<ModeId, ModeInputs>,
    pub mix: ElectricityMix,
}

impl Baseline {
    pub fn new(delta: DeltaPkt, modes: impl IntoIterator<Item = ModeInputs>, mix: ElectricityMix) -> Result<Self> {
        let modes: IndexMap<ModeId, ModeInputs> =
            modes.into_iter().map(|m| (m.profile.mode.clone(), m)).collect();
        for (mode, _) in delta.iter() {
            if !modes.contains_key(mode) {
                return Err(Error::MissingFactor(mode.to_string()));
            }
        }
        Ok(Baseline { delta, modes, mix })
    }

    pub fn disruptive_mode(&self) -> &ModeId {
        self.delta.disruptive_mode()
    }

    fn disruptive_inputs(&self) -> Result<&ModeInputs> {
        let mode = self.disruptive_mode();
        self.modes
            .get(mode)
            .ok_or_else(|| Error::MissingFactor(mode.to_string()))
    }

    /// Factor table with the scenario's overrides applied.
    pub fn factors_under(&self, overrides: &Overrides) -> Result<FactorTable> {
        let mix = overrides.mix.as_ref().unwrap_or(&self.mix);
        let disruptive = self.disruptive_mode();
        let mut table = FactorTable::with_capacity(self.modes.len());
        for (mode, inputs) in &self.modes {
            let mut profile = inputs.profile.clone();
            let mut servicing = inputs.servicing.as_ref();
            if mode == disruptive {
                if let Some(l) = overrides.lifetime_km {
                    let vehicle = profile.vehicle.as_ref().ok_or_else(|| {
                        Error::Config(format!("`{mode}` has no vehicle profile to change the lifetime of"))
                    })?;
                    profile.vehicle = Some(vehicle.with_lifetime(l)?);
                }
                if let Some(s) = &overrides.servicing {
                    servicing = Some(s);
                }
            }
            table.insert(mode.clone(), profile.compose(servicing, mix, inputs.infrastructure)?);
        }
        Ok(table)
    }

    pub fn factors(&self) -> Result<FactorTable> {
        self.factors_under(&Overrides::default())
    }

    pub fn delta_under(&self, overrides: &Overrides) -> Result<DeltaPkt> {
        match overrides.population {
            Some(p) => self.delta.rescaled(p),
            None => Ok(self.delta.clone()),
        }
    }

    pub fn assess(&self) -> Result<MarginalReport> {
        assess(&self.delta, &self.factors()?)
    }

    pub fn evaluate(&self, scenario: &Scenario) -> Result<MarginalReport> {
        let factors = self.factors_under(&scenario.overrides)?;
        let delta = self.delta_under(&scenario.overrides)?;
        Ok(assess(&delta, &factors)?.with_scenario(scenario.name.clone()))
    }
}

/// Closed-form description of how the total depends on the swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Fit {
    /// `total = c0 + c1 / parameter`
    Reciprocal { c0: f64, c1: f64 },
    /// `total = alpha + beta * parameter`
    Affine { alpha: f64, beta: f64 },
}

impl Fit {
    pub fn predict(&self, x: f64) -> f64 {
        match *self {
            Fit::Reciprocal { c0, c1 } => c0 + c1 / x,
            Fit::Affine { alpha, beta } => alpha + beta * x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub label: String,
    pub parameter: f64,
    pub total_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Name and unit of the swept parameter.
    pub parameter: String,
    pub points: Vec<SweepPoint>,
    pub fit: Fit,
}

impl SweepResult {
    pub fn totals(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.total_kg).collect()
    }
}

fn run_points(baseline: &Baseline, scenarios: Vec<(Scenario, f64)>) -> Result<Vec<SweepPoint>> {
    scenarios
        .into_par_iter()
        .map(|(scenario, parameter)| {
            let report = baseline.evaluate(&scenario)?;
            Ok(SweepPoint {
                label: scenario.name,
                parameter,
                total_kg: report.total,
            })
        })
        .collect()
}

/// `n` log-spaced values over `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

pub fn default_lifetime_grid() -> Vec<f64> {
    log_grid(DEFAULT_LIFETIME_RANGE_KM.0, DEFAULT_LIFETIME_RANGE_KM.1, 25)
}

/// Totals for each lifetime mileage of the disruptive mode's vehicle.
///
/// The vehicle's life-cycle impact is held fixed, so the total follows
/// `c0 + c1 / L` exactly with `c1 = EF_1veh / occupancy · ΔPKT`.
pub fn sweep_lifetime(baseline: &Baseline, grid: &[f64]) -> Result<SweepResult> {
    let inputs = baseline.disruptive_inputs()?;
    let vehicle = inputs.profile.vehicle.as_ref().ok_or_else(|| {
        Error::Config(format!("`{}` has no vehicle profile", baseline.disruptive_mode()))
    })?;
    let scenarios = grid
        .iter()
        .map(|&l| Scenario::lifetime(l).map(|s| (s, l)))
        .collect::<Result<Vec<_>>>()?;
    let points = run_points(baseline, scenarios)?;

    let c1 = vehicle.ef_one_vehicle_kg / vehicle.occupancy * baseline.delta.gained();
    let c0 = baseline.assess()?.total - c1 / vehicle.lifetime_km;
    Ok(SweepResult {
        parameter: "lifetime_km".into(),
        points,
        fit: Fit::Reciprocal { c0, c1 },
    })
}

/// Totals for each servicing scenario of the disruptive mode.
///
/// The parameter is the resulting servicing factor (kgCO₂eq/pkt); the total
/// is affine in it with slope ΔPKT of the disruptive mode.
pub fn sweep_servicing(baseline: &Baseline, scenarios: &[ServicingScenario]) -> Result<SweepResult> {
    let runs = scenarios
        .iter()
        .map(|s| Ok((Scenario::servicing(s.clone())?, servicing_ef_per_pkt(s)?)))
        .collect::<Result<Vec<_>>>()?;
    let points = run_points(baseline, runs)?;

    let beta = baseline.delta.gained();
    let current = match &baseline.disruptive_inputs()?.servicing {
        Some(s) => servicing_ef_per_pkt(s)?,
        None => 0.0,
    };
    let alpha = baseline.assess()?.total - beta * current;
    Ok(SweepResult {
        parameter: "servicing_kg_pkt".into(),
        points,
        fit: Fit::Affine { alpha, beta },
    })
}

/// Affine model of the total in the electricity intensity:
/// `alpha` is the total with carbon-free electricity, `beta` the net change
/// in electricity consumption (kWh) caused by the shift.
pub fn mix_model(baseline: &Baseline) -> Result<(f64, f64)> {
    let zero = ElectricityMix::new("zero-carbon", 0.0)?;
    let alpha = assess(&baseline.delta, &baseline.factors_under(&Overrides {
        mix: Some(zero),
        ..Default::default()
    })?)?
    .total;
    let beta = baseline
        .delta
        .iter()
        .map(|(mode, dpkt)| baseline.modes[mode].profile.use_profile.electricity_kwh_pkt * dpkt)
        .sum();
    Ok((alpha, beta))
}

/// Totals for each electricity mix, applied to every electrified mode.
pub fn sweep_mix(baseline: &Baseline, mixes: &[ElectricityMix]) -> Result<SweepResult> {
    let runs = mixes
        .iter()
        .map(|m| Ok((Scenario::mix(m.clone())?, m.intensity_kg_kwh)))
        .collect::<Result<Vec<_>>>()?;
    let mut points = run_points(baseline, runs)?;
    for (point, mix) in points.iter_mut().zip(mixes) {
        point.label = mix.code.clone();
    }
    let (alpha, beta) = mix_model(baseline)?;
    Ok(SweepResult {
        parameter: "intensity_kg_kwh".into(),
        points,
        fit: Fit::Affine { alpha, beta },
    })
}

/// Where the disruption changes sign as the electricity gets dirtier or
/// cleaner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "intensity_kg_kwh", rename_all = "snake_case")]
pub enum MixBreakEven {
    /// The shift lowers emissions for intensities above the value.
    ImprovesAbove(f64),
    /// The shift lowers emissions for intensities below the value.
    ImprovesBelow(f64),
    /// Emissions grow with intensity and are already positive at zero: no
    /// non-negative intensity makes the shift beneficial.
    NoPositiveIntensity,
}

impl MixBreakEven {
    pub fn intensity(&self) -> Option<f64> {
        match *self {
            MixBreakEven::ImprovesAbove(x) | MixBreakEven::ImprovesBelow(x) => Some(x),
            MixBreakEven::NoPositiveIntensity => None,
        }
    }
}

/// Root `-alpha / beta` of a mix model.
pub fn break_even_from_model(alpha: f64, beta: f64) -> Result<MixBreakEven> {
    if beta == 0.0 {
        return Err(Error::NoBreakEven(
            "the shift does not change electricity consumption".into(),
        ));
    }
    let root = -alpha / beta;
    Ok(if beta < 0.0 {
        MixBreakEven::ImprovesAbove(root)
    } else if root > 0.0 {
        MixBreakEven::ImprovesBelow(root)
    } else {
        MixBreakEven::NoPositiveIntensity
    })
}

pub fn break_even_mix(baseline: &Baseline) -> Result<MixBreakEven> {
    let (alpha, beta) = mix_model(baseline)?;
    break_even_from_model(alpha, beta)
}

/// Emission factor of the disruptive mode that would make the shift neutral.
pub fn break_even_disruptive_ef(delta: &DeltaPkt, factors: &FactorTable) -> Result<f64> {
    let gained = delta.gained();
    if !(gained > 0.0) {
        return Err(Error::Domain(format!(
            "`{}` gains no kilometers, so no factor can balance the shift",
            delta.disruptive_mode()
        )));
    }
    let mut avoided = 0.0;
    for (mode, dpkt) in delta.iter() {
        if mode == delta.disruptive_mode() {
            continue;
        }
        let f = factors.get(mode).ok_or_else(|| Error::MissingFactor(mode.to_string()))?;
        avoided -= f.total * dpkt;
    }
    Ok(avoided / gained)
}

pub fn break_even_ffes_ef(baseline: &Baseline) -> Result<f64> {
    break_even_disruptive_ef(&baseline.delta, &baseline.factors()?)
}

/// Replaces the disruptive mode's factor by a single-stage factor of the
/// given total. Used to check a break-even value.
pub fn with_disruptive_total(delta: &DeltaPkt, factors: &FactorTable, total: f64) -> Result<FactorTable> {
    let mut out = factors.clone();
    let mode = delta.disruptive_mode().clone();
    out.insert(mode.clone(), compose(mode, total, 0.0, 0.0, 0.0)?);
    Ok(out)
}
