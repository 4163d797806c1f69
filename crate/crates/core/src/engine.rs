//! Marginal territorial impact of a modal shift: `ei_i = EF_i · ΔPKT_i`.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::ModeId;
use crate::mode_factors::{EmissionFactor, FactorTable, Stage};
use crate::survey_shift::DeltaPkt;

/// One value per life-cycle stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageValues {
    pub vehicle: f64,
    #[serde(rename = "use")]
    pub use_stage: f64,
    pub servicing: f64,
    pub infrastructure: f64,
}

impl StageValues {
    pub fn get(&self, stage: Stage) -> f64 {
        match stage {
            Stage::Vehicle => self.vehicle,
            Stage::Use => self.use_stage,
            Stage::Servicing => self.servicing,
            Stage::Infrastructure => self.infrastructure,
        }
    }

    fn get_mut(&mut self, stage: Stage) -> &mut f64 {
        match stage {
            Stage::Vehicle => &mut self.vehicle,
            Stage::Use => &mut self.use_stage,
            Stage::Servicing => &mut self.servicing,
            Stage::Infrastructure => &mut self.infrastructure,
        }
    }

    pub fn sum(&self) -> f64 {
        Stage::ALL.iter().map(|s| self.get(*s)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeLine {
    pub mode: ModeId,
    pub delta_pkt: f64,
    pub factor: EmissionFactor,
    /// kgCO₂eq over the period, signed.
    pub marginal: f64,
    /// Signed contribution of each stage; sums to `marginal`.
    pub stages: StageValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub scenario: String,
    pub population: f64,
    pub period: String,
    pub lines: Vec<ModeLine>,
    /// Σ of the per-mode marginal impacts (kgCO₂eq).
    pub total: f64,
    /// Σ over modes of the absolute stage contributions.
    pub stage_absolute: StageValues,
}

impl MarginalReport {
    pub fn with_scenario(mut self, name: impl Into<String>) -> Self {
        self.scenario = name.into();
        self
    }

    pub fn line(&self, mode: &ModeId) -> Option<&ModeLine> {
        self.lines.iter().find(|l| &l.mode == mode)
    }

    fn from_lines(population: f64, lines: Vec<ModeLine>) -> Self {
        let total = lines.iter().map(|l| l.marginal).sum();
        let mut stage_absolute = StageValues::default();
        for line in &lines {
            for stage in Stage::ALL {
                *stage_absolute.get_mut(stage) += line.stages.get(stage).abs();
            }
        }
        MarginalReport {
            scenario: "baseline".into(),
            population,
            period: "year".into(),
            lines,
            total,
            stage_absolute,
        }
    }
}

fn factor_for<'a>(factors: &'a FactorTable, mode: &ModeId) -> Result<&'a EmissionFactor> {
    factors.get(mode).ok_or_else(|| Error::MissingFactor(mode.to_string()))
}

/// Marginal impact of a shift under constant emission factors.
pub fn assess(delta: &DeltaPkt, factors: &FactorTable) -> Result<MarginalReport> {
    let mut lines = Vec::with_capacity(delta.len());
    for (mode, dpkt) in delta.iter() {
        let factor = factor_for(factors, mode)?;
        let mut stages = StageValues::default();
        for stage in Stage::ALL {
            *stages.get_mut(stage) = factor.stage(stage) * dpkt;
        }
        lines.push(ModeLine {
            mode: mode.clone(),
            delta_pkt: dpkt,
            factor: factor.clone(),
            marginal: factor.total * dpkt,
            stages,
        });
    }
    Ok(MarginalReport::from_lines(delta.population(), lines))
}

/// Marginal impact when the factors themselves change with the disruption:
/// `ei_i = EF'_i · (PKT_i + ΔPKT_i) − EF_i · PKT_i`.
///
/// `reference_pkt` holds the pre-disruption traffic per mode (absent means
/// zero). Lines carry the post-disruption factor.
pub fn assess_with_factor_change(
    reference_pkt: &IndexMap<ModeId, f64>,
    delta: &DeltaPkt,
    before: &FactorTable,
    after: &FactorTable,
) -> Result<MarginalReport> {
    let mut lines = Vec::with_capacity(delta.len());
    for (mode, dpkt) in delta.iter() {
        let old = factor_for(before, mode)?;
        let new = factor_for(after, mode)?;
        let pkt = reference_pkt.get(mode).copied().unwrap_or(0.0);
        let pkt_after = pkt + dpkt;
        if pkt_after < 0.0 {
            return Err(Error::Domain(format!(
                "`{mode}` would end with negative traffic ({pkt_after:e} pkt)"
            )));
        }
        let mut stages = StageValues::default();
        for stage in Stage::ALL {
            *stages.get_mut(stage) = new.stage(stage) * pkt_after - old.stage(stage) * pkt;
        }
        lines.push(ModeLine {
            mode: mode.clone(),
            delta_pkt: dpkt,
            factor: new.clone(),
            marginal: new.total * pkt_after - old.total * pkt,
            stages,
        });
    }
    Ok(MarginalReport::from_lines(delta.population(), lines))
}

/// Fractions of the absolute marginal emissions by stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageShares {
    pub vehicle: f64,
    #[serde(rename = "use")]
    pub use_stage: f64,
    pub servicing: f64,
    pub infrastructure: f64,
}

impl StageShares {
    /// Use and servicing together, for three-stage presentations that count
    /// fleet logistics as part of operating the vehicle.
    pub fn use_including_servicing(&self) -> f64 {
        self.use_stage + self.servicing
    }
}

pub fn stage_shares(report: &MarginalReport) -> Result<StageShares> {
    let abs = &report.stage_absolute;
    let denominator = abs.sum();
    if !(denominator > 0.0) {
        return Err(Error::UndefinedShare);
    }
    Ok(StageShares {
        vehicle: abs.vehicle / denominator,
        use_stage: abs.use_stage / denominator,
        servicing: abs.servicing / denominator,
        infrastructure: abs.infrastructure / denominator,
    })
}
