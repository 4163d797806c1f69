//! Infrastructure stage of the emission factor.
//!
//! The annual impact of a whole network (`q_j · EF_1u,j`) is split between the
//! traffic classes using it in proportion to their weighted vehicle-kilometers
//! (`a_ij = b_ij·VKT_ij / Σ_i b_ij·VKT_ij`) and brought back to one
//! passenger-kilometer by dividing by the class's `PKT_ij`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::{ModeId, TrafficClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InfraUnit {
    LinearMeter,
    SquareMeter,
}

impl fmt::Display for InfraUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InfraUnit::LinearMeter => "linear-meter",
            InfraUnit::SquareMeter => "square-meter",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfrastructureAsset {
    pub infra_id: String,
    pub unit: InfraUnit,
    /// Number of units in the network.
    pub quantity: f64,
    /// kgCO₂eq per unit and year.
    pub ef_per_unit_year: f64,
}

impl InfrastructureAsset {
    pub fn new(infra_id: impl Into<String>, unit: InfraUnit, quantity: f64, ef_per_unit_year: f64) -> Result<Self> {
        let a = InfrastructureAsset {
            infra_id: infra_id.into(),
            unit,
            quantity,
            ef_per_unit_year,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.quantity.is_finite() && self.quantity > 0.0) {
            return Err(Error::Input(format!("{}: quantity must be > 0", self.infra_id)));
        }
        if !(self.ef_per_unit_year.is_finite() && self.ef_per_unit_year >= 0.0) {
            return Err(Error::Input(format!("{}: unit impact must be >= 0", self.infra_id)));
        }
        Ok(())
    }
}

/// Annual impact of the entire network (kgCO₂eq/yr).
pub fn network_annual_impact(asset: &InfrastructureAsset) -> f64 {
    asset.quantity * asset.ef_per_unit_year
}

/// Yearly traffic of one class on one infrastructure type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficRecord {
    #[serde(rename = "mode")]
    pub class: TrafficClass,
    pub infra: String,
    pub pkt: f64,
    pub vkt: f64,
    /// Allocation weight `b_ij`.
    pub weight: f64,
    pub year: i32,
}

impl TrafficRecord {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("pkt", self.pkt), ("vkt", self.vkt), ("weight", self.weight)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Input(format!(
                    "traffic {} on {} ({}): {name} must be >= 0",
                    self.class, self.infra, self.year
                )));
            }
        }
        Ok(())
    }

    fn weighted_vkt(&self) -> f64 {
        self.weight * self.vkt
    }
}

/// Shares `a_ij` of every record on one infrastructure, in input order.
///
/// All records must concern the same infrastructure and year.
pub fn allocation_shares<'a>(records: &[&'a TrafficRecord]) -> Result<Vec<(&'a TrafficRecord, f64)>> {
    let infra = records.first().map(|r| r.infra.clone()).unwrap_or_default();
    let denominator: f64 = records.iter().map(|r| r.weighted_vkt()).sum();
    if !(denominator > 0.0) {
        return Err(Error::DegenerateInfrastructure(infra));
    }
    Ok(records
        .iter()
        .map(|r| (*r, r.weighted_vkt() / denominator))
        .collect())
}

/// One infrastructure's contribution to a mode's factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfraContribution {
    pub infra: String,
    pub class: TrafficClass,
    pub share: f64,
    pub pkt: f64,
    /// `a_ij / PKT_ij`, the per-pkt fraction of the network impact.
    pub allocation_factor: f64,
    /// kgCO₂eq/pkt.
    pub ef: f64,
}

/// Per-infrastructure breakdown of a mode's infrastructure factor.
///
/// `traffic` is the table of a single analysis year. Records with a zero
/// share (for instance microvehicles on roadways) contribute nothing.
pub fn infra_breakdown(
    mode: &ModeId,
    assets: &[InfrastructureAsset],
    traffic: &[TrafficRecord],
) -> Result<Vec<InfraContribution>> {
    let mut out = Vec::new();
    for record in traffic.iter().filter(|r| r.class.contains(mode)) {
        let on_infra: Vec<&TrafficRecord> = traffic.iter().filter(|r| r.infra == record.infra).collect();
        let share = allocation_shares(&on_infra)?
            .into_iter()
            .find(|(r, _)| std::ptr::eq(*r, record))
            .map(|(_, s)| s)
            .expect("record is part of its own infrastructure");
        if share == 0.0 {
            continue;
        }
        if !(record.pkt > 0.0) {
            return Err(Error::Domain(format!(
                "`{mode}` is allocated part of `{}` but carries no passenger-km on it",
                record.infra
            )));
        }
        let asset = assets
            .iter()
            .find(|a| a.infra_id == record.infra)
            .ok_or_else(|| Error::Link(format!("traffic refers to unknown infrastructure `{}`", record.infra)))?;
        let allocation_factor = share / record.pkt;
        out.push(InfraContribution {
            infra: record.infra.clone(),
            class: record.class.clone(),
            share,
            pkt: record.pkt,
            allocation_factor,
            ef: allocation_factor * network_annual_impact(asset),
        });
    }
    Ok(out)
}

/// Infrastructure factor of a mode (kgCO₂eq/pkt).
pub fn infra_ef_per_pkt(mode: &ModeId, assets: &[InfrastructureAsset], traffic: &[TrafficRecord]) -> Result<f64> {
    Ok(infra_breakdown(mode, assets, traffic)?.iter().map(|c| c.ef).sum())
}

/// Traffic records of one year.
pub fn traffic_for_year(traffic: &[TrafficRecord], year: i32) -> Vec<TrafficRecord> {
    traffic.iter().filter(|r| r.year == year).cloned().collect()
}
