//! Annualized material and transport flows of layered street infrastructure,
//! and the flows × factors product used to turn any inventory into an impact.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BINDER: &str = "binder";
pub const GRAVEL: &str = "gravel";
pub const CONCRETE_BLOCK: &str = "concrete_block";
pub const TRUCK_TRANSPORT: &str = "truck_transport";
pub const HMA_MANUFACTURING: &str = "hma_manufacturing";

/// Flow keys of a street inventory with their table labels, in table order.
pub const STREET_FLOWS: [(&str, &str); 5] = [
    (BINDER, "Binder (kg)"),
    (GRAVEL, "Gravel (kg)"),
    (CONCRETE_BLOCK, "Concrete block (kg)"),
    (TRUCK_TRANSPORT, "Truck transportation (tkm)"),
    (HMA_MANUFACTURING, "HMA manufacturing (kg)"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub name: String,
    pub thickness_m: f64,
    /// Metric tons per m³.
    pub density_t_m3: f64,
    /// Mass fraction of bitumen; zero for unbound layers.
    #[serde(default)]
    pub binder_fraction: f64,
    /// Produced in a hot-mix plant.
    #[serde(default)]
    pub hot_mixed: bool,
    pub lifespan_years: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalUnit {
    LinearMeter,
    SquareMeter,
}

impl fmt::Display for FunctionalUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionalUnit::LinearMeter => "1 linear meter over one year",
            FunctionalUnit::SquareMeter => "1 m2 over one year",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curbs {
    pub mass_kg_per_m: f64,
    pub count: u32,
    pub lifespan_years: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreetSpec {
    pub name: String,
    pub functional_unit: FunctionalUnit,
    /// Required for a linear functional unit.
    #[serde(default)]
    pub width_m: Option<f64>,
    #[serde(default, rename = "layer")]
    pub layers: Vec<Layer>,
    #[serde(default)]
    pub curbs: Option<Curbs>,
    pub transport_distance_km: f64,
}

impl StreetSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Input(format!("street `{}`: {msg}", self.name)));
        match (self.functional_unit, self.width_m) {
            (FunctionalUnit::LinearMeter, Some(w)) if w > 0.0 && w.is_finite() => {}
            (FunctionalUnit::LinearMeter, _) => return bad("a linear functional unit needs a width > 0".into()),
            (FunctionalUnit::SquareMeter, _) if self.curbs.is_some() => {
                return bad("curbs are only defined per linear meter".into())
            }
            (FunctionalUnit::SquareMeter, _) => {}
        }
        for layer in &self.layers {
            let positive = [
                ("thickness", layer.thickness_m),
                ("density", layer.density_t_m3),
                ("lifespan", layer.lifespan_years),
            ];
            for (what, v) in positive {
                if !(v.is_finite() && v > 0.0) {
                    return bad(format!("layer `{}`: {what} must be > 0", layer.name));
                }
            }
            if !(0.0..=1.0).contains(&layer.binder_fraction) {
                return bad(format!("layer `{}`: binder fraction must be in [0, 1]", layer.name));
            }
        }
        if let Some(c) = &self.curbs {
            if !(c.mass_kg_per_m >= 0.0 && c.lifespan_years > 0.0) {
                return bad("curbs need a mass >= 0 and a lifespan > 0".into());
            }
        }
        if !(self.transport_distance_km.is_finite() && self.transport_distance_km >= 0.0) {
            return bad("transport distance must be >= 0".into());
        }
        Ok(())
    }
}

/// Named flows per functional unit, in insertion order.
///
/// Life-cycle inventories use negative amounts for waste sent to treatment;
/// the street inventory itself only produces non-negative flows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowVector(IndexMap<String, f64>);

impl FlowVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, flow: impl Into<String>, amount: f64) {
        self.0.insert(flow.into(), amount);
    }

    pub fn get(&self, flow: &str) -> f64 {
        self.0.get(flow).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, f64)> for FlowVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        FlowVector(iter.into_iter().collect())
    }
}

/// Annual mass of one layer per functional unit (kg).
pub fn layer_annual_mass(layer: &Layer, width_m: f64) -> f64 {
    width_m * layer.thickness_m * layer.density_t_m3 * 1000.0 / layer.lifespan_years
}

/// Material, manufacturing and transport flows per functional unit and year.
pub fn annualized_flows(spec: &StreetSpec) -> Result<FlowVector> {
    spec.validate()?;
    let width = match spec.functional_unit {
        FunctionalUnit::LinearMeter => spec.width_m.unwrap_or(1.0),
        FunctionalUnit::SquareMeter => 1.0,
    };
    let (mut binder, mut gravel, mut hma) = (0.0, 0.0, 0.0);
    for layer in &spec.layers {
        let mass = layer_annual_mass(layer, width);
        binder += mass * layer.binder_fraction;
        gravel += mass * (1.0 - layer.binder_fraction);
        if layer.hot_mixed {
            hma += mass;
        }
    }
    let concrete = spec
        .curbs
        .as_ref()
        .map_or(0.0, |c| c.count as f64 * c.mass_kg_per_m / c.lifespan_years);
    let transport = (binder + gravel + concrete) / 1000.0 * spec.transport_distance_km;

    let mut flows = FlowVector::new();
    flows.insert(BINDER, binder);
    flows.insert(GRAVEL, gravel);
    flows.insert(CONCRETE_BLOCK, concrete);
    flows.insert(TRUCK_TRANSPORT, transport);
    flows.insert(HMA_MANUFACTURING, hma);
    Ok(flows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorCoverage {
    /// Every nonzero flow must have a factor.
    Strict,
    /// Flows without a factor are skipped and reported.
    Audit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InventoryImpact {
    pub total: f64,
    pub missing: Vec<String>,
}

/// Σ flow × factor.
pub fn inventory_impact(
    flows: &FlowVector,
    factors: &IndexMap<String, f64>,
    coverage: FactorCoverage,
) -> Result<InventoryImpact> {
    let mut total = 0.0;
    let mut missing = Vec::new();
    for (flow, amount) in flows.iter() {
        match factors.get(flow) {
            Some(f) => total += amount * f,
            None if amount != 0.0 => missing.push(flow.to_string()),
            None => {}
        }
    }
    if coverage == FactorCoverage::Strict && !missing.is_empty() {
        return Err(Error::MissingFlowFactors(missing));
    }
    Ok(InventoryImpact { total, missing })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(thickness: f64, density: f64, binder: f64, hot: bool, life: f64) -> Layer {
        Layer {
            name: "l".into(),
            thickness_m: thickness,
            density_t_m3: density,
            binder_fraction: binder,
            hot_mixed: hot,
            lifespan_years: life,
        }
    }

    #[test]
    fn empty_spec_has_zero_flows() {
        let spec = StreetSpec {
            name: "bare".into(),
            functional_unit: FunctionalUnit::SquareMeter,
            width_m: None,
            layers: vec![],
            curbs: None,
            transport_distance_km: 50.0,
        };
        let flows = annualized_flows(&spec).unwrap();
        assert!(flows.iter().all(|(_, v)| v == 0.0));
        assert_eq!(flows.len(), 5);
    }

    #[test]
    fn bound_layer_mass_is_conserved() {
        let spec = StreetSpec {
            name: "one".into(),
            functional_unit: FunctionalUnit::SquareMeter,
            width_m: None,
            layers: vec![layer(0.04, 2.3, 0.06, true, 15.0)],
            curbs: None,
            transport_distance_km: 50.0,
        };
        let flows = annualized_flows(&spec).unwrap();
        let mass = 0.04 * 2.3 * 1000.0 / 15.0;
        assert!((flows.get(BINDER) + flows.get(GRAVEL) - mass).abs() < 1e-12);
        assert_eq!(flows.get(HMA_MANUFACTURING), mass);
    }

    #[test]
    fn invalid_specs() {
        let mut spec = StreetSpec {
            name: "lane".into(),
            functional_unit: FunctionalUnit::LinearMeter,
            width_m: None,
            layers: vec![],
            curbs: None,
            transport_distance_km: 50.0,
        };
        assert!(annualized_flows(&spec).is_err());
        spec.functional_unit = FunctionalUnit::SquareMeter;
        spec.curbs = Some(Curbs {
            mass_kg_per_m: 54.0,
            count: 2,
            lifespan_years: 20.0,
        });
        assert!(annualized_flows(&spec).is_err());
        spec.curbs = None;
        spec.layers.push(layer(0.1, 2.0, 1.5, false, 10.0));
        assert!(annualized_flows(&spec).is_err());
    }

    #[test]
    fn impact_product() {
        let empty = FlowVector::new();
        assert_eq!(
            inventory_impact(&empty, &IndexMap::new(), FactorCoverage::Strict).unwrap().total,
            0.0
        );
        let flows: FlowVector = [("gravel".to_string(), 2.0)].into_iter().collect();
        let factors: IndexMap<String, f64> = [("gravel".to_string(), 0.5)].into_iter().collect();
        assert_eq!(inventory_impact(&flows, &factors, FactorCoverage::Strict).unwrap().total, 1.0);
    }

    #[test]
    fn missing_factors() {
        let flows: FlowVector = [("gravel".to_string(), 2.0), ("binder".to_string(), 1.0), ("water".to_string(), 0.0)]
            .into_iter()
            .collect();
        let factors: IndexMap<String, f64> = [("gravel".to_string(), 0.5)].into_iter().collect();
        match inventory_impact(&flows, &factors, FactorCoverage::Strict) {
            Err(Error::MissingFlowFactors(m)) => assert_eq!(m, vec!["binder".to_string()]),
            other => panic!("{other:?}"),
        }
        let audit = inventory_impact(&flows, &factors, FactorCoverage::Audit).unwrap();
        assert_eq!(audit.total, 1.0);
        assert_eq!(audit.missing, vec!["binder".to_string()]);
    }
}
