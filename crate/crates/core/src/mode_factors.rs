//! Per-passenger-kilometer emission factors by life-cycle stage.
//!
//! A mode's factor is the sum of four stages, each in kgCO₂eq/pkt:
//! vehicle (manufacture, maintenance and end of life spread over the lifetime
//! mileage and occupancy), use (exhaust, fuel supply chain, electricity),
//! servicing (collection and rebalancing of shared vehicles) and
//! infrastructure (see [`crate::infra_allocation`]).

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::ModeId;

/// Kilometers ridden per shared vehicle and day when no other figure is given.
pub const DEFAULT_UNIT_DAILY_MILEAGE_KM: f64 = 11.0;

fn non_negative(what: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Input(format!("{what} must be a finite value >= 0, got {value}")))
    }
}

fn positive(what: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be > 0, got {value}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleProfile {
    pub mode: ModeId,
    /// Life-cycle impact of one vehicle, use stage excluded (kgCO₂eq).
    pub ef_one_vehicle_kg: f64,
    /// Vehicle-kilometers over the vehicle's life.
    pub lifetime_km: f64,
    /// Passengers per vehicle.
    pub occupancy: f64,
}

impl VehicleProfile {
    pub fn new(mode: ModeId, ef_one_vehicle_kg: f64, lifetime_km: f64, occupancy: f64) -> Result<Self> {
        let p = VehicleProfile {
            mode,
            ef_one_vehicle_kg,
            lifetime_km,
            occupancy,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        non_negative(&format!("{}: ef_one_vehicle", self.mode), self.ef_one_vehicle_kg)?;
        positive(&format!("{}: lifetime mileage", self.mode), self.lifetime_km)?;
        positive(&format!("{}: occupancy", self.mode), self.occupancy)
    }

    pub fn with_lifetime(&self, lifetime_km: f64) -> Result<Self> {
        VehicleProfile::new(self.mode.clone(), self.ef_one_vehicle_kg, lifetime_km, self.occupancy)
    }
}

pub fn vehicle_ef_per_pkt(p: &VehicleProfile) -> Result<f64> {
    p.validate()?;
    Ok(p.ef_one_vehicle_kg / (p.lifetime_km * p.occupancy))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UseProfile {
    pub mode: ModeId,
    /// Tail-pipe fossil CO₂ (kg/pkt).
    pub exhaust_kg_pkt: f64,
    /// Fuel supply chain (kgCO₂eq/pkt).
    pub upstream_kg_pkt: f64,
    pub electricity_kwh_pkt: f64,
}

impl UseProfile {
    pub fn new(mode: ModeId, exhaust_kg_pkt: f64, upstream_kg_pkt: f64, electricity_kwh_pkt: f64) -> Result<Self> {
        let p = UseProfile {
            mode,
            exhaust_kg_pkt,
            upstream_kg_pkt,
            electricity_kwh_pkt,
        };
        non_negative(&format!("{}: exhaust", p.mode), exhaust_kg_pkt)?;
        non_negative(&format!("{}: upstream fuel", p.mode), upstream_kg_pkt)?;
        non_negative(&format!("{}: electricity", p.mode), electricity_kwh_pkt)?;
        Ok(p)
    }

    /// A mode with no use-stage emissions at all (walking, cycling).
    pub fn none(mode: ModeId) -> Self {
        UseProfile {
            mode,
            exhaust_kg_pkt: 0.0,
            upstream_kg_pkt: 0.0,
            electricity_kwh_pkt: 0.0,
        }
    }

    pub fn is_electrified(&self) -> bool {
        self.electricity_kwh_pkt > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectricityMix {
    pub code: String,
    pub intensity_kg_kwh: f64,
}

impl ElectricityMix {
    pub fn new(code: impl Into<String>, intensity_kg_kwh: f64) -> Result<Self> {
        let code = code.into();
        non_negative(&format!("mix {code}: intensity"), intensity_kg_kwh)?;
        Ok(ElectricityMix {
            code,
            intensity_kg_kwh,
        })
    }
}

pub fn use_ef_per_pkt(p: &UseProfile, mix: &ElectricityMix) -> f64 {
    p.exhaust_kg_pkt + p.upstream_kg_pkt + p.electricity_kwh_pkt * mix.intensity_kg_kwh
}

/// Logistics that keep a shared fleet charged and balanced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServicingScenario {
    pub name: String,
    /// Impact of the service vehicle per kilometer it drives (kgCO₂eq/vkt).
    pub service_vehicle_ef_kg_vkt: f64,
    /// Service-vehicle kilometers attributed to one shared unit per day.
    pub km_per_unit_day: f64,
    /// Kilometers ridden on one shared unit per day.
    pub unit_daily_mileage_km: f64,
}

impl ServicingScenario {
    pub fn new(
        name: impl Into<String>,
        service_vehicle_ef_kg_vkt: f64,
        km_per_unit_day: f64,
        unit_daily_mileage_km: f64,
    ) -> Result<Self> {
        let s = ServicingScenario {
            name: name.into(),
            service_vehicle_ef_kg_vkt,
            km_per_unit_day,
            unit_daily_mileage_km,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        non_negative(&format!("{}: service vehicle ef", self.name), self.service_vehicle_ef_kg_vkt)?;
        non_negative(&format!("{}: km per unit and day", self.name), self.km_per_unit_day)?;
        positive(&format!("{}: unit daily mileage", self.name), self.unit_daily_mileage_km)
    }

    /// No servicing at all.
    pub fn none() -> Self {
        ServicingScenario {
            name: "no servicing".into(),
            service_vehicle_ef_kg_vkt: 0.0,
            km_per_unit_day: 0.0,
            unit_daily_mileage_km: DEFAULT_UNIT_DAILY_MILEAGE_KM,
        }
    }
}

pub fn servicing_ef_per_pkt(s: &ServicingScenario) -> Result<f64> {
    s.validate()?;
    Ok(s.service_vehicle_ef_kg_vkt * s.km_per_unit_day / s.unit_daily_mileage_km)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Vehicle,
    Use,
    Servicing,
    Infrastructure,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Vehicle, Stage::Use, Stage::Servicing, Stage::Infrastructure];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Vehicle => "vehicle",
            Stage::Use => "use",
            Stage::Servicing => "servicing",
            Stage::Infrastructure => "infrastructure",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Emission factor of one mode, kgCO₂eq/pkt, with its stage breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionFactor {
    pub mode: ModeId,
    pub vehicle: f64,
    #[serde(rename = "use")]
    pub use_stage: f64,
    pub servicing: f64,
    pub infrastructure: f64,
    pub total: f64,
}

impl EmissionFactor {
    pub fn stage(&self, stage: Stage) -> f64 {
        match stage {
            Stage::Vehicle => self.vehicle,
            Stage::Use => self.use_stage,
            Stage::Servicing => self.servicing,
            Stage::Infrastructure => self.infrastructure,
        }
    }
}

pub fn compose(mode: ModeId, vehicle: f64, use_stage: f64, servicing: f64, infrastructure: f64) -> Result<EmissionFactor> {
    for stage in Stage::ALL {
        let v = match stage {
            Stage::Vehicle => vehicle,
            Stage::Use => use_stage,
            Stage::Servicing => servicing,
            Stage::Infrastructure => infrastructure,
        };
        non_negative(&format!("{mode}: {stage} factor"), v)?;
    }
    Ok(EmissionFactor {
        mode,
        vehicle,
        use_stage,
        servicing,
        infrastructure,
        total: vehicle + use_stage + servicing + infrastructure,
    })
}

/// What is known about a mode apart from its infrastructure.
///
/// Modes without a vehicle (walking) have `vehicle: None`; only shared fleets
/// name a servicing scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProfile {
    pub mode: ModeId,
    pub vehicle: Option<VehicleProfile>,
    pub use_profile: UseProfile,
    pub servicing_scenario: Option<String>,
}

impl ModeProfile {
    /// Composes the mode's factor given its resolved servicing scenario, the
    /// electricity mix and the per-pkt infrastructure factor.
    pub fn compose(
        &self,
        servicing: Option<&ServicingScenario>,
        mix: &ElectricityMix,
        infrastructure: f64,
    ) -> Result<EmissionFactor> {
        let vehicle = match &self.vehicle {
            Some(v) => vehicle_ef_per_pkt(v)?,
            None => 0.0,
        };
        let servicing = match servicing {
            Some(s) => servicing_ef_per_pkt(s)?,
            None => 0.0,
        };
        compose(
            self.mode.clone(),
            vehicle,
            use_ef_per_pkt(&self.use_profile, mix),
            servicing,
            infrastructure,
        )
    }
}

/// Emission factors keyed by mode.
pub type FactorTable = IndexMap<ModeId, EmissionFactor>;

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    fn fr() -> ElectricityMix {
        ElectricityMix::new("FR", 6.36e-2).unwrap()
    }

    #[test]
    fn vehicle_stage() {
        let ffes = VehicleProfile::new("ffes".into(), 208.5, 3750.0, 1.0).unwrap();
        assert!(close(vehicle_ef_per_pkt(&ffes).unwrap(), 5.56e-2, 1e-12));

        let solo = VehicleProfile::new("car".into(), 7000.0, 150_000.0, 1.0).unwrap();
        let shared = VehicleProfile { occupancy: 2.0, ..solo.clone() };
        assert!(close(
            vehicle_ef_per_pkt(&shared).unwrap(),
            vehicle_ef_per_pkt(&solo).unwrap() / 2.0,
            1e-15
        ));

        let free = VehicleProfile::new("x".into(), 0.0, 10.0, 3.0).unwrap();
        assert_eq!(vehicle_ef_per_pkt(&free).unwrap(), 0.0);

        let broken = VehicleProfile { lifetime_km: 0.0, ..solo.clone() };
        assert!(matches!(vehicle_ef_per_pkt(&broken), Err(Error::Domain(_))));
        let broken = VehicleProfile { occupancy: 0.0, ..solo };
        assert!(matches!(vehicle_ef_per_pkt(&broken), Err(Error::Domain(_))));
    }

    #[test]
    fn use_stage() {
        let tram = UseProfile::new("streetcar".into(), 0.0, 0.0, 5.83e-2).unwrap();
        assert!(close(use_ef_per_pkt(&tram, &fr()), 3.71e-3, 1e-3));
        let metro = UseProfile::new("metro".into(), 0.0, 0.0, 7.08e-2).unwrap();
        let v = use_ef_per_pkt(&metro, &fr());
        assert!(close(v, 4.50e-3, 1e-3));
        assert!(close(v, 4.45e-3, 0.03));
        assert_eq!(use_ef_per_pkt(&UseProfile::none("walk".into()), &fr()), 0.0);
        assert!(UseProfile::new("x".into(), -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn servicing_stage() {
        let lcv100 = ServicingScenario::new("LCV 90 km 100 ES", 0.630, 0.9, 11.0).unwrap();
        assert!(close(servicing_ef_per_pkt(&lcv100).unwrap(), 5.15e-2, 1e-3));
        let lcv50 = ServicingScenario::new("LCV 90 km 50 ES", 0.630, 1.8, 11.0).unwrap();
        assert!(close(servicing_ef_per_pkt(&lcv50).unwrap(), 1.03e-1, 1e-3));
        let swap = ServicingScenario::new("Swappable battery 90 km car", 0.204, 0.45, 11.0).unwrap();
        assert!(close(servicing_ef_per_pkt(&swap).unwrap(), 8.35e-3, 1e-3));
        let broken = ServicingScenario { unit_daily_mileage_km: 0.0, ..lcv100 };
        assert!(matches!(servicing_ef_per_pkt(&broken), Err(Error::Domain(_))));
        assert_eq!(servicing_ef_per_pkt(&ServicingScenario::none()).unwrap(), 0.0);
    }

    #[test]
    fn composition() {
        let ffes = compose("ffes".into(), 5.56e-2, 1.21e-3, 5.14e-2, 1.13e-3).unwrap();
        assert!(close(ffes.total, 1.09e-1, 5e-3));
        assert_eq!(ffes.total, 5.56e-2 + 1.21e-3 + 5.14e-2 + 1.13e-3);
        let walk = compose("walk".into(), 0.0, 0.0, 0.0, 2.23e-3).unwrap();
        assert_eq!(walk.total, 2.23e-3);
        assert_eq!(compose("z".into(), 0.0, 0.0, 0.0, 0.0).unwrap().total, 0.0);
        assert!(compose("neg".into(), -1e-3, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn profile_without_vehicle() {
        let walk = ModeProfile {
            mode: "walk".into(),
            vehicle: None,
            use_profile: UseProfile::none("walk".into()),
            servicing_scenario: None,
        };
        let ef = walk.compose(None, &fr(), 2.23e-3).unwrap();
        assert_eq!(ef.vehicle, 0.0);
        assert_eq!(ef.total, 2.23e-3);
    }
}
