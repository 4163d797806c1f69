//! Consequential life-cycle assessment (CLCA) of a city-scale transportation
//! disruption.
//!
//! The pipeline runs in four steps:
//!
//! 1. [`survey_shift`] turns survey declarations into a signed, population-scaled
//!    passenger-kilometer shift vector ([`DeltaPkt`]).
//! 2. [`mode_factors`] composes per-mode emission factors from vehicle, use,
//!    servicing and infrastructure stages; the infrastructure stage comes from
//!    [`infra_allocation`], whose unit impacts may be derived with
//!    [`street_inventory`].
//! 3. [`engine`] multiplies the shift by the factors into a [`MarginalReport`].
//! 4. [`scenario_lab`] sweeps lifetime, servicing and electricity-mix
//!    overrides and solves for break-even values.
//!
//! [`project`] and [`io`] load the CSV/TOML datasets that feed the pipeline.

pub mod engine;
pub mod error;
pub mod infra_allocation;
pub mod io;
pub mod mode;
pub mod mode_factors;
pub mod project;
pub mod scenario_lab;
pub mod street_inventory;
pub mod survey_shift;

pub use engine::{assess, stage_shares, MarginalReport, StageShares};
pub use error::{Error, Result};
pub use mode::{ModeId, TrafficClass};
pub use mode_factors::{EmissionFactor, ElectricityMix, ServicingScenario, UseProfile, VehicleProfile};
pub use survey_shift::{DeltaPkt, FrequencyClass, ModeKinematics, SurveyRecord};
