//! Project configuration: one TOML file naming the datasets of a study.
//!
//! ```toml
//! name = "paris-2019"
//! disruptive_mode = "ffes"
//! year = 2018
//! population = 1e6
//!
//! [baseline_mix]
//! code = "FR"
//! intensity_kg_kwh = 0.0636
//!
//! [survey]
//! sums = "survey_sums.csv"   # or records = "survey.csv"
//! sample_size = 411
//!
//! [files]
//! mode_profiles = "mode_profiles.csv"
//! servicing = "servicing.csv"
//! traffic = "traffic.csv"
//! assets = "assets.csv"
//! ```
//!
//! Paths are relative to the configuration file. Cross-references between
//! datasets are checked on load; the optional mixes and street files are
//! only read when a command needs them.

use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infra_allocation::{infra_ef_per_pkt, traffic_for_year, InfrastructureAsset, TrafficRecord};
use crate::io;
use crate::mode::ModeId;
use crate::mode_factors::{ElectricityMix, ModeProfile, ServicingScenario};
use crate::scenario_lab::{Baseline, ModeInputs};
use crate::street_inventory::StreetSpec;
use crate::survey_shift::{
    aggregate, clean, scale_survey_sums, CleaningRules, CleaningStats, KinematicsTable, ShiftResult, SurveyRecord,
    DEFAULT_MAX_SPEED_KMH, DEFAULT_WALKING_SPEED_KMH,
};

fn default_walking_speed() -> f64 {
    DEFAULT_WALKING_SPEED_KMH
}

fn default_max_speed() -> f64 {
    DEFAULT_MAX_SPEED_KMH
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub name: String,
    pub disruptive_mode: ModeId,
    /// Analysis year used to select traffic records.
    pub year: i32,
    pub population: f64,
    #[serde(default = "default_walking_speed")]
    pub walking_speed_kmh: f64,
    #[serde(default = "default_max_speed")]
    pub max_speed_kmh: f64,
    pub baseline_mix: ElectricityMix,
    pub survey: SurveyFiles,
    pub files: DataFiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyFiles {
    /// Cleaned per-record survey answers.
    #[serde(default)]
    pub records: Option<PathBuf>,
    /// Signed per-mode survey sums, when only aggregates are available.
    #[serde(default)]
    pub sums: Option<PathBuf>,
    /// Sample size behind `sums`.
    #[serde(default)]
    pub sample_size: Option<usize>,
    /// Required with `records`.
    #[serde(default)]
    pub kinematics: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFiles {
    pub mode_profiles: PathBuf,
    #[serde(default)]
    pub servicing: Option<PathBuf>,
    pub traffic: PathBuf,
    pub assets: PathBuf,
    #[serde(default)]
    pub mixes: Option<PathBuf>,
    #[serde(default)]
    pub streets: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurveyInput {
    Records {
        records: Vec<SurveyRecord>,
        kinematics: KinematicsTable,
    },
    Sums {
        sums: IndexMap<ModeId, f64>,
        sample_size: usize,
    },
}

/// The modal shift with what produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftOutput {
    #[serde(flatten)]
    pub result: ShiftResult,
    pub cleaning: Option<CleaningStats>,
}

#[derive(Debug, Clone)]
pub struct Project {
    pub config: ProjectConfig,
    pub root: PathBuf,
    pub survey: SurveyInput,
    pub profiles: Vec<ModeProfile>,
    pub servicing: Vec<ServicingScenario>,
    pub traffic: Vec<TrafficRecord>,
    pub assets: Vec<InfrastructureAsset>,
    pub warnings: Vec<String>,
}

fn link(msg: String) -> Error {
    Error::Link(msg)
}

impl Project {
    pub fn load(config_path: &Path) -> Result<Self> {
        let text = io::read_text(config_path)?;
        let config: ProjectConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {}", config_path.display(), e.message())))?;
        let root = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let path = |p: &Path| io::resolve(&root, p);

        if !(config.population.is_finite() && config.population > 0.0) {
            return Err(Error::Config("population must be > 0".into()));
        }
        ElectricityMix::new(config.baseline_mix.code.clone(), config.baseline_mix.intensity_kg_kwh)
            .map_err(|e| Error::Config(format!("baseline mix: {e}")))?;

        let s = &config.survey;
        let survey = match (&s.records, &s.sums) {
            (Some(records), None) => {
                let kin = s
                    .kinematics
                    .as_ref()
                    .ok_or_else(|| Error::Config("survey records need a `kinematics` file".into()))?;
                SurveyInput::Records {
                    records: io::read_survey(&path(records))?,
                    kinematics: KinematicsTable::new(io::read_kinematics(&path(kin))?),
                }
            }
            (None, Some(sums)) => SurveyInput::Sums {
                sums: io::read_survey_sums(&path(sums))?,
                sample_size: s
                    .sample_size
                    .ok_or_else(|| Error::Config("survey sums need a `sample_size`".into()))?,
            },
            _ => return Err(Error::Config("set exactly one of `survey.records` and `survey.sums`".into())),
        };

        let profiles = io::read_mode_profiles(&path(&config.files.mode_profiles))?;
        let servicing = match &config.files.servicing {
            Some(p) => io::read_servicing(&path(p))?,
            None => Vec::new(),
        };
        let traffic = io::read_traffic(&path(&config.files.traffic))?;
        let assets = io::read_assets(&path(&config.files.assets))?;

        let project = Project {
            config,
            root,
            survey,
            profiles,
            servicing,
            traffic,
            assets,
            warnings: Vec::new(),
        };
        project.check_links()
    }

    fn check_links(mut self) -> Result<Self> {
        let mut seen = IndexMap::new();
        for p in &self.profiles {
            if seen.insert(p.mode.clone(), ()).is_some() {
                return Err(link(format!("mode `{}` has two profiles", p.mode)));
            }
            if let Some(name) = &p.servicing_scenario {
                if !self.servicing.iter().any(|s| &s.name == name) {
                    return Err(link(format!("mode `{}` names unknown servicing scenario `{name}`", p.mode)));
                }
            }
        }
        let has_profile = |m: &ModeId| self.profiles.iter().any(|p| &p.mode == m);
        let disruptive = &self.config.disruptive_mode;
        if !has_profile(disruptive) {
            return Err(link(format!("disruptive mode `{disruptive}` has no mode profile")));
        }
        match &self.survey {
            SurveyInput::Sums { sums, .. } => {
                if let Some(m) = sums.keys().find(|m| !has_profile(m)) {
                    return Err(link(format!("survey mode `{m}` has no mode profile")));
                }
            }
            SurveyInput::Records { records, kinematics } => {
                for r in records {
                    if let Some(m) = &r.original_mode {
                        if kinematics.get(m).is_none() {
                            return Err(link(format!("survey mode `{m}` (record {}) has no kinematics", r.id)));
                        }
                        if !has_profile(m) {
                            return Err(link(format!("survey mode `{m}` (record {}) has no mode profile", r.id)));
                        }
                    }
                }
            }
        }
        for r in &self.traffic {
            if !self.assets.iter().any(|a| a.infra_id == r.infra) {
                return Err(link(format!("traffic refers to unknown infrastructure `{}`", r.infra)));
            }
        }
        let year = self.config.year;
        let current = traffic_for_year(&self.traffic, year);
        if current.is_empty() {
            return Err(Error::Config(format!("no traffic records for year {year}")));
        }
        for p in &self.profiles {
            if !current.iter().any(|r| r.class.contains(&p.mode)) {
                self.warnings
                    .push(format!("mode `{}` has no {year} traffic; its infrastructure factor is zero", p.mode));
            }
        }
        for a in &self.assets {
            if !current.iter().any(|r| r.infra == a.infra_id) {
                self.warnings
                    .push(format!("infrastructure `{}` carries no {year} traffic", a.infra_id));
            }
        }
        Ok(self)
    }

    fn path(&self, p: &Path) -> PathBuf {
        io::resolve(&self.root, p)
    }

    /// The modal shift, optionally rescaled to another population.
    pub fn shift(&self, population: Option<f64>) -> Result<ShiftOutput> {
        let population = population.unwrap_or(self.config.population);
        let disruptive = &self.config.disruptive_mode;
        match &self.survey {
            SurveyInput::Sums { sums, sample_size } => Ok(ShiftOutput {
                result: ShiftResult {
                    delta: scale_survey_sums(sums, *sample_size, population, disruptive)?,
                    survey_sums: sums.clone(),
                    sample_size: *sample_size,
                    fallback_ids: Vec::new(),
                    trip_counts: IndexMap::new(),
                },
                cleaning: None,
            }),
            SurveyInput::Records { records, kinematics } => {
                let rules = CleaningRules {
                    max_speed_kmh: self.config.max_speed_kmh,
                    walking_speed_kmh: self.config.walking_speed_kmh,
                };
                let cleaned = clean(records, &rules);
                let result = aggregate(
                    &cleaned.records,
                    population,
                    self.config.walking_speed_kmh,
                    kinematics,
                    disruptive,
                )?;
                Ok(ShiftOutput {
                    result,
                    cleaning: Some(cleaned.stats),
                })
            }
        }
    }

    pub fn traffic_for_year(&self, year: i32) -> Vec<TrafficRecord> {
        traffic_for_year(&self.traffic, year)
    }

    /// Per-mode inputs with the infrastructure factor of the analysis year.
    pub fn mode_inputs(&self) -> Result<Vec<ModeInputs>> {
        let traffic = self.traffic_for_year(self.config.year);
        self.profiles
            .iter()
            .map(|p| {
                let servicing = match &p.servicing_scenario {
                    Some(name) => Some(self.servicing_named(name)?.clone()),
                    None => None,
                };
                Ok(ModeInputs {
                    profile: p.clone(),
                    servicing,
                    infrastructure: infra_ef_per_pkt(&p.mode, &self.assets, &traffic)?,
                })
            })
            .collect()
    }

    pub fn servicing_named(&self, name: &str) -> Result<&ServicingScenario> {
        self.servicing
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| link(format!("unknown servicing scenario `{name}`")))
    }

    pub fn baseline(&self, population: Option<f64>) -> Result<Baseline> {
        let delta = self.shift(population)?.result.delta;
        Baseline::new(delta, self.mode_inputs()?, self.config.baseline_mix.clone())
    }

    pub fn mixes(&self) -> Result<Vec<ElectricityMix>> {
        let p = self
            .config
            .files
            .mixes
            .as_ref()
            .ok_or_else(|| Error::Config("this project has no `mixes` file".into()))?;
        io::read_mixes(&self.path(p))
    }

    pub fn streets(&self) -> Result<Vec<StreetSpec>> {
        let p = self
            .config
            .files
            .streets
            .as_ref()
            .ok_or_else(|| Error::Config("this project has no `streets` file".into()))?;
        io::read_streets(&self.path(p))
    }
}

/// Directory holding the bundled projects.
pub fn data_dir() -> PathBuf {
    match std::env::var_os("CLCA_DATA_DIR") {
        Some(d) => PathBuf::from(d),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("data"),
    }
}

pub const DEFAULT_PROJECT: &str = "paris-2019";

/// Accepts a configuration file, a directory containing `project.toml`, or
/// the name of a project under [`data_dir`].
pub fn locate(spec: &str) -> Result<PathBuf> {
    let p = Path::new(spec);
    if p.is_file() {
        return Ok(p.to_path_buf());
    }
    if p.is_dir() {
        return Ok(p.join("project.toml"));
    }
    let named = data_dir().join(spec).join("project.toml");
    if named.is_file() {
        return Ok(named);
    }
    Err(Error::Config(format!("no project `{spec}` (looked in {})", data_dir().display())))
}

pub fn load(spec: &str) -> Result<Project> {
    Project::load(&locate(spec)?)
}
