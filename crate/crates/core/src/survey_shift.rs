//! From survey declarations to a kilometer-based modal-shift vector.
//!
//! Each respondent declares the last trip made with the disruptive mode
//! (distance, duration, walking time to reach the vehicle) and the mode that
//! trip would otherwise have used (with its expected duration). Declarations
//! are converted into distances, weighted by the respondent's annual usage
//! and scaled to the user population:
//!
//! ```text
//! d_new  = d_declared - v_walk * t_walk
//! d_orig = v_orig * (t_orig - d'_walk / v_walk)
//! ΔPKT_j = (N / n) * Σ_i ±d_{j,i} * WF_i      (+ for the new mode, - otherwise)
//! ```
//!
//! Durations enter in minutes and are converted to hours here; distances are
//! kilometers, speeds km/h.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::ModeId;

pub const DEFAULT_WALKING_SPEED_KMH: f64 = 4.7;
/// Above this average speed a declared trip is attributed to a personal,
/// unrestricted vehicle and dropped.
pub const DEFAULT_MAX_SPEED_KMH: f64 = 30.0;

fn minutes_to_hours(minutes: f64) -> f64 {
    minutes / 60.0
}

/// Declared usage frequency of the disruptive mode.
///
/// The last two classes carry no annual weight: their records are dropped
/// by [`clean`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrequencyClass {
    MoreThanFivePerWeek,
    FourToFivePerWeek,
    TwoToThreePerWeek,
    OncePerWeek,
    LessThanOncePerWeek,
    OnlyOnce,
    Stopped,
}

/// Annual weight of a respondent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// Annual number of rides represented by the declared last trip.
    Rides(f64),
    Excluded,
}

impl Weight {
    pub fn rides(self) -> Option<f64> {
        match self {
            Weight::Rides(r) => Some(r),
            Weight::Excluded => None,
        }
    }
}

impl FrequencyClass {
    pub const ALL: [FrequencyClass; 7] = [
        FrequencyClass::MoreThanFivePerWeek,
        FrequencyClass::FourToFivePerWeek,
        FrequencyClass::TwoToThreePerWeek,
        FrequencyClass::OncePerWeek,
        FrequencyClass::LessThanOncePerWeek,
        FrequencyClass::OnlyOnce,
        FrequencyClass::Stopped,
    ];

    /// The questionnaire wording of the class.
    pub fn label(self) -> &'static str {
        match self {
            FrequencyClass::MoreThanFivePerWeek => "more than 5 times a week",
            FrequencyClass::FourToFivePerWeek => "4 to 5 times a week",
            FrequencyClass::TwoToThreePerWeek => "two to three times a week",
            FrequencyClass::OncePerWeek => "once a week",
            FrequencyClass::LessThanOncePerWeek => "less than once a week",
            FrequencyClass::OnlyOnce => "I only used ES once",
            FrequencyClass::Stopped => "I stopped using the ES",
        }
    }

    /// Parses a questionnaire label. Matching ignores case, surrounding
    /// quotes and whitespace; the short codes (`5+/week`, `once`, ...) are
    /// accepted too.
    pub fn parse(label: &str) -> Result<Self> {
        let norm = label
            .trim()
            .trim_matches(|c| c == '"' || c == '“' || c == '”')
            .trim()
            .to_lowercase();
        let class = match norm.as_str() {
            "more than 5 times a week" | "more than five times a week" | "5+/week" => {
                FrequencyClass::MoreThanFivePerWeek
            }
            "4 to 5 times a week" | "four to five times a week" | "4-5/week" => {
                FrequencyClass::FourToFivePerWeek
            }
            "two to three times a week" | "2 to 3 times a week" | "2-3/week" => {
                FrequencyClass::TwoToThreePerWeek
            }
            "once a week" | "1/week" => FrequencyClass::OncePerWeek,
            "less than once a week" | "<1/week" => FrequencyClass::LessThanOncePerWeek,
            "i only used es once" | "only once" | "once" => FrequencyClass::OnlyOnce,
            "i stopped using the es" | "stopped" => FrequencyClass::Stopped,
            _ => return Err(Error::Input(format!("unknown frequency class `{label}`"))),
        };
        Ok(class)
    }
}

impl fmt::Display for FrequencyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Annual number of rides a declaration stands for.
pub fn weight_of(frequency: FrequencyClass) -> Weight {
    match frequency {
        // six rides a week, every week
        FrequencyClass::MoreThanFivePerWeek => Weight::Rides(312.0),
        // 4.5 x 52
        FrequencyClass::FourToFivePerWeek => Weight::Rides(234.0),
        // 2.5 x 52
        FrequencyClass::TwoToThreePerWeek => Weight::Rides(130.0),
        FrequencyClass::OncePerWeek => Weight::Rides(52.0),
        FrequencyClass::LessThanOncePerWeek => Weight::Rides(15.0),
        FrequencyClass::OnlyOnce | FrequencyClass::Stopped => Weight::Excluded,
    }
}

/// [`weight_of`] on a raw label.
pub fn weight_of_label(label: &str) -> Result<Weight> {
    FrequencyClass::parse(label).map(weight_of)
}

/// Average speed of a mode and the walking distance needed to reach and
/// leave it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeKinematics {
    pub mode: ModeId,
    pub speed_kmh: f64,
    pub access_walk_m: f64,
}

impl ModeKinematics {
    pub fn new(mode: ModeId, speed_kmh: f64, access_walk_m: f64) -> Result<Self> {
        if !(speed_kmh.is_finite() && speed_kmh > 0.0) {
            return Err(Error::Input(format!("{mode}: speed must be > 0, got {speed_kmh}")));
        }
        if !(access_walk_m.is_finite() && access_walk_m >= 0.0) {
            return Err(Error::Input(format!(
                "{mode}: access walk must be >= 0, got {access_walk_m}"
            )));
        }
        Ok(ModeKinematics {
            mode,
            speed_kmh,
            access_walk_m,
        })
    }
}

/// Kinematics keyed by mode, in declaration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KinematicsTable(IndexMap<ModeId, ModeKinematics>);

impl KinematicsTable {
    pub fn new(rows: impl IntoIterator<Item = ModeKinematics>) -> Self {
        KinematicsTable(rows.into_iter().map(|k| (k.mode.clone(), k)).collect())
    }

    pub fn get(&self, mode: &ModeId) -> Option<&ModeKinematics> {
        self.0.get(mode)
    }

    pub fn modes(&self) -> impl Iterator<Item = &ModeId> {
        self.0.keys()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One respondent's declaration of their last trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub id: String,
    pub frequency: FrequencyClass,
    /// `None` for induced trips, which replace no other mode.
    pub original_mode: Option<ModeId>,
    pub original_duration_min: f64,
    pub access_walk_min: f64,
    pub trip_distance_km: f64,
    pub trip_duration_min: f64,
    /// Trip chained with a non-walking mode; excluded from the analysis.
    pub intermodal: bool,
}

impl SurveyRecord {
    pub fn is_induced(&self) -> bool {
        self.original_mode.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("original_duration_min", self.original_duration_min),
            ("access_walk_min", self.access_walk_min),
            ("trip_distance_km", self.trip_distance_km),
            ("trip_duration_min", self.trip_duration_min),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::Record {
                    id: self.id.clone(),
                    reason: format!("{name} must be a finite value >= 0, got {value}"),
                });
            }
        }
        Ok(())
    }

    /// Average speed of the declared trip, `None` when the duration is zero.
    pub fn trip_speed_kmh(&self) -> Option<f64> {
        (self.trip_duration_min > 0.0)
            .then(|| self.trip_distance_km / minutes_to_hours(self.trip_duration_min))
    }
}

/// Distance actually ridden: the declared trip minus the walk to the vehicle.
pub fn ffes_distance(record: &SurveyRecord, walking_speed_kmh: f64) -> Result<f64> {
    check_walking_speed(walking_speed_kmh)?;
    let d = record.trip_distance_km - walking_speed_kmh * minutes_to_hours(record.access_walk_min);
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::Record {
            id: record.id.clone(),
            reason: format!(
                "walking access ({} min) is longer than the declared trip ({} km)",
                record.access_walk_min, record.trip_distance_km
            ),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginalDistance {
    pub km: f64,
    /// The declared duration left no time for the motorized leg; the ridden
    /// distance was used instead.
    pub fallback: bool,
}

/// Distance the trip would have covered with the original mode.
pub fn original_distance(
    record: &SurveyRecord,
    kinematics: &KinematicsTable,
    walking_speed_kmh: f64,
) -> Result<OriginalDistance> {
    check_walking_speed(walking_speed_kmh)?;
    let Some(mode) = &record.original_mode else {
        return Err(Error::Record {
            id: record.id.clone(),
            reason: "induced trip has no original mode".into(),
        });
    };
    let kin = kinematics
        .get(mode)
        .ok_or_else(|| Error::Config(format!("no kinematics for mode `{mode}`")))?;
    let residual_h = minutes_to_hours(record.original_duration_min)
        - (kin.access_walk_m / 1000.0) / walking_speed_kmh;
    if residual_h > 0.0 {
        Ok(OriginalDistance {
            km: kin.speed_kmh * residual_h,
            fallback: false,
        })
    } else {
        Ok(OriginalDistance {
            km: ffes_distance(record, walking_speed_kmh)?,
            fallback: true,
        })
    }
}

fn check_walking_speed(v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("walking speed must be > 0, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemovalReason {
    ExcludedFrequency,
    Intermodal,
    UndefinedSpeed,
    SpeedAboveLimit,
    InconsistentAccessWalk,
}

impl fmt::Display for RemovalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RemovalReason::ExcludedFrequency => "excluded frequency",
            RemovalReason::Intermodal => "intermodal",
            RemovalReason::UndefinedSpeed => "undefined speed",
            RemovalReason::SpeedAboveLimit => "speed above limit",
            RemovalReason::InconsistentAccessWalk => "inconsistent access walk",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleaningRules {
    pub max_speed_kmh: f64,
    pub walking_speed_kmh: f64,
}

impl Default for CleaningRules {
    fn default() -> Self {
        CleaningRules {
            max_speed_kmh: DEFAULT_MAX_SPEED_KMH,
            walking_speed_kmh: DEFAULT_WALKING_SPEED_KMH,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleaningStats {
    pub input: usize,
    pub kept: usize,
    pub removed: BTreeMap<RemovalReason, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cleaned {
    pub records: Vec<SurveyRecord>,
    pub stats: CleaningStats,
}

fn removal_reason(record: &SurveyRecord, rules: &CleaningRules) -> Option<RemovalReason> {
    if weight_of(record.frequency) == Weight::Excluded {
        return Some(RemovalReason::ExcludedFrequency);
    }
    if record.intermodal {
        return Some(RemovalReason::Intermodal);
    }
    match record.trip_speed_kmh() {
        None => return Some(RemovalReason::UndefinedSpeed),
        Some(v) if v > rules.max_speed_kmh => return Some(RemovalReason::SpeedAboveLimit),
        Some(_) => {}
    }
    if ffes_distance(record, rules.walking_speed_kmh).is_err() {
        return Some(RemovalReason::InconsistentAccessWalk);
    }
    None
}

/// Drops records that cannot enter the aggregation and counts why.
pub fn clean(records: &[SurveyRecord], rules: &CleaningRules) -> Cleaned {
    let mut stats = CleaningStats {
        input: records.len(),
        ..Default::default()
    };
    let mut kept = Vec::with_capacity(records.len());
    for record in records {
        match removal_reason(record, rules) {
            Some(reason) => *stats.removed.entry(reason).or_default() += 1,
            None => kept.push(record.clone()),
        }
    }
    stats.kept = kept.len();
    Cleaned {
        records: kept,
        stats,
    }
}

/// Signed passenger-kilometer change per mode over the analysis period.
///
/// The disruptive mode gains kilometers, every substituted mode loses them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaPkt {
    disruptive_mode: ModeId,
    population: f64,
    entries: IndexMap<ModeId, f64>,
}

impl DeltaPkt {
    pub fn new(
        disruptive_mode: ModeId,
        population: f64,
        entries: IndexMap<ModeId, f64>,
    ) -> Result<Self> {
        if !(population.is_finite() && population > 0.0) {
            return Err(Error::Domain(format!("population must be > 0, got {population}")));
        }
        for (mode, &value) in &entries {
            if !value.is_finite() {
                return Err(Error::Domain(format!("ΔPKT for `{mode}` is not finite")));
            }
            let wrong_sign = if *mode == disruptive_mode {
                value < 0.0
            } else {
                value > 0.0
            };
            if wrong_sign {
                return Err(Error::Domain(format!(
                    "ΔPKT for `{mode}` has the wrong sign ({value:e})"
                )));
            }
        }
        Ok(DeltaPkt {
            disruptive_mode,
            population,
            entries,
        })
    }

    pub fn disruptive_mode(&self) -> &ModeId {
        &self.disruptive_mode
    }

    pub fn population(&self) -> f64 {
        self.population
    }

    pub fn get(&self, mode: &ModeId) -> Option<f64> {
        self.entries.get(mode).copied()
    }

    /// Kilometers gained by the disruptive mode (zero when absent).
    pub fn gained(&self) -> f64 {
        self.get(&self.disruptive_mode).unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ModeId, f64)> {
        self.entries.iter().map(|(m, &v)| (m, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Net change in kilometers traveled, all modes together.
    pub fn net_change(&self) -> f64 {
        self.entries.values().sum()
    }

    /// The same shift for a different user population.
    pub fn rescaled(&self, population: f64) -> Result<DeltaPkt> {
        if !(population.is_finite() && population > 0.0) {
            return Err(Error::Domain(format!("population must be > 0, got {population}")));
        }
        let ratio = population / self.population;
        Ok(DeltaPkt {
            disruptive_mode: self.disruptive_mode.clone(),
            population,
            entries: self
                .entries
                .iter()
                .map(|(m, &v)| (m.clone(), v * ratio))
                .collect(),
        })
    }

    /// Share of each substituted mode in the kilometers shifted away, in
    /// percent.
    pub fn substitution_shares(&self) -> IndexMap<ModeId, f64> {
        let lost: f64 = self
            .iter()
            .filter(|(m, _)| **m != self.disruptive_mode)
            .map(|(_, v)| -v)
            .sum();
        self.iter()
            .filter(|(m, _)| **m != self.disruptive_mode)
            .map(|(m, v)| {
                let share = if lost > 0.0 { -v / lost * 100.0 } else { 0.0 };
                (m.clone(), share)
            })
            .collect()
    }
}

/// Scales signed per-mode survey sums (Σ ±d·WF) to the user population.
pub fn scale_survey_sums(
    sums: &IndexMap<ModeId, f64>,
    sample_size: usize,
    population: f64,
    disruptive_mode: &ModeId,
) -> Result<DeltaPkt> {
    if sample_size == 0 {
        return Err(Error::EmptyInput("survey sample is empty".into()));
    }
    if !(population.is_finite() && population > 0.0) {
        return Err(Error::Domain(format!("population must be > 0, got {population}")));
    }
    let scale = population / sample_size as f64;
    let entries = sums.iter().map(|(m, &s)| (m.clone(), s * scale)).collect();
    DeltaPkt::new(disruptive_mode.clone(), population, entries)
}

/// Everything the aggregation produced, for reporting and audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftResult {
    pub delta: DeltaPkt,
    /// Σ_i ±d_{j,i}·WF_i per mode, before population scaling.
    pub survey_sums: IndexMap<ModeId, f64>,
    pub sample_size: usize,
    /// Records whose original distance fell back to the ridden distance.
    pub fallback_ids: Vec<String>,
    /// Unweighted number of trips per original mode; induced trips are
    /// counted under the disruptive mode.
    pub trip_counts: IndexMap<ModeId, usize>,
}

impl ShiftResult {
    /// Unweighted trip-based shares in percent, induced trips included.
    pub fn trip_shares(&self) -> IndexMap<ModeId, f64> {
        let n = self.sample_size as f64;
        self.trip_counts
            .iter()
            .map(|(m, &c)| (m.clone(), c as f64 / n * 100.0))
            .collect()
    }
}

/// Weighted, population-scaled modal shift of cleaned records.
///
/// The sample size is the number of records passed in. Induced trips only
/// add to the disruptive mode.
pub fn aggregate(
    records: &[SurveyRecord],
    population: f64,
    walking_speed_kmh: f64,
    kinematics: &KinematicsTable,
    disruptive_mode: &ModeId,
) -> Result<ShiftResult> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no survey records to aggregate".into()));
    }
    let mut sums: IndexMap<ModeId, f64> = IndexMap::new();
    sums.insert(disruptive_mode.clone(), 0.0);
    let mut trip_counts: IndexMap<ModeId, usize> = IndexMap::new();
    let mut fallback_ids = Vec::new();

    for record in records {
        record.validate()?;
        let wf = weight_of(record.frequency).rides().ok_or_else(|| Error::Record {
            id: record.id.clone(),
            reason: format!("frequency `{}` carries no weight; clean the sample first", record.frequency),
        })?;
        let ridden = ffes_distance(record, walking_speed_kmh)?;
        *sums.get_mut(disruptive_mode).expect("inserted above") += ridden * wf;

        let counted_as = match &record.original_mode {
            None => disruptive_mode.clone(),
            Some(mode) => {
                let orig = original_distance(record, kinematics, walking_speed_kmh)?;
                if orig.fallback {
                    fallback_ids.push(record.id.clone());
                }
                *sums.entry(mode.clone()).or_insert(0.0) -= orig.km * wf;
                mode.clone()
            }
        };
        *trip_counts.entry(counted_as).or_default() += 1;
    }

    // Disruptive mode first, then substituted modes in kinematics order.
    let rank = |m: &ModeId| kinematics.modes().position(|k| k == m).unwrap_or(usize::MAX);
    sums.sort_by(|a, _, b, _| (a != disruptive_mode, rank(a)).cmp(&(b != disruptive_mode, rank(b))));
    let delta = scale_survey_sums(&sums, records.len(), population, disruptive_mode)?;
    Ok(ShiftResult {
        delta,
        survey_sums: sums,
        sample_size: records.len(),
        fallback_ids,
        trip_counts,
    })
}
