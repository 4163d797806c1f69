//! CSV and TOML datasets, and the numeric tables the CLI writes.
//!
//! Every reader reports schema problems with the file, the 1-based row
//! (the header is row 1) and the offending column.

use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::infra_allocation::{InfraUnit, InfrastructureAsset, TrafficRecord};
use crate::mode::ModeId;
use crate::mode_factors::{ElectricityMix, ModeProfile, ServicingScenario, UseProfile, VehicleProfile};
use crate::street_inventory::{FlowVector, StreetSpec};
use crate::survey_shift::{FrequencyClass, ModeKinematics, SurveyRecord};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn schema(file: &Path, row: u64, column: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        file: file.to_path_buf(),
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Reads typed rows, returning each with its 1-based line number.
fn read_rows<T: DeserializeOwned>(path: &Path, required: &[&str]) -> Result<Vec<(u64, T)>> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| schema(path, 1, "", e.to_string()))?
        .clone();
    for column in required {
        if !headers.iter().any(|h| h == *column) {
            return Err(schema(path, 1, column, "missing column"));
        }
    }
    let mut rows = Vec::new();
    for result in reader.deserialize::<T>() {
        match result {
            Ok(row) => {
                let line = rows.len() as u64 + 2;
                rows.push((line, row));
            }
            Err(e) => {
                let row = e.position().map_or(0, |p| p.line());
                let column = match e.kind() {
                    csv::ErrorKind::Deserialize { err, .. } => err
                        .field()
                        .and_then(|i| headers.get(i as usize))
                        .unwrap_or("")
                        .to_string(),
                    _ => String::new(),
                };
                let message = match e.kind() {
                    csv::ErrorKind::Deserialize { err, .. } => err.kind().to_string(),
                    other => format!("{other:?}"),
                };
                return Err(schema(path, row, &column, message));
            }
        }
    }
    Ok(rows)
}

fn with_row<T>(path: &Path, row: u64, column: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Schema { .. } => e,
        other => schema(path, row, column, other.to_string()),
    })
}

fn parse_bool(path: &Path, row: u64, column: &str, s: &str) -> Result<bool> {
    match s.trim().to_lowercase().as_str() {
        "" | "0" | "false" | "no" | "n" => Ok(false),
        "1" | "true" | "yes" | "y" => Ok(true),
        _ => Err(schema(path, row, column, format!("not a boolean: `{s}`"))),
    }
}

#[derive(Deserialize)]
struct SurveyRow {
    id: String,
    frequency: String,
    #[serde(default)]
    original_mode: String,
    #[serde(default)]
    original_duration_min: Option<f64>,
    ffes_access_walk_min: f64,
    ffes_distance_km: f64,
    ffes_duration_min: f64,
    #[serde(default)]
    induced: String,
    #[serde(default)]
    intermodal: String,
}

pub const SURVEY_COLUMNS: [&str; 9] = [
    "id",
    "frequency",
    "original_mode",
    "original_duration_min",
    "ffes_access_walk_min",
    "ffes_distance_km",
    "ffes_duration_min",
    "induced",
    "intermodal",
];

pub fn read_survey(path: &Path) -> Result<Vec<SurveyRecord>> {
    read_rows::<SurveyRow>(path, &SURVEY_COLUMNS)?
        .into_iter()
        .map(|(row, r)| {
            let frequency = with_row(path, row, "frequency", FrequencyClass::parse(&r.frequency))?;
            let induced = parse_bool(path, row, "induced", &r.induced)?;
            let intermodal = parse_bool(path, row, "intermodal", &r.intermodal)?;
            let original_mode = (!r.original_mode.is_empty()).then(|| ModeId::new(r.original_mode));
            if induced == original_mode.is_some() {
                return Err(schema(
                    path,
                    row,
                    "original_mode",
                    "original mode must be given exactly when the trip is not induced",
                ));
            }
            let record = SurveyRecord {
                id: r.id,
                frequency,
                original_mode,
                original_duration_min: r.original_duration_min.unwrap_or(0.0),
                access_walk_min: r.ffes_access_walk_min,
                trip_distance_km: r.ffes_distance_km,
                trip_duration_min: r.ffes_duration_min,
                intermodal,
            };
            with_row(path, row, "", record.validate())?;
            Ok(record)
        })
        .collect()
}

#[derive(Deserialize)]
struct KinematicsRow {
    mode: String,
    speed_kmh: f64,
    access_walk_m: f64,
}

pub fn read_kinematics(path: &Path) -> Result<Vec<ModeKinematics>> {
    read_rows::<KinematicsRow>(path, &["mode", "speed_kmh", "access_walk_m"])?
        .into_iter()
        .map(|(row, r)| with_row(path, row, "speed_kmh", ModeKinematics::new(ModeId::new(r.mode), r.speed_kmh, r.access_walk_m)))
        .collect()
}

#[derive(Deserialize)]
struct SurveySumRow {
    mode: String,
    survey_sum_km: f64,
}

/// Signed per-mode survey sums (Σ ±d·WF), in file order.
pub fn read_survey_sums(path: &Path) -> Result<IndexMap<ModeId, f64>> {
    let mut out = IndexMap::new();
    for (row, r) in read_rows::<SurveySumRow>(path, &["mode", "survey_sum_km"])? {
        if !r.survey_sum_km.is_finite() {
            return Err(schema(path, row, "survey_sum_km", "not finite"));
        }
        if out.insert(ModeId::new(r.mode.clone()), r.survey_sum_km).is_some() {
            return Err(schema(path, row, "mode", format!("duplicate mode `{}`", r.mode)));
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
struct ProfileRow {
    mode: String,
    ef_one_vehicle_kg: Option<f64>,
    lifetime_km: Option<f64>,
    occupancy: Option<f64>,
    exhaust_kg_pkt: f64,
    upstream_kg_pkt: f64,
    electricity_kwh_pkt: f64,
    #[serde(default)]
    servicing_scenario: String,
}

pub const MODE_PROFILE_COLUMNS: [&str; 8] = [
    "mode",
    "ef_one_vehicle_kg",
    "lifetime_km",
    "occupancy",
    "exhaust_kg_pkt",
    "upstream_kg_pkt",
    "electricity_kwh_pkt",
    "servicing_scenario",
];

/// Mode profiles. A row with the three vehicle columns empty has no vehicle
/// stage.
pub fn read_mode_profiles(path: &Path) -> Result<Vec<ModeProfile>> {
    read_rows::<ProfileRow>(path, &MODE_PROFILE_COLUMNS)?
        .into_iter()
        .map(|(row, r)| {
            let mode = ModeId::new(r.mode);
            let vehicle = match (r.ef_one_vehicle_kg, r.lifetime_km, r.occupancy) {
                (None, None, None) => None,
                (Some(ef), Some(life), Some(occ)) => Some(with_row(
                    path,
                    row,
                    "lifetime_km",
                    VehicleProfile::new(mode.clone(), ef, life, occ),
                )?),
                _ => {
                    return Err(schema(
                        path,
                        row,
                        "ef_one_vehicle_kg",
                        "vehicle columns must be all set or all empty",
                    ))
                }
            };
            let use_profile = with_row(
                path,
                row,
                "exhaust_kg_pkt",
                UseProfile::new(mode.clone(), r.exhaust_kg_pkt, r.upstream_kg_pkt, r.electricity_kwh_pkt),
            )?;
            Ok(ModeProfile {
                mode,
                vehicle,
                use_profile,
                servicing_scenario: (!r.servicing_scenario.is_empty()).then_some(r.servicing_scenario),
            })
        })
        .collect()
}

#[derive(Deserialize)]
struct ServicingRow {
    name: String,
    service_vehicle_ef_kg_vkt: f64,
    km_per_unit_day: f64,
    unit_daily_mileage: f64,
}

pub fn read_servicing(path: &Path) -> Result<Vec<ServicingScenario>> {
    read_rows::<ServicingRow>(
        path,
        &["name", "service_vehicle_ef_kg_vkt", "km_per_unit_day", "unit_daily_mileage"],
    )?
    .into_iter()
    .map(|(row, r)| {
        with_row(
            path,
            row,
            "unit_daily_mileage",
            ServicingScenario::new(r.name, r.service_vehicle_ef_kg_vkt, r.km_per_unit_day, r.unit_daily_mileage),
        )
    })
    .collect()
}

#[derive(Deserialize)]
struct MixRow {
    code: String,
    intensity_kg_kwh: f64,
}

pub fn read_mixes(path: &Path) -> Result<Vec<ElectricityMix>> {
    read_rows::<MixRow>(path, &["code", "intensity_kg_kwh"])?
        .into_iter()
        .map(|(row, r)| with_row(path, row, "intensity_kg_kwh", ElectricityMix::new(r.code, r.intensity_kg_kwh)))
        .collect()
}

#[derive(Deserialize)]
struct AssetRow {
    infra_id: String,
    unit: InfraUnit,
    quantity: f64,
    ef_per_unit_year: f64,
}

pub fn read_assets(path: &Path) -> Result<Vec<InfrastructureAsset>> {
    read_rows::<AssetRow>(path, &["infra_id", "unit", "quantity", "ef_per_unit_year"])?
        .into_iter()
        .map(|(row, r)| {
            with_row(
                path,
                row,
                "quantity",
                InfrastructureAsset::new(r.infra_id, r.unit, r.quantity, r.ef_per_unit_year),
            )
        })
        .collect()
}

pub fn read_traffic(path: &Path) -> Result<Vec<TrafficRecord>> {
    read_rows::<TrafficRecord>(path, &["mode", "infra", "pkt", "vkt", "weight", "year"])?
        .into_iter()
        .map(|(row, r)| {
            with_row(path, row, "pkt", r.validate())?;
            Ok(r)
        })
        .collect()
}

#[derive(Deserialize)]
struct FlowRow {
    flow: String,
    #[allow(dead_code)]
    unit: String,
    amount: f64,
}

/// Inventory of `flow,unit,amount` rows.
pub fn read_flows(path: &Path) -> Result<FlowVector> {
    Ok(read_rows::<FlowRow>(path, &["flow", "unit", "amount"])?
        .into_iter()
        .map(|(_, r)| (r.flow, r.amount))
        .collect())
}

#[derive(Deserialize)]
struct StreetFile {
    #[serde(default)]
    street: Vec<StreetSpec>,
}

pub fn read_streets(path: &Path) -> Result<Vec<StreetSpec>> {
    let text = read_text(path)?;
    let file: StreetFile = toml::from_str(&text).map_err(|e| {
        let line = e
            .span()
            .map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() as u64 + 1);
        schema(path, line, "", e.message().to_string())
    })?;
    for spec in &file.street {
        spec.validate()?;
    }
    Ok(file.street)
}

/// How numbers are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Scientific notation with 17 significant digits; re-parses exactly.
    Full,
    /// Scientific notation rounded to this many significant digits.
    Significant(usize),
}

pub fn format_number(x: f64, precision: Precision) -> String {
    // Products like `0 × -ΔPKT` would otherwise print as `-0`.
    let x = if x == 0.0 { 0.0 } else { x };
    match precision {
        Precision::Full => format!("{x:.16e}"),
        Precision::Significant(n) => format!("{:.*e}", n.max(1) - 1, x),
    }
}

/// A table whose first column is a text label and whose other columns are
/// numbers (possibly empty). All CSV outputs are written through it.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub headers: Vec<String>,
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

impl NumericTable {
    pub fn new(headers: &[&str]) -> Self {
        NumericTable {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, values: Vec<Option<f64>>) {
        debug_assert_eq!(values.len() + 1, self.headers.len());
        self.rows.push((label.into(), values));
    }

    pub fn to_csv(&self, precision: Precision) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.headers).expect("in-memory write");
        for (label, values) in &self.rows {
            let mut record = vec![label.clone()];
            record.extend(values.iter().map(|v| v.map_or(String::new(), |x| format_number(x, precision))));
            writer.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |row: u64, column: &str, message: String| schema(Path::new("<table>"), row, column, message);
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| bad(1, "", e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let row = i as u64 + 2;
            let record = record.map_err(|e| bad(row, "", e.to_string()))?;
            let label = record.get(0).unwrap_or("").to_string();
            let mut values = Vec::with_capacity(record.len().saturating_sub(1));
            for (j, cell) in record.iter().enumerate().skip(1) {
                let value = if cell.is_empty() {
                    None
                } else {
                    Some(cell.parse::<f64>().map_err(|e| bad(row, &headers[j], e.to_string()))?)
                };
                values.push(value);
            }
            rows.push((label, values));
        }
        Ok(NumericTable { headers, rows })
    }

    pub fn get(&self, label: &str, column: &str) -> Option<f64> {
        let j = self.headers.iter().position(|h| h == column)?;
        let (_, values) = self.rows.iter().find(|(l, _)| l == label)?;
        values.get(j.checked_sub(1)?).copied().flatten()
    }
}

/// Resolves a dataset path relative to the directory of the file naming it.
pub fn resolve(base: &Path, file: &Path) -> PathBuf {
    if file.is_absolute() {
        file.to_path_buf()
    } else {
        base.join(file)
    }
}
