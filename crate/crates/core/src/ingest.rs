//! Delimited-file ingestion, canonical table files, and train-only standardization.

use crate::data::{Availability, Column, TimeSeriesTable};
use crate::error::{Error, Result};
use chrono::{NaiveDate, NaiveDateTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

pub const TIMESTAMP_COLUMN: &str = "timestamp";
const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// One canonical column sourced from one column of one delimited file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    #[serde(rename = "file")]
    pub source_file: PathBuf,
    pub source_column: String,
    #[serde(rename = "name")]
    pub canonical_name: String,
    pub availability: Availability,
    #[serde(default)]
    pub unit: String,
}

/// How masked cells are treated after alignment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    MaskThrough,
    ForwardFill,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Registry {
    pub resolution_minutes: u32,
    #[serde(default)]
    pub missing: MissingPolicy,
    #[serde(rename = "column")]
    pub columns: Vec<ColumnSpec>,
}

impl Registry {
    /// Parses a TOML registry; relative source paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut reg: Registry = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for c in &mut reg.columns {
            if c.source_file.is_relative() {
                c.source_file = base.join(&c.source_file);
            }
        }
        Ok(reg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// The 27 future-available covariates of the Shanxi `ic27` schema, by category.
pub const IC27: [(&str, &[&str]); 5] = [
    (
        "market_tightness",
        &["thermal_auction_space", "thermal_auction_space_st", "renewable_ratio_load", "renewable_ratio_power"],
    ),
    (
        "system_operation",
        &[
            "system_load_forecast",
            "day_ahead_interconnection_plan_total",
            "non_market_unit_output",
            "transmission_available_capacity_yanhuai",
        ],
    ),
    (
        "renewable_forecasts",
        &["forecast_total_power", "forecast_wind_power", "forecast_pv_power", "forecast_new_energy_total"],
    ),
    ("calendar", &["month", "weekday", "day"]),
    (
        "weather",
        &[
            "dew_point_2m_mean",
            "dew_point_2m_max",
            "dew_point_2m_min",
            "temperature_2m_mean",
            "temperature_2m_max",
            "relative_humidity_2m_mean",
            "cloud_cover_low_max",
            "precipitation_probability_mean",
            "extraterrestrial_ghi_mean",
            "surface_pressure_mean",
            "pressure_msl_mean",
            "pressure_msl_min",
        ],
    ),
];

/// RealE France direct-regression covariates.
pub const REALE_FR: [&str; 15] = [
    "genf_Scheduled Generation",
    "ntc_Net Position",
    "total_Day-ahead Total Load Forecast",
    "total_Actual Total Load",
    "Biomass - Actual Aggregated",
    "Fossil Gas - Actual Aggregated",
    "Fossil Hard coal - Actual Aggregated",
    "Fossil Oil - Actual Aggregated",
    "Hydro Pumped Storage - Actual Aggregated",
    "Hydro Run-of-river and poundage - Actual Aggregated",
    "Hydro Water Reservoir - Actual Aggregated",
    "Nuclear - Actual Aggregated",
    "Solar - Actual Aggregated",
    "Waste - Actual Aggregated",
    "Wind Onshore - Actual Aggregated",
];

/// RealE Germany direct-regression covariates.
pub const REALE_DE: [&str; 19] = [
    "genf_Scheduled Generation",
    "ntc_Net Position",
    "total_Actual Total Load",
    "Biomass - Actual Aggregated",
    "Fossil Brown coal/Lignite - Actual Aggregated",
    "Fossil Gas - Actual Aggregated",
    "Fossil Hard coal - Actual Aggregated",
    "Fossil Oil - Actual Aggregated",
    "Geothermal - Actual Aggregated",
    "Hydro Pumped Storage - Actual Aggregated",
    "Hydro Run-of-river and poundage - Actual Aggregated",
    "Hydro Water Reservoir - Actual Aggregated",
    "Nuclear - Actual Aggregated",
    "Other renewable - Actual Aggregated",
    "Solar - Actual Aggregated",
    "Waste - Actual Aggregated",
    "Wind Offshore - Actual Aggregated",
    "Wind Onshore - Actual Aggregated",
    "Other - Actual Aggregated",
];

pub fn ic27_names() -> Vec<&'static str> {
    IC27.iter().flat_map(|(_, names)| names.iter().copied()).collect()
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().map(|d| d.and_time(chrono::NaiveTime::MIN)))
}

pub fn format_timestamp(ts: NaiveDateTime) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

fn parse_cell(raw: &str, file: &Path, column: &str) -> Result<Option<f64>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Parse(format!("{}: column {column}: bad number {raw:?}", file.display())))
}

struct SourceData {
    rows: BTreeMap<NaiveDateTime, Vec<Option<f64>>>,
}

fn read_source(file: &Path, columns: &[&str]) -> Result<SourceData> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(file).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(file, io),
        other => Error::Parse(format!("{}: {other:?}", file.display())),
    })?;
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::UnknownColumn(format!("{name} in {}", file.display())))
    };
    let ts_col = find(TIMESTAMP_COLUMN)?;
    let positions = columns.iter().map(|c| find(c)).collect::<Result<Vec<_>>>()?;
    let mut rows = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let raw_ts = record.get(ts_col).unwrap_or("");
        let ts = parse_timestamp(raw_ts)
            .ok_or_else(|| Error::UnparsableTimestamp { file: file.to_path_buf(), value: raw_ts.to_string() })?;
        let values = positions
            .iter()
            .zip(columns)
            .map(|(&p, c)| parse_cell(record.get(p).unwrap_or(""), file, c))
            .collect::<Result<Vec<_>>>()?;
        if rows.insert(ts, values).is_some() {
            return Err(Error::DuplicateTimestamp { file: file.to_path_buf(), timestamp: ts });
        }
    }
    Ok(SourceData { rows })
}

/// Loads every source and aligns them on the union of their timestamps.
pub fn ingest_sources(specs: &[ColumnSpec], resolution_minutes: u32) -> Result<TimeSeriesTable> {
    ingest_sources_with(specs, resolution_minutes, MissingPolicy::MaskThrough)
}

pub fn ingest_sources_with(
    specs: &[ColumnSpec],
    resolution_minutes: u32,
    missing: MissingPolicy,
) -> Result<TimeSeriesTable> {
    let mut names = HashSet::new();
    for s in specs {
        if !names.insert(s.canonical_name.as_str()) {
            return Err(Error::NameCollision(s.canonical_name.clone()));
        }
    }
    // Sources in order of first appearance.
    let mut files: Vec<&Path> = Vec::new();
    for s in specs {
        if !files.contains(&s.source_file.as_path()) {
            files.push(&s.source_file);
        }
    }
    let parsed: Vec<(usize, Vec<&str>, SourceData)> = files
        .par_iter()
        .enumerate()
        .map(|(i, file)| {
            let cols: Vec<&str> =
                specs.iter().filter(|s| s.source_file == *file).map(|s| s.source_column.as_str()).collect();
            read_source(file, &cols).map(|d| (i, cols, d))
        })
        .collect::<Result<_>>()?;

    let index: Vec<NaiveDateTime> =
        parsed.iter().flat_map(|(_, _, d)| d.rows.keys().copied()).collect::<BTreeSet<_>>().into_iter().collect();
    let row_of: HashMap<NaiveDateTime, usize> = index.iter().enumerate().map(|(i, t)| (*t, i)).collect();

    let mut columns = Vec::with_capacity(specs.len());
    for spec in specs {
        let file_idx = files.iter().position(|f| *f == spec.source_file).expect("file registered");
        let (_, cols, data) = parsed.iter().find(|(i, _, _)| *i == file_idx).expect("parsed");
        let pos = cols.iter().position(|c| *c == spec.source_column).expect("column requested");
        let mut values = vec![None; index.len()];
        for (ts, row) in &data.rows {
            values[row_of[ts]] = row[pos];
        }
        if missing == MissingPolicy::ForwardFill {
            forward_fill(&mut values);
        }
        columns.push(Column {
            name: spec.canonical_name.clone(),
            availability: spec.availability,
            unit: spec.unit.clone(),
            values,
        });
    }
    TimeSeriesTable::new(resolution_minutes, index, columns)
}

/// Fills each gap with the last observed value; leading gaps stay masked.
pub fn forward_fill(values: &mut [Option<f64>]) {
    let mut last = None;
    for v in values.iter_mut() {
        match v {
            Some(x) => last = Some(*x),
            None => *v = last,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    resolution_minutes: u32,
    columns: Vec<SidecarColumn>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SidecarColumn {
    name: String,
    availability: Availability,
    unit: String,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn format_value(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_table(table: &TimeSeriesTable, path: &Path) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header = vec![TIMESTAMP_COLUMN.to_string()];
    header.extend(table.columns().iter().map(|c| c.name.clone()));
    wtr.write_record(&header)?;
    for (row, ts) in table.index().iter().enumerate() {
        let mut rec = vec![format_timestamp(*ts)];
        rec.extend(table.columns().iter().map(|c| format_value(c.values[row])));
        wtr.write_record(&rec)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    write_atomic(path, &bytes)?;
    let sidecar = Sidecar {
        resolution_minutes: table.resolution_minutes(),
        columns: table
            .columns()
            .iter()
            .map(|c| SidecarColumn { name: c.name.clone(), availability: c.availability, unit: c.unit.clone() })
            .collect(),
    };
    let mut json = serde_json::to_vec_pretty(&sidecar)?;
    json.push(b'\n');
    write_atomic(&sidecar_path(path), &json)
}

pub fn read_table(path: &Path) -> Result<TimeSeriesTable> {
    let meta_path = sidecar_path(path);
    let meta_bytes = std::fs::read(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: Sidecar = serde_json::from_slice(&meta_bytes)?;
    let specs: Vec<ColumnSpec> = meta
        .columns
        .iter()
        .map(|c| ColumnSpec {
            source_file: path.to_path_buf(),
            source_column: c.name.clone(),
            canonical_name: c.name.clone(),
            availability: c.availability,
            unit: c.unit.clone(),
        })
        .collect();
    ingest_sources(&specs, meta.resolution_minutes)
}

/// Writes through a temporary sibling and renames, creating parent directories.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub name: String,
    pub mean: f64,
    pub stddev: f64,
    /// Zero-variance columns pass through unchanged.
    pub zero_variance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub stats: Vec<ColumnStats>,
    pub fitted_on: String,
}

/// Fits per-column mean and population stddev over the non-missing values of
/// rows dated in `train_dates`. No other row is read.
pub fn fit_standardizer(
    table: &TimeSeriesTable,
    train_dates: &[NaiveDate],
    columns: &[&str],
    fitted_on: impl Into<String>,
) -> Result<Standardizer> {
    let mut rows = Vec::new();
    let mut dates = train_dates.to_vec();
    dates.sort();
    dates.dedup();
    for d in dates {
        rows.extend(table.rows_for_date(d));
    }
    if rows.is_empty() {
        return Err(Error::EmptyTrainingRange);
    }
    let stats = columns
        .iter()
        .map(|name| {
            let col = table.column(name)?;
            let vals: Vec<f64> = rows.iter().filter_map(|&r| col.values[r]).collect();
            if vals.is_empty() {
                return Err(Error::EmptyTrainingRange);
            }
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let stddev = var.sqrt();
            let zero_variance = !(stddev > 0.0);
            if zero_variance {
                log::warn!("column {name} has zero variance on {}; passing through", rows.len());
            }
            Ok(ColumnStats { name: name.to_string(), mean, stddev, zero_variance })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Standardizer { stats, fitted_on: fitted_on.into() })
}

impl Standardizer {
    pub fn identity(columns: &[&str]) -> Self {
        Standardizer {
            stats: columns
                .iter()
                .map(|n| ColumnStats { name: n.to_string(), mean: 0.0, stddev: 1.0, zero_variance: false })
                .collect(),
            fitted_on: "identity".into(),
        }
    }

    pub fn stats_for(&self, column: &str) -> Result<&ColumnStats> {
        self.stats.iter().find(|s| s.name == column).ok_or_else(|| Error::UnknownColumn(column.to_string()))
    }

    pub fn standardize_values(&self, column: &str, values: &[Option<f64>]) -> Result<Vec<Option<f64>>> {
        let s = self.stats_for(column)?;
        if s.zero_variance {
            return Ok(values.to_vec());
        }
        Ok(values.iter().map(|v| v.map(|x| (x - s.mean) / s.stddev)).collect())
    }

    pub fn invert_values(&self, column: &str, values: &[f64]) -> Result<Vec<f64>> {
        let s = self.stats_for(column)?;
        if s.zero_variance {
            return Ok(values.to_vec());
        }
        Ok(values.iter().map(|x| x * s.stddev + s.mean).collect())
    }
}

/// Standardizes every fitted column; other columns are copied unchanged.
pub fn apply_standardizer(table: &TimeSeriesTable, standardizer: &Standardizer) -> Result<TimeSeriesTable> {
    for s in &standardizer.stats {
        table.column(&s.name)?;
    }
    let columns = table
        .columns()
        .iter()
        .map(|c| match standardizer.stats_for(&c.name) {
            Ok(_) => Ok(Column { values: standardizer.standardize_values(&c.name, &c.values)?, ..c.clone() }),
            Err(_) => Ok(c.clone()),
        })
        .collect::<Result<Vec<_>>>()?;
    table.with_replaced_columns(columns)
}

pub fn invert_standardizer(values: &[f64], column: &str, standardizer: &Standardizer) -> Result<Vec<f64>> {
    standardizer.invert_values(column, values)
}
