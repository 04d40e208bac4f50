//! Domain factors and assembly of the enriched feature matrix
//! `[stage-1 forecasts, constructed factors, future-available covariates]`.
//!
//! Assembly is the leakage boundary: nothing tagged target or
//! historical-exogenous in the source table may reach a feature column.

use crate::data::{Availability, DayWindow, TimeSeriesTable};
use crate::error::{Error, Result};
use crate::forecast::ForecastSet;
use crate::ingest::{format_timestamp, format_value, parse_timestamp, write_atomic, TIMESTAMP_COLUMN};
use chrono::{Datelike, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

/// Division guard for MW denominators.
pub const DIVISION_EPSILON: f64 = 1e-6;

/// Prefix for stage-1 forecast feature columns.
pub const FORECAST_PREFIX: &str = "fc_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ForecastedFeature,
    ConstructedFactor,
    FutureAvailable,
    Calendar,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::ForecastedFeature => "forecasted_feature",
            Provenance::ConstructedFactor => "constructed_factor",
            Provenance::FutureAvailable => "future_available",
            Provenance::Calendar => "calendar",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureColumn {
    pub name: String,
    pub provenance: Provenance,
    pub values: Vec<Option<f64>>,
}

/// Design matrix with one row per (day, step), column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub timestamps: Vec<NaiveDateTime>,
    pub columns: Vec<FeatureColumn>,
    pub target: Vec<Option<f64>>,
}

impl FeatureMatrix {
    /// Builds a matrix from row-major dense values; handy for tests and benches.
    pub fn from_rows(names: &[&str], rows: &[Vec<f64>], target: &[f64]) -> Self {
        let base = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        FeatureMatrix {
            timestamps: (0..rows.len()).map(|i| base + chrono::Duration::minutes(15 * i as i64)).collect(),
            columns: names
                .iter()
                .enumerate()
                .map(|(j, n)| FeatureColumn {
                    name: n.to_string(),
                    provenance: Provenance::FutureAvailable,
                    values: rows.iter().map(|r| Some(r[j]).filter(|v| !v.is_nan())).collect(),
                })
                .collect(),
            target: target.iter().map(|&t| Some(t)).collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.timestamps.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column(&self, name: &str) -> Option<&FeatureColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Column positions for `names`, or the first one that is absent.
    pub fn positions(&self, names: &[String]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| self.columns.iter().position(|c| &c.name == n).ok_or_else(|| Error::MissingFeature(n.clone())))
            .collect()
    }

    pub fn row(&self, i: usize) -> Vec<Option<f64>> {
        self.columns.iter().map(|c| c.values[i]).collect()
    }

    /// Rows with a realized target.
    pub fn labelled_rows(&self) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.target[i].is_some()).collect()
    }

    /// Column subset with the same rows and target.
    pub fn select(&self, names: &[String]) -> Result<FeatureMatrix> {
        let pos = self.positions(names)?;
        Ok(FeatureMatrix {
            timestamps: self.timestamps.clone(),
            columns: pos.into_iter().map(|p| self.columns[p].clone()).collect(),
            target: self.target.clone(),
        })
    }

    /// Row subset (in the given order).
    pub fn take_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            timestamps: rows.iter().map(|&r| self.timestamps[r]).collect(),
            columns: self
                .columns
                .iter()
                .map(|c| FeatureColumn { values: rows.iter().map(|&r| c.values[r]).collect(), ..c.clone() })
                .collect(),
            target: rows.iter().map(|&r| self.target[r]).collect(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec![TIMESTAMP_COLUMN.to_string()];
        header.extend(self.columns.iter().map(|c| c.name.clone()));
        header.push("target".into());
        wtr.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut rec = vec![format_timestamp(self.timestamps[i])];
            rec.extend(self.columns.iter().map(|c| format_value(c.values[i])));
            rec.push(format_value(self.target[i]));
            wtr.write_record(&rec)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        write_atomic(path, &bytes)?;
        let sidecar: Vec<ProvenanceEntry> =
            self.columns.iter().map(|c| ProvenanceEntry { column: c.name.clone(), provenance: c.provenance }).collect();
        let mut json = serde_json::to_vec_pretty(&sidecar)?;
        json.push(b'\n');
        write_atomic(&provenance_path(path), &json)
    }

    pub fn read_csv(path: &Path) -> Result<FeatureMatrix> {
        let side = provenance_path(path);
        let bytes = std::fs::read(&side).map_err(|e| Error::io(&side, e))?;
        let prov: Vec<ProvenanceEntry> = serde_json::from_slice(&bytes)?;
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let headers = rdr.headers()?.clone();
        let expected = prov.len() + 2;
        if headers.len() != expected || headers.get(0) != Some(TIMESTAMP_COLUMN) {
            return Err(Error::Parse(format!("{}: header does not match provenance sidecar", path.display())));
        }
        let mut fm = FeatureMatrix {
            timestamps: Vec::new(),
            columns: prov
                .iter()
                .map(|p| FeatureColumn { name: p.column.clone(), provenance: p.provenance, values: Vec::new() })
                .collect(),
            target: Vec::new(),
        };
        let cell = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| Error::Parse(format!("bad number {s:?}")))
            }
        };
        for rec in rdr.records() {
            let rec = rec?;
            let ts = rec.get(0).unwrap_or("");
            fm.timestamps.push(
                parse_timestamp(ts)
                    .ok_or_else(|| Error::UnparsableTimestamp { file: path.to_path_buf(), value: ts.to_string() })?,
            );
            for (j, c) in fm.columns.iter_mut().enumerate() {
                c.values.push(cell(rec.get(j + 1).unwrap_or(""))?);
            }
            fm.target.push(cell(rec.get(expected - 1).unwrap_or(""))?);
        }
        Ok(fm)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ProvenanceEntry {
    column: String,
    provenance: Provenance,
}

pub fn provenance_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".provenance.json");
    PathBuf::from(s)
}

fn guarded_ratio(num: Option<f64>, den: Option<f64>, masked: &mut usize) -> Option<f64> {
    let (n, d) = (num?, den?);
    if d <= DIVISION_EPSILON {
        *masked += 1;
        None
    } else {
        Some(n / d)
    }
}

/// `(thermal_capacity − committed_thermal) / system_load` per step; steps
/// with load ≤ ε are masked.
pub fn thermal_auction_space(
    capacity: &[Option<f64>],
    committed: &[Option<f64>],
    load: &[Option<f64>],
) -> Vec<Option<f64>> {
    let mut masked = 0;
    let out = capacity
        .iter()
        .zip(committed)
        .zip(load)
        .map(|((c, k), l)| guarded_ratio(c.zip(*k).map(|(c, k)| c - k), *l, &mut masked))
        .collect();
    if masked > 0 {
        log::warn!("thermal_auction_space: {masked} steps masked by the load guard");
    }
    out
}

/// `(wind + solar) / denominator` per step, division-guarded.
pub fn renewable_ratio(wind: &[Option<f64>], solar: &[Option<f64>], denominator: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut masked = 0;
    let out = wind
        .iter()
        .zip(solar)
        .zip(denominator)
        .map(|((w, s), d)| guarded_ratio(w.zip(*s).map(|(w, s)| w + s), *d, &mut masked))
        .collect();
    if masked > 0 {
        log::warn!("renewable_ratio: {masked} steps masked by the denominator guard");
    }
    out
}

/// `(month 1..12, weekday 0..6 with Monday = 0, day-of-month 1..31)` for every step.
pub fn calendar_features(window: &DayWindow) -> [Vec<f64>; 3] {
    let d = window.day;
    let n = window.steps.len();
    [vec![d.month() as f64; n], vec![d.weekday().num_days_from_monday() as f64; n], vec![d.day() as f64; n]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorFormula {
    ThermalAuctionSpace,
    RenewableRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorVariant {
    VsLoad,
    VsPower,
    ShortTerm,
}

/// Where a factor input comes from: a stage-1 forecast or a table column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Forecast(String),
    Column(String),
}

impl Binding {
    pub fn parse(s: &str) -> Binding {
        match s.strip_prefix("forecast:") {
            Some(v) => Binding::Forecast(v.to_string()),
            None => Binding::Column(s.to_string()),
        }
    }
}

/// A constructed factor. `inputs` maps roles to bindings: `capacity`,
/// `committed`, `load` for thermal auction space; `wind`, `solar`,
/// `denominator` for renewable ratio. A binding written `forecast:<var>`
/// reads the stage-1 forecast of `<var>`; anything else names a table column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub name: String,
    pub formula: FactorFormula,
    pub variant: FactorVariant,
    pub inputs: BTreeMap<String, String>,
}

impl FactorSpec {
    pub fn thermal(name: &str, variant: FactorVariant, capacity: &str, committed: &str, load: &str) -> Self {
        FactorSpec {
            name: name.into(),
            formula: FactorFormula::ThermalAuctionSpace,
            variant,
            inputs: [("capacity", capacity), ("committed", committed), ("load", load)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn renewable(name: &str, variant: FactorVariant, wind: &str, solar: &str, denominator: &str) -> Self {
        FactorSpec {
            name: name.into(),
            formula: FactorFormula::RenewableRatio,
            variant,
            inputs: [("wind", wind), ("solar", solar), ("denominator", denominator)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    fn roles(&self) -> [&'static str; 3] {
        match self.formula {
            FactorFormula::ThermalAuctionSpace => ["capacity", "committed", "load"],
            FactorFormula::RenewableRatio => ["wind", "solar", "denominator"],
        }
    }

    fn binding(&self, role: &str) -> Result<Binding> {
        self.inputs
            .get(role)
            .map(|s| Binding::parse(s))
            .ok_or_else(|| Error::InvalidSpec(format!("factor {} has no {role} input", self.name)))
    }

    /// Checks every binding against the table's availability tags. Returns
    /// `false` for a short-term factor whose committed column is absent
    /// (the factor is then omitted).
    fn validate(&self, table: &TimeSeriesTable) -> Result<bool> {
        for role in self.roles() {
            match self.binding(role)? {
                // Resolved per day against the forecast set.
                Binding::Forecast(_) => {}
                Binding::Column(c) => {
                    if !table.has_column(&c) && self.variant == FactorVariant::ShortTerm && role == "committed" {
                        log::warn!("factor {} omitted: short-term column {c} not bound", self.name);
                        return Ok(false);
                    }
                    check_future_column(table, &c)?;
                }
            }
        }
        Ok(true)
    }

    fn compute(&self, inputs: [&[Option<f64>]; 3]) -> Vec<Option<f64>> {
        match self.formula {
            FactorFormula::ThermalAuctionSpace => thermal_auction_space(inputs[0], inputs[1], inputs[2]),
            FactorFormula::RenewableRatio => renewable_ratio(inputs[0], inputs[1], inputs[2]),
        }
    }
}

/// Provenance of a table column that may enter the feature matrix, or an
/// availability violation.
fn check_future_column(table: &TimeSeriesTable, name: &str) -> Result<Provenance> {
    let col = table.column(name)?;
    match col.availability {
        Availability::FutureAvailableExogenous => Ok(Provenance::FutureAvailable),
        Availability::ConstructedFactor => Ok(Provenance::ConstructedFactor),
        Availability::ForecastedFeature => Ok(Provenance::ForecastedFeature),
        tag @ (Availability::Target | Availability::HistoricalExogenous) => {
            Err(Error::AvailabilityViolation { column: name.to_string(), tag: tag.to_string() })
        }
    }
}

/// What goes into a feature matrix besides the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureLayout {
    /// Stage-1 variables whose forecasts become `fc_<var>` columns.
    pub forecast_variables: Vec<String>,
    pub factors: Vec<FactorSpec>,
    /// Table columns copied as-is; must be future-available.
    pub future_columns: Vec<String>,
    pub calendar: bool,
    /// Table column holding the realized target.
    pub target: String,
}

/// Assembles `[forecasts, factors, future covariates, calendar]` for the
/// given day windows. `forecasts` is keyed by horizon day (D+1).
pub fn assemble_features(
    forecasts: &BTreeMap<NaiveDate, ForecastSet>,
    layout: &FeatureLayout,
    table: &TimeSeriesTable,
    windows: &[DayWindow],
) -> Result<FeatureMatrix> {
    let factor_bindings_vars: HashSet<&str> =
        layout.factors.iter().flat_map(|f| f.inputs.values()).filter_map(|s| s.strip_prefix("forecast:")).collect();
    let mut factors = Vec::new();
    for f in &layout.factors {
        if f.validate(table)? {
            factors.push(f);
        }
    }
    let future_prov =
        layout.future_columns.iter().map(|c| check_future_column(table, c)).collect::<Result<Vec<_>>>()?;
    let target_col = table.column(&layout.target)?;

    let mut windows: Vec<&DayWindow> = windows.iter().collect();
    windows.sort_by_key(|w| w.day);
    let n_rows: usize = windows.iter().map(|w| w.steps.len()).sum();

    let mut columns: Vec<FeatureColumn> = Vec::new();
    let mut push = |name: String, provenance: Provenance| {
        columns.push(FeatureColumn { name, provenance, values: Vec::with_capacity(n_rows) });
    };
    for v in &layout.forecast_variables {
        push(format!("{FORECAST_PREFIX}{v}"), Provenance::ForecastedFeature);
    }
    for f in &factors {
        push(f.name.clone(), Provenance::ConstructedFactor);
    }
    for (c, p) in layout.future_columns.iter().zip(&future_prov) {
        push(c.clone(), *p);
    }
    if layout.calendar {
        for c in ["month", "weekday", "day"] {
            push(c.to_string(), Provenance::Calendar);
        }
    }
    let mut seen = HashSet::new();
    for c in &columns {
        if !seen.insert(c.name.as_str()) {
            return Err(Error::NameCollision(c.name.clone()));
        }
    }

    let mut timestamps = Vec::with_capacity(n_rows);
    let mut target = Vec::with_capacity(n_rows);
    for w in windows {
        let rows = w.rows();
        let h = rows.len();
        let needs_forecast = !layout.forecast_variables.is_empty()
            || factors.iter().any(|f| f.inputs.values().any(|s| s.starts_with("forecast:")));
        let set = forecasts.get(&w.day);
        if needs_forecast && set.is_none() {
            let variable = layout
                .forecast_variables
                .first()
                .cloned()
                .or_else(|| factor_bindings_vars.iter().next().map(|s| s.to_string()))
                .unwrap_or_default();
            return Err(Error::MissingForecast { day: w.day, variable });
        }
        let forecast_of = |var: &str| -> Result<Vec<Option<f64>>> {
            let entry = set
                .and_then(|s| s.entries.get(var))
                .ok_or_else(|| Error::MissingForecast { day: w.day, variable: var.to_string() })?;
            if entry.values.len() != h {
                return Err(Error::HorizonMismatch {
                    variable: var.to_string(),
                    expected: h,
                    found: entry.values.len(),
                });
            }
            Ok(entry.values.iter().map(|&v| Some(v)).collect())
        };
        let resolve = |binding: Binding| -> Result<Vec<Option<f64>>> {
            match binding {
                Binding::Forecast(v) => forecast_of(&v),
                Binding::Column(c) => Ok(table.column(&c)?.values[rows.clone()].to_vec()),
            }
        };

        let mut col = 0;
        for v in &layout.forecast_variables {
            columns[col].values.extend(forecast_of(v)?);
            col += 1;
        }
        for f in &factors {
            let [a, b, c] = f.roles().map(|r| f.binding(r).and_then(&resolve));
            let (a, b, c) = (a?, b?, c?);
            columns[col].values.extend(f.compute([&a, &b, &c]));
            col += 1;
        }
        for name in &layout.future_columns {
            columns[col].values.extend_from_slice(&table.column(name)?.values[rows.clone()]);
            col += 1;
        }
        if layout.calendar {
            for vals in calendar_features(w) {
                columns[col].values.extend(vals.into_iter().map(Some));
                col += 1;
            }
        }
        timestamps.extend_from_slice(&w.steps);
        target.extend_from_slice(&target_col.values[rows]);
    }
    Ok(FeatureMatrix { timestamps, columns, target })
}
