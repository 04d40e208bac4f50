//! Stage 1: per-variable day-ahead forecasts from history, behind a
//! pluggable forecaster interface, with a content-addressed disk cache.
//!
//! Every forecast for horizon day D+1 reads only rows timestamped at or
//! before the end of issue day D.

use crate::data::{Availability, TimeSeriesTable};
use crate::error::{Error, Result};
use crate::ingest::write_atomic;
use crate::linalg::ridge_centered;
use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub const DEFAULT_CONTEXT_LENGTH: usize = 1440;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecasterKind {
    SeasonalNaive,
    RidgeLagAr,
    ExpSmoothing,
    ExternalFile,
}

/// Kind-specific parameters; unset fields take the kind's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecasterParams {
    /// Seasonal period in steps (default H).
    #[serde(default)]
    pub period: Option<usize>,
    /// Ridge L2 weight (default 1.0).
    #[serde(default)]
    pub l2: Option<f64>,
    /// Ridge lags in steps (default 1..=H, 2H, 7H).
    #[serde(default)]
    pub lags: Option<Vec<usize>>,
    /// Smoothing weight in (0, 1] (default 0.3).
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Source file for `external_file`.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecasterSpec {
    pub kind: ForecasterKind,
    #[serde(default = "default_context")]
    pub context_length: usize,
    #[serde(default)]
    pub params: ForecasterParams,
}

fn default_context() -> usize {
    DEFAULT_CONTEXT_LENGTH
}

impl ForecasterSpec {
    pub fn new(kind: ForecasterKind) -> Self {
        ForecasterSpec { kind, context_length: DEFAULT_CONTEXT_LENGTH, params: ForecasterParams::default() }
    }

    pub fn with_context(mut self, context_length: usize) -> Self {
        self.context_length = context_length;
        self
    }

    pub fn with_params(mut self, params: ForecasterParams) -> Self {
        self.params = params;
        self
    }

    fn period(&self, horizon: usize) -> usize {
        self.params.period.unwrap_or(horizon)
    }

    fn lags(&self, horizon: usize) -> Vec<usize> {
        let mut lags =
            self.params.lags.clone().unwrap_or_else(|| (1..=horizon).chain([2 * horizon, 7 * horizon]).collect());
        lags.sort_unstable();
        lags.dedup();
        lags
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        match self.kind {
            ForecasterKind::SeasonalNaive | ForecasterKind::ExpSmoothing => {
                let p = self.period(horizon);
                if p == 0 {
                    return bad("seasonal period must be positive".into());
                }
                if self.params.period.is_none() && self.context_length < horizon {
                    return bad(format!(
                        "context_length {} shorter than one seasonal period {horizon}",
                        self.context_length
                    ));
                }
                if self.context_length < p {
                    return bad(format!("context_length {} shorter than period {p}", self.context_length));
                }
                if self.kind == ForecasterKind::ExpSmoothing {
                    let a = self.params.alpha.unwrap_or(0.3);
                    if !(a > 0.0 && a <= 1.0) {
                        return bad(format!("alpha {a} outside (0, 1]"));
                    }
                }
            }
            ForecasterKind::RidgeLagAr => {
                let lags = self.lags(horizon);
                if lags.first() == Some(&0) || lags.is_empty() {
                    return bad("ridge lags must be positive".into());
                }
                if self.context_length <= *lags.last().unwrap() {
                    return bad(format!(
                        "context_length {} does not exceed the largest lag {}",
                        self.context_length,
                        lags.last().unwrap()
                    ));
                }
                if self.params.l2.is_some_and(|l| l < 0.0) {
                    return bad("negative l2".into());
                }
            }
            ForecasterKind::ExternalFile => {
                if self.params.path.is_none() {
                    return bad("external_file needs params.path".into());
                }
            }
        }
        Ok(())
    }

    /// Canonical identifier; part of every cache key.
    pub fn forecaster_id(&self, horizon: usize) -> String {
        let ctx = self.context_length;
        match self.kind {
            ForecasterKind::SeasonalNaive => format!("seasonal_naive(context={ctx},period={})", self.period(horizon)),
            ForecasterKind::ExpSmoothing => format!(
                "exp_smoothing(context={ctx},period={},alpha={})",
                self.period(horizon),
                self.params.alpha.unwrap_or(0.3)
            ),
            ForecasterKind::RidgeLagAr => {
                let lags: Vec<String> = self.lags(horizon).iter().map(usize::to_string).collect();
                format!("ridge_lag_ar(context={ctx},l2={},lags={})", self.params.l2.unwrap_or(1.0), lags.join("+"))
            }
            ForecasterKind::ExternalFile => "external".into(),
        }
    }
}

/// Forward-fills the window; values before the first observation take the
/// first observed value.
fn fill_context(window: &[Option<f64>], variable: &str) -> Result<Vec<f64>> {
    let first = window.iter().find_map(|v| *v).ok_or_else(|| Error::AllMissingContext(variable.to_string()))?;
    let mut last = first;
    Ok(window
        .iter()
        .map(|v| {
            if let Some(x) = v {
                last = *x;
            }
            last
        })
        .collect())
}

fn seasonal_naive(ctx: &[f64], period: usize, horizon: usize) -> Vec<f64> {
    let n = ctx.len();
    (0..horizon).map(|h| ctx[n - period + h % period]).collect()
}

/// Simple exponential smoothing run separately on each phase of `period`.
fn exp_smoothing(ctx: &[f64], period: usize, alpha: f64, horizon: usize) -> Vec<f64> {
    let n = ctx.len();
    (0..horizon)
        .map(|h| {
            let phase = (n + h) % period;
            let mut level: Option<f64> = None;
            for x in ctx.iter().skip(phase).step_by(period) {
                level = Some(match level {
                    None => *x,
                    Some(l) => alpha * x + (1.0 - alpha) * l,
                });
            }
            level.expect("context covers one period")
        })
        .collect()
}

/// Ridge regression of `x_t` on `{x_{t-l}}`, rolled forward recursively.
fn ridge_lag_ar(ctx: &[f64], lags: &[usize], l2: f64, horizon: usize) -> Result<Vec<f64>> {
    let max_lag = *lags.last().expect("non-empty lags");
    let n = ctx.len();
    let design: Vec<Vec<f64>> = (max_lag..n).map(|t| lags.iter().map(|l| ctx[t - l]).collect()).collect();
    let rows: Vec<&[f64]> = design.iter().map(Vec::as_slice).collect();
    let (w, b) = ridge_centered(&rows, &ctx[max_lag..], l2)?;
    let mut buf = ctx.to_vec();
    for _ in 0..horizon {
        let t = buf.len();
        let y = b + lags.iter().zip(&w).map(|(l, wi)| wi * buf[t - l]).sum::<f64>();
        buf.push(y);
    }
    Ok(buf.split_off(n))
}

/// Forecasts `horizon` steps after the end of `history`.
pub fn forecast_variable(history: &[Option<f64>], spec: &ForecasterSpec, horizon: usize) -> Result<Vec<f64>> {
    spec.validate(horizon)?;
    if spec.kind == ForecasterKind::ExternalFile {
        return Err(Error::InvalidSpec("external forecasts are loaded, not computed".into()));
    }
    if history.len() < spec.context_length {
        return Err(Error::InsufficientHistory(format!(
            "{} steps available, context needs {}",
            history.len(),
            spec.context_length
        )));
    }
    let window = &history[history.len() - spec.context_length..];
    let ctx = fill_context(window, "context")?;
    let out = match spec.kind {
        ForecasterKind::SeasonalNaive => seasonal_naive(&ctx, spec.period(horizon), horizon),
        ForecasterKind::ExpSmoothing => {
            exp_smoothing(&ctx, spec.period(horizon), spec.params.alpha.unwrap_or(0.3), horizon)
        }
        ForecasterKind::RidgeLagAr => ridge_lag_ar(&ctx, &spec.lags(horizon), spec.params.l2.unwrap_or(1.0), horizon)?,
        ForecasterKind::ExternalFile => unreachable!(),
    };
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSpec(format!("{} produced a non-finite forecast", spec.forecaster_id(horizon))));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastEntry {
    pub values: Vec<f64>,
    pub forecaster_id: String,
    /// Content hash of (forecaster id, variable, issue day, context window).
    pub cache_key: String,
}

/// Horizon-day forecasts for every stage-1 variable, issued at the end of `issue_day`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSet {
    pub issue_day: NaiveDate,
    pub horizon_day: NaiveDate,
    pub entries: BTreeMap<String, ForecastEntry>,
}

impl ForecastSet {
    pub fn new(issue_day: NaiveDate, entries: BTreeMap<String, ForecastEntry>) -> Self {
        ForecastSet { issue_day, horizon_day: issue_day.succ_opt().expect("date in range"), entries }
    }
}

fn context_hash(window: &[Option<f64>]) -> String {
    let mut h = Sha256::new();
    for v in window {
        match v {
            Some(x) => {
                h.update([1u8]);
                h.update(x.to_bits().to_le_bytes());
            }
            None => h.update([0u8]),
        }
    }
    hex::encode(h.finalize())
}

pub fn cache_key(forecaster_id: &str, variable: &str, issue_day: NaiveDate, context_hash: &str) -> String {
    let mut h = Sha256::new();
    for part in [forecaster_id, variable, &issue_day.to_string(), context_hash] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    hex::encode(h.finalize())
}

pub fn cache_path(store: &Path, key: &str) -> PathBuf {
    store.join(format!("{key}.fc.csv"))
}

fn cache_body(values: &[f64]) -> String {
    let mut body = String::from("step,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(body, "{},{}", i + 1, v);
    }
    body
}

/// Writes one cache entry atomically.
pub fn cache_put(store: &Path, key: &str, forecaster_id: &str, context_hash: &str, values: &[f64]) -> Result<()> {
    let body = cache_body(values);
    let checksum = hex::encode(Sha256::digest(body.as_bytes()));
    let text = format!("# forecaster_id={forecaster_id} context_hash={context_hash} checksum={checksum}\n{body}");
    write_atomic(&cache_path(store, key), text.as_bytes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CachedForecast {
    pub forecaster_id: String,
    pub context_hash: String,
    pub values: Vec<f64>,
}

/// `Ok(None)` on a clean miss; `CorruptCacheEntry` when the file exists but
/// fails its checksum or layout.
pub fn cache_get(store: &Path, key: &str, horizon: usize) -> Result<Option<CachedForecast>> {
    let path = cache_path(store, key);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(&path, e)),
    };
    let corrupt = || Error::CorruptCacheEntry(path.display().to_string());
    let (header, body) = text.split_once('\n').ok_or_else(corrupt)?;
    let mut fields = HashMap::new();
    for kv in header.strip_prefix("# ").ok_or_else(corrupt)?.split(' ') {
        let (k, v) = kv.split_once('=').ok_or_else(corrupt)?;
        fields.insert(k, v);
    }
    let checksum = fields.get("checksum").ok_or_else(corrupt)?;
    if hex::encode(Sha256::digest(body.as_bytes())) != *checksum {
        return Err(corrupt());
    }
    let mut lines = body.lines();
    if lines.next() != Some("step,value") {
        return Err(corrupt());
    }
    let values = lines
        .enumerate()
        .map(|(i, l)| {
            let (step, v) = l.split_once(',')?;
            (step.parse::<usize>().ok()? == i + 1).then_some(())?;
            v.parse::<f64>().ok()
        })
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(corrupt)?;
    if values.len() != horizon {
        return Err(corrupt());
    }
    Ok(Some(CachedForecast {
        forecaster_id: fields.get("forecaster_id").ok_or_else(corrupt)?.to_string(),
        context_hash: fields.get("context_hash").ok_or_else(corrupt)?.to_string(),
        values,
    }))
}

fn file_hash(path: &Path) -> Result<(Vec<u8>, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let hash = hex::encode(Sha256::digest(&bytes));
    Ok((bytes, hash[..16].to_string()))
}

/// Reads `variable,issue_day,step,value` rows for one issue day. Extra
/// variables in the file are ignored with a warning.
pub fn load_external_forecasts(
    path: &Path,
    issue_day: NaiveDate,
    variables: &[String],
    horizon: usize,
) -> Result<ForecastSet> {
    let (bytes, hash) = file_hash(path)?;
    let forecaster_id = format!("external:{hash}");
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("{}: missing column {name}", path.display())))
    };
    let (cv, cd, cs, cval) = (col("variable")?, col("issue_day")?, col("step")?, col("value")?);
    let mut found: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let day = NaiveDate::parse_from_str(rec.get(cd).unwrap_or(""), "%Y-%m-%d")
            .map_err(|e| Error::Parse(format!("{}: issue_day: {e}", path.display())))?;
        if day != issue_day {
            continue;
        }
        let step: usize =
            rec.get(cs).unwrap_or("").parse().map_err(|_| Error::Parse(format!("{}: bad step", path.display())))?;
        let value: f64 =
            rec.get(cval).unwrap_or("").parse().map_err(|_| Error::Parse(format!("{}: bad value", path.display())))?;
        if !value.is_finite() {
            return Err(Error::Parse(format!("{}: non-finite value", path.display())));
        }
        found.entry(rec.get(cv).unwrap_or("").to_string()).or_default().insert(step, value);
    }
    let requested: BTreeSet<&str> = variables.iter().map(String::as_str).collect();
    for extra in found.keys().filter(|k| !requested.contains(k.as_str())) {
        log::warn!("{}: ignoring unrequested variable {extra}", path.display());
    }
    let mut entries = BTreeMap::new();
    for v in variables {
        let steps = found.get(v).ok_or_else(|| Error::UnknownVariable(v.clone()))?;
        let complete = steps.len() == horizon && steps.keys().copied().eq(1..=horizon);
        if !complete {
            return Err(Error::HorizonMismatch { variable: v.clone(), expected: horizon, found: steps.len() });
        }
        entries.insert(
            v.clone(),
            ForecastEntry {
                values: steps.values().copied().collect(),
                forecaster_id: forecaster_id.clone(),
                cache_key: cache_key(&forecaster_id, v, issue_day, &hash),
            },
        );
    }
    Ok(ForecastSet::new(issue_day, entries))
}

/// Writes forecast sets in the external-forecast layout.
pub fn write_external_forecasts(sets: &[ForecastSet], path: &Path) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["variable", "issue_day", "step", "value"])?;
    for set in sets {
        for (var, e) in &set.entries {
            for (i, v) in e.values.iter().enumerate() {
                wtr.write_record([var.clone(), set.issue_day.to_string(), (i + 1).to_string(), v.to_string()])?;
            }
        }
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    write_atomic(path, &bytes)
}

/// Runs stage-1 forecasters with an in-memory memo and an optional disk
/// cache. `evaluations()` counts actual forecaster runs.
#[derive(Debug, Default)]
pub struct ForecastEngine {
    cache_dir: Option<PathBuf>,
    evaluations: AtomicUsize,
    cache_hits: AtomicUsize,
    memo: Mutex<HashMap<String, Vec<f64>>>,
}

impl ForecastEngine {
    pub fn new(cache_dir: Option<PathBuf>) -> Self {
        ForecastEngine { cache_dir, ..Default::default() }
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::SeqCst)
    }

    pub fn cache_hits(&self) -> usize {
        self.cache_hits.load(Ordering::SeqCst)
    }

    fn lookup_or_run(
        &self,
        key: &str,
        id: &str,
        ctx_hash: &str,
        horizon: usize,
        run: impl FnOnce() -> Result<Vec<f64>>,
    ) -> Result<Vec<f64>> {
        if let Some(v) = self.memo.lock().expect("memo lock").get(key) {
            return Ok(v.clone());
        }
        if let Some(dir) = &self.cache_dir {
            match cache_get(dir, key, horizon) {
                Ok(Some(hit)) => {
                    self.cache_hits.fetch_add(1, Ordering::SeqCst);
                    self.memo.lock().expect("memo lock").insert(key.to_string(), hit.values.clone());
                    return Ok(hit.values);
                }
                Ok(None) => {}
                Err(e) => log::warn!("{e}; recomputing"),
            }
        }
        let values = run()?;
        self.evaluations.fetch_add(1, Ordering::SeqCst);
        if let Some(dir) = &self.cache_dir {
            cache_put(dir, key, id, ctx_hash, &values)?;
        }
        self.memo.lock().expect("memo lock").insert(key.to_string(), values.clone());
        Ok(values)
    }

    /// Forecasts every variable for day `issue_day + 1` from rows through the
    /// end of `issue_day`.
    pub fn forecast_day(
        &self,
        table: &TimeSeriesTable,
        variables: &[String],
        issue_day: NaiveDate,
        specs: &BTreeMap<String, ForecasterSpec>,
    ) -> Result<ForecastSet> {
        let horizon = table.steps_per_day();
        let visible = table.rows_through(issue_day);
        let results: Vec<(String, ForecastEntry)> = variables
            .par_iter()
            .map(|var| {
                let col = table.column(var)?;
                if !matches!(col.availability, Availability::Target | Availability::HistoricalExogenous) {
                    return Err(Error::AvailabilityViolation {
                        column: var.clone(),
                        tag: col.availability.to_string(),
                    });
                }
                let spec =
                    specs.get(var).ok_or_else(|| Error::InvalidSpec(format!("no forecaster configured for {var}")))?;
                if spec.kind == ForecasterKind::ExternalFile {
                    let path = spec.params.path.as_deref().expect("validated");
                    let set = load_external_forecasts(path, issue_day, std::slice::from_ref(var), horizon)?;
                    return Ok((var.clone(), set.entries.into_values().next().expect("one entry")));
                }
                let history = &col.values[..visible];
                let id = spec.forecaster_id(horizon);
                let start = history.len().saturating_sub(spec.context_length);
                let ctx_hash = context_hash(&history[start..]);
                let key = cache_key(&id, var, issue_day, &ctx_hash);
                let values = self.lookup_or_run(&key, &id, &ctx_hash, horizon, || {
                    forecast_variable(history, spec, horizon).map_err(|e| match e {
                        Error::AllMissingContext(_) => Error::AllMissingContext(var.clone()),
                        other => other,
                    })
                })?;
                Ok((var.clone(), ForecastEntry { values, forecaster_id: id, cache_key: key }))
            })
            .collect::<Result<_>>()?;
        Ok(ForecastSet::new(issue_day, results.into_iter().collect()))
    }
}
