//! Metrics, improvement deltas, difficulty indicators and the rolling
//! monthly evaluation protocol.

use crate::data::{day_windows_for, DayWindow, RollingSplit, TimeSeriesTable, YearMonth};
use crate::error::{Error, Result};
use crate::factors::{assemble_features, Binding, FactorSpec, FeatureLayout, FeatureMatrix, FORECAST_PREFIX};
use crate::forecast::{ForecastEngine, ForecastSet, ForecasterSpec};
use crate::gbdt::{self, GbdtParams, TreeEnsemble};
use crate::ingest::{
    apply_standardizer, fit_standardizer, format_timestamp, format_value, parse_timestamp, write_atomic, Standardizer,
};
use crate::linreg::{self, RidgeModel, RidgeOptions};
use chrono::{NaiveDate, NaiveDateTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricPair {
    pub mse: f64,
    pub mae: f64,
    pub n: usize,
}

pub fn compute_metrics(y: &[f64], yhat: &[f64]) -> Result<MetricPair> {
    if y.len() != yhat.len() {
        return Err(Error::InvalidSpec(format!("{} targets vs {} predictions", y.len(), yhat.len())));
    }
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = y.len() as f64;
    let (mut se, mut ae) = (0.0, 0.0);
    for (a, b) in y.iter().zip(yhat) {
        let e = a - b;
        se += e * e;
        ae += e.abs();
    }
    Ok(MetricPair { mse: se / n, mae: ae / n, n: y.len() })
}

/// Scores only pairs where both sides are present.
pub fn compute_metrics_masked(y: &[Option<f64>], yhat: &[Option<f64>]) -> Result<MetricPair> {
    if y.len() != yhat.len() {
        return Err(Error::InvalidSpec(format!("{} targets vs {} predictions", y.len(), yhat.len())));
    }
    let (a, b): (Vec<f64>, Vec<f64>) = y.iter().zip(yhat).filter_map(|(a, b)| Some(((*a)?, (*b)?))).unzip();
    compute_metrics(&a, &b)
}

/// Relative reduction in percent; positive means `candidate` is better.
pub fn pct_improvement(baseline: f64, candidate: f64) -> f64 {
    100.0 * (baseline - candidate) / baseline
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImprovementDelta {
    pub baseline: MetricPair,
    pub candidate: MetricPair,
    pub delta_mse_pct: f64,
    pub delta_mae_pct: f64,
}

pub fn improvement(baseline: MetricPair, candidate: MetricPair) -> Result<ImprovementDelta> {
    if !(baseline.mse > 0.0 && baseline.mae > 0.0) {
        return Err(Error::ZeroBaseline);
    }
    Ok(ImprovementDelta {
        baseline,
        candidate,
        delta_mse_pct: pct_improvement(baseline.mse, candidate.mse),
        delta_mae_pct: pct_improvement(baseline.mae, candidate.mae),
    })
}

/// Linear interpolation between order statistics at position `(n−1)·q`.
/// `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&v, q))
}

/// `m₄/m₂² − 3` with biased central moments; `None` for a constant sample.
pub fn excess_kurtosis(values: &[f64]) -> Option<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for v in values {
        let d = (v - mean).powi(2);
        m2 += d;
        m4 += d * d;
    }
    (m2 > 0.0).then(|| (m4 / n) / (m2 / n).powi(2) - 3.0)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifficultyParams {
    #[serde(default = "default_extreme")]
    pub extreme_threshold: f64,
    #[serde(default = "default_jump")]
    pub jump_threshold: f64,
}

fn default_extreme() -> f64 {
    1000.0
}

fn default_jump() -> f64 {
    200.0
}

impl Default for DifficultyParams {
    fn default() -> Self {
        DifficultyParams { extreme_threshold: default_extreme(), jump_threshold: default_jump() }
    }
}

/// Heavy-tail, jump and drift indicators of a price series. Fields that
/// need an unavailable structure (positive median, a contiguous pair, two
/// adjacent months) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyReport {
    pub n: usize,
    pub p50: f64,
    pub p99: f64,
    pub tail_ratio: Option<f64>,
    pub extreme_freq: f64,
    pub excess_kurtosis: Option<f64>,
    pub jump_size_p99: Option<f64>,
    pub jump_freq: Option<f64>,
    pub ks_max: Option<f64>,
    pub p95_range: Option<f64>,
}

/// `points` may be unordered; missing values are dropped. First differences
/// are taken only between observations exactly one resolution step apart.
pub fn difficulty_indicators(
    points: &[(NaiveDateTime, Option<f64>)],
    resolution_minutes: u32,
    params: DifficultyParams,
) -> Result<DifficultyReport> {
    let mut obs: Vec<(NaiveDateTime, f64)> = points.iter().filter_map(|(t, v)| v.map(|v| (*t, v))).collect();
    if obs.len() < 2 {
        return Err(Error::InsufficientData(format!("{} observed prices", obs.len())));
    }
    obs.sort_by_key(|(t, _)| *t);
    let mut sorted: Vec<f64> = obs.iter().map(|(_, v)| *v).collect();
    let values = sorted.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let p50 = quantile_sorted(&sorted, 0.5);
    let p99 = quantile_sorted(&sorted, 0.99);
    let step = chrono::Duration::minutes(resolution_minutes as i64);
    let jumps: Vec<f64> = obs.windows(2).filter(|w| w[1].0 - w[0].0 == step).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let mut by_month: BTreeMap<YearMonth, Vec<f64>> = BTreeMap::new();
    for (t, v) in &obs {
        by_month.entry(YearMonth::of(t.date())).or_default().push(*v);
    }
    let ks_max = by_month
        .iter()
        .filter_map(|(m, v)| by_month.get(&m.add_months(-1)).map(|prev| ks_statistic(prev, v)))
        .reduce(f64::max);
    let p95s: Vec<f64> = by_month.values().map(|v| quantile(v, 0.95).expect("non-empty month")).collect();
    let p95_range = (p95s.len() >= 2).then(|| {
        let max = p95s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = p95s.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    });
    Ok(DifficultyReport {
        n: values.len(),
        p50,
        p99,
        tail_ratio: (p50 > 0.0).then(|| p99 / p50),
        extreme_freq: values.iter().filter(|&&v| v > params.extreme_threshold).count() as f64 / n,
        excess_kurtosis: excess_kurtosis(&values),
        jump_size_p99: (!jumps.is_empty()).then(|| quantile(&jumps, 0.99).expect("non-empty")),
        jump_freq: (!jumps.is_empty())
            .then(|| jumps.iter().filter(|&&j| j > params.jump_threshold).count() as f64 / jumps.len() as f64),
        ks_max,
        p95_range,
    })
}

/// Difficulty indicators of one table column.
pub fn column_difficulty(table: &TimeSeriesTable, column: &str, params: DifficultyParams) -> Result<DifficultyReport> {
    let col = table.column(column)?;
    let points: Vec<(NaiveDateTime, Option<f64>)> =
        table.index().iter().copied().zip(col.values.iter().copied()).collect();
    difficulty_indicators(&points, table.resolution_minutes(), params)
}

pub fn write_difficulty_csv(reports: &[(String, DifficultyReport)], path: &Path) -> Result<()> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut s = String::from(
        "series,n,p50,p99,tail_ratio,extreme_freq,excess_kurtosis,jump_size_p99,jump_freq,ks_max,p95_range\n",
    );
    for (name, r) in reports {
        let _ = writeln!(
            s,
            "{name},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.p50,
            r.p99,
            opt(r.tail_ratio),
            r.extreme_freq,
            opt(r.excess_kurtosis),
            opt(r.jump_size_p99),
            opt(r.jump_freq),
            opt(r.ks_max),
            opt(r.p95_range)
        );
    }
    write_atomic(path, s.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// The stage-1 forecast of the target, used directly.
    ForecasterOnly,
    /// The stage-2 regressor without stage-1 forecast features.
    CovariateOnly,
    /// The stage-2 regressor on the forecast-augmented features.
    Futureboosting,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::ForecasterOnly, Method::CovariateOnly, Method::Futureboosting];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ForecasterOnly => "forecaster_only",
            Method::CovariateOnly => "covariate_only",
            Method::Futureboosting => "futureboosting",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressorConfig {
    Gbdt(GbdtParams),
    Ridge(RidgeOptions),
}

impl Default for RegressorConfig {
    fn default() -> Self {
        RegressorConfig::Gbdt(GbdtParams::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Gbdt(TreeEnsemble),
    Ridge(RidgeModel),
}

impl FittedModel {
    pub fn feature_names(&self) -> &[String] {
        match self {
            FittedModel::Gbdt(m) => &m.feature_names,
            FittedModel::Ridge(m) => &m.feature_names,
        }
    }

    pub fn predict(&self, features: &FeatureMatrix) -> Result<Vec<f64>> {
        match self {
            FittedModel::Gbdt(m) => gbdt::predict(m, features),
            FittedModel::Ridge(m) => linreg::predict_ridge(m, features),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        match self {
            FittedModel::Gbdt(m) => gbdt::save_model(m, path),
            FittedModel::Ridge(m) => linreg::save_ridge(m, path),
        }
    }

    /// Detects the format from the file contents.
    pub fn load(path: &Path) -> Result<FittedModel> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.starts_with(b"FBGBDT") {
            gbdt::model_from_bytes(&bytes).map(FittedModel::Gbdt)
        } else {
            linreg::load_ridge(path).map(FittedModel::Ridge)
        }
    }
}

/// Ridge ignores `valid`; the GBDT uses it for early stopping.
pub fn fit_regressor(cfg: &RegressorConfig, train: &FeatureMatrix, valid: &FeatureMatrix) -> Result<FittedModel> {
    match cfg {
        RegressorConfig::Gbdt(p) => {
            let valid = (valid.n_rows() > 0).then_some(valid);
            gbdt::fit(train, valid, p).map(FittedModel::Gbdt)
        }
        RegressorConfig::Ridge(o) => linreg::fit_ridge_with(train, *o).map(FittedModel::Ridge),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolMode {
    /// Original units end to end.
    #[default]
    ShanxiLike,
    /// Every column z-scored with statistics of the window's train rows;
    /// metrics are reported on that scale.
    RealeLike,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub target: String,
    /// Variables forecast in stage 1 (𝒱).
    pub stage1_variables: Vec<String>,
    pub forecasters: BTreeMap<String, ForecasterSpec>,
    pub factors: Vec<FactorSpec>,
    pub future_columns: Vec<String>,
    pub calendar: bool,
    pub regressor: RegressorConfig,
    pub mode: ProtocolMode,
    pub methods: Vec<Method>,
}

impl ProtocolConfig {
    pub fn futureboosting_layout(&self) -> FeatureLayout {
        FeatureLayout {
            forecast_variables: self.stage1_variables.clone(),
            factors: self.factors.clone(),
            future_columns: self.future_columns.clone(),
            calendar: self.calendar,
            target: self.target.clone(),
        }
    }

    /// Same covariates without anything computed from stage-1 forecasts.
    pub fn covariate_layout(&self) -> FeatureLayout {
        let uses_forecast =
            |f: &FactorSpec| f.inputs.values().any(|b| matches!(Binding::parse(b), Binding::Forecast(_)));
        FeatureLayout {
            forecast_variables: Vec::new(),
            factors: self.factors.iter().filter(|f| !uses_forecast(f)).cloned().collect(),
            ..self.futureboosting_layout()
        }
    }
}

/// Stage-1 forecast sets keyed by horizon day, issued the day before.
pub fn forecast_days(
    engine: &ForecastEngine,
    table: &TimeSeriesTable,
    variables: &[String],
    specs: &BTreeMap<String, ForecasterSpec>,
    horizon_days: &[NaiveDate],
) -> Result<BTreeMap<NaiveDate, ForecastSet>> {
    let mut days = horizon_days.to_vec();
    days.sort();
    days.dedup();
    days.par_iter()
        .map(|&d| {
            let issue = d.pred_opt().expect("date in range");
            engine.forecast_day(table, variables, issue, specs).map(|s| (d, s))
        })
        .collect()
}

/// Feature matrices of one rolling window.
#[derive(Debug, Clone)]
pub struct WindowData {
    pub id: String,
    pub standardizer: Option<Standardizer>,
    /// Forecast-augmented features.
    pub train: FeatureMatrix,
    pub val: FeatureMatrix,
    pub test: FeatureMatrix,
    /// Covariate-only features.
    pub cov_train: FeatureMatrix,
    pub cov_val: FeatureMatrix,
    pub cov_test: FeatureMatrix,
}

/// The table a window works on: as is, or z-scored with the window's
/// train-row statistics in `reale_like` mode.
pub fn window_table<'a>(
    table: &'a TimeSeriesTable,
    split: &RollingSplit,
    mode: ProtocolMode,
) -> Result<(Cow<'a, TimeSeriesTable>, Option<Standardizer>)> {
    match mode {
        ProtocolMode::ShanxiLike => Ok((Cow::Borrowed(table), None)),
        ProtocolMode::RealeLike => {
            let cols: Vec<&str> = table.columns().iter().map(|c| c.name.as_str()).collect();
            let st = fit_standardizer(table, &split.train_dates(), &cols, split.id())?;
            Ok((Cow::Owned(apply_standardizer(table, &st)?), Some(st)))
        }
    }
}

fn windows(table: &TimeSeriesTable, dates: &[NaiveDate]) -> Result<Vec<DayWindow>> {
    day_windows_for(table, dates)
}

pub fn prepare_window(
    table: &TimeSeriesTable,
    split: &RollingSplit,
    cfg: &ProtocolConfig,
    engine: &ForecastEngine,
) -> Result<WindowData> {
    let (train_d, val_d, test_d) = (split.train_dates(), split.val_dates(), split.test_dates());
    let (table, standardizer) = window_table(table, split, cfg.mode)?;
    let all: Vec<NaiveDate> = train_d.iter().chain(&val_d).chain(&test_d).copied().collect();
    let forecasts = forecast_days(engine, &table, &cfg.stage1_variables, &cfg.forecasters, &all)?;
    let (wt, wv, ws) = (windows(&table, &train_d)?, windows(&table, &val_d)?, windows(&table, &test_d)?);
    let fb = cfg.futureboosting_layout();
    let cov = cfg.covariate_layout();
    let build = |layout: &FeatureLayout, w: &[DayWindow]| assemble_features(&forecasts, layout, &table, w);
    Ok(WindowData {
        id: split.id(),
        standardizer,
        train: build(&fb, &wt)?,
        val: build(&fb, &wv)?,
        test: build(&fb, &ws)?,
        cov_train: build(&cov, &wt)?,
        cov_val: build(&cov, &wv)?,
        cov_test: build(&cov, &ws)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub metrics: MetricPair,
    /// Trees kept by early stopping (GBDT methods only).
    pub best_iteration: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub id: String,
    pub test_month: YearMonth,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub methods: BTreeMap<Method, MethodResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub mode: ProtocolMode,
    pub target: String,
    pub methods: Vec<Method>,
    /// Chronological.
    pub windows: Vec<WindowResult>,
    /// Unweighted mean of the window metrics; `n` is the total point count.
    pub average: BTreeMap<Method, MetricPair>,
}

fn target_of(m: &FeatureMatrix) -> &[Option<f64>] {
    &m.target
}

/// The stage-1 forecast of the target, read off the test features.
pub fn forecaster_only_predictions(test: &FeatureMatrix, target: &str) -> Result<Vec<Option<f64>>> {
    let name = format!("{FORECAST_PREFIX}{target}");
    test.column(&name)
        .map(|c| c.values.clone())
        .ok_or_else(|| Error::InvalidSpec(format!("forecaster_only needs {target} in the stage-1 variables")))
}

pub fn evaluate_window(data: &WindowData, split: &RollingSplit, cfg: &ProtocolConfig) -> Result<WindowResult> {
    let mut methods = BTreeMap::new();
    for &method in &cfg.methods {
        let (pred, best_iteration) = match method {
            Method::ForecasterOnly => (forecaster_only_predictions(&data.test, &cfg.target)?, None),
            Method::CovariateOnly | Method::Futureboosting => {
                let (tr, va, te) = if method == Method::CovariateOnly {
                    (&data.cov_train, &data.cov_val, &data.cov_test)
                } else {
                    (&data.train, &data.val, &data.test)
                };
                let model = fit_regressor(&cfg.regressor, tr, va)?;
                let best = match &model {
                    FittedModel::Gbdt(m) => Some(m.best_iteration),
                    FittedModel::Ridge(_) => None,
                };
                (model.predict(te)?.into_iter().map(Some).collect(), best)
            }
        };
        let metrics = compute_metrics_masked(target_of(&data.test), &pred)?;
        methods.insert(method, MethodResult { metrics, best_iteration });
    }
    Ok(WindowResult {
        id: data.id.clone(),
        test_month: split.test_month,
        n_train: data.train.labelled_rows().len(),
        n_val: data.val.labelled_rows().len(),
        n_test: data.test.labelled_rows().len(),
        methods,
    })
}

/// Runs every window in test-month order; errors name the failing window.
pub fn run_protocol(
    table: &TimeSeriesTable,
    splits: &[RollingSplit],
    cfg: &ProtocolConfig,
    engine: &ForecastEngine,
) -> Result<EvaluationReport> {
    if cfg.methods.is_empty() {
        return Err(Error::InvalidSpec("no methods configured".into()));
    }
    if splits.is_empty() {
        return Err(Error::InvalidSpec("no rolling splits".into()));
    }
    let mut splits: Vec<&RollingSplit> = splits.iter().collect();
    splits.sort_by_key(|s| s.test_month);
    let mut results = Vec::with_capacity(splits.len());
    for split in splits {
        let r = prepare_window(table, split, cfg, engine)
            .and_then(|data| evaluate_window(&data, split, cfg))
            .map_err(|e| e.in_window(split.id()))?;
        log::info!("window {} done", r.id);
        results.push(r);
    }
    Ok(summarize(cfg.mode, &cfg.target, &cfg.methods, results))
}

/// Assembles a report from chronological window results.
pub fn summarize(mode: ProtocolMode, target: &str, methods: &[Method], windows: Vec<WindowResult>) -> EvaluationReport {
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();
    let average = methods
        .iter()
        .map(|&m| {
            let ms: Vec<MetricPair> = windows.iter().map(|w| w.methods[&m].metrics).collect();
            let k = ms.len() as f64;
            (
                m,
                MetricPair {
                    mse: ms.iter().map(|p| p.mse).sum::<f64>() / k,
                    mae: ms.iter().map(|p| p.mae).sum::<f64>() / k,
                    n: ms.iter().map(|p| p.n).sum(),
                },
            )
        })
        .collect();
    EvaluationReport { mode, target: target.to_string(), methods, windows, average }
}

/// Test-month predictions of one window, one column per method.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPredictions {
    pub timestamps: Vec<NaiveDateTime>,
    pub target: Vec<Option<f64>>,
    pub methods: BTreeMap<Method, Vec<Option<f64>>>,
}

impl WindowPredictions {
    pub fn metrics(&self, method: Method) -> Result<MetricPair> {
        let pred = self.methods.get(&method).ok_or_else(|| Error::InvalidSpec(format!("no {method} predictions")))?;
        compute_metrics_masked(&self.target, pred)
    }

    /// CSV with `timestamp,target` followed by one column per method.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut s = String::from("timestamp,target");
        for m in self.methods.keys() {
            let _ = write!(s, ",{m}");
        }
        s.push('\n');
        for (i, ts) in self.timestamps.iter().enumerate() {
            let _ = write!(s, "{},{}", format_timestamp(*ts), format_value(self.target[i]));
            for p in self.methods.values() {
                let _ = write!(s, ",{}", format_value(p[i]));
            }
            s.push('\n');
        }
        write_atomic(path, s.as_bytes())
    }

    pub fn read_csv(path: &Path) -> Result<WindowPredictions> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("timestamp") || headers.get(1) != Some("target") {
            return Err(Error::Parse(format!("{}: expected timestamp,target header", path.display())));
        }
        let methods: Vec<Method> = headers
            .iter()
            .skip(2)
            .map(|h| {
                Method::ALL
                    .into_iter()
                    .find(|m| m.as_str() == h)
                    .ok_or_else(|| Error::Parse(format!("{}: unknown method column {h}", path.display())))
            })
            .collect::<Result<_>>()?;
        let cell = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| Error::Parse(format!("bad number {s:?}")))
            }
        };
        let mut out = WindowPredictions {
            timestamps: Vec::new(),
            target: Vec::new(),
            methods: methods.iter().map(|m| (*m, Vec::new())).collect(),
        };
        for rec in rdr.records() {
            let rec = rec?;
            let ts = rec.get(0).unwrap_or("");
            out.timestamps.push(
                parse_timestamp(ts)
                    .ok_or_else(|| Error::UnparsableTimestamp { file: path.to_path_buf(), value: ts.to_string() })?,
            );
            out.target.push(cell(rec.get(1).unwrap_or(""))?);
            for (j, m) in methods.iter().enumerate() {
                let v = cell(rec.get(j + 2).unwrap_or(""))?;
                out.methods.get_mut(m).expect("method column").push(v);
            }
        }
        Ok(out)
    }
}

/// `report.csv` rows: one per (window or AVG, method), with Δ against the
/// covariate-only regressor and against the forecaster alone where those
/// methods were run. `report.json` holds the full report.
pub fn render_report(report: &EvaluationReport, out_dir: &Path) -> Result<()> {
    if report.methods.is_empty() {
        return Err(Error::InvalidSpec("report has no methods".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut s = String::from(
        "window,method,mse,mse_delta_vs_covariate_pct,mse_delta_vs_forecaster_pct,mae,mae_delta_vs_covariate_pct,mae_delta_vs_forecaster_pct,n\n",
    );
    let delta = |base: Option<&MetricPair>, m: Method, cand: &MetricPair, pick: fn(&MetricPair) -> f64, bm: Method| {
        match base {
            Some(b) if m != bm && pick(b) > 0.0 => {
                format!("{:.4}", pct_improvement(pick(b), pick(cand)))
            }
            _ => String::new(),
        }
    };
    let mut rows: Vec<(String, BTreeMap<Method, MetricPair>)> = vec![("AVG".into(), report.average.clone())];
    for w in &report.windows {
        rows.push((w.id.clone(), w.methods.iter().map(|(k, v)| (*k, v.metrics)).collect()));
    }
    for (id, metrics) in &rows {
        let cov = metrics.get(&Method::CovariateOnly);
        let fo = metrics.get(&Method::ForecasterOnly);
        for m in &report.methods {
            let Some(p) = metrics.get(m) else { continue };
            let _ = writeln!(
                s,
                "{id},{m},{},{},{},{},{},{},{}",
                p.mse,
                delta(cov, *m, p, |x| x.mse, Method::CovariateOnly),
                delta(fo, *m, p, |x| x.mse, Method::ForecasterOnly),
                p.mae,
                delta(cov, *m, p, |x| x.mae, Method::CovariateOnly),
                delta(fo, *m, p, |x| x.mae, Method::ForecasterOnly),
                p.n
            );
        }
    }
    write_atomic(&out_dir.join("report.csv"), s.as_bytes())?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    write_atomic(&out_dir.join("report.json"), json.as_bytes())
}
