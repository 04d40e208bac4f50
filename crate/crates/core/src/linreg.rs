//! Ridge regression on a feature matrix, used as the linear stage-2 model and
//! as the linear covariate-only baseline.

use crate::error::{Error, Result};
use crate::factors::FeatureMatrix;
use crate::ingest::write_atomic;
use crate::linalg::ridge_centered;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

const MODEL_MAGIC: &str = "futureboost-ridge";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RidgeOptions {
    #[serde(default = "default_penalty")]
    pub penalty: f64,
    /// Fit on z-scored features (train statistics) and report weights in
    /// original units.
    #[serde(default = "default_true")]
    pub standardize: bool,
}

fn default_penalty() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

impl Default for RidgeOptions {
    fn default() -> Self {
        RidgeOptions { penalty: 1.0, standardize: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub penalty: f64,
    pub standardized: bool,
    /// Training means; a missing cell at prediction time takes this value.
    pub feature_means: Vec<f64>,
}

/// Complete (features and target observed) rows of `m`.
fn complete_rows(m: &FeatureMatrix) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..m.n_rows() {
        let Some(t) = m.target[i] else { continue };
        let row: Option<Vec<f64>> = m.columns.iter().map(|c| c.values[i]).collect();
        if let Some(r) = row {
            rows.push(r);
            y.push(t);
        }
    }
    (rows, y)
}

pub fn fit_ridge(train: &FeatureMatrix, penalty: f64) -> Result<RidgeModel> {
    fit_ridge_with(train, RidgeOptions { penalty, ..Default::default() })
}

/// Minimizes `Σ(y − Xw − b)² + λ‖w‖²` with an unpenalized intercept, over
/// rows where every feature and the target are present. With
/// `standardize`, `X` is z-scored first. Zero-variance columns get weight 0.
pub fn fit_ridge_with(train: &FeatureMatrix, opts: RidgeOptions) -> Result<RidgeModel> {
    if opts.penalty < 0.0 || !opts.penalty.is_finite() {
        return Err(Error::InvalidSpec(format!("ridge penalty {}", opts.penalty)));
    }
    let (rows, y) = complete_rows(train);
    if rows.is_empty() {
        return Err(Error::EmptyData("no complete training rows for ridge fit".into()));
    }
    let n = rows.len() as f64;
    let p = train.n_features();
    let mut mean = vec![0.0; p];
    for r in &rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut scale = vec![0.0; p];
    for r in &rows {
        for j in 0..p {
            scale[j] += (r[j] - mean[j]).powi(2);
        }
    }
    let scale: Vec<f64> = scale.iter().map(|s| (s / n).sqrt()).collect();
    let active: Vec<usize> = (0..p).filter(|&j| scale[j] > 0.0).collect();
    let divisor = |j: usize| if opts.standardize { scale[j] } else { 1.0 };
    let design: Vec<Vec<f64>> =
        rows.iter().map(|r| active.iter().map(|&j| (r[j] - mean[j]) / divisor(j)).collect()).collect();
    let views: Vec<&[f64]> = design.iter().map(Vec::as_slice).collect();
    let (w_active, _) = ridge_centered(&views, &y, opts.penalty)?;
    let mut weights = vec![0.0; p];
    for (k, &j) in active.iter().enumerate() {
        weights[j] = w_active[k] / divisor(j);
    }
    let y_mean = y.iter().sum::<f64>() / n;
    let intercept = y_mean - weights.iter().zip(&mean).map(|(w, m)| w * m).sum::<f64>();
    Ok(RidgeModel {
        feature_names: train.columns.iter().map(|c| c.name.clone()).collect(),
        weights,
        intercept,
        penalty: opts.penalty,
        standardized: opts.standardize,
        feature_means: mean,
    })
}

pub fn predict_ridge(model: &RidgeModel, features: &FeatureMatrix) -> Result<Vec<f64>> {
    let pos = features.positions(&model.feature_names)?;
    Ok((0..features.n_rows())
        .map(|i| {
            model.intercept
                + pos
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| model.weights[k] * features.columns[p].values[i].unwrap_or(model.feature_means[k]))
                    .sum::<f64>()
        })
        .collect())
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn save_ridge(model: &RidgeModel, path: &Path) -> Result<()> {
    let mut s = format!("{MODEL_MAGIC} {MODEL_VERSION}\n");
    let _ = writeln!(s, "penalty\t{}", fmt_f64(model.penalty));
    let _ = writeln!(s, "intercept\t{}", fmt_f64(model.intercept));
    let _ = writeln!(s, "standardized\t{}", model.standardized);
    for ((name, w), m) in model.feature_names.iter().zip(&model.weights).zip(&model.feature_means) {
        let _ = writeln!(s, "weight\t{name}\t{}\t{}", fmt_f64(*w), fmt_f64(*m));
    }
    write_atomic(path, s.as_bytes())
}

pub fn load_ridge(path: &Path) -> Result<RidgeModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |what: &str| Error::Parse(format!("{}: {what}", path.display()));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty model file"))?;
    let version = header
        .strip_prefix(MODEL_MAGIC)
        .and_then(|v| v.trim().parse::<u32>().ok())
        .ok_or_else(|| bad("not a ridge model"))?;
    if version != MODEL_VERSION {
        return Err(Error::VersionMismatch { expected: MODEL_VERSION, found: version });
    }
    let num = |s: Option<&str>| s.and_then(|v| v.parse::<f64>().ok()).ok_or_else(|| bad("bad number"));
    let mut model = RidgeModel {
        feature_names: Vec::new(),
        weights: Vec::new(),
        intercept: 0.0,
        penalty: 0.0,
        standardized: true,
        feature_means: Vec::new(),
    };
    for line in lines {
        let mut f = line.split('\t');
        match f.next() {
            Some("penalty") => model.penalty = num(f.next())?,
            Some("intercept") => model.intercept = num(f.next())?,
            Some("standardized") => model.standardized = f.next() == Some("true"),
            Some("weight") => {
                model.feature_names.push(f.next().ok_or_else(|| bad("weight name"))?.to_string());
                model.weights.push(num(f.next())?);
                model.feature_means.push(num(f.next())?);
            }
            _ => return Err(bad("unrecognized line")),
        }
    }
    Ok(model)
}
