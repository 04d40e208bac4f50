//! Where each stage reads and writes under the output directory.

use chrono::NaiveDateTime;
use futureboost::eval::Method;
use std::path::{Path, PathBuf};

/// Feature matrices written by `features`: forecast-augmented and
/// covariate-only variants of each split.
pub const FEATURE_SETS: [&str; 6] = ["train", "val", "test", "cov_train", "cov_val", "cov_test"];

#[derive(Debug, Clone)]
pub struct Layout {
    out: PathBuf,
}

impl Layout {
    pub fn new(out: &Path) -> Self {
        Layout { out: out.to_path_buf() }
    }

    pub fn out(&self) -> &Path {
        &self.out
    }

    pub fn window(&self, id: &str) -> PathBuf {
        self.out.join("windows").join(id)
    }

    pub fn forecasts(&self, id: &str) -> PathBuf {
        self.window(id).join("forecasts.csv")
    }

    pub fn features(&self, id: &str, set: &str) -> PathBuf {
        self.window(id).join(format!("{set}.csv"))
    }

    /// Training and validation feature sets a method's regressor uses.
    pub fn fit_sets(method: Method) -> (&'static str, &'static str, &'static str) {
        match method {
            Method::CovariateOnly => ("cov_train", "cov_val", "cov_test"),
            _ => ("train", "val", "test"),
        }
    }

    pub fn model(&self, id: &str, method: Method) -> PathBuf {
        self.window(id).join(format!("{method}.model"))
    }

    pub fn predictions(&self, id: &str) -> PathBuf {
        self.window(id).join("predictions.csv")
    }

    pub fn report(&self) -> [PathBuf; 3] {
        ["report.csv", "report.json", "difficulty.csv"].map(|f| self.out.join(f))
    }

    /// Waterfall CSV and JSON plus the global importance CSV.
    pub fn explain(&self, id: &str, instance: NaiveDateTime) -> [PathBuf; 3] {
        let dir = self.out.join("explain").join(id);
        let stem = instance.format("waterfall_%Y%m%dT%H%M").to_string();
        [dir.join(format!("{stem}.csv")), dir.join(format!("{stem}.json")), dir.join("importance.csv")]
    }
}
