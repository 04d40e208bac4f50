//! Run configuration: one TOML file describing data locations, stage-1
//! forecasters, the feature layout, the stage-2 regressor and the rolling
//! protocol. Relative paths resolve against the file's directory.

use crate::data::{
    build_rolling_splits, with_workday_filter, HolidayCalendar, RollingSplit, YearMonth, DAY_AHEAD_PRICE,
    REAL_TIME_PRICE,
};
use crate::error::{Error, Result};
use crate::eval::{DifficultyParams, Method, ProtocolConfig, ProtocolMode, RegressorConfig};
use crate::factors::FactorSpec;
use crate::forecast::{ForecasterKind, ForecasterSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const CACHE_DIR_ENV: &str = "FUTUREBOOST_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    #[default]
    DayAhead,
    RealTime,
}

impl TargetKind {
    pub fn column(self) -> &'static str {
        match self {
            TargetKind::DayAhead => DAY_AHEAD_PRICE,
            TargetKind::RealTime => REAL_TIME_PRICE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// Canonical table (CSV plus sidecar).
    pub data: PathBuf,
    #[serde(default = "default_cache")]
    pub cache: PathBuf,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Source registry consumed by `ingest`.
    #[serde(default)]
    pub registry: Option<PathBuf>,
    /// Scenario consumed by `simulate`.
    #[serde(default)]
    pub scenario: Option<PathBuf>,
}

fn default_cache() -> PathBuf {
    PathBuf::from("cache")
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage1Config {
    /// Variables forecast for day D+1 (𝒱).
    pub variables: Vec<String>,
    #[serde(default = "default_forecaster")]
    pub default: ForecasterSpec,
    #[serde(default)]
    pub per_variable: BTreeMap<String, ForecasterSpec>,
}

fn default_forecaster() -> ForecasterSpec {
    ForecasterSpec::new(ForecasterKind::RidgeLagAr)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    #[serde(default)]
    pub future_columns: Vec<String>,
    #[serde(default)]
    pub factors: Vec<FactorSpec>,
    #[serde(default = "default_true")]
    pub calendar: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub test_months: Vec<YearMonth>,
    #[serde(default = "default_train_months")]
    pub train_months: u32,
    #[serde(default = "default_val_months")]
    pub val_months: u32,
    /// Defaults to on in `shanxi_like` mode and off otherwise.
    #[serde(default)]
    pub workday_filter: Option<bool>,
    #[serde(default)]
    pub holiday_file: Option<PathBuf>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
}

fn default_train_months() -> u32 {
    12
}

fn default_val_months() -> u32 {
    2
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub mode: ProtocolMode,
    #[serde(default)]
    pub target: TargetKind,
    pub paths: Paths,
    pub stage1: Stage1Config,
    pub features: FeatureConfig,
    #[serde(default)]
    pub regressor: RegressorConfig,
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub difficulty: DifficultyParams,
}

fn default_seed() -> u64 {
    42
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn require_file(p: &Path, what: &str) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} {} does not exist", p.display())))
    }
}

impl RunConfig {
    /// Parses and resolves relative paths against `base`; input-only files
    /// (holidays, registry, scenario, external forecasts) must exist.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let p = &mut cfg.paths;
        for path in [&mut p.data, &mut p.cache, &mut p.output] {
            resolve(base, path);
        }
        for path in [p.registry.as_mut(), p.scenario.as_mut(), cfg.protocol.holiday_file.as_mut()].into_iter().flatten()
        {
            resolve(base, path);
        }
        for spec in std::iter::once(&mut cfg.stage1.default).chain(cfg.stage1.per_variable.values_mut()) {
            if let Some(path) = spec.params.path.as_mut() {
                resolve(base, path);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn validate(&self) -> Result<()> {
        if let Some(h) = &self.protocol.holiday_file {
            require_file(h, "holiday file")?;
        }
        if let Some(r) = &self.paths.registry {
            require_file(r, "registry")?;
        }
        if let Some(s) = &self.paths.scenario {
            require_file(s, "scenario")?;
        }
        for v in self.stage1.per_variable.keys() {
            if !self.stage1.variables.contains(v) {
                return Err(Error::Config(format!("forecaster configured for {v}, which is not a stage-1 variable")));
            }
        }
        for spec in self.forecasters().values() {
            if let Some(p) = &spec.params.path {
                require_file(p, "external forecast file")?;
            }
        }
        if self.protocol.test_months.is_empty() {
            return Err(Error::Config("protocol.test_months is empty".into()));
        }
        if self.protocol.methods.is_empty() {
            return Err(Error::Config("protocol.methods is empty".into()));
        }
        Ok(())
    }

    /// Overrides the seed everywhere randomness is used.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Cache directory, honouring the environment override.
    pub fn cache_dir(&self) -> PathBuf {
        std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| self.paths.cache.clone())
    }

    pub fn target_column(&self) -> &'static str {
        self.target.column()
    }

    pub fn forecasters(&self) -> BTreeMap<String, ForecasterSpec> {
        self.stage1
            .variables
            .iter()
            .map(|v| {
                let spec = self.stage1.per_variable.get(v).unwrap_or(&self.stage1.default);
                (v.clone(), spec.clone())
            })
            .collect()
    }

    pub fn regressor(&self) -> RegressorConfig {
        match &self.regressor {
            RegressorConfig::Gbdt(p) => RegressorConfig::Gbdt(crate::gbdt::GbdtParams { seed: self.seed, ..p.clone() }),
            other => other.clone(),
        }
    }

    pub fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            target: self.target_column().to_string(),
            stage1_variables: self.stage1.variables.clone(),
            forecasters: self.forecasters(),
            factors: self.features.factors.clone(),
            future_columns: self.features.future_columns.clone(),
            calendar: self.features.calendar,
            regressor: self.regressor(),
            mode: self.mode,
            methods: self.protocol.methods.clone(),
        }
    }

    pub fn workday_filter(&self) -> bool {
        self.protocol.workday_filter.unwrap_or(self.mode == ProtocolMode::ShanxiLike)
    }

    pub fn holidays(&self) -> Result<HolidayCalendar> {
        match &self.protocol.holiday_file {
            Some(p) => HolidayCalendar::load(p),
            None => Ok(HolidayCalendar::default()),
        }
    }

    /// Rolling splits; `history_start` is the first month of available data.
    pub fn splits(&self, history_start: Option<YearMonth>) -> Result<Vec<RollingSplit>> {
        let p = &self.protocol;
        let splits = build_rolling_splits(&p.test_months, p.train_months, p.val_months, history_start)?;
        Ok(if self.workday_filter() { with_workday_filter(splits, &self.holidays()?) } else { splits })
    }
}
