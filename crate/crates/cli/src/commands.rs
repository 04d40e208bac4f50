//! Stage implementations behind each subcommand.

use crate::layout::{Layout, FEATURE_SETS};
use crate::Command;
use chrono::NaiveDateTime;
use futureboost::config::RunConfig;
use futureboost::data::{RollingSplit, TimeSeriesTable, YearMonth};
use futureboost::eval::{
    difficulty_indicators, fit_regressor, forecast_days, forecaster_only_predictions, prepare_window, render_report,
    run_protocol, summarize, window_table, write_difficulty_csv, FittedModel, Method, MethodResult, RegressorConfig,
    WindowPredictions, WindowResult,
};
use futureboost::explain::{explain_rows, export_waterfall, global_importance, write_importance_csv, write_waterfall};
use futureboost::factors::FeatureMatrix;
use futureboost::forecast::{write_external_forecasts, ForecastEngine};
use futureboost::ingest::{ingest_sources_with, read_table, write_table, Registry};
use futureboost::synthgen::{generate, ScenarioSpec};
use futureboost::{Error, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub struct Context {
    pub config_path: PathBuf,
    pub cfg: RunConfig,
    pub dry_run: bool,
}

pub fn run(ctx: &Context, command: &Command) -> Result<()> {
    if ctx.dry_run {
        return print_plan(ctx, command);
    }
    match command {
        Command::Simulate => simulate(ctx),
        Command::Ingest => ingest(ctx),
        Command::Forecast => forecast(ctx),
        Command::Features => features(ctx),
        Command::Train => train(ctx),
        Command::Predict => predict(ctx),
        Command::Evaluate => evaluate(ctx),
        Command::Explain { instance, top_k } => explain(ctx, *instance, *top_k as usize),
        Command::Report => report(ctx),
    }
}

fn layout(cfg: &RunConfig) -> Layout {
    Layout::new(&cfg.paths.output)
}

fn load_table(cfg: &RunConfig) -> Result<TimeSeriesTable> {
    let t = read_table(&cfg.paths.data)?;
    log::debug!("loaded {} rows from {}", t.len(), cfg.paths.data.display());
    Ok(t)
}

fn splits(cfg: &RunConfig, table: Option<&TimeSeriesTable>) -> Result<Vec<RollingSplit>> {
    cfg.splits(table.and_then(|t| t.first_date()).map(YearMonth::of))
}

fn window_dates(split: &RollingSplit) -> Vec<chrono::NaiveDate> {
    let mut d = split.train_dates();
    d.extend(split.val_dates());
    d.extend(split.test_dates());
    d
}

fn engine(cfg: &RunConfig) -> ForecastEngine {
    ForecastEngine::new(Some(cfg.cache_dir()))
}

fn log_evaluations(engine: &ForecastEngine) {
    log::info!("{} forecaster evaluations", engine.evaluations());
}

/// Methods that need a fitted stage-2 regressor.
fn regressor_methods(cfg: &RunConfig) -> Vec<Method> {
    cfg.protocol.methods.iter().copied().filter(|m| *m != Method::ForecasterOnly).collect()
}

fn simulate(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    let path = cfg.paths.scenario.as_ref().ok_or_else(|| Error::Config("simulate needs paths.scenario".into()))?;
    let spec = ScenarioSpec { seed: cfg.seed, ..ScenarioSpec::load(path)? };
    let table = generate(&spec)?;
    write_table(&table, &cfg.paths.data)?;
    log::info!("wrote {} rows to {}", table.len(), cfg.paths.data.display());
    Ok(())
}

fn ingest(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    let path = cfg.paths.registry.as_ref().ok_or_else(|| Error::Config("ingest needs paths.registry".into()))?;
    let reg = Registry::load(path)?;
    let table = ingest_sources_with(&reg.columns, reg.resolution_minutes, reg.missing)?;
    write_table(&table, &cfg.paths.data)?;
    log::info!("wrote {} rows, {} columns to {}", table.len(), table.columns().len(), cfg.paths.data.display());
    Ok(())
}

fn forecast(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    let table = load_table(cfg)?;
    let pc = cfg.protocol();
    let engine = engine(cfg);
    let out = layout(cfg);
    for split in splits(cfg, Some(&table))? {
        let id = split.id();
        let (t, _) = window_table(&table, &split, pc.mode).map_err(|e| e.in_window(&id))?;
        let sets = forecast_days(&engine, &t, &pc.stage1_variables, &pc.forecasters, &window_dates(&split))
            .map_err(|e| e.in_window(&id))?;
        write_external_forecasts(&sets.into_values().collect::<Vec<_>>(), &out.forecasts(&id))?;
    }
    log_evaluations(&engine);
    Ok(())
}

fn features(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    let table = load_table(cfg)?;
    let pc = cfg.protocol();
    let engine = engine(cfg);
    let out = layout(cfg);
    for split in splits(cfg, Some(&table))? {
        let id = split.id();
        let w = prepare_window(&table, &split, &pc, &engine).map_err(|e| e.in_window(&id))?;
        let sets = [&w.train, &w.val, &w.test, &w.cov_train, &w.cov_val, &w.cov_test];
        for (name, fm) in FEATURE_SETS.iter().zip(sets) {
            fm.write_csv(&out.features(&id, name))?;
        }
        log::info!("window {id}: {} features, {} train rows", w.train.n_features(), w.train.n_rows());
    }
    log_evaluations(&engine);
    Ok(())
}

fn read_features(out: &Layout, id: &str, set: &str) -> Result<FeatureMatrix> {
    FeatureMatrix::read_csv(&out.features(id, set))
}

fn train(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    let out = layout(cfg);
    let regressor = cfg.regressor();
    for split in splits(cfg, None)? {
        let id = split.id();
        for method in regressor_methods(cfg) {
            let (tr, va, _) = Layout::fit_sets(method);
            let model = fit_regressor(&regressor, &read_features(&out, &id, tr)?, &read_features(&out, &id, va)?)
                .map_err(|e| e.in_window(&id))?;
            if let FittedModel::Gbdt(m) = &model {
                log::info!("window {id}: {method} keeps {} trees", m.best_iteration);
            }
            model.save(&out.model(&id, method))?;
        }
    }
    Ok(())
}

fn predict(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    let out = layout(cfg);
    let target = cfg.target_column();
    for split in splits(cfg, None)? {
        let id = split.id();
        let test = read_features(&out, &id, "test")?;
        let mut methods = BTreeMap::new();
        for &method in &cfg.protocol.methods {
            let pred = match method {
                Method::ForecasterOnly => forecaster_only_predictions(&test, target)?,
                _ => {
                    let model = FittedModel::load(&out.model(&id, method))?;
                    let te = read_features(&out, &id, Layout::fit_sets(method).2)?;
                    model.predict(&te)?.into_iter().map(Some).collect()
                }
            };
            methods.insert(method, pred);
        }
        let preds = WindowPredictions { timestamps: test.timestamps.clone(), target: test.target.clone(), methods };
        preds.write_csv(&out.predictions(&id))?;
    }
    Ok(())
}

fn report(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    let out = layout(cfg);
    let table = load_table(cfg)?;
    let splits = splits(cfg, Some(&table))?;
    let mut windows = Vec::with_capacity(splits.len());
    for split in &splits {
        let id = split.id();
        let preds = WindowPredictions::read_csv(&out.predictions(&id))?;
        let mut methods = BTreeMap::new();
        for &method in &cfg.protocol.methods {
            let best_iteration = match method {
                Method::ForecasterOnly => None,
                _ => match FittedModel::load(&out.model(&id, method))? {
                    FittedModel::Gbdt(m) => Some(m.best_iteration),
                    FittedModel::Ridge(_) => None,
                },
            };
            let metrics = preds.metrics(method).map_err(|e| e.in_window(&id))?;
            methods.insert(method, MethodResult { metrics, best_iteration });
        }
        let labelled = |set: &str| read_features(&out, &id, set).map(|f| f.labelled_rows().len());
        windows.push(WindowResult {
            id: id.clone(),
            test_month: split.test_month,
            n_train: labelled("train")?,
            n_val: labelled("val")?,
            n_test: labelled("test")?,
            methods,
        });
    }
    let rep = summarize(cfg.mode, cfg.target_column(), &cfg.protocol.methods, windows);
    render_report(&rep, out.out())?;
    write_difficulty(cfg, &table, &splits, out.out())
}

fn evaluate(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    let table = load_table(cfg)?;
    let splits = splits(cfg, Some(&table))?;
    let engine = engine(cfg);
    let rep = run_protocol(&table, &splits, &cfg.protocol(), &engine)?;
    log_evaluations(&engine);
    for w in &rep.windows {
        let line: Vec<String> = w.methods.iter().map(|(m, r)| format!("{m} mae {:.3}", r.metrics.mae)).collect();
        log::info!("window {}: {}", w.id, line.join(", "));
    }
    let out = layout(cfg);
    render_report(&rep, out.out())?;
    write_difficulty(cfg, &table, &splits, out.out())
}

/// Target-price indicators over the whole panel and each test month.
fn write_difficulty(cfg: &RunConfig, table: &TimeSeriesTable, splits: &[RollingSplit], out: &Path) -> Result<()> {
    let target = cfg.target_column();
    let points: Vec<(NaiveDateTime, Option<f64>)> =
        table.index().iter().copied().zip(table.column(target)?.values.iter().copied()).collect();
    let res = table.resolution_minutes();
    let mut rows = vec![(target.to_string(), difficulty_indicators(&points, res, cfg.difficulty)?)];
    for split in splits {
        let month: Vec<_> =
            points.iter().copied().filter(|(t, _)| YearMonth::of(t.date()) == split.test_month).collect();
        rows.push((format!("{target}@{}", split.id()), difficulty_indicators(&month, res, cfg.difficulty)?));
    }
    write_difficulty_csv(&rows, &out.join("difficulty.csv"))
}

fn explain(ctx: &Context, instance: NaiveDateTime, top_k: usize) -> Result<()> {
    let cfg = &ctx.cfg;
    let out = layout(cfg);
    let month = YearMonth::of(instance.date());
    let split = splits(cfg, None)?
        .into_iter()
        .find(|s| s.test_month == month)
        .ok_or_else(|| Error::InvalidSpec(format!("no test window covers {instance}")))?;
    let id = split.id();
    let model = match FittedModel::load(&out.model(&id, Method::Futureboosting))? {
        FittedModel::Gbdt(m) => m,
        FittedModel::Ridge(_) => return Err(Error::InvalidSpec("explain needs a gbdt regressor".into())),
    };
    let test = read_features(&out, &id, "test")?;
    let row = test
        .timestamps
        .iter()
        .position(|t| *t == instance)
        .ok_or_else(|| Error::InvalidSpec(format!("{instance} is not a test instance of window {id}")))?;
    let attr = explain_rows(&model, &test.take_rows(&[row]))?.remove(0);
    log::info!("local accuracy gap {:e}", attr.accuracy_gap());
    let [csv, json, importance] = out.explain(&id, instance);
    write_waterfall(&export_waterfall(&attr, top_k)?, &csv, &json)?;
    write_importance_csv(&global_importance(&model, &test)?, &importance)?;
    log::info!("wrote {}", json.display());
    Ok(())
}

fn print_plan(ctx: &Context, command: &Command) -> Result<()> {
    let cfg = &ctx.cfg;
    let table = match command {
        Command::Simulate | Command::Ingest => None,
        _ if cfg.paths.data.is_file() => Some(load_table(cfg)?),
        _ => None,
    };
    let splits = splits(cfg, table.as_ref())?;
    let out = layout(cfg);
    println!("command: {}", command_name(command));
    println!("config: {}", ctx.config_path.display());
    println!("seed: {}", cfg.seed);
    println!("mode: {:?}, target: {}", cfg.mode, cfg.target_column());
    let data_state = if cfg.paths.data.is_file() { "present" } else { "missing" };
    println!("data: {} ({data_state})", cfg.paths.data.display());
    println!("cache: {}", cfg.cache_dir().display());
    println!("output: {}", out.out().display());
    println!("stage 1:");
    let horizon = table.as_ref().map(|t| t.steps_per_day());
    for (var, spec) in cfg.forecasters() {
        match horizon {
            Some(h) => println!("  {var}: {}", spec.forecaster_id(h)),
            None => println!("  {var}: {:?} context {}", spec.kind, spec.context_length),
        }
    }
    let f = &cfg.features;
    println!(
        "features: {} future columns, {} factors, calendar {}",
        f.future_columns.len(),
        f.factors.len(),
        f.calendar
    );
    match cfg.regressor() {
        RegressorConfig::Gbdt(p) => println!("regressor: gbdt {p:?}"),
        RegressorConfig::Ridge(o) => println!("regressor: ridge {o:?}"),
    }
    let methods: Vec<&str> = cfg.protocol.methods.iter().map(|m| m.as_str()).collect();
    println!("methods: {}", methods.join(", "));
    println!("windows:");
    for s in &splits {
        let range = |r: Option<futureboost::data::MonthRange>| match r {
            Some(r) => format!("{}..{}", r.first, r.last),
            None => "-".into(),
        };
        println!(
            "  {}: train {} ({} days), val {} ({} days), test {} days",
            s.id(),
            range(s.train_range),
            s.train_dates().len(),
            range(s.val_range),
            s.val_dates().len(),
            s.test_dates().len()
        );
    }
    println!("writes:");
    for p in planned_outputs(cfg, command, &splits) {
        println!("  {}", p.display());
    }
    Ok(())
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Simulate => "simulate",
        Command::Ingest => "ingest",
        Command::Forecast => "forecast",
        Command::Features => "features",
        Command::Train => "train",
        Command::Predict => "predict",
        Command::Evaluate => "evaluate",
        Command::Explain { .. } => "explain",
        Command::Report => "report",
    }
}

fn planned_outputs(cfg: &RunConfig, command: &Command, splits: &[RollingSplit]) -> Vec<PathBuf> {
    let out = layout(cfg);
    let ids: Vec<String> = splits.iter().map(|s| s.id()).collect();
    let cache = cfg.cache_dir().join("*.fc.csv");
    match command {
        Command::Simulate | Command::Ingest => vec![cfg.paths.data.clone()],
        Command::Forecast => ids.iter().map(|id| out.forecasts(id)).chain([cache]).collect(),
        Command::Features => ids
            .iter()
            .flat_map(|id| FEATURE_SETS.iter().map(|s| out.features(id, s)).collect::<Vec<_>>())
            .chain([cache])
            .collect(),
        Command::Train => ids
            .iter()
            .flat_map(|id| regressor_methods(cfg).into_iter().map(|m| out.model(id, m)).collect::<Vec<_>>())
            .collect(),
        Command::Predict => ids.iter().map(|id| out.predictions(id)).collect(),
        Command::Evaluate => out.report().into_iter().chain([cache]).collect(),
        Command::Report => out.report().to_vec(),
        Command::Explain { instance, .. } => {
            let month = YearMonth::of(instance.date());
            splits.iter().filter(|s| s.test_month == month).flat_map(|s| out.explain(&s.id(), *instance)).collect()
        }
    }
}
