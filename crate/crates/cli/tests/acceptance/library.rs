use crate::Outcome;
use chrono::{Datelike, NaiveDate, NaiveDateTime, Weekday};
use futureboost::config::RunConfig;
use futureboost::data::{enumerate_day_windows, Availability, Column, TimeSeriesTable, YearMonth};
use futureboost::eval::{compute_metrics, difficulty_indicators, excess_kurtosis, quantile, DifficultyParams};
use futureboost::explain::tree_shap;
use futureboost::factors::{assemble_features, FeatureLayout, FeatureMatrix};
use futureboost::forecast::{ForecastEngine, ForecasterKind, ForecasterSpec};
use futureboost::gbdt::{fit, fit_with_log, predict, GbdtParams, Tree, TreeEnsemble};
use futureboost::ingest::fit_standardizer;
use futureboost::Error;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::BTreeMap;
use std::time::Instant;

fn runner(cases: u32) -> TestRunner {
    let config = Config { failure_persistence: None, ..Config::with_cases(cases) };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn metric_oracle() -> Outcome {
    let pairs = (1usize..200)
        .prop_flat_map(|n| (prop::collection::vec(-1e4f64..1e4, n), prop::collection::vec(-1e4f64..1e4, n)));
    runner(1000)
        .run(&pairs, |(y, yhat)| {
            let m = compute_metrics(&y, &yhat).unwrap();
            let (mut se, mut ae) = (0.0, 0.0);
            for i in 0..y.len() {
                let e = yhat[i] - y[i];
                se += e * e;
                ae += e.abs();
            }
            let n = y.len() as f64;
            prop_assert!(rel_close(m.mse, se / n, 1e-12), "mse {} vs {}", m.mse, se / n);
            prop_assert!(rel_close(m.mae, ae / n, 1e-12), "mae {} vs {}", m.mae, ae / n);
            prop_assert!(m.mae * m.mae <= m.mse, "mae^2 {} > mse {}", m.mae * m.mae, m.mse);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("1000 random vectors".into())
}

fn dataset(seed: u64, n: usize, p: usize, lo: f64, hi: f64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(lo..hi)).collect()).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| 3.0 * r[0].sin() + r[1] * r[p - 1] - 0.5 * r[p - 1] + rng.random_range(-0.5..0.5))
        .collect();
    let names: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    FeatureMatrix::from_rows(&names, &rows, &y)
}

pub fn gbdt_monotone() -> Outcome {
    let mut worst: f64 = f64::NEG_INFINITY;
    for (seed, learning_rate, l2_leaf_reg) in
        [(1, 0.1, 0.0), (2, 1.0, 1.0), (3, 0.5, 10.0), (4, 0.05, 0.5), (5, 1.0, 0.0)]
    {
        let data = dataset(seed, 400, 4, -2.0, 2.0);
        let params = GbdtParams {
            learning_rate,
            l2_leaf_reg,
            num_leaves: 15,
            min_samples_leaf: 5,
            min_gain_to_split: 0.0,
            bagging_fraction: 1.0,
            feature_fraction: 1.0,
            max_rounds: 500,
            early_stopping_rounds: 0,
            ..Default::default()
        };
        let (_, log) = fit_with_log(&data, None, &params).map_err(|e| e.to_string())?;
        ensure!(log.len() == 501, "dataset {seed}: stopped after {} rounds", log.len() - 1);
        for w in log.windows(2) {
            let rise = w[1].train_mse - w[0].train_mse;
            worst = worst.max(rise);
            ensure!(rise <= 1e-12, "dataset {seed} round {}: {} -> {}", w[1].round, w[0].train_mse, w[1].train_mse);
        }
    }
    Ok(format!("5 datasets x 500 rounds, largest step {worst:.3e}"))
}

pub fn gbdt_early_stopping() -> Outcome {
    // Few, noisy training rows and deep trees: validation error falls while
    // the signal is learned, then rises as the trees fit the noise.
    let noisy = |seed: u64, n: usize, noise: f64| {
        let mut data = dataset(seed, n, 3, -2.0, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        for t in data.target.iter_mut() {
            *t = t.map(|y| y + rng.random_range(-1.0..1.0) * noise);
        }
        data
    };
    let train = noisy(11, 150, 4.0);
    let valid = noisy(12, 400, 0.0);
    let patience = 25;
    let params = GbdtParams {
        early_stopping_rounds: patience,
        max_rounds: 2000,
        learning_rate: 0.2,
        num_leaves: 31,
        min_samples_leaf: 2,
        min_gain_to_split: 0.0,
        ..Default::default()
    };
    let (model, log) = fit_with_log(&train, Some(&valid), &params).map_err(|e| e.to_string())?;
    let rounds = log.len() - 1;
    let (best_round, best_mse) = log
        .iter()
        .map(|r| (r.round, r.valid_mse.unwrap()))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    ensure!(rounds < params.max_rounds, "ran all {rounds} rounds");
    ensure!(
        best_round > 0 && log[rounds].valid_mse.unwrap() > best_mse,
        "no overfitting: minimum at round {best_round}"
    );
    ensure!(rounds <= best_round + patience, "stopped at {rounds}, minimum at {best_round}");
    ensure!(model.best_iteration == best_round, "best_iteration {} vs argmin {best_round}", model.best_iteration);
    ensure!(model.trees.len() == best_round, "kept {} trees", model.trees.len());
    let v = predict(&model, &valid).map_err(|e| e.to_string())?;
    let mse = v.iter().zip(&valid.target).map(|(p, t)| (p - t.unwrap()).powi(2)).sum::<f64>() / v.len() as f64;
    ensure!((mse - best_mse).abs() <= 1e-9 * best_mse, "kept model mse {mse} vs minimum {best_mse}");
    Ok(format!("minimum at round {best_round}, stopped at {rounds}"))
}

fn shap_data(seed: u64, n: usize, p: usize) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| 4.0 * r[0] * r[1] + (3.0 * r[2]).sin() + r.iter().skip(3).sum::<f64>() + rng.random_range(-0.2..0.2))
        .collect();
    let names: Vec<String> = (0..p).map(|j| format!("f{j}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    FeatureMatrix::from_rows(&names, &rows, &y)
}

/// Cover-weighted expectation of one tree when only features in `mask` are known.
fn conditional_value(tree: &Tree, row: &[Option<f64>], mask: u32, node: usize) -> f64 {
    let n = &tree.nodes[node];
    if n.is_leaf {
        return n.leaf_value;
    }
    if mask & (1 << n.split_feature) != 0 {
        conditional_value(tree, row, mask, n.route(row[n.split_feature]))
    } else {
        let (l, r) = (&tree.nodes[n.left], &tree.nodes[n.right]);
        (l.cover * conditional_value(tree, row, mask, n.left) + r.cover * conditional_value(tree, row, mask, n.right))
            / n.cover
    }
}

/// Shapley values by enumerating all 2^M coalitions.
fn exhaustive_shapley(model: &TreeEnsemble, row: &[Option<f64>]) -> Vec<f64> {
    let m = row.len();
    let value = |mask: u32| model.trees.iter().map(|t| conditional_value(t, row, mask, 0)).sum::<f64>();
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    (0..m)
        .map(|i| {
            (0u32..1 << m)
                .filter(|mask| mask & (1 << i) == 0)
                .map(|mask| {
                    let s = mask.count_ones() as usize;
                    fact(s) * fact(m - s - 1) / fact(m) * (value(mask | (1 << i)) - value(mask))
                })
                .sum()
        })
        .collect()
}

pub fn treeshap_exact() -> Outcome {
    let start = Instant::now();
    let err = |e: Error| e.to_string();

    let data = shap_data(7, 2000, 6);
    let params = GbdtParams { max_rounds: 200, early_stopping_rounds: 0, ..Default::default() };
    let model = fit(&data, None, &params).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_gap: f64 = 0.0;
    for k in 0..100 {
        let row: Vec<Option<f64>> =
            (0..6).map(|_| if rng.random_bool(0.05) { None } else { Some(rng.random_range(-1.5..1.5)) }).collect();
        let a = tree_shap(&model, &row, k.to_string()).map_err(err)?;
        let gap = (a.base_value + a.phi.iter().sum::<f64>() - model.predict_row(&row)).abs();
        worst_gap = worst_gap.max(gap);
        ensure!(gap <= 1e-6, "instance {k}: local accuracy gap {gap:e}");
    }

    let mut worst_oracle: f64 = 0.0;
    for (seed, p, trees) in [(1, 8, 5), (2, 5, 3), (3, 8, 1), (4, 3, 5), (5, 8, 5)] {
        let data = shap_data(seed, 600, p);
        let params = GbdtParams {
            max_rounds: trees,
            early_stopping_rounds: 0,
            num_leaves: 12,
            learning_rate: 0.3,
            min_samples_leaf: 5,
            seed,
            ..Default::default()
        };
        let model = fit(&data, None, &params).map_err(err)?;
        ensure!(model.trees.len() <= 5 && p <= 8, "oracle model too large");
        for i in (0..data.n_rows()).step_by(53) {
            let row = data.row(i);
            let fast = tree_shap(&model, &row, i.to_string()).map_err(err)?;
            for (j, (a, b)) in fast.phi.iter().zip(exhaustive_shapley(&model, &row)).enumerate() {
                worst_oracle = worst_oracle.max((a - b).abs());
                ensure!((a - b).abs() <= 1e-8, "seed {seed} row {i} feature {j}: {a} vs {b}");
            }
        }
    }

    let mut data = shap_data(9, 500, 4);
    // A constant column can never be split on.
    for v in data.columns[2].values.iter_mut() {
        *v = Some(1.0);
    }
    let model = fit(&data, None, &GbdtParams { max_rounds: 50, early_stopping_rounds: 0, ..Default::default() })
        .map_err(err)?;
    for i in 0..50 {
        let a = tree_shap(&model, &data.row(i), "dummy").map_err(err)?;
        ensure!(a.phi[2] == 0.0, "dummy feature phi {} on row {i}", a.phi[2]);
    }

    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1}s");
    Ok(format!("local accuracy gap <= {worst_gap:.1e}, oracle gap <= {worst_oracle:.1e}, dummy phi = 0"))
}

const DAYS: usize = 20;
const H: usize = 24;

fn leakage_table(seed: u64, tags: &[Availability]) -> TimeSeriesTable {
    let t0 = leakage_start().and_hms_opt(0, 0, 0).unwrap();
    let n = DAYS * H;
    let index = (0..n).map(|i| t0 + chrono::Duration::hours(i as i64)).collect();
    let wave = |k: usize| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let s = (i as f64 * 0.26 + k as f64).sin() * 10.0 + (i as f64 * 0.013).cos() * 3.0;
                s + ((i as u64 * 2654435761 + seed * 97 + k as u64) % 1000) as f64 / 500.0
            })
            .collect()
    };
    let mut cols = vec![Column::dense("price", Availability::Target, &wave(0))];
    for (k, tag) in tags.iter().enumerate() {
        cols.push(Column::dense(format!("c{k}"), *tag, &wave(k + 1)));
    }
    TimeSeriesTable::new(60, index, cols).unwrap()
}

fn leakage_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2025, 3, 1).unwrap()
}

const TAGS: [Availability; 5] = [
    Availability::Target,
    Availability::HistoricalExogenous,
    Availability::FutureAvailableExogenous,
    Availability::ConstructedFactor,
    Availability::ForecastedFeature,
];

pub fn leakage_guards() -> Outcome {
    let start = leakage_start();
    let tagged = (prop::collection::vec(0usize..5, 1..6), prop::collection::vec(any::<bool>(), 6));
    runner(128)
        .run(&tagged, |(tags, pick)| {
            let tags: Vec<Availability> = tags.into_iter().map(|k| TAGS[k]).collect();
            let t = leakage_table(1, &tags);
            let chosen: Vec<usize> = (0..tags.len()).filter(|&k| pick[k]).collect();
            let layout = FeatureLayout {
                forecast_variables: vec![],
                factors: vec![],
                future_columns: chosen.iter().map(|k| format!("c{k}")).collect(),
                calendar: true,
                target: "price".into(),
            };
            let windows = enumerate_day_windows(&t, start, start + chrono::Duration::days(2)).unwrap();
            let leaky =
                chosen.iter().any(|&k| matches!(tags[k], Availability::Target | Availability::HistoricalExogenous));
            match assemble_features(&BTreeMap::new(), &layout, &t, &windows) {
                Ok(_) => prop_assert!(!leaky, "accepted historical columns {tags:?} {chosen:?}"),
                Err(e) => prop_assert!(leaky && matches!(e, Error::AvailabilityViolation { .. }), "{e}"),
            }
            Ok(())
        })
        .map_err(|e| format!("(a) assembly: {e}"))?;

    let kinds = [ForecasterKind::SeasonalNaive, ForecasterKind::RidgeLagAr, ForecasterKind::ExpSmoothing];
    runner(64)
        .run(&(0u64..1000, 15usize..DAYS - 1, 0usize..3), |(seed, issue, kind)| {
            let t = leakage_table(seed, &[Availability::HistoricalExogenous]);
            let issue_day = start + chrono::Duration::days(issue as i64);
            let vars = vec!["price".to_string(), "c0".to_string()];
            let specs: BTreeMap<String, ForecasterSpec> =
                vars.iter().map(|v| (v.clone(), ForecasterSpec::new(kinds[kind]).with_context(14 * H))).collect();
            let full = ForecastEngine::new(None).forecast_day(&t, &vars, issue_day, &specs).unwrap();
            let cut = ForecastEngine::new(None)
                .forecast_day(&t.truncated_after(issue_day), &vars, issue_day, &specs)
                .unwrap();
            prop_assert_eq!(full, cut);
            Ok(())
        })
        .map_err(|e| format!("(b) forecasts: {e}"))?;

    runner(64)
        .run(&(0u64..1000, -1e9f64..1e9, 5usize..15), |(seed, poison, split)| {
            let t = leakage_table(seed, &[Availability::HistoricalExogenous, Availability::FutureAvailableExogenous]);
            let train: Vec<NaiveDate> = (0..split).map(|d| start + chrono::Duration::days(d as i64)).collect();
            let cols = ["price", "c0", "c1"];
            let clean = fit_standardizer(&t, &train, &cols, "train").unwrap();
            let (res, index, columns) = t.into_parts();
            let poisoned = columns
                .into_iter()
                .map(|mut c| {
                    for v in c.values.iter_mut().skip(split * H) {
                        *v = Some(poison);
                    }
                    c
                })
                .collect();
            let dirty = TimeSeriesTable::new(res, index, poisoned).unwrap();
            prop_assert_eq!(clean, fit_standardizer(&dirty, &train, &cols, "train").unwrap());
            Ok(())
        })
        .map_err(|e| format!("(c) standardizer: {e}"))?;
    Ok("assembly 128 cases, forecasts 64 cases, standardizer 64 cases".into())
}

pub fn gaussian_reference() -> Outcome {
    let n = 35040;
    // Scaled like a day-ahead price; mu puts p99 at twice the median.
    let sigma = 120.0;
    let mu = 2.326 * sigma;
    let mut rng = ChaCha8Rng::seed_from_u64(2025);
    let prices: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            mu + sigma * z
        })
        .collect();
    let t0: NaiveDateTime = NaiveDate::from_ymd_opt(2025, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let points: Vec<_> =
        prices.iter().enumerate().map(|(i, p)| (t0 + chrono::Duration::minutes(15 * i as i64), Some(*p))).collect();

    let diffs: Vec<f64> = prices.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64).sqrt();
    let params = DifficultyParams { jump_threshold: 2.576 * sd, ..Default::default() };
    let r = difficulty_indicators(&points, 15, params).map_err(|e| e.to_string())?;

    let kurtosis = r.excess_kurtosis.ok_or("no kurtosis")?;
    let jump_freq = r.jump_freq.ok_or("no jump frequency")?;
    let tail = r.tail_ratio.ok_or("no tail ratio")?;
    // Independent checks of the library values.
    let oracle_jumps = diffs.iter().filter(|d| d.abs() > 2.576 * sd).count() as f64 / diffs.len() as f64;
    ensure!(jump_freq == oracle_jumps, "jump_freq {jump_freq} vs direct count {oracle_jumps}");
    ensure!(excess_kurtosis(&prices) == Some(kurtosis), "kurtosis disagrees with the column statistic");
    let oracle_tail = quantile(&prices, 0.99).unwrap() / quantile(&prices, 0.5).unwrap();
    ensure!(rel_close(tail, oracle_tail, 1e-12), "tail {tail} vs {oracle_tail}");

    let detail = format!("kurtosis {kurtosis:.4}, P(|dp| > 2.576 sd) {:.3}%, p99/p50 {tail:.3}", 100.0 * jump_freq);
    ensure!(kurtosis.abs() <= 0.15, "{detail}");
    ensure!((0.005..=0.015).contains(&jump_freq), "{detail}");
    ensure!((1.5..=2.5).contains(&tail), "{detail}");
    Ok(detail)
}

pub fn protocol_layout() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let holidays = ["2024-10-01", "2024-12-25", "2025-01-01", "2025-05-01", "2025-10-01", "2025-10-02"];
    std::fs::write(dir.path().join("holidays.txt"), holidays.join("\n")).map_err(|e| e.to_string())?;
    let text = r#"
mode = "shanxi_like"

[paths]
data = "panel.csv"

[stage1]
variables = ["day_ahead_price"]

[features]
future_columns = ["system_load_forecast"]

[protocol]
test_months = ["2025-01", "2025-02", "2025-03", "2025-04", "2025-05", "2025-06",
               "2025-07", "2025-08", "2025-09", "2025-10", "2025-11", "2025-12"]
holiday_file = "holidays.txt"
"#;
    let cfg = RunConfig::parse(text, dir.path()).map_err(|e| e.to_string())?;
    let calendar = cfg.holidays().map_err(|e| e.to_string())?;
    ensure!(calendar.len() == holidays.len(), "loaded {} holidays", calendar.len());
    let splits = cfg.splits(None).map_err(|e| e.to_string())?;
    ensure!(splits.len() == 12, "{} splits", splits.len());
    let mut removed = 0;
    for (s, m) in splits.iter().zip(1..=12) {
        let month = YearMonth::new(2025, m).unwrap();
        let id = s.id();
        ensure!(s.test_month == month, "split {id} for month {month}");
        let (train, val) =
            (s.train_range.ok_or(format!("{id}: no train range"))?, s.val_range.ok_or(format!("{id}: no val range"))?);
        ensure!(train.len() == 12 && val.len() == 2, "{id}: {} / {} months", train.len(), val.len());
        ensure!(
            train.last.add_months(1) == val.first && val.last.add_months(1) == month,
            "{id}: ranges not contiguous"
        );
        let (tr, va, te) = (s.train_dates(), s.val_dates(), s.test_dates());
        ensure!(
            tr.last().unwrap() < va.first().unwrap() && va.last().unwrap() < te.first().unwrap(),
            "{id}: ranges overlap"
        );
        for d in tr.iter().chain(&va).chain(&te) {
            ensure!(!matches!(d.weekday(), Weekday::Sat | Weekday::Sun), "{id}: weekend {d} kept");
            ensure!(!calendar.contains(*d), "{id}: holiday {d} kept");
        }
        ensure!(te.iter().all(|d| YearMonth::of(*d) == month), "{id}: test date outside the month");
        let all_days = train.days().len() + val.days().len() + month.days().len();
        removed += all_days - tr.len() - va.len() - te.len();
    }
    Ok(format!("12 windows of 12/2/1 months, {removed} weekend/holiday day-slots removed"))
}
