use crate::fixtures::{
    Row, Summary, Windows, CHINA_SUMMARY, DAY_AHEAD_WINDOWS, REALE_SUMMARY, REAL_TIME_WINDOWS, WINDOW_MODELS,
};
use crate::Outcome;
use futureboost::data::YearMonth;
use futureboost::eval::{improvement, summarize, Method, MethodResult, MetricPair, ProtocolMode, WindowResult};
use std::collections::BTreeMap;
use std::time::Instant;

const TOL: f64 = 0.02;
/// Absorbs binary representation error in the printed fixture values.
const FP: f64 = 1e-9;

fn pair(mse: f64, mae: f64) -> MetricPair {
    MetricPair { mse, mae, n: 1 }
}

fn value(cell: &str) -> f64 {
    cell.parse().unwrap()
}

/// Half a unit in the last printed digit.
fn half_ulp(cell: &str) -> f64 {
    let decimals = cell.split('.').nth(1).map_or(0, str::len);
    0.5 * 10f64.powi(-(decimals as i32))
}

/// Improvement in percent per Val column, from the library operation.
fn deltas(baseline: &Row, candidate: &Row) -> [f64; 4] {
    let mut out = [0.0; 4];
    for block in 0..2 {
        let (m, a) = (2 * block, 2 * block + 1);
        let d = improvement(
            pair(value(baseline.val[m]), value(baseline.val[a])),
            pair(value(candidate.val[m]), value(candidate.val[a])),
        )
        .unwrap();
        out[m] = d.delta_mse_pct;
        out[a] = d.delta_mae_pct;
    }
    out
}

/// Range of the improvement over every pair of values that round to the
/// printed cells.
fn delta_range(baseline: &str, candidate: &str) -> (f64, f64) {
    let (b, hb) = (value(baseline), half_ulp(baseline));
    let (c, hc) = (value(candidate), half_ulp(candidate));
    (100.0 * (1.0 - (c + hc) / (b - hb)), 100.0 * (1.0 - (c - hc) / (b + hb)))
}

#[derive(Default)]
struct Tally {
    checked: usize,
    misses: Vec<String>,
    worst: f64,
}

impl Tally {
    fn point(&mut self, what: String, computed: f64, printed: f64) {
        self.checked += 1;
        self.worst = self.worst.max((computed - printed).abs());
        if (computed - printed).abs() > TOL + FP {
            self.misses.push(format!("{what}: {computed:.4} vs {printed:.2}"));
        }
    }

    fn interval(&mut self, what: String, (lo, hi): (f64, f64), printed: f64) {
        self.checked += 1;
        // The printed delta is itself rounded to two decimals.
        if printed < lo - 0.005 - FP || printed > hi + 0.005 + FP {
            self.misses.push(format!("{what}: {printed:.2} outside [{lo:.4}, {hi:.4}]"));
        }
    }

    fn report(&self, label: &str) -> String {
        let mut s = format!("{label} {}/{}", self.checked - self.misses.len(), self.checked);
        if let Some(first) = self.misses.first() {
            s.push_str(&format!(" (largest gap {:.2}pp, first miss {first})", self.worst));
        }
        s
    }
}

const COLUMNS: [&str; 4] = ["blk1 MSE", "blk1 MAE", "blk2 MSE", "blk2 MAE"];

/// Pairs (row, its zero-shot row) for every hybrid row.
fn hybrids(s: &Summary) -> impl Iterator<Item = (&Row, &Row)> {
    s.rows.windows(2).filter(|w| w[1].delta_zs.is_some()).map(|w| (&w[1], &w[0]))
}

fn point_check(s: &Summary) -> Tally {
    let mut t = Tally::default();
    for row in s.rows {
        for (k, d) in deltas(&s.baseline, row).into_iter().enumerate() {
            t.point(format!("{} {} vs baseline", row.name, COLUMNS[k]), d, row.delta_base[k]);
        }
    }
    let mut sums = [[0.0; 2]; 4];
    let mut count = 0.0;
    for (row, zs) in hybrids(s) {
        let base = deltas(&s.baseline, row);
        let vs_zs = deltas(zs, row);
        for k in 0..4 {
            t.point(format!("{} {} vs zero-shot", row.name, COLUMNS[k]), vs_zs[k], row.delta_zs.unwrap()[k]);
            sums[k][0] += base[k];
            sums[k][1] += vs_zs[k];
        }
        count += 1.0;
    }
    for k in 0..4 {
        for (j, vs) in ["baseline", "zero-shot"].iter().enumerate() {
            t.point(format!("Avg Improve {} vs {vs}", COLUMNS[k]), sums[k][j] / count, s.avg_improve[k][j]);
        }
    }
    t
}

fn interval_check(s: &Summary) -> Tally {
    let mut t = Tally::default();
    for row in s.rows {
        for (k, col) in COLUMNS.iter().enumerate() {
            let r = delta_range(s.baseline.val[k], row.val[k]);
            t.interval(format!("{} {col} vs baseline", row.name), r, row.delta_base[k]);
        }
    }
    let mut sums = [[(0.0, 0.0); 2]; 4];
    let mut count = 0.0;
    for (row, zs) in hybrids(s) {
        for k in 0..4 {
            let base = delta_range(s.baseline.val[k], row.val[k]);
            let vs_zs = delta_range(zs.val[k], row.val[k]);
            t.interval(format!("{} {} vs zero-shot", row.name, COLUMNS[k]), vs_zs, row.delta_zs.unwrap()[k]);
            for (acc, r) in sums[k].iter_mut().zip([base, vs_zs]) {
                acc.0 += r.0;
                acc.1 += r.1;
            }
        }
        count += 1.0;
    }
    for k in 0..4 {
        for (j, vs) in ["baseline", "zero-shot"].iter().enumerate() {
            let (lo, hi) = sums[k][j];
            t.interval(format!("Avg Improve {} vs {vs}", COLUMNS[k]), (lo / count, hi / count), s.avg_improve[k][j]);
        }
    }
    t
}

fn improve_rows(w: &Windows) -> Tally {
    let mut t = Tally::default();
    for (m, model) in WINDOW_MODELS.iter().enumerate() {
        let (s, a) = (2 * m, 2 * m + 1);
        let d = improvement(pair(w.avg_zs[s], w.avg_zs[a]), pair(w.avg_fbr[s], w.avg_fbr[a])).unwrap();
        t.point(format!("{model} MSE"), d.delta_mse_pct, w.improve[s]);
        t.point(format!("{model} MAE"), d.delta_mae_pct, w.improve[a]);
    }
    t
}

pub fn improvement_fixtures() -> Outcome {
    let start = Instant::now();
    let china = point_check(&CHINA_SUMMARY);
    let reale = point_check(&REALE_SUMMARY);
    let reale_interval = interval_check(&REALE_SUMMARY);
    let day_ahead = improve_rows(&DAY_AHEAD_WINDOWS);
    let real_time = improve_rows(&REAL_TIME_WINDOWS);
    let secs = start.elapsed().as_secs_f64();
    let summary = [
        china.report("China summary"),
        reale.report("RealE summary"),
        reale_interval.report("RealE summary within rounding"),
        day_ahead.report("day-ahead Improve"),
        real_time.report("real-time Improve"),
    ]
    .join("; ");
    let all_point = [&china, &reale, &day_ahead, &real_time].iter().all(|t| t.misses.is_empty());
    ensure!(all_point && reale_interval.misses.is_empty(), "{summary}");
    ensure!(secs < 1.0, "took {secs:.3}s");
    Ok(summary)
}

fn window_results(w: &Windows, model: usize) -> Vec<WindowResult> {
    let (s, a) = (2 * model, 2 * model + 1);
    w.months
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let month = YearMonth::new(m[..4].parse().unwrap(), m[4..].parse().unwrap()).unwrap();
            let result = |mse, mae| MethodResult { metrics: pair(mse, mae), best_iteration: None };
            WindowResult {
                id: month.to_string(),
                test_month: month,
                n_train: 0,
                n_val: 0,
                n_test: 1,
                methods: BTreeMap::from([
                    (Method::ForecasterOnly, result(w.zs[i][s], w.zs[i][a])),
                    (Method::Futureboosting, result(w.fbr[i][s], w.fbr[i][a])),
                ]),
            }
        })
        .collect()
}

pub fn average_fixtures() -> Outcome {
    let mut checked = 0;
    let mut misses = Vec::new();
    for (label, w) in [("day-ahead", &DAY_AHEAD_WINDOWS), ("real-time", &REAL_TIME_WINDOWS)] {
        for (m, model) in WINDOW_MODELS.iter().enumerate() {
            let methods = [Method::ForecasterOnly, Method::Futureboosting];
            let report = summarize(ProtocolMode::ShanxiLike, "price", &methods, window_results(w, m));
            for (method, printed) in [(Method::ForecasterOnly, &w.avg_zs), (Method::Futureboosting, &w.avg_fbr)] {
                let avg = report.average[&method];
                for (got, want, metric) in [(avg.mse, printed[2 * m], "MSE"), (avg.mae, printed[2 * m + 1], "MAE")] {
                    checked += 1;
                    if (got - want).abs() > TOL + FP {
                        misses.push(format!("{label} {model} {} {metric}: {got:.4} vs {want}", method.as_str()));
                    }
                }
            }
        }
    }
    ensure!(misses.is_empty(), "{}/{checked} AVG cells off: {}", misses.len(), misses.join("; "));
    Ok(format!("{checked}/{checked} AVG cells within {TOL}"))
}
