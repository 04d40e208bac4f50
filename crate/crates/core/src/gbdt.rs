//! Histogram gradient-boosted regression trees with leaf-wise growth,
//! squared loss, L2 leaf regularization, row bagging, per-tree feature
//! subsampling and early stopping on validation MSE.

use crate::error::{Error, Result};
use crate::factors::FeatureMatrix;
use crate::ingest::write_atomic;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// Bin reserved for missing values.
pub const MISSING_BIN: u8 = 255;
const HIST_BINS: usize = 256;
const MODEL_MAGIC: &[u8; 8] = b"FBGBDT\0\0";
pub const MODEL_VERSION: u32 = 1;
/// Below this many (row, feature) cells a histogram is built on one thread.
const PAR_HIST_CELLS: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbdtParams {
    pub learning_rate: f64,
    pub num_leaves: usize,
    pub feature_fraction: f64,
    pub bagging_fraction: f64,
    /// Rows are resampled every this many rounds; 0 disables bagging.
    pub bagging_freq: usize,
    pub min_gain_to_split: f64,
    pub max_rounds: usize,
    /// 0 disables early stopping.
    pub early_stopping_rounds: usize,
    pub l2_leaf_reg: f64,
    pub min_samples_leaf: usize,
    pub max_bins: usize,
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            learning_rate: 0.05,
            num_leaves: 63,
            feature_fraction: 0.9,
            bagging_fraction: 0.8,
            bagging_freq: 5,
            min_gain_to_split: 0.08,
            max_rounds: 30_000,
            early_stopping_rounds: 1000,
            l2_leaf_reg: 1.0,
            min_samples_leaf: 20,
            max_bins: 255,
            seed: 42,
        }
    }
}

impl GbdtParams {
    pub fn validate(&self) -> Result<()> {
        let frac = |f: f64| f > 0.0 && f <= 1.0;
        let ok = self.learning_rate > 0.0
            && self.learning_rate <= 1.0
            && self.num_leaves >= 2
            && frac(self.feature_fraction)
            && frac(self.bagging_fraction)
            && (2..=255).contains(&self.max_bins)
            && self.l2_leaf_reg >= 0.0
            && self.min_gain_to_split.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("invalid gbdt params: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub is_leaf: bool,
    pub split_feature: usize,
    /// Bin index of the split; rows with bin ≤ this go left.
    pub split_bin: u8,
    /// Raw-value threshold; `x ≤ threshold` goes left.
    pub threshold: f64,
    pub default_left: bool,
    pub left: usize,
    pub right: usize,
    pub leaf_value: f64,
    /// Number of (bagged) training rows reaching the node.
    pub cover: f64,
}

impl TreeNode {
    fn leaf(cover: f64) -> Self {
        TreeNode {
            is_leaf: true,
            split_feature: 0,
            split_bin: 0,
            threshold: 0.0,
            default_left: true,
            left: 0,
            right: 0,
            leaf_value: 0.0,
            cover,
        }
    }

    /// Child taken by `x` (`None` for missing).
    pub fn route(&self, x: Option<f64>) -> usize {
        let left = match x {
            Some(v) if !v.is_nan() => v <= self.threshold,
            _ => self.default_left,
        };
        if left {
            self.left
        } else {
            self.right
        }
    }
}

/// Node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict_row(&self, row: &[Option<f64>]) -> f64 {
        let mut i = 0;
        loop {
            let n = &self.nodes[i];
            if n.is_leaf {
                return n.leaf_value;
            }
            i = n.route(row[n.split_feature]);
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    pub base_score: f64,
    pub trees: Vec<Tree>,
    pub feature_names: Vec<String>,
    pub params: GbdtParams,
    /// Number of leading trees used for prediction.
    pub best_iteration: usize,
}

impl TreeEnsemble {
    fn active_trees(&self) -> &[Tree] {
        &self.trees[..self.best_iteration.min(self.trees.len())]
    }

    /// `row` is ordered like `feature_names`.
    pub fn predict_row(&self, row: &[Option<f64>]) -> f64 {
        self.base_score + self.active_trees().iter().map(|t| t.predict_row(row)).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundLog {
    /// Number of trees in the model (0 = base score only).
    pub round: usize,
    pub train_mse: f64,
    pub valid_mse: Option<f64>,
}

/// Per-feature bin edges: bin(x) = #{t in thresholds : t < x}.
#[derive(Debug, Clone)]
struct BinMapper {
    thresholds: Vec<f64>,
}

impl BinMapper {
    /// Quantile edges by rank over the non-missing training values, placed
    /// midway between neighbouring distinct values.
    fn fit(values: &[Option<f64>], max_bins: usize) -> Self {
        let mut v: Vec<f64> = values.iter().flatten().copied().filter(|x| !x.is_nan()).collect();
        v.sort_by(f64::total_cmp);
        let mut distinct = v.clone();
        distinct.dedup();
        let mut thresholds = Vec::new();
        if distinct.len() <= max_bins {
            thresholds.extend(distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
        } else {
            let n = v.len();
            for k in 1..max_bins {
                let lo = v[k * n / max_bins - 1];
                // Next distinct value above `lo`.
                let hi_pos = distinct.partition_point(|&d| d <= lo);
                if hi_pos == distinct.len() {
                    break;
                }
                let t = lo + (distinct[hi_pos] - lo) / 2.0;
                if thresholds.last().is_none_or(|&last| t > last) {
                    thresholds.push(t);
                }
            }
        }
        BinMapper { thresholds }
    }

    fn bin(&self, x: Option<f64>) -> u8 {
        match x {
            Some(v) if !v.is_nan() => self.thresholds.partition_point(|&t| t < v) as u8,
            _ => MISSING_BIN,
        }
    }

    /// Non-missing bins are 0..=n_splits.
    fn n_splits(&self) -> usize {
        self.thresholds.len()
    }
}

struct Hist {
    grad: Vec<f64>,
    count: Vec<u32>,
}

impl Hist {
    fn build(bins: &[Vec<u8>], feats: &[usize], rows: &[u32], grad: &[f64]) -> Hist {
        let one = |&f: &usize| {
            let mut g = vec![0.0; HIST_BINS];
            let mut c = vec![0u32; HIST_BINS];
            let col = &bins[f];
            for &r in rows {
                let b = col[r as usize] as usize;
                g[b] += grad[r as usize];
                c[b] += 1;
            }
            (g, c)
        };
        let parts: Vec<(Vec<f64>, Vec<u32>)> = if rows.len() * feats.len() >= PAR_HIST_CELLS {
            feats.par_iter().map(one).collect()
        } else {
            feats.iter().map(one).collect()
        };
        let mut h = Hist {
            grad: Vec::with_capacity(feats.len() * HIST_BINS),
            count: Vec::with_capacity(feats.len() * HIST_BINS),
        };
        for (g, c) in parts {
            h.grad.extend(g);
            h.count.extend(c);
        }
        h
    }

    fn subtract(parent: &Hist, child: &Hist) -> Hist {
        Hist {
            grad: parent.grad.iter().zip(&child.grad).map(|(a, b)| a - b).collect(),
            count: parent.count.iter().zip(&child.count).map(|(a, b)| a - b).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Split {
    gain: f64,
    feature: usize,
    bin: u8,
    default_left: bool,
}

struct Leaf {
    node: usize,
    rows: Vec<u32>,
    grad_sum: f64,
    hist: Hist,
    best: Option<Split>,
}

fn split_score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

struct Grower<'a> {
    bins: &'a [Vec<u8>],
    mappers: &'a [BinMapper],
    feats: &'a [usize],
    grad: &'a [f64],
    params: &'a GbdtParams,
}

impl Grower<'_> {
    fn best_split(&self, hist: &Hist, grad_sum: f64, n: usize) -> Option<Split> {
        let lambda = self.params.l2_leaf_reg;
        let min_leaf = self.params.min_samples_leaf.max(1) as u32;
        let total = n as u32;
        let parent = split_score(grad_sum, n as f64, lambda);
        let mut best: Option<Split> = None;
        for (k, &f) in self.feats.iter().enumerate() {
            let g = &hist.grad[k * HIST_BINS..(k + 1) * HIST_BINS];
            let c = &hist.count[k * HIST_BINS..(k + 1) * HIST_BINS];
            let (gm, cm) = (g[MISSING_BIN as usize], c[MISSING_BIN as usize]);
            let (mut gl, mut cl) = (0.0, 0u32);
            for b in 0..self.mappers[f].n_splits() {
                gl += g[b];
                cl += c[b];
                let options: &[bool] = if cm > 0 { &[true, false] } else { &[true] };
                for &default_left in options {
                    let (gl, cl) = if default_left { (gl + gm, cl + cm) } else { (gl, cl) };
                    let cr = total - cl;
                    if cl < min_leaf || cr < min_leaf {
                        continue;
                    }
                    let gr = grad_sum - gl;
                    let gain = 0.5 * (split_score(gl, cl as f64, lambda) + split_score(gr, cr as f64, lambda) - parent);
                    if gain > self.params.min_gain_to_split && best.is_none_or(|s| gain > s.gain) {
                        best = Some(Split { gain, feature: f, bin: b as u8, default_left });
                    }
                }
            }
        }
        best
    }

    fn make_leaf(&self, node: usize, rows: Vec<u32>, hist: Hist) -> Leaf {
        let grad_sum = rows.iter().map(|&r| self.grad[r as usize]).sum();
        let best = self.best_split(&hist, grad_sum, rows.len());
        Leaf { node, rows, grad_sum, hist, best }
    }

    fn grow(&self, rows: Vec<u32>) -> Tree {
        let mut nodes = vec![TreeNode::leaf(rows.len() as f64)];
        let hist = Hist::build(self.bins, self.feats, &rows, self.grad);
        let mut leaves = vec![self.make_leaf(0, rows, hist)];
        while leaves.len() < self.params.num_leaves {
            // Highest gain; the earliest-created leaf wins ties.
            let mut pick: Option<(usize, f64)> = None;
            for (i, l) in leaves.iter().enumerate() {
                if let Some(s) = l.best {
                    if pick.is_none_or(|(_, g)| s.gain > g) {
                        pick = Some((i, s.gain));
                    }
                }
            }
            let Some((i, _)) = pick else { break };
            let leaf = leaves.remove(i);
            let split = leaf.best.expect("picked leaf has a split");
            let col = &self.bins[split.feature];
            let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = leaf.rows.iter().partition(|&&r| {
                let b = col[r as usize];
                if b == MISSING_BIN {
                    split.default_left
                } else {
                    b <= split.bin
                }
            });
            let (l_id, r_id) = (nodes.len(), nodes.len() + 1);
            nodes.push(TreeNode::leaf(left_rows.len() as f64));
            nodes.push(TreeNode::leaf(right_rows.len() as f64));
            let parent = &mut nodes[leaf.node];
            parent.is_leaf = false;
            parent.split_feature = split.feature;
            parent.split_bin = split.bin;
            parent.threshold = self.mappers[split.feature].thresholds[split.bin as usize];
            parent.default_left = split.default_left;
            parent.left = l_id;
            parent.right = r_id;
            let (lh, rh) = if left_rows.len() <= right_rows.len() {
                let small = Hist::build(self.bins, self.feats, &left_rows, self.grad);
                let large = Hist::subtract(&leaf.hist, &small);
                (small, large)
            } else {
                let small = Hist::build(self.bins, self.feats, &right_rows, self.grad);
                let large = Hist::subtract(&leaf.hist, &small);
                (large, small)
            };
            // Keep creation order so tie-breaking between leaves is stable.
            leaves.insert(i, self.make_leaf(r_id, right_rows, rh));
            leaves.insert(i, self.make_leaf(l_id, left_rows, lh));
        }
        for l in &leaves {
            let h = l.rows.len() as f64;
            nodes[l.node].leaf_value = -self.params.learning_rate * l.grad_sum / (h + self.params.l2_leaf_reg);
        }
        Tree { nodes }
    }
}

/// Routes a binned row; equivalent to raw-threshold routing on the same data.
fn route_binned(tree: &Tree, bins: &[Vec<u8>], r: usize) -> f64 {
    let mut i = 0;
    loop {
        let n = &tree.nodes[i];
        if n.is_leaf {
            return n.leaf_value;
        }
        let b = bins[n.split_feature][r];
        let left = if b == MISSING_BIN { n.default_left } else { b <= n.split_bin };
        i = if left { n.left } else { n.right };
    }
}

fn mse(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / y.len() as f64
}

/// Labelled rows as (feature columns, target).
fn labelled(m: &FeatureMatrix) -> (Vec<Vec<Option<f64>>>, Vec<f64>) {
    let rows = m.labelled_rows();
    let cols = m.columns.iter().map(|c| rows.iter().map(|&r| c.values[r]).collect()).collect();
    let y = rows.iter().map(|&r| m.target[r].expect("labelled")).collect();
    (cols, y)
}

pub fn fit(train: &FeatureMatrix, valid: Option<&FeatureMatrix>, params: &GbdtParams) -> Result<TreeEnsemble> {
    fit_with_log(train, valid, params).map(|(m, _)| m)
}

/// Trains and returns the per-round train/validation MSE (round 0 is the
/// base score alone).
pub fn fit_with_log(
    train: &FeatureMatrix,
    valid: Option<&FeatureMatrix>,
    params: &GbdtParams,
) -> Result<(TreeEnsemble, Vec<RoundLog>)> {
    params.validate()?;
    let names: Vec<String> = train.columns.iter().map(|c| c.name.clone()).collect();
    if let Some(v) = valid {
        let vn: Vec<&str> = v.names();
        if vn != names.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::FeatureMismatch(format!("train {names:?} vs valid {vn:?}")));
        }
    }
    let (cols, y) = labelled(train);
    if y.is_empty() {
        return Err(Error::EmptyData("no labelled training rows".into()));
    }
    let valid_data = valid.map(labelled).filter(|(_, vy)| !vy.is_empty());
    if params.early_stopping_rounds > 0 && valid_data.is_none() {
        return Err(Error::EmptyData("early stopping needs labelled validation rows".into()));
    }
    let n = y.len();
    let p = names.len();
    let mappers: Vec<BinMapper> = cols.iter().map(|c| BinMapper::fit(c, params.max_bins)).collect();
    let bin_all = |cols: &[Vec<Option<f64>>]| -> Vec<Vec<u8>> {
        cols.iter().zip(&mappers).map(|(c, m)| c.iter().map(|&x| m.bin(x)).collect()).collect()
    };
    let bins = bin_all(&cols);
    let valid_bins = valid_data.as_ref().map(|(vc, vy)| (bin_all(vc), vy));

    let base_score = y.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base_score; n];
    let mut vpred = valid_bins.as_ref().map(|(_, vy)| vec![base_score; vy.len()]);
    let mut log = vec![RoundLog {
        round: 0,
        train_mse: mse(&pred, &y),
        valid_mse: vpred.as_ref().zip(valid_bins.as_ref()).map(|(vp, (_, vy))| mse(vp, vy)),
    }];
    let mut best = (0usize, log[0].valid_mse.unwrap_or(f64::INFINITY));

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let all_rows: Vec<u32> = (0..n as u32).collect();
    let mut bag = all_rows.clone();
    let bag_size = ((params.bagging_fraction * n as f64).round() as usize).clamp(1, n);
    let n_feats = ((params.feature_fraction * p as f64).round() as usize).clamp(1, p.max(1));
    let mut trees = Vec::new();
    let mut grad = vec![0.0; n];

    for round in 0..params.max_rounds {
        if params.bagging_freq > 0 && bag_size < n && round % params.bagging_freq == 0 {
            let mut idx = rand::seq::index::sample(&mut rng, n, bag_size).into_vec();
            idx.sort_unstable();
            bag = idx.into_iter().map(|i| i as u32).collect();
        }
        let feats: Vec<usize> = if n_feats < p {
            let mut f = rand::seq::index::sample(&mut rng, p, n_feats).into_vec();
            f.sort_unstable();
            f
        } else {
            (0..p).collect()
        };
        for i in 0..n {
            grad[i] = pred[i] - y[i];
        }
        let grower = Grower { bins: &bins, mappers: &mappers, feats: &feats, grad: &grad, params };
        let tree = grower.grow(bag.clone());
        if tree.nodes.len() == 1 {
            log::debug!("round {round}: no split clears the gain threshold; stopping");
            break;
        }
        for (i, pr) in pred.iter_mut().enumerate() {
            *pr += route_binned(&tree, &bins, i);
        }
        let mut valid_mse = None;
        if let (Some(vp), Some((vb, vy))) = (vpred.as_mut(), valid_bins.as_ref()) {
            for (i, pr) in vp.iter_mut().enumerate() {
                *pr += route_binned(&tree, vb, i);
            }
            valid_mse = Some(mse(vp, vy));
        }
        trees.push(tree);
        let entry = RoundLog { round: trees.len(), train_mse: mse(&pred, &y), valid_mse };
        log.push(entry);
        if let Some(v) = valid_mse {
            if v < best.1 {
                best = (trees.len(), v);
            }
            if params.early_stopping_rounds > 0 && trees.len() - best.0 >= params.early_stopping_rounds {
                break;
            }
        }
    }
    let best_iteration = if params.early_stopping_rounds > 0 { best.0 } else { trees.len() };
    trees.truncate(best_iteration);
    Ok((TreeEnsemble { base_score, trees, feature_names: names, params: params.clone(), best_iteration }, log))
}

pub fn predict(model: &TreeEnsemble, features: &FeatureMatrix) -> Result<Vec<f64>> {
    let pos = features.positions(&model.feature_names)?;
    Ok((0..features.n_rows())
        .into_par_iter()
        .map(|i| {
            let row: Vec<Option<f64>> = pos.iter().map(|&p| features.columns[p].values[i]).collect();
            model.predict_row(&row)
        })
        .collect())
}

struct Writer(Vec<u8>);

impl Writer {
    fn u64(&mut self, v: u64) {
        self.0.extend(v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend(v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.0.extend(s.as_bytes());
    }
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.0.len() < n {
            return Err(Error::Parse("truncated model file".into()));
        }
        let (a, b) = self.0.split_at(n);
        self.0 = b;
        Ok(a)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Parse("size overflow".into()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.usize()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Layout: magic, u32 version, payload, sha256(magic ‖ version ‖ payload).
pub fn model_bytes(m: &TreeEnsemble) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    let p = &m.params;
    w.f64(p.learning_rate);
    w.u64(p.num_leaves as u64);
    w.f64(p.feature_fraction);
    w.f64(p.bagging_fraction);
    w.u64(p.bagging_freq as u64);
    w.f64(p.min_gain_to_split);
    w.u64(p.max_rounds as u64);
    w.u64(p.early_stopping_rounds as u64);
    w.f64(p.l2_leaf_reg);
    w.u64(p.min_samples_leaf as u64);
    w.u64(p.max_bins as u64);
    w.u64(p.seed);
    w.u64(m.feature_names.len() as u64);
    for n in &m.feature_names {
        w.str(n);
    }
    w.f64(m.base_score);
    w.u64(m.best_iteration as u64);
    w.u64(m.trees.len() as u64);
    for t in &m.trees {
        w.u64(t.nodes.len() as u64);
        for n in &t.nodes {
            w.0.push(n.is_leaf as u8 | (n.default_left as u8) << 1);
            w.u64(n.split_feature as u64);
            w.0.push(n.split_bin);
            w.f64(n.threshold);
            w.u64(n.left as u64);
            w.u64(n.right as u64);
            w.f64(n.leaf_value);
            w.f64(n.cover);
        }
    }
    let mut out = MODEL_MAGIC.to_vec();
    out.extend(MODEL_VERSION.to_le_bytes());
    out.extend(w.0);
    let digest = Sha256::digest(&out);
    out.extend(digest);
    out
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<TreeEnsemble> {
    if bytes.len() < 12 + 32 || &bytes[..8] != MODEL_MAGIC {
        return Err(Error::Parse("not a gbdt model file".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != MODEL_VERSION {
        return Err(Error::VersionMismatch { expected: MODEL_VERSION, found: version });
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err(Error::Checksum("gbdt model".into()));
    }
    let mut r = Reader(&body[12..]);
    let params = GbdtParams {
        learning_rate: r.f64()?,
        num_leaves: r.usize()?,
        feature_fraction: r.f64()?,
        bagging_fraction: r.f64()?,
        bagging_freq: r.usize()?,
        min_gain_to_split: r.f64()?,
        max_rounds: r.usize()?,
        early_stopping_rounds: r.usize()?,
        l2_leaf_reg: r.f64()?,
        min_samples_leaf: r.usize()?,
        max_bins: r.usize()?,
        seed: r.u64()?,
    };
    let n_feat = r.usize()?;
    let feature_names = (0..n_feat).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
    let base_score = r.f64()?;
    let best_iteration = r.usize()?;
    let n_trees = r.usize()?;
    let mut trees = Vec::with_capacity(n_trees.min(1 << 20));
    for _ in 0..n_trees {
        let n_nodes = r.usize()?;
        let mut nodes = Vec::with_capacity(n_nodes.min(1 << 16));
        for _ in 0..n_nodes {
            let flags = r.take(1)?[0];
            nodes.push(TreeNode {
                is_leaf: flags & 1 != 0,
                default_left: flags & 2 != 0,
                split_feature: r.usize()?,
                split_bin: r.take(1)?[0],
                threshold: r.f64()?,
                left: r.usize()?,
                right: r.usize()?,
                leaf_value: r.f64()?,
                cover: r.f64()?,
            });
        }
        trees.push(Tree { nodes });
    }
    if !r.0.is_empty() {
        return Err(Error::Parse("trailing bytes in model file".into()));
    }
    Ok(TreeEnsemble { base_score, trees, feature_names, params, best_iteration })
}

pub fn save_model(m: &TreeEnsemble, path: &Path) -> Result<()> {
    write_atomic(path, &model_bytes(m))
}

pub fn load_model(path: &Path) -> Result<TreeEnsemble> {
    model_from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
