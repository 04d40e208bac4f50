//! Path-dependent TreeSHAP attributions, global mean-|phi| rankings and
//! per-instance waterfall records.
//!
//! The game is the cover-weighted conditional expectation: at a split on a
//! feature outside the coalition, both children are averaged by cover.

use crate::error::{Error, Result};
use crate::factors::FeatureMatrix;
use crate::gbdt::{Tree, TreeEnsemble};
use crate::ingest::{format_value, write_atomic};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapAttribution {
    pub instance: String,
    pub base_value: f64,
    pub phi: Vec<f64>,
    pub prediction: f64,
    pub feature_names: Vec<String>,
    pub feature_values: Vec<Option<f64>>,
}

impl ShapAttribution {
    /// `base_value + Σ phi − prediction`.
    pub fn accuracy_gap(&self) -> f64 {
        self.base_value + self.phi.iter().sum::<f64>() - self.prediction
    }
}

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: Option<usize>,
    zero: f64,
    one: f64,
    weight: f64,
}

fn extend(path: &mut Vec<PathElement>, zero: f64, one: f64, feature: Option<usize>) {
    let depth = path.len();
    path.push(PathElement { feature, zero, one, weight: if depth == 0 { 1.0 } else { 0.0 } });
    let d1 = (depth + 1) as f64;
    for i in (0..depth).rev() {
        let w = path[i].weight;
        path[i + 1].weight += one * w * (i + 1) as f64 / d1;
        path[i].weight = zero * w * (depth - i) as f64 / d1;
    }
}

fn unwind(path: &mut Vec<PathElement>, index: usize) {
    let depth = path.len() - 1;
    let PathElement { one, zero, .. } = path[index];
    let d1 = (depth + 1) as f64;
    let mut next = path[depth].weight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next * d1 / ((i + 1) as f64 * one);
            next = tmp - path[i].weight * zero * (depth - i) as f64 / d1;
        } else {
            path[i].weight = path[i].weight * d1 / (zero * (depth - i) as f64);
        }
    }
    for i in index..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
    path.pop();
}

/// Total weight of the path with element `index` removed.
fn unwound_sum(path: &[PathElement], index: usize) -> f64 {
    let depth = path.len() - 1;
    let PathElement { one, zero, .. } = path[index];
    let d1 = (depth + 1) as f64;
    let mut next = path[depth].weight;
    let mut total = 0.0;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = next * d1 / ((i + 1) as f64 * one);
            total += tmp;
            next = path[i].weight - tmp * zero * (depth - i) as f64 / d1;
        } else if zero != 0.0 {
            total += path[i].weight / zero / ((depth - i) as f64 / d1);
        }
    }
    total
}

struct Walk<'a> {
    tree: &'a Tree,
    row: &'a [Option<f64>],
    phi: &'a mut [f64],
}

impl Walk<'_> {
    fn recurse(&mut self, node: usize, parent: &[PathElement], zero: f64, one: f64, feature: Option<usize>) {
        let mut path = parent.to_vec();
        extend(&mut path, zero, one, feature);
        let n = &self.tree.nodes[node];
        if n.is_leaf {
            for i in 1..path.len() {
                let w = unwound_sum(&path, i);
                let el = path[i];
                self.phi[el.feature.expect("non-root element")] += w * (el.one - el.zero) * n.leaf_value;
            }
            return;
        }
        let hot = n.route(self.row[n.split_feature]);
        let cold = if hot == n.left { n.right } else { n.left };
        let (mut in_zero, mut in_one) = (1.0, 1.0);
        if let Some(k) = path.iter().position(|e| e.feature == Some(n.split_feature)) {
            in_zero = path[k].zero;
            in_one = path[k].one;
            unwind(&mut path, k);
        }
        let nodes = &self.tree.nodes;
        let hot_frac = nodes[hot].cover / n.cover;
        let cold_frac = nodes[cold].cover / n.cover;
        self.recurse(hot, &path, hot_frac * in_zero, in_one, Some(n.split_feature));
        self.recurse(cold, &path, cold_frac * in_zero, 0.0, Some(n.split_feature));
    }
}

pub fn check_covers(model: &TreeEnsemble) -> Result<()> {
    for (t, tree) in model.trees.iter().enumerate() {
        for (i, n) in tree.nodes.iter().enumerate() {
            let bad = !(n.cover > 0.0)
                || (!n.is_leaf
                    && (tree.nodes[n.left].cover + tree.nodes[n.right].cover - n.cover).abs() > 1e-9 * n.cover);
            if bad {
                return Err(Error::CoverInconsistency { tree: t, node: i });
            }
        }
    }
    Ok(())
}

/// Cover-weighted mean leaf value.
pub fn tree_expectation(tree: &Tree) -> f64 {
    fn go(tree: &Tree, i: usize) -> f64 {
        let n = &tree.nodes[i];
        if n.is_leaf {
            return n.leaf_value;
        }
        let (l, r) = (&tree.nodes[n.left], &tree.nodes[n.right]);
        (l.cover * go(tree, n.left) + r.cover * go(tree, n.right)) / n.cover
    }
    go(tree, 0)
}

pub fn expected_value(model: &TreeEnsemble) -> f64 {
    model.base_score
        + model.trees[..model.best_iteration.min(model.trees.len())].iter().map(tree_expectation).sum::<f64>()
}

/// SHAP values of one tree, added into `phi`.
pub fn tree_shap_single(tree: &Tree, row: &[Option<f64>], phi: &mut [f64]) {
    let mut walk = Walk { tree, row, phi };
    walk.recurse(0, &[], 1.0, 1.0, None);
}

/// `row` is ordered like `model.feature_names`.
pub fn tree_shap(model: &TreeEnsemble, row: &[Option<f64>], instance: impl Into<String>) -> Result<ShapAttribution> {
    check_covers(model)?;
    Ok(shap_unchecked(model, row, instance.into()))
}

fn shap_unchecked(model: &TreeEnsemble, row: &[Option<f64>], instance: String) -> ShapAttribution {
    let mut phi = vec![0.0; model.feature_names.len()];
    for tree in &model.trees[..model.best_iteration.min(model.trees.len())] {
        tree_shap_single(tree, row, &mut phi);
    }
    ShapAttribution {
        instance,
        base_value: expected_value(model),
        phi,
        prediction: model.predict_row(row),
        feature_names: model.feature_names.clone(),
        feature_values: row.to_vec(),
    }
}

/// Attributions for every row of `features`; instance ids are timestamps.
pub fn explain_rows(model: &TreeEnsemble, features: &FeatureMatrix) -> Result<Vec<ShapAttribution>> {
    check_covers(model)?;
    let pos = features.positions(&model.feature_names)?;
    Ok((0..features.n_rows())
        .into_par_iter()
        .map(|i| {
            let row: Vec<Option<f64>> = pos.iter().map(|&p| features.columns[p].values[i]).collect();
            let id = crate::ingest::format_timestamp(features.timestamps[i]);
            shap_unchecked(model, &row, id)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub mean_abs_phi: f64,
}

/// Sorted non-increasing by `mean_abs_phi`; ties keep model feature order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub ranking: Vec<FeatureImportance>,
}

pub fn global_importance(model: &TreeEnsemble, eval_set: &FeatureMatrix) -> Result<GlobalImportance> {
    if eval_set.n_rows() == 0 {
        return Err(Error::EmptyData("global importance over zero rows".into()));
    }
    let attrs = explain_rows(model, eval_set)?;
    let n = attrs.len() as f64;
    let mut ranking: Vec<FeatureImportance> = model
        .feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            // Summing sorted magnitudes makes the mean independent of row order.
            let mut mags: Vec<f64> = attrs.iter().map(|a| a.phi[j].abs()).collect();
            mags.sort_by(f64::total_cmp);
            FeatureImportance { feature: name.clone(), mean_abs_phi: mags.iter().sum::<f64>() / n }
        })
        .collect();
    ranking.sort_by(|a, b| b.mean_abs_phi.total_cmp(&a.mean_abs_phi));
    Ok(GlobalImportance { ranking })
}

pub fn write_importance_csv(imp: &GlobalImportance, path: &Path) -> Result<()> {
    let mut s = String::from("feature,mean_abs_phi\n");
    for f in &imp.ranking {
        let _ = writeln!(s, "{},{}", f.feature, f.mean_abs_phi);
    }
    write_atomic(path, s.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfallItem {
    pub feature: String,
    pub phi: f64,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfallRecord {
    pub instance: String,
    pub base_value: f64,
    pub features: Vec<WaterfallItem>,
    /// Sum of phi over the features not listed.
    pub others: f64,
    pub others_count: usize,
    pub prediction: f64,
}

impl WaterfallRecord {
    pub fn total(&self) -> f64 {
        self.base_value + self.features.iter().map(|f| f.phi).sum::<f64>() + self.others
    }
}

/// Top `top_k` features by |phi| (ties by feature order) plus an aggregate.
pub fn export_waterfall(attr: &ShapAttribution, top_k: usize) -> Result<WaterfallRecord> {
    if top_k == 0 {
        return Err(Error::InvalidSpec("top_k must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..attr.phi.len()).collect();
    order.sort_by(|&a, &b| attr.phi[b].abs().total_cmp(&attr.phi[a].abs()));
    let (top, rest) = order.split_at(top_k.min(order.len()));
    Ok(WaterfallRecord {
        instance: attr.instance.clone(),
        base_value: attr.base_value,
        features: top
            .iter()
            .map(|&j| WaterfallItem {
                feature: attr.feature_names[j].clone(),
                phi: attr.phi[j],
                value: attr.feature_values[j],
            })
            .collect(),
        others: rest.iter().map(|&j| attr.phi[j]).sum(),
        others_count: rest.len(),
        prediction: attr.prediction,
    })
}

/// Writes `<stem>.csv` (`feature,phi,value`) and `<stem>.json`.
pub fn write_waterfall(rec: &WaterfallRecord, csv_path: &Path, json_path: &Path) -> Result<()> {
    let mut s = String::from("feature,phi,value\n");
    for f in &rec.features {
        let _ = writeln!(s, "{},{},{}", f.feature, f.phi, format_value(f.value));
    }
    let _ = writeln!(s, "others,{},", rec.others);
    write_atomic(csv_path, s.as_bytes())?;
    let mut json = serde_json::to_string_pretty(rec)?;
    json.push('\n');
    write_atomic(json_path, json.as_bytes())
}
