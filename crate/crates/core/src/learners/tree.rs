//! CART regression trees grown greedily by squared-error reduction.
//!
//! Candidate thresholds are midpoints between consecutive distinct feature
//! values. Rows are presorted once per feature and the sorted index lists
//! are partitioned in place as the tree grows, so each level costs a
//! linear pass over the rows. Bootstrap replicates are expressed as
//! integer row weights.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, PcmRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
        count: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn leaf(value: f64, count: usize) -> Self {
        Self {
            nodes: vec![Node::Leaf { value, count }],
        }
    }

    /// Rows with `x[feature] <= threshold` go left.
    #[inline]
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value, .. } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows()).map(|i| self.predict_row(x.row(i))).collect()
    }

    /// Depth of the deepest leaf; a single leaf has depth 0.
    pub fn depth(&self) -> usize {
        self.leaves().map(|(_, _, d)| d).max().unwrap_or(0)
    }

    /// `(value, count, depth)` of every leaf.
    pub fn leaves(&self) -> impl Iterator<Item = (f64, usize, usize)> + '_ {
        let mut stack = vec![(0usize, 0usize)];
        core::iter::from_fn(move || {
            while let Some((i, d)) = stack.pop() {
                match self.nodes[i] {
                    Node::Leaf { value, count } => return Some((value, count, d)),
                    Node::Split { left, right, .. } => {
                        stack.push((right, d + 1));
                        stack.push((left, d + 1));
                    }
                }
            }
            None
        })
    }

    pub fn is_leaf(&self) -> bool {
        self.nodes.len() == 1
    }
}

/// Growth limits for one tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Fraction of the allowed features drawn at random for every split.
    pub feature_subset_ratio: f64,
}

/// Column-major copy of a training matrix with per-feature row orderings.
#[derive(Debug, Clone)]
pub struct PresortedData {
    pub(crate) cols: Vec<Vec<f64>>,
    pub(crate) sorted: Vec<Vec<u32>>,
}

impl PresortedData {
    pub fn new(x: &Matrix) -> Self {
        let cols: Vec<Vec<f64>> = (0..x.cols()).map(|j| x.column(j)).collect();
        let sorted = cols
            .iter()
            .map(|c| {
                let mut idx: Vec<u32> = (0..c.len() as u32).collect();
                idx.sort_by(|&a, &b| c[a as usize].total_cmp(&c[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Self { cols, sorted }
    }

    pub fn rows(&self) -> usize {
        self.cols.first().map_or(0, Vec::len)
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }
}

/// Number of features drawn from `available` at `ratio`, at least one.
pub(crate) fn subset_size(available: usize, ratio: f64) -> usize {
    let k = (ratio * available as f64).round() as usize;
    k.clamp(1, available.max(1))
}

struct Grower<'a> {
    data: &'a PresortedData,
    target: &'a [f64],
    weight: Vec<f64>,
    features: &'a [usize],
    /// One sorted row list per entry of `features`.
    sorted: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    params: TreeParams,
    rng: PcmRng,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl<'a> Grower<'a> {
    fn node_stats(&self, lo: usize, hi: usize) -> (f64, f64, f64) {
        let rows = &self.sorted[0][lo..hi];
        let mut w = 0.0;
        let mut s = 0.0;
        for &r in rows {
            let r = r as usize;
            w += self.weight[r];
            s += self.weight[r] * self.target[r];
        }
        let mean = s / w;
        let mut sse = 0.0;
        for &r in rows {
            let r = r as usize;
            let d = self.target[r] - mean;
            sse += self.weight[r] * d * d;
        }
        (w, s, sse)
    }

    fn find_split(&mut self, lo: usize, hi: usize, w_total: f64, s_total: f64) -> Option<BestSplit> {
        let n_allowed = self.features.len();
        let k = subset_size(n_allowed, self.params.feature_subset_ratio);
        let candidates: Vec<usize> = if k >= n_allowed {
            (0..n_allowed).collect()
        } else {
            rng::sample_indices(&mut self.rng, n_allowed, k)
        };
        let min_leaf = self.params.min_leaf as f64;
        let parent = s_total * s_total / w_total;
        let mut best: Option<BestSplit> = None;
        for fp in candidates {
            let feature = self.features[fp];
            let col = &self.data.cols[feature];
            let rows = &self.sorted[fp][lo..hi];
            let mut wl = 0.0;
            let mut sl = 0.0;
            for i in 0..rows.len() - 1 {
                let r = rows[i] as usize;
                wl += self.weight[r];
                sl += self.weight[r] * self.target[r];
                let wr = w_total - wl;
                if wr < min_leaf {
                    break;
                }
                if wl < min_leaf {
                    continue;
                }
                let a = col[r];
                let b = col[rows[i + 1] as usize];
                if !(a < b) {
                    continue;
                }
                let sr = s_total - sl;
                let gain = sl * sl / wl + sr * sr / wr - parent;
                if best.as_ref().is_none_or(|bs| gain > bs.gain) {
                    let mut threshold = 0.5 * (a + b);
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(BestSplit {
                        feature,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }

    fn partition(&mut self, lo: usize, hi: usize, feature: usize, threshold: f64) -> usize {
        let col = &self.data.cols[feature];
        let mut n_left = 0;
        for &r in &self.sorted[0][lo..hi] {
            let left = col[r as usize] <= threshold;
            self.goes_left[r as usize] = left;
            n_left += left as usize;
        }
        for list in self.sorted.iter_mut() {
            self.scratch.clear();
            let seg = &mut list[lo..hi];
            let mut write = 0;
            for i in 0..seg.len() {
                let r = seg[i];
                if self.goes_left[r as usize] {
                    seg[write] = r;
                    write += 1;
                } else {
                    self.scratch.push(r);
                }
            }
            seg[write..].copy_from_slice(&self.scratch);
        }
        lo + n_left
    }

    fn grow(&mut self, lo: usize, hi: usize, depth: usize) -> usize {
        let (w, s, sse) = self.node_stats(lo, hi);
        let mean = s / w;
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: mean,
            count: w as usize,
        });
        let flat = sse <= 1e-20 * w * (mean * mean + 1.0);
        if depth >= self.params.max_depth || w < 2.0 * self.params.min_leaf as f64 || flat || hi - lo < 2 {
            return id;
        }
        let split = match self.find_split(lo, hi, w, s) {
            Some(b) if b.gain > 0.0 && b.gain > 1e-12 * sse => b,
            _ => return id,
        };
        let mid = self.partition(lo, hi, split.feature, split.threshold);
        let left = self.grow(lo, mid, depth + 1);
        let right = self.grow(mid, hi, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

/// Grows one tree on the rows with positive `weights` (all rows when
/// `weights` is `None`), considering only the listed `features`.
pub(crate) fn grow_tree(
    data: &PresortedData,
    target: &[f64],
    weights: Option<&[u32]>,
    features: &[usize],
    params: TreeParams,
    rng: PcmRng,
) -> RegressionTree {
    let n = data.rows();
    let weight: Vec<f64> = match weights {
        Some(w) => w.iter().map(|&c| c as f64).collect(),
        None => vec![1.0; n],
    };
    let sorted: Vec<Vec<u32>> = features
        .iter()
        .map(|&f| match weights {
            Some(w) => data.sorted[f].iter().copied().filter(|&r| w[r as usize] > 0).collect(),
            None => data.sorted[f].clone(),
        })
        .collect();
    let m = sorted.first().map_or(0, Vec::len);
    if m == 0 || features.is_empty() {
        let (w, s) = (0..n).fold((0.0, 0.0), |(w, s), r| (w + weight[r], s + weight[r] * target[r]));
        let value = if w > 0.0 { s / w } else { 0.0 };
        return RegressionTree::leaf(value, w as usize);
    }
    let mut g = Grower {
        data,
        target,
        weight,
        features,
        sorted,
        goes_left: vec![false; n],
        scratch: Vec::with_capacity(m),
        params,
        rng,
        nodes: Vec::new(),
    };
    g.grow(0, m, 0);
    RegressionTree { nodes: g.nodes }
}

/// Fits a single regression tree. With fewer than `2 * min_leaf` rows the
/// result is a single leaf predicting the mean.
pub fn fit_tree(
    x: &Matrix,
    y: &[f64],
    max_depth: usize,
    min_leaf: usize,
    feature_subset_ratio: f64,
    seed: u64,
) -> Result<RegressionTree> {
    check_xy(x, y)?;
    if min_leaf == 0 {
        return Err(Error::InvalidParameter("min_leaf must be >= 1".into()));
    }
    if !(feature_subset_ratio > 0.0 && feature_subset_ratio <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "feature subset ratio {feature_subset_ratio} outside (0, 1]"
        )));
    }
    let data = PresortedData::new(x);
    let features: Vec<usize> = (0..x.cols()).collect();
    let params = TreeParams {
        max_depth,
        min_leaf,
        feature_subset_ratio,
    };
    Ok(grow_tree(&data, y, None, &features, params, rng::rng_from_seed(seed)))
}

pub(crate) fn check_xy(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::Empty("training rows"));
    }
    if !x.is_finite() {
        return Err(Error::InvalidParameter("non-finite feature value".into()));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i, field: "target" });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Matrix {
        Matrix::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn constant_target_is_single_leaf() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0], vec![5.0, 0.0], vec![7.0, 9.0]]).unwrap();
        let t = fit_tree(&x, &[4.0; 4], 5, 1, 1.0, 0).unwrap();
        assert!(t.is_leaf());
        assert_eq!(t.predict_row(&[0.0, 0.0]), 4.0);
    }

    #[test]
    fn step_function_depth_one() {
        let xs: Vec<f64> = (-5..5).map(|i| i as f64 + 0.5).collect();
        let ys: Vec<f64> = xs.iter().map(|&v| if v < 0.0 { 0.0 } else { 10.0 }).collect();
        let t = fit_tree(&col(&xs), &ys, 1, 1, 1.0, 0).unwrap();
        match t.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 0.0);
            }
            _ => panic!("expected a split"),
        }
        assert_eq!(t.predict_row(&[-3.0]), 0.0);
        assert_eq!(t.predict_row(&[3.0]), 10.0);
    }

    #[test]
    fn min_leaf_equal_m_is_root_only() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [1.0, 5.0, 2.0, 8.0];
        let t = fit_tree(&col(&xs), &ys, 4, 4, 1.0, 0).unwrap();
        assert!(t.is_leaf());
        assert_eq!(t.predict_row(&[0.0]), 4.0);
    }

    #[test]
    fn respects_depth_and_leaf_bounds() {
        let xs: Vec<f64> = (0..200).map(|i| ((i * 37) % 200) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|v| (v * 0.1).sin() * 10.0).collect();
        for (depth, leaf) in [(1, 1), (3, 5), (7, 2), (6, 30)] {
            let t = fit_tree(&col(&xs), &ys, depth, leaf, 1.0, 9).unwrap();
            assert!(t.depth() <= depth);
            assert!(t.leaves().all(|(_, c, _)| c >= leaf));
            let total: usize = t.leaves().map(|(_, c, _)| c).sum();
            assert_eq!(total, 200);
        }
    }

    #[test]
    fn ties_break_to_lowest_feature() {
        // both columns separate the target identically
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
        let t = fit_tree(&x, &[0.0, 0.0, 1.0, 1.0], 1, 1, 1.0, 0).unwrap();
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, .. }));
    }
}
