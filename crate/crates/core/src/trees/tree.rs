use ndarray::{ArrayView1, ArrayView2};
use rand::Rng;

use super::binning::BinnedMatrix;
use super::TreeParams;
use crate::datagen::{seeded_rng, SimRng};
use crate::error::{precondition, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// `x[feature] <= threshold` goes to `left`. `bin` is the threshold's index
    /// among the candidates the tree was grown with.
    Split {
        feature: usize,
        threshold: f64,
        bin: u16,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// CART regression tree stored as a flat node array rooted at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
    /// Variance reduction accumulated per split feature.
    pub training_gain: Vec<f64>,
}

impl RegressionTree {
    pub fn n_features(&self) -> usize {
        self.training_gain.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    #[inline]
    pub fn predict_row(&self, row: ArrayView1<f64>) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    #[inline]
    pub(crate) fn predict_binned(&self, data: &BinnedMatrix, row: usize) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    bin,
                    left,
                    right,
                    ..
                } => at = if data.column(feature)[row] <= bin { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: x.ncols(),
            });
        }
        Ok(x.rows().into_iter().map(|r| self.predict_row(r)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BestSplit {
    pub feature: usize,
    pub bin: usize,
    pub gain: f64,
}

struct Grower<'a> {
    data: &'a BinnedMatrix,
    target: &'a [f64],
    params: &'a TreeParams,
    mtry: usize,
    rng: SimRng,
    nodes: Vec<Node>,
    gain: Vec<f64>,
    hist_sum: Vec<f64>,
    hist_cnt: Vec<u32>,
    scratch: Vec<u32>,
    features: Vec<usize>,
}

impl<'a> Grower<'a> {
    fn leaf_value(&self, idx: &[u32]) -> f64 {
        idx.iter().map(|&i| self.target[i as usize]).sum::<f64>() / idx.len() as f64
    }

    fn is_constant(&self, idx: &[u32]) -> bool {
        let first = self.target[idx[0] as usize];
        idx.iter().all(|&i| self.target[i as usize] == first)
    }

    fn sample_features(&mut self) {
        let p = self.data.n_features();
        self.features.clear();
        self.features.extend(0..p);
        if self.mtry < p {
            for k in 0..self.mtry {
                let pick = self.rng.gen_range(k..p);
                self.features.swap(k, pick);
            }
            self.features.truncate(self.mtry);
            self.features.sort_unstable();
        }
    }

    fn best_split(&mut self, idx: &[u32]) -> Option<BestSplit> {
        self.sample_features();
        let features = std::mem::take(&mut self.features);
        let best = find_best_split(
            self.data,
            self.target,
            idx,
            &features,
            self.params.min_leaf,
            &mut self.hist_sum,
            &mut self.hist_cnt,
        );
        self.features = features;
        best
    }

    fn grow(&mut self, idx: &mut [u32], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        let n = idx.len();
        let splittable = depth < self.params.max_depth && n >= 2 * self.params.min_leaf && !self.is_constant(idx);
        let split = if splittable { self.best_split(idx) } else { None };
        let Some(split) = split else {
            self.nodes[id] = Node::Leaf {
                value: self.leaf_value(idx),
            };
            return id;
        };

        let codes = self.data.column(split.feature);
        let bin = split.bin as u16;
        self.scratch.clear();
        let mut n_left = 0;
        for k in 0..n {
            let i = idx[k];
            if codes[i as usize] <= bin {
                idx[n_left] = i;
                n_left += 1;
            } else {
                self.scratch.push(i);
            }
        }
        idx[n_left..].copy_from_slice(&self.scratch);

        self.gain[split.feature] += split.gain;
        let (l, r) = idx.split_at_mut(n_left);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: self.data.threshold(split.feature, split.bin),
            bin,
            left,
            right,
        };
        id
    }
}

/// Best `(feature, bin)` over `features` by variance reduction
/// `n_l n_r / n (mean_l - mean_r)^2`, which equals `SSE - SSE_l - SSE_r`.
/// Ties keep the lowest feature index, then the lowest threshold.
pub(crate) fn find_best_split(
    data: &BinnedMatrix,
    target: &[f64],
    idx: &[u32],
    features: &[usize],
    min_leaf: usize,
    hist_sum: &mut Vec<f64>,
    hist_cnt: &mut Vec<u32>,
) -> Option<BestSplit> {
    let n = idx.len();
    let total: f64 = idx.iter().map(|&i| target[i as usize]).sum();
    let mut best: Option<BestSplit> = None;
    for &j in features {
        let bins = data.n_bins(j);
        if bins < 2 {
            continue;
        }
        hist_sum.clear();
        hist_sum.resize(bins, 0.0);
        hist_cnt.clear();
        hist_cnt.resize(bins, 0);
        let codes = data.column(j);
        for &i in idx {
            let c = codes[i as usize] as usize;
            hist_sum[c] += target[i as usize];
            hist_cnt[c] += 1;
        }
        let mut left_sum = 0.0;
        let mut left_cnt = 0usize;
        for b in 0..bins - 1 {
            left_sum += hist_sum[b];
            left_cnt += hist_cnt[b] as usize;
            if hist_cnt[b] == 0 || left_cnt < min_leaf {
                continue;
            }
            let right_cnt = n - left_cnt;
            if right_cnt < min_leaf {
                break;
            }
            let mean_l = left_sum / left_cnt as f64;
            let mean_r = (total - left_sum) / right_cnt as f64;
            let gain = (left_cnt as f64) * (right_cnt as f64) / n as f64 * (mean_l - mean_r).powi(2);
            if gain > 0.0 && best.is_none_or(|bst| gain > bst.gain) {
                best = Some(BestSplit { feature: j, bin: b, gain });
            }
        }
    }
    best
}

/// Grows one tree on the rows listed in `rows` (repeats allowed, as in a bootstrap).
pub(crate) fn grow_tree(
    data: &BinnedMatrix,
    target: &[f64],
    rows: Vec<u32>,
    params: &TreeParams,
    rng: SimRng,
) -> Result<RegressionTree> {
    if rows.is_empty() {
        return Err(precondition("cannot grow a tree on zero rows"));
    }
    let p = data.n_features();
    let mtry = params.mtry.resolve(p)?;
    let mut grower = Grower {
        data,
        target,
        params,
        mtry,
        rng,
        nodes: Vec::new(),
        gain: vec![0.0; p],
        hist_sum: Vec::with_capacity(data.max_bins()),
        hist_cnt: Vec::with_capacity(data.max_bins()),
        scratch: Vec::with_capacity(rows.len()),
        features: Vec::with_capacity(p),
    };
    let mut rows = rows;
    grower.grow(&mut rows, 0);
    Ok(RegressionTree {
        nodes: grower.nodes,
        training_gain: grower.gain,
    })
}

/// Greedy CART on all rows of `x` against `y`.
///
/// At each node `mtry` features are drawn from the seeded stream, thresholds
/// come from the quantile candidates in `params.split_candidates` (every
/// midpoint when `None`), and leaves predict the mean of their rows.
pub fn fit_tree(x: ArrayView2<f64>, y: ArrayView1<f64>, params: &TreeParams, seed: u64) -> Result<RegressionTree> {
    params.validate()?;
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("tree training data"));
    }
    let data = BinnedMatrix::new(x, params.split_candidates);
    let target: Vec<f64> = y.to_vec();
    let rows: Vec<u32> = (0..x.nrows() as u32).collect();
    grow_tree(&data, &target, rows, params, seeded_rng(seed))
}
