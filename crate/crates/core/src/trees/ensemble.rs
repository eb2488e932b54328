use ndarray::{Array1, ArrayView1, ArrayView2};
use rand::Rng;

use super::binning::BinnedMatrix;
use super::tree::{grow_tree, RegressionTree};
use super::TreeParams;
use crate::datagen::{derive_seed, seeded_rng};
use crate::error::{precondition, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    Bagging,
    Boosting,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub kind: EnsembleKind,
    pub trees: Vec<RegressionTree>,
    /// Shrinkage applied to every boosted tree; 1 for bagging.
    pub learning_rate: f64,
    /// Initial boosting value (training mean); 0 for bagging.
    pub base_prediction: f64,
    /// Normalized accumulated split gain, or all zeros when no split occurred.
    pub importance: Array1<f64>,
    pub n_features: usize,
}

impl EnsembleModel {
    /// The model restricted to its first `t` trees.
    pub fn truncated(&self, t: usize) -> EnsembleModel {
        let trees: Vec<RegressionTree> = self.trees.iter().take(t).cloned().collect();
        let importance = normalized_gain(&trees, self.n_features);
        EnsembleModel {
            trees,
            importance,
            ..self.clone()
        }
    }
}

fn normalized_gain(trees: &[RegressionTree], p: usize) -> Array1<f64> {
    let mut total = Array1::<f64>::zeros(p);
    for tree in trees {
        for (acc, g) in total.iter_mut().zip(&tree.training_gain) {
            *acc += g;
        }
    }
    let sum = total.sum();
    if sum > 0.0 {
        total /= sum;
    }
    total
}

fn check_xy(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if x.nrows() == 0 {
        return Err(precondition("ensemble needs at least one row"));
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ensemble training data"));
    }
    Ok(())
}

pub fn fit_bagging(x: ArrayView2<f64>, y: ArrayView1<f64>, params: &TreeParams, n_trees: usize, seed: u64) -> Result<EnsembleModel> {
    fit_bagging_with(x, y, params, n_trees, true, seed)
}

/// Random-forest style bagging. With `bootstrap` off every tree sees the
/// training rows as given, which is only useful for debugging.
pub fn fit_bagging_with(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    params: &TreeParams,
    n_trees: usize,
    bootstrap: bool,
    seed: u64,
) -> Result<EnsembleModel> {
    params.validate()?;
    check_xy(x, y)?;
    if n_trees < 1 {
        return Err(precondition("n_trees must be at least 1"));
    }
    let n = x.nrows();
    let data = BinnedMatrix::new(x, params.split_candidates);
    let target = y.to_vec();
    let trees = (0..n_trees as u64)
        .map(|t| {
            let mut rng = seeded_rng(derive_seed(seed, "bagging", t, "tree"));
            let rows: Vec<u32> = if bootstrap {
                let mut rows: Vec<u32> = (0..n).map(|_| rng.gen_range(0..n as u32)).collect();
                rows.sort_unstable();
                rows
            } else {
                (0..n as u32).collect()
            };
            grow_tree(&data, &target, rows, params, rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let importance = normalized_gain(&trees, x.ncols());
    Ok(EnsembleModel {
        kind: EnsembleKind::Bagging,
        trees,
        learning_rate: 1.0,
        base_prediction: 0.0,
        importance,
        n_features: x.ncols(),
    })
}

/// Least-squares gradient boosting: start from the mean, then each iteration
/// fits a tree to the current residuals on a seeded row subsample (without
/// replacement) and adds `learning_rate` times its output.
pub fn fit_boosting(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    params: &TreeParams,
    n_trees: usize,
    learning_rate: f64,
    subsample: f64,
    seed: u64,
) -> Result<EnsembleModel> {
    params.validate()?;
    check_xy(x, y)?;
    if n_trees < 1 {
        return Err(precondition("n_trees must be at least 1"));
    }
    if !(learning_rate > 0.0 && learning_rate <= 1.0) {
        return Err(precondition(format!("learning_rate must be in (0,1], got {}", learning_rate)));
    }
    if !(subsample > 0.0 && subsample <= 1.0) {
        return Err(precondition(format!("subsample must be in (0,1], got {}", subsample)));
    }
    let n = x.nrows();
    let data = BinnedMatrix::new(x, params.split_candidates);
    let base = y.sum() / n as f64;
    let mut fitted = vec![base; n];
    let mut residual = vec![0.0; n];
    let n_sub = ((subsample * n as f64).round() as usize).clamp(1, n);
    let mut perm: Vec<u32> = (0..n as u32).collect();
    let mut trees = Vec::with_capacity(n_trees);

    for t in 0..n_trees as u64 {
        for i in 0..n {
            residual[i] = y[i] - fitted[i];
        }
        let rows: Vec<u32> = if n_sub == n {
            (0..n as u32).collect()
        } else {
            let mut rng = seeded_rng(derive_seed(seed, "boosting", t, "subsample"));
            for k in 0..n_sub {
                let pick = rng.gen_range(k..n);
                perm.swap(k, pick);
            }
            let mut rows = perm[..n_sub].to_vec();
            rows.sort_unstable();
            rows
        };
        let rng = seeded_rng(derive_seed(seed, "boosting", t, "tree"));
        let tree = grow_tree(&data, &residual, rows, params, rng)?;
        for (i, f) in fitted.iter_mut().enumerate() {
            *f += learning_rate * tree.predict_binned(&data, i);
        }
        trees.push(tree);
    }
    let importance = normalized_gain(&trees, x.ncols());
    Ok(EnsembleModel {
        kind: EnsembleKind::Boosting,
        trees,
        learning_rate,
        base_prediction: base,
        importance,
        n_features: x.ncols(),
    })
}

/// Bagging averages the trees; boosting returns `base + lr * sum(trees)`.
pub fn predict_ensemble(model: &EnsembleModel, x: ArrayView2<f64>) -> Result<Array1<f64>> {
    if x.ncols() != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            got: x.ncols(),
        });
    }
    if model.trees.is_empty() {
        return Err(precondition("ensemble has no trees"));
    }
    let out = x.rows().into_iter().map(|row| {
        let s: f64 = model.trees.iter().map(|t| t.predict_row(row)).sum();
        match model.kind {
            EnsembleKind::Bagging => s / model.trees.len() as f64,
            EnsembleKind::Boosting => model.base_prediction + model.learning_rate * s,
        }
    });
    Ok(out.collect())
}

pub fn feature_importance(model: &EnsembleModel) -> Array1<f64> {
    model.importance.clone()
}
