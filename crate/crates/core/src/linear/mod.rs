//! Least squares and the elastic-net family (ridge `alpha = 0`, lasso `alpha = 1`,
//! elastic net `alpha = 0.5`).
//!
//! Penalized fits work on internally standardized predictors with a centered,
//! unpenalized intercept; coefficients are reported on the original scale.

mod enet;
mod ols;
mod path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{precondition, Error, Result};

pub use enet::{fit_enet, fit_enet_default, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use ols::fit_ols;
pub use path::{
    cv_select_lambda, cv_select_lambda_with, fit_at_lambda_min, fold_assignment, lambda_path,
    CvOptions, CvResult, LambdaPath, DEFAULT_N_LAMBDA, DEFAULT_PATH_RATIO,
};

pub(crate) use path::{check_folds, fold_rows};

pub const RIDGE_ALPHA: f64 = 0.0;
pub const LASSO_ALPHA: f64 = 1.0;
pub const ENET_ALPHA: f64 = 0.5;

/// Mixing (`alpha`) and strength (`lambda`) of the penalty
/// `lambda * (alpha * |b|_1 + (1 - alpha) / 2 * |b|_2^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySpec {
    pub alpha: f64,
    pub lambda: f64,
}

impl PenaltySpec {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(precondition(format!("alpha must lie in [0,1], got {}", alpha)));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(precondition(format!("lambda must be finite and >= 0, got {}", lambda)));
        }
        Ok(Self { alpha, lambda })
    }

    /// No penalty, as carried by plain least-squares fits.
    pub fn none() -> Self {
        Self {
            alpha: 0.0,
            lambda: 0.0,
        }
    }

    pub fn value(&self, beta: &[f64]) -> f64 {
        let l1: f64 = beta.iter().map(|b| b.abs()).sum();
        let l2: f64 = beta.iter().map(|b| b * b).sum();
        self.lambda * (self.alpha * l1 + 0.5 * (1.0 - self.alpha) * l2)
    }
}

/// Intercept plus original-scale coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub beta: Array1<f64>,
    pub penalty: PenaltySpec,
    pub converged: bool,
    pub iterations: usize,
    /// Set by least squares when the design was rank deficient and the
    /// minimum-norm solution was returned.
    pub rank_deficient: bool,
}

impl LinearFit {
    pub fn intercept_only(intercept: f64, p: usize) -> Self {
        Self {
            intercept,
            beta: Array1::zeros(p),
            penalty: PenaltySpec::none(),
            converged: true,
            iterations: 0,
            rank_deficient: false,
        }
    }

    pub fn n_active(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }
}

/// Column-standardized design: every column has mean 0 and population sd 1.
#[derive(Debug, Clone)]
pub struct Standardized {
    pub xs: Array2<f64>,
    pub means: Array1<f64>,
    pub scales: Array1<f64>,
    /// Columns whose population sd is zero; they keep scale 1 and become all zeros.
    pub constant: Vec<bool>,
}

pub fn standardize(x: ArrayView2<f64>) -> Result<Standardized> {
    let n = x.nrows();
    if n < 2 {
        return Err(precondition(format!("standardize needs at least 2 rows, got {}", n)));
    }
    let means = x.mean_axis(Axis(0)).expect("n >= 2");
    let mut scales = Array1::ones(x.ncols());
    let mut constant = vec![false; x.ncols()];
    let mut xs = x.to_owned();
    for (j, mut col) in xs.columns_mut().into_iter().enumerate() {
        let m = means[j];
        col.mapv_inplace(|v| v - m);
        let sd = (col.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        if sd <= 1e-12 * m.abs().max(1.0) {
            constant[j] = true;
            col.fill(0.0);
        } else {
            scales[j] = sd;
            col.mapv_inplace(|v| v / sd);
        }
    }
    Ok(Standardized {
        xs,
        means,
        scales,
        constant,
    })
}

/// `sign(z) * max(|z| - gamma, 0)`.
#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

pub fn predict_linear(fit: &LinearFit, x: ArrayView2<f64>) -> Result<Array1<f64>> {
    if x.ncols() != fit.beta.len() {
        return Err(Error::DimensionMismatch {
            expected: fit.beta.len(),
            got: x.ncols(),
        });
    }
    Ok(x.dot(&fit.beta) + fit.intercept)
}

pub(crate) fn check_finite(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("design matrix"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    Ok(())
}
