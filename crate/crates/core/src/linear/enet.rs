use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::{check_finite, soft_threshold, standardize, LinearFit, PenaltySpec, Standardized};
use crate::error::{precondition, Result};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Standardized least-squares problem with cached Gram matrix, solved by
/// cyclic coordinate descent with covariance updates.
///
/// Minimizes `(1/2n) |yc - Xs b|^2 + lambda * (alpha |b|_1 + (1-alpha)/2 |b|_2^2)`
/// where `Xs` is standardized and `yc = y - mean(y)`.
pub(crate) struct EnetProblem {
    pub std: Standardized,
    pub y_mean: f64,
    /// `(1/n) Xs^T Xs`, row-major `p x p`.
    gram: Array2<f64>,
    /// `(1/n) Xs^T yc`.
    pub xty: Array1<f64>,
    /// `(1/n) |yc|^2`.
    yy: f64,
}

pub(crate) struct SolveOutcome {
    pub converged: bool,
    pub iterations: usize,
}

impl EnetProblem {
    pub fn new(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<Self> {
        check_finite(x, y)?;
        let n = x.nrows();
        let std = standardize(x)?;
        let y_mean = y.sum() / n as f64;
        let yc = y.mapv(|v| v - y_mean);
        let inv_n = 1.0 / n as f64;
        let gram = (std.xs.t().dot(&std.xs) * inv_n).as_standard_layout().into_owned();
        let xty = std.xs.t().dot(&yc) * inv_n;
        let yy = yc.dot(&yc) * inv_n;
        Ok(Self {
            std,
            y_mean,
            gram,
            xty,
            yy,
        })
    }

    pub fn p(&self) -> usize {
        self.xty.len()
    }

    /// Largest `|<x_j, yc>| / n`, the lasso's null-model threshold.
    pub fn max_abs_correlation(&self) -> f64 {
        self.xty.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn objective(&self, beta: &[f64], grad: &[f64], penalty: &PenaltySpec) -> f64 {
        // b^T G b = b.xty - b.g, since g = xty - G b.
        let bx: f64 = beta.iter().zip(self.xty.iter()).map(|(b, c)| b * c).sum();
        let bg: f64 = beta.iter().zip(grad).map(|(b, g)| b * g).sum();
        0.5 * (self.yy - bx - bg) + penalty.value(beta)
    }

    /// Runs coordinate descent from `beta` (standardized scale) in place.
    pub fn solve(
        &self,
        penalty: &PenaltySpec,
        tol: f64,
        max_iter: usize,
        beta: &mut [f64],
    ) -> SolveOutcome {
        let p = self.p();
        debug_assert_eq!(beta.len(), p);
        let l1 = penalty.lambda * penalty.alpha;
        let l2 = penalty.lambda * (1.0 - penalty.alpha);

        let mut grad: Vec<f64> = self.xty.to_vec();
        for (k, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (g, gk) in grad.iter_mut().zip(self.gram.row(k).iter()) {
                    *g -= gk * b;
                }
            }
        }

        let mut last_obj = if cfg!(debug_assertions) {
            self.objective(beta, &grad, penalty)
        } else {
            0.0
        };
        let all: Vec<usize> = (0..p).filter(|&j| self.gram[[j, j]] != 0.0).collect();
        let mut active: Vec<usize> = Vec::with_capacity(p);
        let mut sweeps = 0;
        // Full sweeps alternate with sweeps over the nonzero coordinates only;
        // convergence is declared only after a quiet full sweep.
        let mut full = true;
        while sweeps < max_iter {
            sweeps += 1;
            let coords = if full { &all } else { &active };
            let max_change = self.sweep(coords, l1, l2, beta, &mut grad);
            if cfg!(debug_assertions) {
                let obj = self.objective(beta, &grad, penalty);
                debug_assert!(
                    obj <= last_obj + 1e-10 * (1.0 + last_obj.abs() + self.yy),
                    "coordinate descent objective increased: {} -> {}",
                    last_obj,
                    obj
                );
                last_obj = obj;
            }
            if max_change < tol {
                if full {
                    return SolveOutcome {
                        converged: true,
                        iterations: sweeps,
                    };
                }
                full = true;
            } else if full {
                active.clear();
                active.extend(all.iter().copied().filter(|&j| beta[j] != 0.0));
                full = false;
            }
        }
        SolveOutcome {
            converged: false,
            iterations: max_iter,
        }
    }

    /// One coordinate pass over `coords`; returns the largest coefficient change.
    fn sweep(&self, coords: &[usize], l1: f64, l2: f64, beta: &mut [f64], grad: &mut [f64]) -> f64 {
        let mut max_change = 0.0f64;
        for &j in coords {
            let gjj = self.gram[[j, j]];
            let old = beta[j];
            let new = soft_threshold(grad[j] + gjj * old, l1) / (gjj + l2);
            if new != old {
                let delta = new - old;
                beta[j] = new;
                // The Gram matrix is symmetric, so row j is column j.
                let row = self.gram.row(j);
                for (g, gj) in grad.iter_mut().zip(row.as_slice().expect("row-major gram")) {
                    *g -= gj * delta;
                }
                max_change = max_change.max(delta.abs());
            }
        }
        max_change
    }

    /// Maps a standardized-scale solution back to the original scale.
    pub fn to_fit(&self, beta_std: &[f64], penalty: PenaltySpec, outcome: SolveOutcome) -> LinearFit {
        let beta: Array1<f64> = beta_std
            .iter()
            .zip(self.std.scales.iter())
            .map(|(b, s)| b / s)
            .collect();
        let intercept = self.y_mean - beta.dot(&self.std.means);
        LinearFit {
            intercept,
            beta,
            penalty,
            converged: outcome.converged,
            iterations: outcome.iterations,
            rank_deficient: false,
        }
    }

    pub fn to_standardized(&self, beta: ArrayView1<f64>) -> Vec<f64> {
        beta.iter()
            .zip(self.std.scales.iter())
            .zip(&self.std.constant)
            .map(|((b, s), c)| if *c { 0.0 } else { b * s })
            .collect()
    }
}

/// Elastic-net fit by cyclic coordinate descent.
///
/// `converged` is true iff the largest standardized coefficient change in a
/// sweep fell below `tol` within `max_iter` sweeps. `warm_start` is on the
/// original scale.
pub fn fit_enet(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    penalty: PenaltySpec,
    tol: f64,
    max_iter: usize,
    warm_start: Option<ArrayView1<f64>>,
) -> Result<LinearFit> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(precondition("tolerance must be positive"));
    }
    let penalty = PenaltySpec::new(penalty.alpha, penalty.lambda)?;
    let problem = EnetProblem::new(x, y)?;
    let mut beta = match warm_start {
        Some(b) => {
            if b.len() != problem.p() {
                return Err(crate::Error::DimensionMismatch {
                    expected: problem.p(),
                    got: b.len(),
                });
            }
            problem.to_standardized(b)
        }
        None => vec![0.0; problem.p()],
    };
    let outcome = problem.solve(&penalty, tol, max_iter, &mut beta);
    Ok(problem.to_fit(&beta, penalty, outcome))
}

pub fn fit_enet_default(x: ArrayView2<f64>, y: ArrayView1<f64>, penalty: PenaltySpec) -> Result<LinearFit> {
    fit_enet(x, y, penalty, DEFAULT_TOL, DEFAULT_MAX_ITER, None)
}
