use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;

use super::enet::{EnetProblem, DEFAULT_MAX_ITER, DEFAULT_TOL};
use super::{check_finite, LinearFit, PenaltySpec};
use crate::datagen::seeded_rng;
use crate::error::{precondition, Result};

pub const DEFAULT_N_LAMBDA: usize = 100;
pub const DEFAULT_PATH_RATIO: f64 = 1e-3;

/// Floor applied to `alpha` when computing `lambda_max`, so ridge paths stay finite.
const ALPHA_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPath {
    /// Descending penalty strengths.
    pub lambdas: Vec<f64>,
    /// The centered response was identically zero; the path is `{0}`.
    pub null_response: bool,
}

/// Geometric grid from `lambda_max = max_j |<x_j, y - ybar>| / (n max(alpha, 0.001))`
/// (standardized columns) down to `lambda_max * ratio`.
pub fn lambda_path(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    alpha: f64,
    n_lambda: usize,
    ratio: f64,
) -> Result<LambdaPath> {
    let problem = EnetProblem::new(x, y)?;
    path_for(&problem, alpha, n_lambda, ratio)
}

fn path_for(problem: &EnetProblem, alpha: f64, n_lambda: usize, ratio: f64) -> Result<LambdaPath> {
    if n_lambda < 2 {
        return Err(precondition(format!("path needs at least 2 values, got {}", n_lambda)));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(precondition(format!("path ratio must be in (0,1), got {}", ratio)));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(precondition(format!("alpha must lie in [0,1], got {}", alpha)));
    }
    let lambda_max = problem.max_abs_correlation() / alpha.max(ALPHA_FLOOR);
    if lambda_max == 0.0 {
        return Ok(LambdaPath {
            lambdas: vec![0.0],
            null_response: true,
        });
    }
    let last = (n_lambda - 1) as f64;
    let lambdas = (0..n_lambda)
        .map(|k| lambda_max * ratio.powf(k as f64 / last))
        .collect();
    Ok(LambdaPath {
        lambdas,
        null_response: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvOptions {
    pub n_lambda: usize,
    pub ratio: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            n_lambda: DEFAULT_N_LAMBDA,
            ratio: DEFAULT_PATH_RATIO,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub alpha: f64,
    pub lambda_path: Vec<f64>,
    pub cv_mse: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_min_index: usize,
    /// Fold label (0-based) for every row.
    pub fold_assignment: Vec<usize>,
    pub null_response: bool,
}

/// Fold labels from a seeded permutation: row `perm[i]` gets fold `i mod k`,
/// so fold sizes differ by at most one.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seeded_rng(seed));
    let mut folds = vec![0; n];
    for (i, &row) in perm.iter().enumerate() {
        folds[row] = i % k;
    }
    folds
}

pub(crate) fn check_folds(n: usize, k: usize) -> Result<()> {
    if k < 2 {
        return Err(precondition(format!("need at least 2 folds, got {}", k)));
    }
    if n < 2 * k {
        return Err(precondition(format!(
            "need n >= 2k for {}-fold CV, got n={} (every fold needs 2 observations)",
            k, n
        )));
    }
    Ok(())
}

pub(crate) fn fold_rows(folds: &[usize], fold: usize) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::with_capacity(folds.len());
    let mut held = Vec::new();
    for (i, &f) in folds.iter().enumerate() {
        if f == fold {
            held.push(i);
        } else {
            train.push(i);
        }
    }
    (train, held)
}

/// Warm-started fits along `lambdas`, returning standardized coefficients per value.
fn path_fits(problem: &EnetProblem, alpha: f64, lambdas: &[f64], opts: &CvOptions) -> Vec<(Vec<f64>, super::enet::SolveOutcome)> {
    let mut beta = vec![0.0; problem.p()];
    lambdas
        .iter()
        .map(|&lambda| {
            let pen = PenaltySpec { alpha, lambda };
            let outcome = problem.solve(&pen, opts.tol, opts.max_iter, &mut beta);
            (beta.clone(), outcome)
        })
        .collect()
}

pub fn cv_select_lambda(x: ArrayView2<f64>, y: ArrayView1<f64>, alpha: f64, k: usize, seed: u64) -> Result<CvResult> {
    cv_select_lambda_with(x, y, alpha, k, seed, &CvOptions::default())
}

/// k-fold cross-validated choice of `lambda_min` on a path shared by all folds.
///
/// Each fold fits the whole path with warm starts on its training rows and
/// records held-out MSE per lambda; `cv_mse` is the mean over folds, reduced in
/// fold order. Ties go to the larger lambda.
pub fn cv_select_lambda_with(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    alpha: f64,
    k: usize,
    seed: u64,
    opts: &CvOptions,
) -> Result<CvResult> {
    check_finite(x, y)?;
    let n = x.nrows();
    check_folds(n, k)?;
    let full = EnetProblem::new(x, y)?;
    let path = path_for(&full, alpha, opts.n_lambda, opts.ratio)?;
    let folds = fold_assignment(n, k, seed);

    let per_fold: Vec<Vec<f64>> = (0..k)
        .map(|f| -> Result<Vec<f64>> {
            let (train, held) = fold_rows(&folds, f);
            if held.len() < 2 {
                return Err(precondition(format!("fold {} has fewer than 2 observations", f)));
            }
            let xt = x.select(Axis(0), &train);
            let yt = y.select(Axis(0), &train);
            let problem = EnetProblem::new(xt.view(), yt.view())?;
            let xh = standardize_with(&x.select(Axis(0), &held), &problem);
            let yh = y.select(Axis(0), &held);
            let fits = path_fits(&problem, alpha, &path.lambdas, opts);
            Ok(fits
                .iter()
                .map(|(beta, _)| {
                    let pred = xh.dot(&Array1::from(beta.clone())) + problem.y_mean;
                    let sse: f64 = pred.iter().zip(yh.iter()).map(|(p, t)| (p - t).powi(2)).sum();
                    sse / held.len() as f64
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let n_l = path.lambdas.len();
    let cv_mse: Vec<f64> = (0..n_l)
        .map(|l| per_fold.iter().map(|f| f[l]).sum::<f64>() / k as f64)
        .collect();
    let mut best = 0;
    for l in 1..n_l {
        if cv_mse[l] < cv_mse[best] {
            best = l;
        }
    }
    Ok(CvResult {
        alpha,
        lambda_min: path.lambdas[best],
        lambda_min_index: best,
        lambda_path: path.lambdas,
        cv_mse,
        fold_assignment: folds,
        null_response: path.null_response,
    })
}

fn standardize_with(x: &Array2<f64>, problem: &EnetProblem) -> Array2<f64> {
    let mut out = x.clone();
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        if problem.std.constant[j] {
            col.fill(0.0);
        } else {
            let (m, s) = (problem.std.means[j], problem.std.scales[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
    }
    out
}

/// Full-data fit at `cv.lambda_min`, warm-started down the path as the CV folds were.
pub fn fit_at_lambda_min(x: ArrayView2<f64>, y: ArrayView1<f64>, cv: &CvResult, opts: &CvOptions) -> Result<LinearFit> {
    let problem = EnetProblem::new(x, y)?;
    let lambdas = &cv.lambda_path[..=cv.lambda_min_index];
    let mut fits = path_fits(&problem, cv.alpha, lambdas, opts);
    let (beta, outcome) = fits.pop().expect("path is non-empty");
    Ok(problem.to_fit(
        &beta,
        PenaltySpec {
            alpha: cv.alpha,
            lambda: cv.lambda_min,
        },
        outcome,
    ))
}
