//! Numerical self-checks against independent oracles, run at fixed seeds:
//! closed-form ridge, zero-penalty elastic net against least squares, KKT
//! conditions, greedy versus exhaustive root splits, and metric identities.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use rand::Rng;

use crate::datagen::{seeded_rng, standard_normal};
use crate::linear::{fit_enet, fit_enet_default, fit_ols, PenaltySpec, DEFAULT_MAX_ITER};
use crate::metrics::{aggregate, jaccard, recovery, rmse};
use crate::trees::{fit_tree, Mtry, Node, TreeParams};

pub const CHECK_NAMES: [&str; 5] = ["ridge-closed-form", "ols-enet", "kkt", "split-oracle", "metrics"];

pub const COEF_TOL: f64 = 1e-6;
pub const KKT_TOL: f64 = 1e-4;
pub const KKT_INSTANCES: usize = 50;
pub const SPLIT_INSTANCES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs every check, or only `only` when given. An unknown name yields a
/// single failed result.
pub fn run_checks(only: Option<&str>) -> Vec<CheckResult> {
    let selected: Vec<&'static str> = match only {
        None => CHECK_NAMES.to_vec(),
        Some(name) => match CHECK_NAMES.iter().find(|c| **c == name) {
            Some(c) => vec![*c],
            None => {
                return vec![CheckResult {
                    name: "unknown",
                    passed: false,
                    detail: format!("no check named `{}`", name),
                }]
            }
        },
    };
    selected.into_iter().map(run_check).collect()
}

fn run_check(name: &'static str) -> CheckResult {
    let outcome = match name {
        "ridge-closed-form" => check_ridge(),
        "ols-enet" => check_ols_enet(),
        "kkt" => check_kkt(),
        "split-oracle" => check_split_oracle(),
        "metrics" => check_metrics(),
        _ => Err(format!("no check named `{}`", name)),
    };
    match outcome {
        Ok(detail) => CheckResult {
            name,
            passed: true,
            detail,
        },
        Err(detail) => CheckResult {
            name,
            passed: false,
            detail,
        },
    }
}

type Check = std::result::Result<String, String>;

fn instance(n: usize, p: usize, seed: u64) -> (Array2<f64>, Array1<f64>) {
    let mut rng = seeded_rng(seed);
    let x = Array2::from_shape_fn((n, p), |_| rng.gen::<f64>() * 2.0 - 0.5);
    let coef: Vec<f64> = (0..p).map(|j| if j < 3 { 2.0 - j as f64 } else { 0.0 }).collect();
    let y = Array1::from_shape_fn(n, |i| (0..p).map(|j| coef[j] * x[[i, j]]).sum::<f64>() + 0.5 * standard_normal(&mut rng));
    (x, y)
}

/// Column means, population standard deviations and the standardized matrix.
fn standardized(x: &Array2<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let (n, p) = x.dim();
    let mut sd = vec![0.0; p];
    let mut m = DMatrix::zeros(n, p);
    for j in 0..p {
        let mean = (0..n).map(|i| x[[i, j]]).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (x[[i, j]] - mean).powi(2)).sum::<f64>() / n as f64;
        sd[j] = var.sqrt();
        for i in 0..n {
            m[(i, j)] = (x[[i, j]] - mean) / sd[j];
        }
    }
    (m, sd)
}

fn centered(y: &Array1<f64>) -> DVector<f64> {
    let mean = y.sum() / y.len() as f64;
    DVector::from_iterator(y.len(), y.iter().map(|v| v - mean))
}

fn check_ridge() -> Check {
    let mut worst = 0.0f64;
    for (k, &lambda) in [0.01, 0.1, 1.0, 5.0].iter().cycle().take(12).enumerate() {
        let (n, p) = (15 + 5 * k, 2 + k % 6);
        let (x, y) = instance(n, p, 100 + k as u64);
        let (xs, sd) = standardized(&x);
        let lhs = xs.transpose() * &xs + DMatrix::identity(p, p) * (n as f64 * lambda);
        let rhs = xs.transpose() * centered(&y);
        let oracle = lhs
            .lu()
            .solve(&rhs)
            .ok_or_else(|| format!("instance {}: singular ridge system", k))?;
        let penalty = PenaltySpec::new(0.0, lambda).map_err(|e| e.to_string())?;
        let fit = fit_enet(x.view(), y.view(), penalty, 1e-13, DEFAULT_MAX_ITER, None).map_err(|e| e.to_string())?;
        for j in 0..p {
            worst = worst.max((fit.beta[j] - oracle[j] / sd[j]).abs());
        }
    }
    if worst <= COEF_TOL {
        Ok(format!("12 instances, max |beta - closed form| = {:.2e}", worst))
    } else {
        Err(format!("max coefficient error {:.2e} exceeds {:.0e}", worst, COEF_TOL))
    }
}

fn check_ols_enet() -> Check {
    let mut worst = 0.0f64;
    for k in 0..10 {
        let (n, p) = (20 + 7 * k, 1 + k % 5);
        let (x, y) = instance(n, p, 200 + k as u64);
        let ols = fit_ols(x.view(), y.view()).map_err(|e| e.to_string())?;
        for alpha in [0.5, 1.0] {
            let penalty = PenaltySpec::new(alpha, 0.0).map_err(|e| e.to_string())?;
            let fit = fit_enet(x.view(), y.view(), penalty, 1e-13, DEFAULT_MAX_ITER, None).map_err(|e| e.to_string())?;
            worst = worst.max((fit.intercept - ols.intercept).abs());
            for j in 0..p {
                worst = worst.max((fit.beta[j] - ols.beta[j]).abs());
            }
        }
    }
    if worst <= COEF_TOL {
        Ok(format!("10 instances x 2 mixings, max deviation = {:.2e}", worst))
    } else {
        Err(format!("max deviation from least squares {:.2e} exceeds {:.0e}", worst, COEF_TOL))
    }
}

/// Largest violation of the elastic-net optimality conditions on the
/// standardized scale: `g_j = x_j^T r / n - lambda (1 - alpha) b_j` must equal
/// `lambda alpha sign(b_j)` when `b_j != 0` and lie within `lambda alpha` otherwise.
pub fn kkt_violation(x: &Array2<f64>, y: &Array1<f64>, beta: &Array1<f64>, alpha: f64, lambda: f64) -> f64 {
    let n = x.nrows() as f64;
    let (xs, sd) = standardized(x);
    let b = DVector::from_iterator(beta.len(), beta.iter().zip(&sd).map(|(b, s)| b * s));
    let r = centered(y) - &xs * &b;
    let corr = xs.transpose() * r / n;
    let mut worst = 0.0f64;
    for j in 0..b.len() {
        let g = corr[j] - lambda * (1.0 - alpha) * b[j];
        let v = if b[j] != 0.0 {
            (g - lambda * alpha * b[j].signum()).abs()
        } else {
            (g.abs() - lambda * alpha).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

fn check_kkt() -> Check {
    let mut worst = 0.0f64;
    let mut rng = seeded_rng(300);
    for k in 0..KKT_INSTANCES {
        let n = rng.gen_range(10..80);
        let p = rng.gen_range(2..30);
        let alpha: f64 = [0.0, 0.5, 1.0][k % 3];
        let (x, y) = instance(n, p, 400 + k as u64);
        let (xs, _) = standardized(&x);
        let lambda_max = (xs.transpose() * centered(&y) / n as f64).amax() / alpha.max(1e-3);
        let lambda = lambda_max * 10f64.powf(-rng.gen_range(0.3..2.5));
        let penalty = PenaltySpec::new(alpha, lambda).map_err(|e| e.to_string())?;
        let fit = fit_enet_default(x.view(), y.view(), penalty).map_err(|e| e.to_string())?;
        if !fit.converged {
            return Err(format!("instance {}: solver did not converge", k));
        }
        worst = worst.max(kkt_violation(&x, &y, &fit.beta, alpha, lambda));
    }
    if worst <= KKT_TOL {
        Ok(format!("{} instances, max KKT residual = {:.2e}", KKT_INSTANCES, worst))
    } else {
        Err(format!("max KKT residual {:.2e} exceeds {:.0e}", worst, KKT_TOL))
    }
}

fn sse(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (s, c) = values.clone().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    let mean = s / c as f64;
    values.map(|v| (v - mean).powi(2)).sum()
}

/// Exhaustive root split: every feature, every midpoint between consecutive
/// distinct values, scored by SSE reduction. Returns `(feature, threshold, gain)`.
pub fn exhaustive_root_split(x: &Array2<f64>, y: &Array1<f64>, min_leaf: usize) -> Option<(usize, f64, f64)> {
    let (n, p) = x.dim();
    let parent = sse(y.iter().copied());
    let mut best: Option<(usize, f64, f64)> = None;
    for j in 0..p {
        let mut vals: Vec<f64> = x.column(j).to_vec();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left = (0..n).filter(|&i| x[[i, j]] <= t).map(|i| y[i]);
            let right = (0..n).filter(|&i| x[[i, j]] > t).map(|i| y[i]);
            let (nl, nr) = (left.clone().count(), right.clone().count());
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let gain = parent - sse(left) - sse(right);
            if best.is_none_or(|b| gain > b.2) {
                best = Some((j, t, gain));
            }
        }
    }
    best.filter(|b| b.2 > 1e-12 * parent.max(1.0))
}

fn split_gain(x: &Array2<f64>, y: &Array1<f64>, feature: usize, threshold: f64) -> f64 {
    let n = x.nrows();
    let left = (0..n).filter(|&i| x[[i, feature]] <= threshold).map(|i| y[i]);
    let right = (0..n).filter(|&i| x[[i, feature]] > threshold).map(|i| y[i]);
    sse(y.iter().copied()) - sse(left) - sse(right)
}

fn check_split_oracle() -> Check {
    let mut rng = seeded_rng(500);
    let mut identical = 0;
    for k in 0..SPLIT_INSTANCES {
        let n = rng.gen_range(4..14);
        let p = rng.gen_range(1..4);
        let min_leaf = rng.gen_range(1..3);
        let x = Array2::from_shape_fn((n, p), |_| (rng.gen::<f64>() * 8.0).floor() / 8.0);
        let y = Array1::from_shape_fn(n, |_| standard_normal(&mut rng));
        let params = TreeParams {
            max_depth: 1,
            min_leaf,
            mtry: Mtry::All,
            split_candidates: None,
        };
        let tree = fit_tree(x.view(), y.view(), &params, k as u64).map_err(|e| e.to_string())?;
        let oracle = exhaustive_root_split(&x, &y, min_leaf);
        match (tree.root(), oracle) {
            (Node::Leaf { .. }, None) => identical += 1,
            (&Node::Split { feature, threshold, .. }, Some((of, ot, og))) => {
                let g = split_gain(&x, &y, feature, threshold);
                if g < og - 1e-9 * og.max(1.0) {
                    return Err(format!(
                        "instance {}: greedy split (x{} <= {}) gains {:.6}, exhaustive (x{} <= {}) gains {:.6}",
                        k,
                        feature + 1,
                        threshold,
                        g,
                        of + 1,
                        ot,
                        og
                    ));
                }
                if feature == of && threshold == ot {
                    identical += 1;
                }
            }
            (Node::Leaf { .. }, Some((of, ot, og))) => {
                return Err(format!(
                    "instance {}: greedy made no split, exhaustive found x{} <= {} with gain {:.6}",
                    k,
                    of + 1,
                    ot,
                    og
                ))
            }
            (Node::Split { feature, .. }, None) => {
                return Err(format!("instance {}: greedy split on x{} where no valid split exists", k, feature + 1))
            }
        }
    }
    Ok(format!(
        "{} instances agree on optimal gain, {} on the identical split",
        SPLIT_INSTANCES, identical
    ))
}

fn check_metrics() -> Check {
    let s = [1, 2, 3, 4, 5];
    let e = |r: crate::Result<f64>| r.map_err(|e| e.to_string());
    let checks: Vec<(&str, bool)> = vec![
        ("rmse identity", e(rmse(ndarray::array![1.0, 2.0, 3.0].view(), ndarray::array![1.0, 2.0, 3.0].view()))? == 0.0),
        ("rmse 3-4", e(rmse(ndarray::array![0.0, 0.0].view(), ndarray::array![3.0, 4.0].view()))? == 12.5f64.sqrt()),
        (
            "rmse shift",
            e(rmse(ndarray::array![1.0, 2.0, 4.0].view(), ndarray::array![1.5, 2.5, 4.5].view()))? == 0.5,
        ),
        ("jaccard equal", e(jaccard(&s, &s))? == 1.0),
        ("jaccard half", e(jaccard(&s, &[1, 2, 3, 6]))? == 0.5),
        ("jaccard empty", e(jaccard(&s, &[]))? == 0.0),
        ("recovery superset", e(recovery(&s, &[1, 2, 3, 4, 5, 9]))? == 1.0),
        ("recovery partial", e(recovery(&s, &[1, 2, 3]))? == 0.6),
        ("recovery empty", e(recovery(&s, &[]))? == 0.0),
        ("aggregate cell", aggregate(&[1.0, 3.0]).map_err(|e| e.to_string())?.display() == "2.00 (1.41)"),
        ("empty truth rejected", jaccard(&[], &[1]).is_err() && recovery(&[], &[1]).is_err()),
    ];
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    if failed.is_empty() {
        Ok(format!("{} identities hold exactly", checks.len()))
    } else {
        Err(format!("failed identities: {}", failed.join(", ")))
    }
}
