use hybrid_bench::datagen::{seeded_rng, standard_normal};
use hybrid_bench::linear::{
    cv_select_lambda, fit_enet, fit_enet_default, fit_ols, lambda_path, predict_linear, PenaltySpec, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::Rng;

fn instance(n: usize, p: usize, seed: u64) -> (Array2<f64>, Array1<f64>) {
    let mut rng = seeded_rng(seed);
    let x = Array2::from_shape_fn((n, p), |_| rng.gen::<f64>());
    let y = Array1::from_shape_fn(n, |i| {
        3.0 * x[[i, 0]] - 2.0 * x[[i, p - 1]] + 0.5 * standard_normal(&mut rng)
    });
    (x, y)
}

/// Centered, population-scaled copy of `x` and the scales.
fn standardize(x: &Array2<f64>) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (n, p) = x.dim();
    let mut cols = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for j in 0..p {
        let m = x.column(j).sum() / n as f64;
        let sd = (x.column(j).iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
        cols.push(x.column(j).iter().map(|v| (v - m) / sd).collect());
        scales.push(sd);
    }
    (cols, scales)
}

fn residual(cols: &[Vec<f64>], y: &Array1<f64>, b: &[f64]) -> Vec<f64> {
    let ym = y.sum() / y.len() as f64;
    (0..y.len())
        .map(|i| y[i] - ym - cols.iter().zip(b).map(|(c, bj)| c[i] * bj).sum::<f64>())
        .collect()
}

fn objective(cols: &[Vec<f64>], y: &Array1<f64>, b: &[f64], alpha: f64, lambda: f64) -> f64 {
    let n = y.len() as f64;
    let rss: f64 = residual(cols, y, b).iter().map(|r| r * r).sum();
    let l1: f64 = b.iter().map(|v| v.abs()).sum();
    let l2: f64 = b.iter().map(|v| v * v).sum();
    rss / (2.0 * n) + lambda * (alpha * l1 + (1.0 - alpha) / 2.0 * l2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kkt_conditions_hold(seed in any::<u64>(), n in 15usize..80, p in 2usize..25, alpha in prop::sample::select(vec![0.25, 0.5, 1.0]), frac in 0.005f64..0.9) {
        let (x, y) = instance(n, p, seed);
        let path = lambda_path(x.view(), y.view(), alpha, 2, 0.5).unwrap();
        let lambda = path.lambdas[0] * frac;
        let fit = fit_enet_default(x.view(), y.view(), PenaltySpec::new(alpha, lambda).unwrap()).unwrap();
        prop_assert!(fit.converged);
        let (cols, scales) = standardize(&x);
        let b: Vec<f64> = fit.beta.iter().zip(&scales).map(|(v, s)| v * s).collect();
        let r = residual(&cols, &y, &b);
        for j in 0..p {
            let corr = cols[j].iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / n as f64;
            let g = corr - lambda * (1.0 - alpha) * b[j];
            if b[j] != 0.0 {
                prop_assert!((g - lambda * alpha * b[j].signum()).abs() <= 1e-4, "active {} residual {}", j, g);
            } else {
                prop_assert!(g.abs() <= lambda * alpha + 1e-4, "inactive {} gradient {}", j, g);
            }
        }
    }

    #[test]
    fn ridge_norm_shrinks_with_lambda(seed in any::<u64>(), l1 in 0.001f64..1.0, factor in 1.01f64..20.0) {
        let (x, y) = instance(40, 6, seed);
        let (_, scales) = standardize(&x);
        let norm = |lambda: f64| {
            let f = fit_enet(x.view(), y.view(), PenaltySpec::new(0.0, lambda).unwrap(), 1e-12, DEFAULT_MAX_ITER, None).unwrap();
            f.beta.iter().zip(&scales).map(|(b, s)| (b * s).powi(2)).sum::<f64>().sqrt()
        };
        prop_assert!(norm(l1) >= norm(l1 * factor) - 1e-10);
    }
}

#[test]
fn warm_path_matches_cold_fits_in_objective() {
    for seed in 0..5 {
        let (x, y) = instance(50, 20, 700 + seed);
        let (cols, scales) = standardize(&x);
        for alpha in [0.0, 0.5, 1.0] {
            let path = lambda_path(x.view(), y.view(), alpha, 30, 1e-3).unwrap();
            let mut warm: Option<Array1<f64>> = None;
            for &lambda in &path.lambdas {
                let pen = PenaltySpec::new(alpha, lambda).unwrap();
                let w = fit_enet(x.view(), y.view(), pen, DEFAULT_TOL, DEFAULT_MAX_ITER, warm.as_ref().map(|b| b.view())).unwrap();
                let c = fit_enet_default(x.view(), y.view(), pen).unwrap();
                let bw: Vec<f64> = w.beta.iter().zip(&scales).map(|(v, s)| v * s).collect();
                let bc: Vec<f64> = c.beta.iter().zip(&scales).map(|(v, s)| v * s).collect();
                let (ow, oc) = (objective(&cols, &y, &bw, alpha, lambda), objective(&cols, &y, &bc, alpha, lambda));
                assert!((ow - oc).abs() <= 1e-6, "alpha {} lambda {}: {} vs {}", alpha, lambda, ow, oc);
                warm = Some(w.beta);
            }
        }
    }
}

#[test]
fn lambda_path_is_decreasing_and_starts_at_null_model() {
    let (x, y) = instance(60, 8, 5);
    for alpha in [0.0, 0.5, 1.0] {
        let path = lambda_path(x.view(), y.view(), alpha, 100, 1e-3).unwrap();
        assert_eq!(path.lambdas.len(), 100);
        assert!(path.lambdas.windows(2).all(|w| w[0] > w[1]));
        assert!((path.lambdas[99] / path.lambdas[0] - 1e-3).abs() < 1e-12);
        if alpha > 0.0 {
            let top = fit_enet_default(x.view(), y.view(), PenaltySpec::new(alpha, path.lambdas[0]).unwrap()).unwrap();
            assert_eq!(top.n_active(), 0);
        }
    }
}

#[test]
fn constant_response_gives_null_path() {
    let (x, _) = instance(30, 4, 2);
    let y = Array1::from_elem(30, 2.5);
    let path = lambda_path(x.view(), y.view(), 1.0, 100, 1e-3).unwrap();
    assert!(path.null_response);
    let cv = cv_select_lambda(x.view(), y.view(), 1.0, 5, 1).unwrap();
    assert!(cv.null_response);
}

#[test]
fn cv_selection_is_deterministic_and_on_the_path() {
    let (x, y) = instance(100, 10, 17);
    let a = cv_select_lambda(x.view(), y.view(), 1.0, 5, 3).unwrap();
    let b = cv_select_lambda(x.view(), y.view(), 1.0, 5, 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.lambda_path[a.lambda_min_index], a.lambda_min);
    let best = a.cv_mse.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(a.cv_mse[a.lambda_min_index], best);
    assert!(a.cv_mse[..a.lambda_min_index].iter().all(|m| *m > best));
}

#[test]
fn ols_residuals_are_orthogonal_to_columns() {
    let (x, y) = instance(80, 5, 9);
    let fit = fit_ols(x.view(), y.view()).unwrap();
    let r = &y - &predict_linear(&fit, x.view()).unwrap();
    assert!(r.sum().abs() < 1e-9);
    for col in x.columns() {
        assert!(col.dot(&r).abs() < 1e-8);
    }
}
