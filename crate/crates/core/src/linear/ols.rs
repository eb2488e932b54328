use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, ArrayView1, ArrayView2, Axis};

use super::{check_finite, LinearFit, PenaltySpec};
use crate::error::{precondition, Result};

/// Least squares with an unpenalized intercept.
///
/// Solved by SVD of the column-centered design; singular values below
/// `max(n, p) * eps * s_max` are treated as zero, giving the minimum-norm
/// solution with `rank_deficient` set. A design with zero columns yields the
/// intercept-only model.
pub fn fit_ols(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<LinearFit> {
    check_finite(x, y)?;
    let (n, p) = x.dim();
    if n == 0 {
        return Err(precondition("least squares needs at least one row"));
    }
    if n <= p {
        return Err(precondition(format!(
            "least squares needs more rows than columns (n={}, columns={})",
            n, p
        )));
    }
    let y_mean = y.sum() / n as f64;
    if p == 0 {
        return Ok(LinearFit::intercept_only(y_mean, 0));
    }
    let means = x.mean_axis(Axis(0)).expect("n > 0");

    let a = DMatrix::from_fn(n, p, |i, j| x[[i, j]] - means[j]);
    let b = DVector::from_fn(n, |i, _| y[i] - y_mean);
    let svd = a.svd(true, true);
    let s_max = svd.singular_values.max();
    let eps = (n.max(p) as f64) * f64::EPSILON * s_max;
    let rank = svd.singular_values.iter().filter(|s| **s > eps).count();
    let beta: Array1<f64> = if rank == 0 {
        Array1::zeros(p)
    } else {
        let sol = svd
            .solve(&b, eps)
            .map_err(|e| precondition(format!("SVD solve failed: {}", e)))?;
        sol.iter().copied().collect()
    };
    let intercept = y_mean - beta.dot(&means);
    Ok(LinearFit {
        intercept,
        beta,
        penalty: PenaltySpec::none(),
        converged: true,
        iterations: 0,
        rank_deficient: rank < p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::seeded_rng;
    use crate::linear::predict_linear;
    use ndarray::{array, Array2};
    use rand::Rng;

    #[test]
    fn exact_line() {
        let fit = fit_ols(array![[1.0], [2.0], [3.0]].view(), array![2.0, 4.0, 6.0].view()).unwrap();
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.beta[0] - 2.0).abs() < 1e-12);
        assert!(!fit.rank_deficient);
    }

    #[test]
    fn constant_response() {
        let x = array![[1.0, 0.2], [2.0, 0.9], [3.0, 0.4], [0.5, 0.1]];
        let fit = fit_ols(x.view(), array![3.0, 3.0, 3.0, 3.0].view()).unwrap();
        assert!(fit.beta.iter().all(|b| b.abs() < 1e-12));
        assert!((fit.intercept - 3.0).abs() < 1e-12);
    }

    #[test]
    fn residuals_orthogonal_to_columns() {
        let mut rng = seeded_rng(30);
        let x = Array2::from_shape_fn((30, 5), |_| rng.gen::<f64>());
        let y = Array1::from_shape_fn(30, |_| rng.gen::<f64>() * 10.0);
        let fit = fit_ols(x.view(), y.view()).unwrap();
        let r = &y - &predict_linear(&fit, x.view()).unwrap();
        assert!(r.sum().abs() < 1e-8);
        for col in x.columns() {
            assert!(col.dot(&r).abs() < 1e-8);
        }
        // Refit reproduces fitted values.
        let refit = fit_ols(x.view(), predict_linear(&fit, x.view()).unwrap().view()).unwrap();
        let a = predict_linear(&fit, x.view()).unwrap();
        let b = predict_linear(&refit, x.view()).unwrap();
        assert!(a.iter().zip(b.iter()).all(|(u, v)| (u - v).abs() < 1e-10));
    }

    #[test]
    fn rank_deficient_returns_min_norm() {
        // Duplicate column: min-norm splits the slope evenly.
        let x = array![[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]];
        let fit = fit_ols(x.view(), array![2.0, 4.0, 6.0, 8.0].view()).unwrap();
        assert!(fit.rank_deficient);
        assert!((fit.beta[0] - 1.0).abs() < 1e-10);
        assert!((fit.beta[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn too_few_rows_is_an_error() {
        assert!(fit_ols(array![[1.0, 2.0], [3.0, 4.0]].view(), array![1.0, 2.0].view()).is_err());
    }

    #[test]
    fn zero_columns_is_intercept_only() {
        let x = Array2::<f64>::zeros((3, 0));
        let fit = fit_ols(x.view(), array![1.0, 2.0, 6.0].view()).unwrap();
        assert_eq!(fit.intercept, 3.0);
        assert_eq!(fit.beta.len(), 0);
    }
}
