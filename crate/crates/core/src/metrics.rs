//! RMSE, Jaccard and recovery, replicate aggregation, and the empirical
//! selection-consistency curve `P(S_hat = S)` by sample size.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::ArrayView1;

use crate::error::{precondition, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTriple {
    pub rmse: f64,
    pub jaccard: f64,
    pub recovery: f64,
}

impl MetricTriple {
    pub fn evaluate(y_true: ArrayView1<f64>, y_pred: ArrayView1<f64>, truth: &[usize], selected: &[usize]) -> Result<Self> {
        Ok(Self {
            rmse: rmse(y_true, y_pred)?,
            jaccard: jaccard(truth, selected)?,
            recovery: recovery(truth, selected)?,
        })
    }
}

pub fn rmse(y_true: ArrayView1<f64>, y_pred: ArrayView1<f64>) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(precondition("RMSE of empty vectors"));
    }
    let sse: f64 = y_true.iter().zip(y_pred.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((sse / y_true.len() as f64).sqrt())
}

fn set_sizes(truth: &[usize], selected: &[usize]) -> Result<(usize, usize, usize)> {
    let s: BTreeSet<usize> = truth.iter().copied().collect();
    if s.is_empty() {
        return Err(precondition("true support must be non-empty"));
    }
    let s_hat: BTreeSet<usize> = selected.iter().copied().collect();
    let inter = s.intersection(&s_hat).count();
    let union = s.union(&s_hat).count();
    Ok((inter, union, s.len()))
}

/// `|S n S_hat| / |S u S_hat|`; zero for an empty selection.
pub fn jaccard(truth: &[usize], selected: &[usize]) -> Result<f64> {
    let (inter, union, _) = set_sizes(truth, selected)?;
    Ok(inter as f64 / union as f64)
}

/// `|S n S_hat| / |S|`.
pub fn recovery(truth: &[usize], selected: &[usize]) -> Result<f64> {
    let (inter, _, s) = set_sizes(truth, selected)?;
    Ok(inter as f64 / s as f64)
}

/// Mean and sample standard deviation (divisor `len - 1`) of replicate values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateCell {
    pub mean: f64,
    pub sd: f64,
    pub n_sim: usize,
    /// False when only one value was aggregated; `sd` is then 0.
    pub sd_defined: bool,
}

impl AggregateCell {
    /// `"mean (sd)"` at two decimals.
    pub fn display(&self) -> String {
        format!("{:.2} ({:.2})", self.mean, self.sd)
    }
}

pub fn aggregate(values: &[f64]) -> Result<AggregateCell> {
    if values.is_empty() {
        return Err(precondition("cannot aggregate an empty sequence"));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let (sd, sd_defined) = if n >= 2 {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        ((ss / (n - 1) as f64).sqrt(), true)
    } else {
        (0.0, false)
    };
    Ok(AggregateCell {
        mean,
        sd,
        n_sim: n,
        sd_defined,
    })
}

/// Fraction of replicates whose selection equals `truth` exactly, per sample
/// size, sorted by `n`. Input pairs are `(n, selected)` for one algorithm.
pub fn consistency_curve<'a, I>(points: I, truth: &[usize]) -> Result<Vec<(usize, f64)>>
where
    I: IntoIterator<Item = (usize, &'a [usize])>,
{
    let truth: BTreeSet<usize> = truth.iter().copied().collect();
    let mut by_n: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (n, selected) in points {
        let hit = selected.iter().copied().collect::<BTreeSet<_>>() == truth;
        let e = by_n.entry(n).or_default();
        e.0 += hit as usize;
        e.1 += 1;
    }
    if by_n.len() < 2 {
        return Err(precondition(format!(
            "consistency curve needs at least 2 distinct sample sizes, got {}",
            by_n.len()
        )));
    }
    Ok(by_n
        .into_iter()
        .map(|(n, (hits, total))| (n, hits as f64 / total as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    const S: [usize; 5] = [1, 2, 3, 4, 5];

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(array![1.0, 2.0, 3.0].view(), array![1.0, 2.0, 3.0].view()).unwrap(), 0.0);
        let v = rmse(array![0.0, 0.0].view(), array![3.0, 4.0].view()).unwrap();
        assert!((v - 12.5f64.sqrt()).abs() < 1e-15);
        assert!((v - 3.53553).abs() < 1e-5);
        let shifted = rmse(array![1.0, -2.0, 7.5].view(), array![3.5, 0.5, 10.0].view()).unwrap();
        assert!((shifted - 2.5).abs() < 1e-15);
        assert!(rmse(array![1.0].view(), array![1.0, 2.0].view()).is_err());
        assert!(rmse(array![].view(), array![].view()).is_err());
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard(&S, &S).unwrap(), 1.0);
        assert_eq!(jaccard(&S, &[1, 2, 3, 6]).unwrap(), 0.5);
        assert_eq!(jaccard(&S, &[]).unwrap(), 0.0);
        assert!(jaccard(&[], &[1]).is_err());
    }

    #[test]
    fn recovery_examples() {
        assert_eq!(recovery(&S, &[1, 2, 3, 4, 5, 9, 12]).unwrap(), 1.0);
        assert_eq!(recovery(&S, &[1, 2, 3]).unwrap(), 0.6);
        assert_eq!(recovery(&S, &[]).unwrap(), 0.0);
        assert!(recovery(&[], &[]).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let c = aggregate(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!((c.mean, c.sd), (2.0, 0.0));
        let c = aggregate(&[1.0, 3.0]).unwrap();
        assert_eq!(c.mean, 2.0);
        assert!((c.sd - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.display(), "2.00 (1.41)");
        let c = aggregate(&[4.0]).unwrap();
        assert_eq!(c.sd, 0.0);
        assert!(!c.sd_defined);
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn consistency_curve_extremes() {
        let exact: Vec<usize> = S.to_vec();
        let partial = vec![1, 2];
        let all_hit = vec![(50, exact.as_slice()), (100, exact.as_slice()), (50, exact.as_slice())];
        assert_eq!(consistency_curve(all_hit, &S).unwrap(), vec![(50, 1.0), (100, 1.0)]);
        let none = vec![(100, partial.as_slice()), (50, partial.as_slice())];
        assert_eq!(consistency_curve(none, &S).unwrap(), vec![(50, 0.0), (100, 0.0)]);
        let mixed = vec![(50, partial.as_slice()), (50, exact.as_slice()), (200, exact.as_slice())];
        assert_eq!(consistency_curve(mixed, &S).unwrap(), vec![(50, 0.5), (200, 1.0)]);
        assert!(consistency_curve(vec![(50, exact.as_slice())], &S).is_err());
    }
}
