use ndarray::ArrayView2;

/// Per-feature candidate thresholds and the bin code of every row.
///
/// Bin `b` of feature `j` holds values in `(t[b-1], t[b]]`; splitting after
/// bin `b` sends `x <= t[b]` left. Thresholds are midpoints between adjacent
/// distinct training values, so binned and raw comparisons agree on the rows
/// the bins were built from.
#[derive(Debug, Clone)]
pub(crate) struct BinnedMatrix {
    n: usize,
    codes: Vec<u16>,
    thresholds: Vec<Vec<f64>>,
}

impl BinnedMatrix {
    /// `candidates = None` keeps every midpoint (exhaustive search).
    pub fn new(x: ArrayView2<f64>, candidates: Option<usize>) -> Self {
        let (n, p) = x.dim();
        let mut codes = vec![0u16; n * p];
        let mut thresholds = Vec::with_capacity(p);
        let mut sorted = Vec::with_capacity(n);
        for j in 0..p {
            let col = x.column(j);
            sorted.clear();
            sorted.extend(col.iter().copied());
            sorted.sort_by(|a, b| a.total_cmp(b));
            let t = candidate_thresholds(&sorted, candidates);
            for (i, v) in col.iter().enumerate() {
                codes[j * n + i] = t.partition_point(|th| th < v) as u16;
            }
            thresholds.push(t);
        }
        Self {
            n,
            codes,
            thresholds,
        }
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.thresholds.len()
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[u16] {
        &self.codes[j * self.n..(j + 1) * self.n]
    }

    #[inline]
    pub fn n_bins(&self, j: usize) -> usize {
        self.thresholds[j].len() + 1
    }

    #[inline]
    pub fn threshold(&self, j: usize, bin: usize) -> f64 {
        self.thresholds[j][bin]
    }

    pub fn max_bins(&self) -> usize {
        self.thresholds.iter().map(|t| t.len() + 1).max().unwrap_or(1)
    }
}

fn candidate_thresholds(sorted: &[f64], candidates: Option<usize>) -> Vec<f64> {
    let mut distinct: Vec<f64> = Vec::with_capacity(sorted.len());
    for &v in sorted {
        if distinct.last() != Some(&v) {
            distinct.push(v);
        }
    }
    let all_midpoints = || distinct.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect::<Vec<_>>();
    let q = match candidates {
        None => return all_midpoints(),
        Some(q) if distinct.len() <= q + 1 => return all_midpoints(),
        Some(q) => q,
    };
    let n = sorted.len();
    let mut out: Vec<f64> = Vec::with_capacity(q);
    for k in 1..=q {
        let pos = (k * n / (q + 1)).min(n - 1);
        let v = sorted[pos];
        let idx = distinct.partition_point(|d| *d < v);
        if idx + 1 < distinct.len() {
            let t = 0.5 * (distinct[idx] + distinct[idx + 1]);
            if out.last().is_none_or(|last| *last < t) {
                out.push(t);
            }
        }
    }
    out
}
