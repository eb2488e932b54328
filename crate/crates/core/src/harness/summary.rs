use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use super::{enumerate_algorithms, RunRecord, TRADEOFF_HEADER};
use crate::datagen::TRUE_SUPPORT;
use crate::error::{precondition, Error, Result};
use crate::metrics::{aggregate, consistency_curve, AggregateCell};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Rmse,
    Jaccard,
    Recovery,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Rmse, Metric::Jaccard, Metric::Recovery];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Rmse => "rmse",
            Metric::Jaccard => "jaccard",
            Metric::Recovery => "recovery",
        }
    }

    pub fn higher_is_better(&self) -> bool {
        !matches!(self, Metric::Rmse)
    }

    pub fn value(&self, r: &RunRecord) -> f64 {
        match self {
            Metric::Rmse => r.metrics.rmse,
            Metric::Jaccard => r.metrics.jaccard,
            Metric::Recovery => r.metrics.recovery,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    /// One cell per entry of `SummaryTable::n_values`; `None` if no successful run.
    pub cells: Vec<Option<AggregateCell>>,
}

/// Mean (sd) per algorithm and sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub metric: Metric,
    pub n_values: Vec<usize>,
    pub rows: Vec<SummaryRow>,
    /// Per column, the row index with the best mean.
    pub best: Vec<Option<usize>>,
}

impl SummaryTable {
    pub fn cell(&self, algorithm: &str, n: usize) -> Option<AggregateCell> {
        let col = self.n_values.iter().position(|&v| v == n)?;
        self.rows.iter().find(|r| r.algorithm == algorithm)?.cells[col]
    }

    pub fn is_best(&self, row: usize, col: usize) -> bool {
        self.best[col] == Some(row)
    }

    /// Aligned text; the best cell in each column carries a trailing `*`.
    pub fn render_text(&self) -> String {
        let mut header = vec![format!("{} / n", self.metric)];
        header.extend(self.n_values.iter().map(|n| n.to_string()));
        let mut lines = vec![header];
        for (i, row) in self.rows.iter().enumerate() {
            let mut line = vec![row.algorithm.clone()];
            for (j, cell) in row.cells.iter().enumerate() {
                let mark = if self.is_best(i, j) { "*" } else { "" };
                line.push(cell.map_or("-".to_string(), |c| format!("{}{}", c.display(), mark)));
            }
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|j| lines.iter().map(|l| l[j].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in &lines {
            let cols: Vec<String> = line
                .iter()
                .enumerate()
                .map(|(j, s)| if j == 0 { format!("{:<w$}", s, w = widths[j]) } else { format!("{:>w$}", s, w = widths[j]) })
                .collect();
            out.push_str(cols.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    /// Long format: `algorithm,n,metric,mean,sd,n_sim,best`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["algorithm", "n", "metric", "mean", "sd", "n_sim", "best"])?;
        for (i, row) in self.rows.iter().enumerate() {
            for (j, cell) in row.cells.iter().enumerate() {
                if let Some(c) = cell {
                    w.write_record([
                        row.algorithm.clone(),
                        self.n_values[j].to_string(),
                        self.metric.to_string(),
                        format!("{:.6}", c.mean),
                        format!("{:.6}", c.sd),
                        c.n_sim.to_string(),
                        (self.is_best(i, j) as u8).to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn available(records: &[RunRecord]) -> String {
    let ps: BTreeSet<usize> = records.iter().map(|r| r.scenario.p).collect();
    let ns: BTreeSet<usize> = records.iter().map(|r| r.scenario.n).collect();
    format!("available p: {:?}; available n: {:?}", ps, ns)
}

/// Aggregates successful runs per (algorithm, n), optionally restricted to
/// one `p` and a set of `n`. Algorithms appear in canonical order, followed by
/// any unrecognized ids alphabetically.
pub fn summarize(records: &[RunRecord], metric: Metric, p_filter: Option<usize>, n_filter: Option<&[usize]>) -> Result<SummaryTable> {
    let kept: Vec<&RunRecord> = records
        .iter()
        .filter(|r| !r.failed)
        .filter(|r| p_filter.is_none_or(|p| r.scenario.p == p))
        .filter(|r| n_filter.is_none_or(|ns| ns.contains(&r.scenario.n)))
        .collect();
    if kept.is_empty() {
        return Err(precondition(format!(
            "no successful records match p={:?} n={:?}; {}",
            p_filter,
            n_filter,
            available(records)
        )));
    }
    let n_values: Vec<usize> = kept.iter().map(|r| r.scenario.n).collect::<BTreeSet<_>>().into_iter().collect();
    let present: BTreeSet<&str> = kept.iter().map(|r| r.algorithm.as_str()).collect();
    let mut algorithms: Vec<String> = enumerate_algorithms()
        .into_iter()
        .map(|a| a.id)
        .filter(|id| present.contains(id.as_str()))
        .collect();
    let extra: Vec<String> = present.iter().filter(|id| !algorithms.iter().any(|a| a == *id)).map(|s| s.to_string()).collect();
    algorithms.extend(extra);

    let mut rows = Vec::with_capacity(algorithms.len());
    for alg in &algorithms {
        let mut cells = Vec::with_capacity(n_values.len());
        for &n in &n_values {
            let values: Vec<f64> = kept
                .iter()
                .filter(|r| r.algorithm == *alg && r.scenario.n == n)
                .map(|r| metric.value(r))
                .collect();
            cells.push(if values.is_empty() { None } else { Some(aggregate(&values)?) });
        }
        rows.push(SummaryRow {
            algorithm: alg.clone(),
            cells,
        });
    }

    let best = (0..n_values.len())
        .map(|j| {
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in rows.iter().enumerate() {
                if let Some(c) = row.cells[j] {
                    let better = match best {
                        None => true,
                        Some((_, b)) if metric.higher_is_better() => c.mean > b,
                        Some((_, b)) => c.mean < b,
                    };
                    if better {
                        best = Some((i, c.mean));
                    }
                }
            }
            best.map(|(i, _)| i)
        })
        .collect();

    Ok(SummaryTable {
        metric,
        n_values,
        rows,
        best,
    })
}

/// One `(family label, algorithm, rmse, jaccard)` row per record, with family
/// labels `Black-Box`, `Hybrid` or `Regularized`. Returns the row count.
pub fn emit_tradeoff_points<W: Write>(records: &[RunRecord], w: &mut csv::Writer<W>) -> Result<usize> {
    if records.is_empty() {
        return Err(precondition("no records to emit"));
    }
    w.write_record(TRADEOFF_HEADER)?;
    for r in records {
        w.write_record([
            r.family.display_label().to_string(),
            r.algorithm.clone(),
            format!("{:.6}", r.metrics.rmse),
            format!("{:.6}", r.metrics.jaccard),
        ])?;
    }
    Ok(records.len())
}

/// Empirical `P(S_hat = S)` by sample size for one algorithm and `p`.
/// Failed runs count as misses.
pub fn consistency_by_n(records: &[RunRecord], algorithm: &str, p: usize) -> Result<Vec<(usize, f64)>> {
    let points: Vec<(usize, &[usize])> = records
        .iter()
        .filter(|r| r.algorithm == algorithm && r.scenario.p == p)
        .map(|r| (r.scenario.n, if r.failed { &[][..] } else { r.selected.as_slice() }))
        .collect();
    consistency_curve(points, &TRUE_SUPPORT)
}
