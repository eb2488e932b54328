use std::path::Path;

use super::{Family, RunRecord, Scenario};
use crate::error::{Error, Result};
use crate::metrics::MetricTriple;

pub const RAW_HEADER: [&str; 14] = [
    "scenario_n",
    "scenario_p",
    "noisy",
    "algorithm",
    "family",
    "replicate",
    "rmse",
    "jaccard",
    "recovery",
    "m_star",
    "selected_vars",
    "data_digest",
    "failed",
    "fail_reason",
];

pub const TIMING_HEADER: [&str; 5] = ["scenario_n", "scenario_p", "algorithm", "replicate", "wall_time_s"];

pub const DIAGNOSTICS_HEADER: [&str; 8] = [
    "scenario_n",
    "scenario_p",
    "algorithm",
    "replicate",
    "data_seed",
    "model_seed",
    "full_fit_rmse",
    "lambda_min",
];

pub const TRADEOFF_HEADER: [&str; 4] = ["family", "algorithm", "rmse", "jaccard"];

fn f6(v: f64) -> String {
    format!("{:.6}", v)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{:.10e}", x)).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn join_ids(ids: &[usize]) -> String {
    ids.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(";")
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new().from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_raw_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    write_rows(
        path,
        &RAW_HEADER,
        records.iter().map(|r| {
            vec![
                r.scenario.n.to_string(),
                r.scenario.p.to_string(),
                flag(r.scenario.noisy).to_string(),
                r.algorithm.clone(),
                r.family.to_string(),
                r.replicate.to_string(),
                f6(r.metrics.rmse),
                f6(r.metrics.jaccard),
                f6(r.metrics.recovery),
                r.m_star.to_string(),
                join_ids(&r.selected),
                r.data_digest.clone(),
                flag(r.failed).to_string(),
                r.fail_reason.clone(),
            ]
        }),
    )
}

pub fn write_timing_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    write_rows(
        path,
        &TIMING_HEADER,
        records.iter().map(|r| {
            vec![
                r.scenario.n.to_string(),
                r.scenario.p.to_string(),
                r.algorithm.clone(),
                r.replicate.to_string(),
                f6(r.wall_time_s),
            ]
        }),
    )
}

pub fn write_diagnostics_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    write_rows(
        path,
        &DIAGNOSTICS_HEADER,
        records.iter().map(|r| {
            vec![
                r.scenario.n.to_string(),
                r.scenario.p.to_string(),
                r.algorithm.clone(),
                r.replicate.to_string(),
                r.data_seed.to_string(),
                r.model_seed.to_string(),
                opt(r.full_fit_rmse),
                opt(r.lambda_min),
            ]
        }),
    )
}

pub fn write_tradeoff_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_path(path)?;
    super::emit_tradeoff_points(records, &mut w)?;
    w.flush()?;
    Ok(())
}

fn field(rec: &csv::StringRecord, i: usize, line: u64) -> Result<&str> {
    rec.get(i)
        .ok_or_else(|| Error::Parse(format!("line {}: missing column {}", line, RAW_HEADER[i])))
}

fn parse<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let s = field(rec, i, line)?;
    s.parse()
        .map_err(|_| Error::Parse(format!("line {}: bad {} `{}`", line, RAW_HEADER[i], s)))
}

fn parse_flag(rec: &csv::StringRecord, i: usize, line: u64) -> Result<bool> {
    match field(rec, i, line)? {
        "0" => Ok(false),
        "1" => Ok(true),
        s => Err(Error::Parse(format!("line {}: bad {} `{}`", line, RAW_HEADER[i], s))),
    }
}

/// Reads a raw results file. Seeds, timing and diagnostics are not part of it
/// and come back as zero / `None`.
pub fn read_raw_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::ReaderBuilder::new().from_path(path)?;
    let header = rdr.headers()?.clone();
    if header.iter().ne(RAW_HEADER.iter().copied()) {
        return Err(Error::Parse(format!(
            "{}: unexpected header, want {}",
            path.display(),
            RAW_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k as u64 + 2;
        let selected_raw = field(&rec, 10, line)?;
        let selected = if selected_raw.is_empty() {
            Vec::new()
        } else {
            selected_raw
                .split(';')
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Parse(format!("line {}: bad selected_vars `{}`", line, selected_raw)))?
        };
        out.push(RunRecord {
            scenario: Scenario {
                n: parse(&rec, 0, line)?,
                p: parse(&rec, 1, line)?,
                noisy: parse_flag(&rec, 2, line)?,
            },
            algorithm: field(&rec, 3, line)?.to_string(),
            family: Family::parse(field(&rec, 4, line)?)?,
            replicate: parse(&rec, 5, line)?,
            metrics: MetricTriple {
                rmse: parse(&rec, 6, line)?,
                jaccard: parse(&rec, 7, line)?,
                recovery: parse(&rec, 8, line)?,
            },
            m_star: parse(&rec, 9, line)?,
            selected,
            wall_time_s: 0.0,
            data_digest: field(&rec, 11, line)?.to_string(),
            data_seed: 0,
            model_seed: 0,
            full_fit_rmse: None,
            lambda_min: None,
            failed: parse_flag(&rec, 12, line)?,
            fail_reason: field(&rec, 13, line)?.to_string(),
        });
    }
    Ok(out)
}
