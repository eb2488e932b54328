//! The 23-algorithm benchmark: scenario grid, seeded replicates, parallel
//! execution and result files.
//!
//! Each (scenario, replicate) is one job. Its dataset, split and per-replicate
//! model seed depend only on `(master_seed, scenario key, replicate)`, so the
//! output is identical for any worker count. Rows are sorted by
//! `(n, p, replicate, algorithm order)` before writing.

mod io;
mod summary;

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use crate::datagen::{gen_dataset, split_train_test, ScenarioConfig, SimDataset, TRAIN_RATIO, TRUE_SUPPORT};
use crate::error::{precondition, Error, Result};
use crate::metrics::MetricTriple;
use crate::selection::{
    run_blackbox_pipeline, run_hybrid_from_choice, run_regularized_pipeline, HybridSpec, PipelineOutcome, Selector,
    SubsetChoice,
};
use crate::trees::{EnsemblePreset, PresetName};

pub use io::{
    read_raw_csv, write_diagnostics_csv, write_raw_csv, write_timing_csv, write_tradeoff_csv, DIAGNOSTICS_HEADER,
    RAW_HEADER, TIMING_HEADER, TRADEOFF_HEADER,
};
pub use summary::{consistency_by_n, emit_tradeoff_points, summarize, Metric, SummaryRow, SummaryTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Regularized,
    Blackbox,
    Hybrid,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Regularized => "regularized",
            Family::Blackbox => "blackbox",
            Family::Hybrid => "hybrid",
        }
    }

    /// Label used in the trade-off point file.
    pub fn display_label(&self) -> &'static str {
        match self {
            Family::Regularized => "Regularized",
            Family::Blackbox => "Black-Box",
            Family::Hybrid => "Hybrid",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "regularized" => Ok(Family::Regularized),
            "blackbox" => Ok(Family::Blackbox),
            "hybrid" => Ok(Family::Hybrid),
            _ => Err(Error::Parse(format!("unknown family `{}`", s))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgorithmSpec {
    pub id: String,
    pub family: Family,
    pub selector: Option<Selector>,
    pub predictor: Option<PresetName>,
}

/// Ridge, lasso, enet, the five presets, then the 15 hybrids selector-major.
pub fn enumerate_algorithms() -> Vec<AlgorithmSpec> {
    let regularized = Selector::ALL.into_iter().map(|s| AlgorithmSpec {
        id: s.as_str().to_string(),
        family: Family::Regularized,
        selector: Some(s),
        predictor: None,
    });
    let blackbox = PresetName::ALL.into_iter().map(|p| AlgorithmSpec {
        id: p.as_str().to_string(),
        family: Family::Blackbox,
        selector: None,
        predictor: Some(p),
    });
    let hybrid = HybridSpec::all().into_iter().map(|h| AlgorithmSpec {
        id: h.id(),
        family: Family::Hybrid,
        selector: Some(h.selector),
        predictor: Some(h.predictor),
    });
    regularized.chain(blackbox).chain(hybrid).collect()
}

/// Position of `id` in [`enumerate_algorithms`].
pub fn algorithm_index(id: &str) -> Option<usize> {
    enumerate_algorithms().iter().position(|a| a.id == id)
}

pub fn algorithm(id: &str) -> Result<AlgorithmSpec> {
    enumerate_algorithms()
        .into_iter()
        .find(|a| a.id == id)
        .ok_or_else(|| Error::Parse(format!("unknown algorithm `{}`", id)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scenario {
    pub n: usize,
    pub p: usize,
    pub noisy: bool,
}

impl Scenario {
    pub fn key(&self) -> String {
        crate::datagen::scenario_key(self.n, self.p, self.noisy)
    }

    fn config(&self, replicate: usize, master_seed: u64) -> ScenarioConfig {
        ScenarioConfig::new(self.n, self.p, self.noisy, replicate as u64, master_seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scenario: Scenario,
    pub algorithm: String,
    pub family: Family,
    /// 0-based.
    pub replicate: usize,
    pub metrics: MetricTriple,
    /// Ascending 1-based identifiers.
    pub selected: Vec<usize>,
    pub m_star: usize,
    pub wall_time_s: f64,
    pub data_digest: String,
    pub data_seed: u64,
    pub model_seed: u64,
    pub full_fit_rmse: Option<f64>,
    pub lambda_min: Option<f64>,
    pub failed: bool,
    pub fail_reason: String,
}

impl RunRecord {
    pub fn is_exact_support(&self) -> bool {
        !self.failed && self.selected == TRUE_SUPPORT
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub n_list: Vec<usize>,
    pub p_list: Vec<usize>,
    pub n_sim: usize,
    pub k_folds: usize,
    pub master_seed: u64,
    pub noisy: bool,
    pub worker_count: usize,
    /// Result files are written here when set.
    pub output_dir: Option<PathBuf>,
    /// One stderr line per finished (scenario, replicate).
    pub progress: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_list: vec![50, 100, 200, 500, 1000],
            p_list: vec![5, 10, 50, 100],
            n_sim: 10,
            k_folds: 5,
            master_seed: 42,
            noisy: true,
            worker_count: std::thread::available_parallelism().map_or(1, |n| n.get()),
            output_dir: None,
            progress: false,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sim < 1 {
            return Err(precondition("n_sim must be at least 1"));
        }
        if self.worker_count < 1 {
            return Err(precondition("worker_count must be at least 1"));
        }
        if self.n_list.is_empty() || self.p_list.is_empty() {
            return Err(precondition("n and p lists must be non-empty"));
        }
        if self.k_folds < 2 {
            return Err(precondition("need at least 2 folds"));
        }
        for s in self.scenarios() {
            s.config(0, self.master_seed).validate()?;
            let n_train = crate::datagen::train_size(s.n, TRAIN_RATIO);
            if n_train < 2 * self.k_folds {
                return Err(precondition(format!(
                    "n={} leaves {} training rows, too few for {} folds",
                    s.n, n_train, self.k_folds
                )));
            }
        }
        Ok(())
    }

    /// Distinct scenarios in `(n, p)` order.
    pub fn scenarios(&self) -> Vec<Scenario> {
        let mut ns = self.n_list.clone();
        let mut ps = self.p_list.clone();
        ns.sort_unstable();
        ns.dedup();
        ps.sort_unstable();
        ps.dedup();
        ns.iter()
            .flat_map(|&n| ps.iter().map(move |&p| (n, p)))
            .map(|(n, p)| Scenario { n, p, noisy: self.noisy })
            .collect()
    }

    pub fn expected_rows(&self) -> usize {
        self.scenarios().len() * self.n_sim * enumerate_algorithms().len()
    }
}

/// Replicate dataset (already split) plus its model seed.
pub struct Replicate {
    pub dataset: SimDataset,
    pub data_seed: u64,
    pub model_seed: u64,
    pub digest: String,
}

pub fn prepare_replicate(scenario: &Scenario, replicate: usize, master_seed: u64) -> Result<Replicate> {
    let cfg = scenario.config(replicate, master_seed);
    let ds = gen_dataset(&cfg)?;
    let ds = split_train_test(ds, TRAIN_RATIO, cfg.seed_for("split"))?;
    Ok(Replicate {
        digest: ds.digest(),
        dataset: ds,
        data_seed: cfg.seed_for("data"),
        model_seed: cfg.seed_for("model"),
    })
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic".to_string())
}

/// Runs `f`, turning errors and panics into a failure reason.
fn guarded<T>(f: impl FnOnce() -> Result<T>) -> std::result::Result<T, String> {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => Ok(v),
        Ok(Err(e)) => Err(e.to_string()),
        Err(payload) => Err(format!("panic: {}", panic_message(payload))),
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> (std::result::Result<T, String>, f64) {
    let start = Instant::now();
    let out = guarded(f);
    (out, start.elapsed().as_secs_f64())
}

fn make_record(
    scenario: Scenario,
    spec: &AlgorithmSpec,
    replicate: usize,
    rep: &Replicate,
    outcome: std::result::Result<PipelineOutcome, String>,
    wall_time_s: f64,
) -> RunRecord {
    let base = RunRecord {
        scenario,
        algorithm: spec.id.clone(),
        family: spec.family,
        replicate,
        metrics: MetricTriple {
            rmse: f64::NAN,
            jaccard: f64::NAN,
            recovery: f64::NAN,
        },
        selected: Vec::new(),
        m_star: 0,
        wall_time_s,
        data_digest: rep.digest.clone(),
        data_seed: rep.data_seed,
        model_seed: rep.model_seed,
        full_fit_rmse: None,
        lambda_min: None,
        failed: false,
        fail_reason: String::new(),
    };
    match outcome {
        Ok(o) => RunRecord {
            metrics: o.metrics,
            selected: o.choice.sorted_selection(),
            m_star: o.choice.m_star,
            full_fit_rmse: o.full_fit_rmse,
            lambda_min: o.lambda_min,
            ..base
        },
        Err(reason) => RunRecord {
            failed: true,
            fail_reason: reason,
            ..base
        },
    }
}

fn failed_replicate_records(scenario: Scenario, replicate: usize, reason: &str) -> Vec<RunRecord> {
    enumerate_algorithms()
        .iter()
        .map(|spec| RunRecord {
            scenario,
            algorithm: spec.id.clone(),
            family: spec.family,
            replicate,
            metrics: MetricTriple {
                rmse: f64::NAN,
                jaccard: f64::NAN,
                recovery: f64::NAN,
            },
            selected: Vec::new(),
            m_star: 0,
            wall_time_s: 0.0,
            data_digest: String::new(),
            data_seed: 0,
            model_seed: 0,
            full_fit_rmse: None,
            lambda_min: None,
            failed: true,
            fail_reason: format!("data generation: {}", reason),
        })
        .collect()
}

/// One algorithm on one replicate, generating the replicate's data itself.
/// Hybrids re-run their selector, which reproduces the selector's own row.
pub fn run_cell(scenario: &Scenario, spec: &AlgorithmSpec, replicate: usize, config: &GridConfig) -> Result<RunRecord> {
    let rep = prepare_replicate(scenario, replicate, config.master_seed)?;
    let k = config.k_folds;
    let ds = &rep.dataset;
    let seed = rep.model_seed;
    let (outcome, secs) = match (spec.family, spec.selector, spec.predictor) {
        (Family::Regularized, Some(s), _) => timed(|| run_regularized_pipeline(ds, s.alpha(), k, seed)),
        (Family::Blackbox, _, Some(p)) => timed(|| run_blackbox_pipeline(ds, &EnsemblePreset::for_name(p), k, seed)),
        (Family::Hybrid, Some(selector), Some(predictor)) => timed(|| {
            let spec = HybridSpec { selector, predictor };
            crate::selection::run_hybrid_pipeline(ds, &spec, k, seed)
        }),
        _ => return Err(precondition(format!("malformed algorithm spec `{}`", spec.id))),
    };
    Ok(make_record(*scenario, spec, replicate, &rep, outcome, secs))
}

/// All 23 algorithms on one replicate, sharing the dataset and each
/// selector's subset with its hybrids.
pub fn run_replicate(scenario: &Scenario, replicate: usize, config: &GridConfig) -> Vec<RunRecord> {
    let rep = match guarded(|| prepare_replicate(scenario, replicate, config.master_seed)) {
        Ok(r) => r,
        Err(reason) => return failed_replicate_records(*scenario, replicate, &reason),
    };
    let k = config.k_folds;
    let ds = &rep.dataset;
    let seed = rep.model_seed;
    let specs = enumerate_algorithms();
    let mut selector_runs: Vec<(Selector, std::result::Result<SubsetChoice, String>, f64)> = Vec::new();
    let mut records = Vec::with_capacity(specs.len());
    for spec in &specs {
        let (outcome, secs) = match (spec.family, spec.selector, spec.predictor) {
            (Family::Regularized, Some(s), _) => {
                let (out, secs) = timed(|| run_regularized_pipeline(ds, s.alpha(), k, seed));
                selector_runs.push((s, out.as_ref().map(|o| o.choice.clone()).map_err(|e| e.clone()), secs));
                (out, secs)
            }
            (Family::Blackbox, _, Some(p)) => {
                timed(|| run_blackbox_pipeline(ds, &EnsemblePreset::for_name(p), k, seed))
            }
            (Family::Hybrid, Some(selector), Some(predictor)) => {
                let (_, choice, selector_secs) = selector_runs
                    .iter()
                    .find(|(s, _, _)| *s == selector)
                    .expect("selectors precede hybrids");
                match choice {
                    Ok(choice) => {
                        let hspec = HybridSpec { selector, predictor };
                        let (out, secs) = timed(|| run_hybrid_from_choice(ds, choice, &hspec, seed));
                        (out, secs + selector_secs)
                    }
                    Err(e) => (Err(format!("selector {} failed: {}", selector, e)), 0.0),
                }
            }
            _ => (Err(format!("malformed algorithm spec `{}`", spec.id)), 0.0),
        };
        records.push(make_record(*scenario, spec, replicate, &rep, outcome, secs));
    }
    records
}

/// Sorts into canonical `(n, p, replicate, algorithm order)` order.
pub fn sort_records(records: &mut [RunRecord]) {
    let order = enumerate_algorithms();
    let idx = |id: &str| order.iter().position(|a| a.id == id).unwrap_or(usize::MAX);
    records.sort_by(|a, b| {
        (a.scenario.n, a.scenario.p, a.replicate, idx(&a.algorithm), &a.algorithm).cmp(&(
            b.scenario.n,
            b.scenario.p,
            b.replicate,
            idx(&b.algorithm),
            &b.algorithm,
        ))
    });
}

#[derive(Debug, Clone)]
pub struct GridOutput {
    pub records: Vec<RunRecord>,
    pub n_failed: usize,
}

/// Runs every (scenario, replicate) job on a pool of `worker_count` threads and,
/// if `output_dir` is set, writes `raw.csv`, `timing.csv`, `diagnostics.csv`
/// and `tradeoff.csv` there.
pub fn run_grid(config: &GridConfig) -> Result<GridOutput> {
    config.validate()?;
    let jobs: Vec<(Scenario, usize)> = config
        .scenarios()
        .into_iter()
        .flat_map(|s| (0..config.n_sim).map(move |r| (s, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count)
        .build()
        .map_err(|e| precondition(format!("cannot build worker pool: {}", e)))?;
    let mut records: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .flat_map_iter(|(s, r)| {
                let recs = run_replicate(s, *r, config);
                if config.progress {
                    let secs: f64 = recs.iter().map(|r| r.wall_time_s).sum();
                    eprintln!("{} replicate {} done ({:.1}s)", s.key(), r, secs);
                }
                recs
            })
            .collect()
    });
    sort_records(&mut records);
    let n_failed = records.iter().filter(|r| r.failed).count();

    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        write_raw_csv(&dir.join("raw.csv"), &records)?;
        write_timing_csv(&dir.join("timing.csv"), &records)?;
        write_diagnostics_csv(&dir.join("diagnostics.csv"), &records)?;
        write_tradeoff_csv(&dir.join("tradeoff.csv"), &records)?;
    }
    Ok(GridOutput { records, n_failed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_three_algorithms_in_canonical_order() {
        let algs = enumerate_algorithms();
        assert_eq!(algs.len(), 23);
        assert_eq!(algs.iter().filter(|a| a.family == Family::Hybrid).count(), 15);
        assert_eq!(algs.iter().filter(|a| a.family == Family::Blackbox).count(), 5);
        let ids: Vec<&str> = algs.iter().map(|a| a.id.as_str()).collect();
        assert_eq!(&ids[..8], &["ridge", "lasso", "enet", "rf", "xgb_like", "lgbm_like", "catboost_like", "h2o_like"]);
        assert_eq!(ids[8], "rf_ridge");
        assert_eq!(ids[22], "h2o_like_enet");
        assert_eq!(algs, enumerate_algorithms());
        assert_eq!(algorithm_index("catboost_like_enet"), Some(21));
    }

    #[test]
    fn default_grid_shape() {
        let cfg = GridConfig::default();
        assert_eq!(cfg.scenarios().len(), 20);
        assert_eq!(cfg.expected_rows(), 4600);
        assert!(cfg.validate().is_ok());
        assert!(GridConfig { n_sim: 0, ..GridConfig::default() }.validate().is_err());
        assert!(GridConfig { n_list: vec![10], ..GridConfig::default() }.validate().is_err());
    }

    #[test]
    fn run_cell_matches_replicate_batch() {
        let cfg = GridConfig {
            n_list: vec![60],
            p_list: vec![6],
            n_sim: 1,
            worker_count: 1,
            ..GridConfig::default()
        };
        let s = cfg.scenarios()[0];
        let batch = run_replicate(&s, 0, &cfg);
        assert_eq!(batch.len(), 23);
        for id in ["lasso", "h2o_like", "xgb_like_ridge"] {
            let single = run_cell(&s, &algorithm(id).unwrap(), 0, &cfg).unwrap();
            let row = batch.iter().find(|r| r.algorithm == id).unwrap();
            assert_eq!(single.metrics, row.metrics, "{}", id);
            assert_eq!(single.selected, row.selected);
            assert_eq!(single.data_digest, row.data_digest);
        }
    }

    #[test]
    fn guarded_catches_panics() {
        let r: std::result::Result<(), String> = guarded(|| panic!("boom"));
        assert_eq!(r.unwrap_err(), "panic: boom");
    }
}
