//! Command-line front end: `simulate`, `summarize`, `verify`, `list-algorithms`.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 grid finished with failed
//! rows, 3 verification failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{self, enumerate_algorithms, prepare_replicate, read_raw_csv, summarize, GridConfig, Metric};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hybrid-bench", version, about = "Regularized, tree-ensemble and hybrid variable-selection benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the scenario grid and write raw.csv, timing.csv, diagnostics.csv and tradeoff.csv.
    Simulate(SimulateArgs),
    /// Print mean (sd) tables from a raw results file.
    Summarize(SummarizeArgs),
    /// Run the numerical oracle checks.
    Verify(VerifyArgs),
    /// Print the 23 algorithm ids with their family.
    ListAlgorithms,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Sample sizes, comma separated [default: 50,100,200,500,1000]
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Predictor counts, comma separated [default: 5,10,50,100]
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<usize>>,
    /// Replicates per scenario [default: 10]
    #[arg(long)]
    nsim: Option<usize>,
    /// Master seed [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    /// Cross-validation folds [default: 5]
    #[arg(long)]
    folds: Option<usize>,
    /// Add N(0,1) noise to the response [default: true]
    #[arg(long)]
    noisy: Option<bool>,
    /// Worker threads [default: available parallelism]
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory [default: ./results]
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value file (keys as the long flag names); explicit flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write every replicate's dataset under <out>/data/
    #[arg(long)]
    dump_data: bool,
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    /// Raw results file
    #[arg(long = "in", default_value = "results/raw.csv")]
    input: PathBuf,
    /// rmse, jaccard or recovery [default: all three]
    #[arg(long)]
    metric: Option<String>,
    /// Keep only this predictor count [default: all]
    #[arg(long)]
    p: Option<usize>,
    /// Keep only these sample sizes, comma separated [default: all]
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Also write the summary as CSV here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Run one check only
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(verify::CHECK_NAMES))]
    only: Option<String>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return EXIT_OK;
            }
            let msg = e.render().to_string();
            eprint!("{}", msg);
            if !msg.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return EXIT_USAGE;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Summarize(a) => cmd_summarize(a),
        Command::Verify(a) => Ok(cmd_verify(a)),
        Command::ListAlgorithms => Ok(cmd_list_algorithms()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            eprintln!("run `hybrid-bench --help` for usage");
            EXIT_USAGE
        }
    }
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn config_value<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| v.parse().map_err(|_| Error::Parse(format!("config key `{}`: bad value `{}`", key, v))))
        .transpose()
}

fn config_list(map: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<usize>>> {
    map.get(key)
        .map(|v| {
            v.split(',')
                .map(|s| s.trim().parse())
                .collect::<std::result::Result<Vec<usize>, _>>()
                .map_err(|_| Error::Parse(format!("config key `{}`: bad list `{}`", key, v)))
        })
        .transpose()
}

const CONFIG_KEYS: [&str; 8] = ["n", "p", "nsim", "seed", "folds", "noisy", "workers", "out"];

fn grid_config(a: &SimulateArgs) -> Result<GridConfig> {
    let file = match &a.config {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    if let Some(k) = file.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown config key `{}`", k)));
    }
    let d = GridConfig::default();
    Ok(GridConfig {
        n_list: a.n.clone().or(config_list(&file, "n")?).unwrap_or(d.n_list),
        p_list: a.p.clone().or(config_list(&file, "p")?).unwrap_or(d.p_list),
        n_sim: a.nsim.or(config_value(&file, "nsim")?).unwrap_or(d.n_sim),
        k_folds: a.folds.or(config_value(&file, "folds")?).unwrap_or(d.k_folds),
        master_seed: a.seed.or(config_value(&file, "seed")?).unwrap_or(d.master_seed),
        noisy: a.noisy.or(config_value(&file, "noisy")?).unwrap_or(d.noisy),
        worker_count: a.workers.or(config_value(&file, "workers")?).unwrap_or(d.worker_count),
        output_dir: Some(
            a.out
                .clone()
                .or(config_value(&file, "out")?)
                .unwrap_or_else(|| PathBuf::from("results")),
        ),
        progress: true,
    })
}

fn cmd_simulate(a: SimulateArgs) -> Result<i32> {
    let cfg = grid_config(&a)?;
    cfg.validate()?;
    let out_dir = cfg.output_dir.clone().expect("set by grid_config");
    if a.dump_data {
        let data_dir = out_dir.join("data");
        std::fs::create_dir_all(&data_dir)?;
        for s in cfg.scenarios() {
            for r in 0..cfg.n_sim {
                let rep = prepare_replicate(&s, r, cfg.master_seed)?;
                rep.dataset.write_csv(&data_dir.join(format!("{}_rep{}.csv", s.key(), r)))?;
            }
        }
    }
    let out = harness::run_grid(&cfg)?;
    println!(
        "{} rows ({} failed) written to {}",
        out.records.len(),
        out.n_failed,
        out_dir.join("raw.csv").display()
    );
    if out.n_failed > 0 {
        for r in out.records.iter().filter(|r| r.failed) {
            eprintln!(
                "failed: {} replicate {} {}: {}",
                r.scenario.key(),
                r.replicate,
                r.algorithm,
                r.fail_reason
            );
        }
        return Ok(EXIT_PARTIAL);
    }
    Ok(EXIT_OK)
}

fn cmd_summarize(a: SummarizeArgs) -> Result<i32> {
    let metrics = match &a.metric {
        Some(m) => vec![m.parse::<Metric>()?],
        None => Metric::ALL.to_vec(),
    };
    let records = read_raw_csv(&a.input)?;
    let mut csv_out = Vec::new();
    for (i, metric) in metrics.iter().enumerate() {
        let table = summarize(&records, *metric, a.p, a.n.as_deref())?;
        if i > 0 {
            println!();
        }
        print!("{}", table.render_text());
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        let text = String::from_utf8(buf).expect("csv output is utf-8");
        let body = if i == 0 { text.as_str() } else { text.split_once('\n').map_or("", |(_, b)| b) };
        csv_out.extend_from_slice(body.as_bytes());
    }
    if let Some(path) = &a.out {
        std::fs::write(path, csv_out)?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs) -> i32 {
    let report = verify::run_checks(a.only.as_deref());
    for c in &report {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed: Vec<&str> = report.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        EXIT_OK
    } else {
        eprintln!("verification failed: {}", failed.join(", "));
        EXIT_VERIFY
    }
}

fn cmd_list_algorithms() -> i32 {
    for a in enumerate_algorithms() {
        println!("{}\t{}", a.id, a.family);
    }
    EXIT_OK
}
