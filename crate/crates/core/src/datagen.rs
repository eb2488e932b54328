//! Friedman synthetic data, seeded train/test splits and seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded from
//! [`derive_seed`], which hashes `(master_seed, scenario_key, replicate, label)`
//! with SHA-256. ChaCha is counter-based and portable, so a replicate replays
//! bit-identically on any platform and under any thread schedule.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{precondition, Error, Result};

/// The generator used for every stream.
pub type SimRng = ChaCha8Rng;

/// Variables that enter the Friedman response (1-based identifiers).
pub const TRUE_SUPPORT: [usize; 5] = [1, 2, 3, 4, 5];

/// Fraction of observations assigned to the training split.
pub const TRAIN_RATIO: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScenarioConfig {
    pub n: usize,
    pub p: usize,
    pub noisy: bool,
    pub replicate_index: u64,
    pub master_seed: u64,
}

impl ScenarioConfig {
    pub fn new(n: usize, p: usize, noisy: bool, replicate_index: u64, master_seed: u64) -> Self {
        Self {
            n,
            p,
            noisy,
            replicate_index,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 5 {
            return Err(precondition(format!("p must be at least 5, got {}", self.p)));
        }
        if self.n < 10 {
            return Err(precondition(format!("n must be at least 10, got {}", self.n)));
        }
        Ok(())
    }

    /// `n{n}_p{p}_{noisy|clean}`, used for seed derivation and file names.
    pub fn scenario_key(&self) -> String {
        scenario_key(self.n, self.p, self.noisy)
    }

    pub fn seed_for(&self, stream_label: &str) -> u64 {
        derive_seed(
            self.master_seed,
            &self.scenario_key(),
            self.replicate_index,
            stream_label,
        )
    }
}

pub fn scenario_key(n: usize, p: usize, noisy: bool) -> String {
    format!("n{}_p{}_{}", n, p, if noisy { "noisy" } else { "clean" })
}

/// One generated replicate. Observation indices are 0-based; variable
/// identifiers (as in `true_support`) are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub true_support: Vec<usize>,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
}

impl SimDataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn has_split(&self) -> bool {
        !self.train_idx.is_empty() && !self.test_idx.is_empty()
    }

    pub fn train_x(&self) -> Array2<f64> {
        self.x.select(Axis(0), &self.train_idx)
    }

    pub fn train_y(&self) -> Array1<f64> {
        self.y.select(Axis(0), &self.train_idx)
    }

    pub fn test_x(&self) -> Array2<f64> {
        self.x.select(Axis(0), &self.test_idx)
    }

    pub fn test_y(&self) -> Array1<f64> {
        self.y.select(Axis(0), &self.test_idx)
    }

    /// Stable hex digest of `x` and `y` (SHA-256 over little-endian bytes, first 8 bytes).
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n() as u64).to_le_bytes());
        hasher.update((self.p() as u64).to_le_bytes());
        for v in self.x.iter() {
            hasher.update(v.to_le_bytes());
        }
        for v in self.y.iter() {
            hasher.update(v.to_le_bytes());
        }
        let out = hasher.finalize();
        out[..8].iter().map(|b| format!("{:02x}", b)).collect()
    }

    /// Writes `x1..xp,y` CSV.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let mut header: Vec<String> = (1..=self.p()).map(|j| format!("x{}", j)).collect();
        header.push("y".to_string());
        writeln!(w, "{}", header.join(","))?;
        for (row, y) in self.x.rows().into_iter().zip(self.y.iter()) {
            let mut fields: Vec<String> = row.iter().map(|v| format!("{:.17}", v)).collect();
            fields.push(format!("{:.17}", y));
            writeln!(w, "{}", fields.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5`; coordinates past the fifth are ignored.
pub fn friedman_response(x: ArrayView1<f64>) -> Result<f64> {
    if x.len() < 5 {
        return Err(precondition(format!(
            "Friedman response needs at least 5 coordinates, got {}",
            x.len()
        )));
    }
    if x.iter().take(5).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("friedman_response input"));
    }
    Ok(10.0 * (PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5).powi(2) + 10.0 * x[3] + 5.0 * x[4])
}

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal draw by the Box-Muller cosine branch. Consumes exactly two
/// uniforms per call so streams replay exactly.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // 1 - U lies in (0, 1], keeping ln finite.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Draws `X ~ U(0,1)^{n x p}` (row-major order from the `data` stream) and the
/// response, with standard-normal noise from a separate sub-stream when `noisy`.
pub fn gen_dataset(config: &ScenarioConfig) -> Result<SimDataset> {
    config.validate()?;
    let (n, p) = (config.n, config.p);
    let data_seed = config.seed_for("data");
    let mut rng = seeded_rng(data_seed);
    let x = Array2::from_shape_fn((n, p), |_| rng.gen::<f64>());

    let mut noise_rng = seeded_rng(derive_seed(data_seed, "", 0, "noise"));
    let mut y = Array1::zeros(n);
    for (i, row) in x.rows().into_iter().enumerate() {
        let f = friedman_response(row)?;
        y[i] = if config.noisy {
            f + standard_normal(&mut noise_rng)
        } else {
            f
        };
    }

    Ok(SimDataset {
        x,
        y,
        true_support: TRUE_SUPPORT.to_vec(),
        train_idx: Vec::new(),
        test_idx: Vec::new(),
    })
}

/// Number of training rows for a split: `round(ratio * n)` with halves rounded up.
pub fn train_size(n: usize, ratio: f64) -> usize {
    (ratio * n as f64 + 0.5).floor() as usize
}

/// Partitions rows by a seeded uniform permutation. Both index lists are
/// returned sorted ascending.
pub fn split_train_test(mut ds: SimDataset, ratio: f64, seed: u64) -> Result<SimDataset> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(precondition(format!("split ratio must be in (0,1), got {}", ratio)));
    }
    let n = ds.n();
    if ds.y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: ds.y.len(),
        });
    }
    let n_train = train_size(n, ratio);
    if n_train < 1 || n_train >= n {
        return Err(precondition(format!(
            "degenerate split: n={} ratio={} gives {} training rows",
            n, ratio, n_train
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seeded_rng(seed));
    let mut train = perm[..n_train].to_vec();
    let mut test = perm[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    ds.train_idx = train;
    ds.test_idx = test;
    Ok(ds)
}

/// Stable 64-bit seed from `(master_seed, scenario_key, replicate_index, stream_label)`.
///
/// SHA-256 over the little-endian master seed, the length-prefixed key, the
/// replicate index and the length-prefixed label; the first 8 digest bytes are
/// read little-endian. Independent of call order and thread count.
pub fn derive_seed(master_seed: u64, scenario_key: &str, replicate_index: u64, stream_label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update((scenario_key.len() as u64).to_le_bytes());
    hasher.update(scenario_key.as_bytes());
    hasher.update(replicate_index.to_le_bytes());
    hasher.update((stream_label.len() as u64).to_le_bytes());
    hasher.update(stream_label.as_bytes());
    let out = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&out[..8]);
    u64::from_le_bytes(bytes)
}
