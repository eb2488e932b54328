//! CART regression trees, bagged and boosted ensembles, and the five named
//! presets that stand in for the benchmarked black-box libraries.

mod binning;
mod ensemble;
mod preset;
mod tree;

pub use ensemble::{
    feature_importance, fit_bagging, fit_bagging_with, fit_boosting, predict_ensemble, EnsembleKind, EnsembleModel,
};
pub use preset::{preset, EnsemblePreset, PresetName};
pub use tree::{fit_tree, Node, RegressionTree};


use crate::error::{precondition, Result};

/// Number of features considered at each split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mtry {
    All,
    /// Clamped to `[1, p]`.
    Count(usize),
    /// `ceil(f * p)`, clamped to `[1, p]`.
    Fraction(f64),
    /// `ceil(p / 3)`.
    ThirdOfP,
}

impl Mtry {
    pub fn resolve(&self, p: usize) -> Result<usize> {
        if p == 0 {
            return Err(precondition("no features to split on"));
        }
        let m = match *self {
            Mtry::All => p,
            Mtry::Count(c) => c,
            Mtry::Fraction(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(precondition(format!("mtry fraction must be in (0,1], got {}", f)));
                }
                (f * p as f64).ceil() as usize
            }
            Mtry::ThirdOfP => p.div_ceil(3),
        };
        Ok(m.clamp(1, p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub mtry: Mtry,
    /// Quantile threshold candidates per feature; `None` searches every midpoint.
    pub split_candidates: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 6,
            min_leaf: 1,
            mtry: Mtry::All,
            split_candidates: Some(32),
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(precondition("max_depth must be at least 1"));
        }
        if self.min_leaf < 1 {
            return Err(precondition("min_leaf must be at least 1"));
        }
        if self.split_candidates == Some(0) {
            return Err(precondition("split_candidates must be positive"));
        }
        if let Mtry::Count(0) = self.mtry {
            return Err(precondition("mtry must be at least 1"));
        }
        Ok(())
    }
}
