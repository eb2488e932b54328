use std::fmt;
use std::str::FromStr;

use ndarray::{ArrayView1, ArrayView2};

use super::{fit_bagging, fit_boosting, EnsembleKind, EnsembleModel, Mtry, TreeParams};
use crate::error::{Error, Result};

/// Every preset grows this many trees (or boosting iterations).
pub const PRESET_TREES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PresetName {
    Rf,
    XgbLike,
    LgbmLike,
    CatboostLike,
    H2oLike,
}

impl PresetName {
    pub const ALL: [PresetName; 5] = [
        PresetName::Rf,
        PresetName::XgbLike,
        PresetName::LgbmLike,
        PresetName::CatboostLike,
        PresetName::H2oLike,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::Rf => "rf",
            PresetName::XgbLike => "xgb_like",
            PresetName::LgbmLike => "lgbm_like",
            PresetName::CatboostLike => "catboost_like",
            PresetName::H2oLike => "h2o_like",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Hyperparameters of one emulated black-box learner. The constants are
/// choices of this crate, not reproductions of the original libraries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsemblePreset {
    pub name: PresetName,
    pub kind: EnsembleKind,
    pub tree: TreeParams,
    pub n_trees: usize,
    pub learning_rate: f64,
    pub subsample: f64,
}

impl EnsemblePreset {
    pub fn for_name(name: PresetName) -> Self {
        let boosted = |max_depth, min_leaf, split_candidates, subsample| EnsemblePreset {
            name,
            kind: EnsembleKind::Boosting,
            tree: TreeParams {
                max_depth,
                min_leaf,
                mtry: Mtry::All,
                split_candidates: Some(split_candidates),
            },
            n_trees: PRESET_TREES,
            learning_rate: 0.1,
            subsample,
        };
        match name {
            PresetName::Rf => EnsemblePreset {
                name,
                kind: EnsembleKind::Bagging,
                tree: TreeParams {
                    max_depth: 25,
                    min_leaf: 5,
                    mtry: Mtry::ThirdOfP,
                    split_candidates: Some(32),
                },
                n_trees: PRESET_TREES,
                learning_rate: 1.0,
                subsample: 1.0,
            },
            PresetName::XgbLike => boosted(6, 1, 32, 1.0),
            PresetName::LgbmLike => boosted(8, 20, 63, 1.0),
            PresetName::CatboostLike => boosted(6, 1, 32, 0.8),
            PresetName::H2oLike => boosted(5, 10, 32, 1.0),
        }
    }

    pub fn fit(&self, x: ArrayView2<f64>, y: ArrayView1<f64>, seed: u64) -> Result<EnsembleModel> {
        match self.kind {
            EnsembleKind::Bagging => fit_bagging(x, y, &self.tree, self.n_trees, seed),
            EnsembleKind::Boosting => fit_boosting(
                x,
                y,
                &self.tree,
                self.n_trees,
                self.learning_rate,
                self.subsample,
                seed,
            ),
        }
    }
}

pub fn preset(name: &str) -> Result<EnsemblePreset> {
    Ok(EnsemblePreset::for_name(name.parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_table() {
        let rf = preset("rf").unwrap();
        assert_eq!(rf.kind, EnsembleKind::Bagging);
        assert_eq!(rf.tree.mtry, Mtry::ThirdOfP);
        assert_eq!(rf.tree.min_leaf, 5);
        assert_eq!(preset("catboost_like").unwrap().subsample, 0.8);
        assert_eq!(preset("lgbm_like").unwrap().tree.split_candidates, Some(63));
        assert_eq!(preset("lgbm_like").unwrap().tree.max_depth, 8);
        assert_eq!(preset("h2o_like").unwrap().tree.min_leaf, 10);
        assert_eq!(preset("h2o_like").unwrap().tree.max_depth, 5);
        assert_eq!(preset("xgb_like").unwrap().tree.max_depth, 6);
        for name in PresetName::ALL {
            let p = EnsemblePreset::for_name(name);
            assert_eq!(p.n_trees, 100);
            assert_eq!(p.name.as_str().parse::<PresetName>().unwrap(), name);
            if p.kind == EnsembleKind::Boosting {
                assert_eq!(p.learning_rate, 0.1);
            }
        }
    }

    #[test]
    fn unknown_preset_is_an_error() {
        assert!(matches!(preset("gbm"), Err(Error::UnknownPreset(_))));
    }
}
