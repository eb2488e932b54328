//! Regularized linear selectors, tree ensembles and their hybrid compositions,
//! evaluated on Friedman synthetic regression data across an (n, p) scenario grid.
//!
//! The crate is organized bottom-up:
//!
//! * [`datagen`] draws seeded Friedman datasets and train/test splits.
//! * [`linear`] holds OLS and the elastic-net family solved by coordinate descent,
//!   plus lambda paths and cross-validated `lambda_min` selection.
//! * [`trees`] grows CART regression trees and composes them into bagged and
//!   boosted ensembles, with five named presets.
//! * [`selection`] ranks variables, runs the forward subset-size search and wires
//!   the regularized, black-box and hybrid pipelines.
//! * [`metrics`] computes RMSE, Jaccard and recovery and aggregates replicates.
//! * [`harness`] enumerates the 23 algorithms and sweeps the scenario grid.
//! * [`verify`] runs the independent oracle checks exposed by `hybrid-bench verify`.

pub mod cli;
pub mod datagen;
mod error;
pub mod harness;
pub mod linear;
pub mod metrics;
pub mod selection;
pub mod trees;
pub mod verify;

pub use error::{Error, Result};
