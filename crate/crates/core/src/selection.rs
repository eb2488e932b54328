//! Variable ranking, the forward subset-size search, and the regularized,
//! black-box and hybrid pipelines built on them.
//!
//! Every pipeline takes a replicate-level seed and derives its own streams from
//! it by name, so a hybrid re-running its selector reproduces exactly the
//! subset the standalone regularized pipeline chose.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::datagen::{derive_seed, SimDataset};
use crate::error::{precondition, Error, Result};
use crate::linear::{
    cv_select_lambda_with, fit_at_lambda_min, fit_ols, fold_assignment, predict_linear, CvOptions, LinearFit,
    ENET_ALPHA, LASSO_ALPHA, RIDGE_ALPHA,
};
use crate::metrics::{jaccard, recovery, rmse, MetricTriple};
use crate::trees::{feature_importance, predict_ensemble, EnsemblePreset, PresetName};

/// Largest ranking kept from importance scores and largest subset size searched.
pub const MAX_SUBSET: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankSource {
    Coefficient,
    Importance,
}

/// Variables (1-based) in descending score order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedSet {
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
    pub source: RankSource,
    /// Every score was zero, so nothing could be ranked.
    pub null_model: bool,
}

impl RankedSet {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

fn rank_scores(scores: impl Iterator<Item = f64>, source: RankSource, limit: Option<usize>) -> RankedSet {
    let mut items: Vec<(usize, f64)> = scores
        .enumerate()
        .filter(|(_, s)| *s != 0.0)
        .map(|(j, s)| (j + 1, s))
        .collect();
    // Descending score, ties to the lower identifier.
    items.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    if let Some(limit) = limit {
        items.truncate(limit);
    }
    RankedSet {
        null_model: items.is_empty(),
        order: items.iter().map(|(j, _)| *j).collect(),
        scores: items.iter().map(|(_, s)| *s).collect(),
        source,
    }
}

/// Ranks by `|beta_j|`, dropping exact zeros.
pub fn rank_by_coefficient(fit: &LinearFit) -> RankedSet {
    rank_scores(fit.beta.iter().map(|b| b.abs()), RankSource::Coefficient, None)
}

/// Ranks by importance, dropping zeros and keeping at most [`MAX_SUBSET`] variables.
pub fn rank_by_importance(importance: ArrayView1<f64>) -> Result<RankedSet> {
    if importance.len() < 2 {
        return Err(precondition("importance ranking needs at least 2 features"));
    }
    if importance.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(precondition("importance scores must be finite and non-negative"));
    }
    Ok(rank_scores(importance.iter().copied(), RankSource::Importance, Some(MAX_SUBSET)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetChoice {
    /// Chosen prefix size; 0 only for the null model.
    pub m_star: usize,
    /// First `m_star` variables of the ranking, in ranking order.
    pub selected: Vec<usize>,
    /// Cross-validated RMSE for `m = 1, 2, ...` (index `m - 1`).
    pub cv_rmse_by_m: Vec<f64>,
    pub null_model: bool,
}

impl SubsetChoice {
    pub fn null() -> Self {
        Self {
            m_star: 0,
            selected: Vec::new(),
            cv_rmse_by_m: Vec::new(),
            null_model: true,
        }
    }

    pub fn sorted_selection(&self) -> Vec<usize> {
        let mut s = self.selected.clone();
        s.sort_unstable();
        s
    }

    /// 0-based column indices of the selection.
    pub fn columns(&self) -> Vec<usize> {
        self.selected.iter().map(|j| j - 1).collect()
    }
}

/// Model refitted on each candidate prefix during the subset search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluator {
    Ols,
    Ensemble(EnsemblePreset),
}

impl Evaluator {
    fn fit_predict(&self, xt: ArrayView2<f64>, yt: ArrayView1<f64>, xh: ArrayView2<f64>, seed: u64) -> Result<Array1<f64>> {
        match self {
            Evaluator::Ols => predict_linear(&fit_ols(xt, yt)?, xh),
            Evaluator::Ensemble(preset) => predict_ensemble(&preset.fit(xt, yt, seed)?, xh),
        }
    }
}

/// Largest prefix size searched: `min(10, p - 1, |ranking|)`.
pub fn max_subset_size(p: usize, ranked_len: usize) -> usize {
    MAX_SUBSET.min(p.saturating_sub(1)).min(ranked_len)
}

/// k-fold CV over ranking prefixes `m = 1..=min(10, p-1, |ranking|)` with one
/// fold assignment shared by every `m`. CV RMSE pools all held-out squared
/// errors. `m_star` is the argmin, ties to the smaller `m`.
pub fn forward_subset_select(
    ranked: &RankedSet,
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    evaluator: &Evaluator,
    k: usize,
    seed: u64,
) -> Result<SubsetChoice> {
    if ranked.is_empty() {
        return Ok(SubsetChoice::null());
    }
    let (n, p) = x.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if ranked.order.iter().any(|&j| j == 0 || j > p) {
        return Err(precondition("ranking refers to a variable outside 1..=p"));
    }
    crate::linear::check_folds(n, k)?;
    let folds = fold_assignment(n, k, derive_seed(seed, "forward", 0, "cv-folds"));
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..k).map(|f| crate::linear::fold_rows(&folds, f)).collect();

    let m_max = max_subset_size(p, ranked.len());
    let mut cv_rmse_by_m = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let cols: Vec<usize> = ranked.order[..m].iter().map(|j| j - 1).collect();
        let xm = x.select(Axis(1), &cols);
        let mut sse = 0.0;
        for (f, (train, held)) in splits.iter().enumerate() {
            let xt = xm.select(Axis(0), train);
            let yt = y.select(Axis(0), train);
            let xh = xm.select(Axis(0), held);
            let fit_seed = derive_seed(seed, "forward", (m * k + f) as u64, "model");
            let pred = evaluator.fit_predict(xt.view(), yt.view(), xh.view(), fit_seed)?;
            sse += held.iter().zip(pred.iter()).map(|(&i, p)| (y[i] - p).powi(2)).sum::<f64>();
        }
        cv_rmse_by_m.push((sse / n as f64).sqrt());
    }
    let mut best = 0;
    for m in 1..cv_rmse_by_m.len() {
        if cv_rmse_by_m[m] < cv_rmse_by_m[best] {
            best = m;
        }
    }
    if !cv_rmse_by_m[best].is_finite() {
        return Err(Error::NonFinite("cross-validated RMSE"));
    }
    Ok(SubsetChoice {
        m_star: best + 1,
        selected: ranked.order[..=best].to_vec(),
        cv_rmse_by_m,
        null_model: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Selector {
    Ridge,
    Lasso,
    Enet,
}

impl Selector {
    pub const ALL: [Selector; 3] = [Selector::Ridge, Selector::Lasso, Selector::Enet];

    pub fn alpha(&self) -> f64 {
        match self {
            Selector::Ridge => RIDGE_ALPHA,
            Selector::Lasso => LASSO_ALPHA,
            Selector::Enet => ENET_ALPHA,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Selector::Ridge => "ridge",
            Selector::Lasso => "lasso",
            Selector::Enet => "enet",
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Selector::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown selector `{}`", s)))
    }
}

/// A regularized selector feeding its subset to an ensemble preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HybridSpec {
    pub selector: Selector,
    pub predictor: PresetName,
}

impl HybridSpec {
    /// All 15 combinations, selector-major.
    pub fn all() -> Vec<HybridSpec> {
        Selector::ALL
            .into_iter()
            .flat_map(|selector| PresetName::ALL.into_iter().map(move |predictor| HybridSpec { selector, predictor }))
            .collect()
    }

    /// `<preset>_<selector>`, e.g. `catboost_like_enet`.
    pub fn id(&self) -> String {
        format!("{}_{}", self.predictor, self.selector)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub choice: SubsetChoice,
    pub metrics: MetricTriple,
    /// Black-box only: test RMSE of the fit on all predictors.
    pub full_fit_rmse: Option<f64>,
    /// Regularized only: the cross-validated penalty strength.
    pub lambda_min: Option<f64>,
}

fn require_split(ds: &SimDataset) -> Result<()> {
    if !ds.has_split() {
        return Err(precondition("dataset has no train/test split"));
    }
    Ok(())
}

fn outcome_metrics(ds: &SimDataset, pred: &Array1<f64>, choice: &SubsetChoice) -> Result<MetricTriple> {
    let y_test = ds.test_y();
    Ok(MetricTriple {
        rmse: rmse(y_test.view(), pred.view())?,
        jaccard: jaccard(&ds.true_support, &choice.selected)?,
        recovery: recovery(&ds.true_support, &choice.selected)?,
    })
}

fn intercept_only_prediction(y_train: &Array1<f64>, n_test: usize) -> Array1<f64> {
    Array1::from_elem(n_test, y_train.sum() / y_train.len() as f64)
}

/// CV `lambda_min` -> fit -> rank by `|beta|` -> OLS subset search -> OLS on
/// the chosen subset over the training split, scored on the test split.
pub fn run_regularized_pipeline(ds: &SimDataset, alpha: f64, k: usize, seed: u64) -> Result<PipelineOutcome> {
    require_split(ds)?;
    let label = format!("regularized/alpha={}", alpha);
    let (xt, yt) = (ds.train_x(), ds.train_y());
    let opts = CvOptions::default();
    let cv = cv_select_lambda_with(xt.view(), yt.view(), alpha, k, derive_seed(seed, &label, 0, "cv-folds"), &opts)?;
    let fit = fit_at_lambda_min(xt.view(), yt.view(), &cv, &opts)?;
    let ranked = rank_by_coefficient(&fit);
    let choice = forward_subset_select(&ranked, xt.view(), yt.view(), &Evaluator::Ols, k, derive_seed(seed, &label, 1, "cv-folds"))?;

    let xs = ds.test_x();
    let cols = choice.columns();
    let final_fit = fit_ols(xt.select(Axis(1), &cols).view(), yt.view())?;
    let pred = predict_linear(&final_fit, xs.select(Axis(1), &cols).view())?;
    Ok(PipelineOutcome {
        metrics: outcome_metrics(ds, &pred, &choice)?,
        choice,
        full_fit_rmse: None,
        lambda_min: Some(cv.lambda_min),
    })
}

fn fit_predict_subset(
    preset: &EnsemblePreset,
    xt: &Array2<f64>,
    yt: &Array1<f64>,
    xs: &Array2<f64>,
    cols: &[usize],
    seed: u64,
) -> Result<Array1<f64>> {
    if cols.is_empty() {
        return Ok(intercept_only_prediction(yt, xs.nrows()));
    }
    let model = preset.fit(xt.select(Axis(1), cols).view(), yt.view(), seed)?;
    predict_ensemble(&model, xs.select(Axis(1), cols).view())
}

/// Preset on all predictors -> importance ranking (top 10) -> subset search
/// with the same preset -> refit on the chosen subset, scored on the test split.
pub fn run_blackbox_pipeline(ds: &SimDataset, preset: &EnsemblePreset, k: usize, seed: u64) -> Result<PipelineOutcome> {
    require_split(ds)?;
    let label = format!("blackbox/{}", preset.name);
    let (xt, yt) = (ds.train_x(), ds.train_y());
    let xs = ds.test_x();
    let full = preset.fit(xt.view(), yt.view(), derive_seed(seed, &label, 0, "model"))?;
    let full_pred = predict_ensemble(&full, xs.view())?;
    let full_fit_rmse = rmse(ds.test_y().view(), full_pred.view())?;

    let ranked = rank_by_importance(feature_importance(&full).view())?;
    let choice = forward_subset_select(
        &ranked,
        xt.view(),
        yt.view(),
        &Evaluator::Ensemble(*preset),
        k,
        derive_seed(seed, &label, 1, "cv-folds"),
    )?;
    let pred = fit_predict_subset(preset, &xt, &yt, &xs, &choice.columns(), derive_seed(seed, &label, 2, "model"))?;
    Ok(PipelineOutcome {
        metrics: outcome_metrics(ds, &pred, &choice)?,
        choice,
        full_fit_rmse: Some(full_fit_rmse),
        lambda_min: None,
    })
}

/// Fits `predictor` on a selector's subset; Jaccard and recovery are those of
/// the selector's subset.
pub fn run_hybrid_from_choice(ds: &SimDataset, selector_choice: &SubsetChoice, spec: &HybridSpec, seed: u64) -> Result<PipelineOutcome> {
    require_split(ds)?;
    let preset = EnsemblePreset::for_name(spec.predictor);
    let (xt, yt) = (ds.train_x(), ds.train_y());
    let xs = ds.test_x();
    let label = format!("hybrid/{}", spec.id());
    let pred = fit_predict_subset(&preset, &xt, &yt, &xs, &selector_choice.columns(), derive_seed(seed, &label, 0, "model"))?;
    Ok(PipelineOutcome {
        metrics: outcome_metrics(ds, &pred, selector_choice)?,
        choice: selector_choice.clone(),
        full_fit_rmse: None,
        lambda_min: None,
    })
}

/// Runs the selector's regularized pipeline, then the predictor on its subset.
pub fn run_hybrid_pipeline(ds: &SimDataset, spec: &HybridSpec, k: usize, seed: u64) -> Result<PipelineOutcome> {
    let selector = run_regularized_pipeline(ds, spec.selector.alpha(), k, seed)?;
    run_hybrid_from_choice(ds, &selector.choice, spec, seed)
}
