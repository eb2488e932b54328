use hybrid_bench::datagen::{gen_dataset, seeded_rng, split_train_test, ScenarioConfig};
use hybrid_bench::linear::{cv_select_lambda, fit_at_lambda_min, CvOptions, LinearFit, LASSO_ALPHA};
use hybrid_bench::selection::{
    forward_subset_select, rank_by_coefficient, rank_by_importance, run_blackbox_pipeline, run_hybrid_pipeline,
    run_regularized_pipeline, Evaluator, HybridSpec, RankSource, RankedSet, Selector,
};
use hybrid_bench::trees::{preset, PresetName};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn ranking(ids: Vec<usize>) -> RankedSet {
    let k = ids.len();
    RankedSet {
        scores: (0..k).map(|i| (k - i) as f64).collect(),
        order: ids,
        source: RankSource::Coefficient,
        null_model: k == 0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn choice_is_a_bounded_prefix_at_the_cv_minimum(seed in any::<u64>(), n in 40usize..120, p in 2usize..16, take in 1usize..16) {
        let mut rng = seeded_rng(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.gen::<f64>());
        let y = Array1::from_shape_fn(n, |i| 2.0 * x[[i, 0]] + x[[i, p - 1]] + rng.gen::<f64>());
        let mut ids: Vec<usize> = (1..=p).collect();
        ids.shuffle(&mut rng);
        ids.truncate(take.min(p));
        let ranked = ranking(ids);
        let choice = forward_subset_select(&ranked, x.view(), y.view(), &Evaluator::Ols, 5, seed).unwrap();
        let bound = 10.min(p - 1).min(ranked.len());
        prop_assert_eq!(choice.cv_rmse_by_m.len(), bound);
        prop_assert!(choice.m_star >= 1 && choice.m_star <= bound);
        prop_assert_eq!(&choice.selected[..], &ranked.order[..choice.m_star]);
        let min = choice.cv_rmse_by_m.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(choice.cv_rmse_by_m[choice.m_star - 1], min);
        prop_assert!(choice.cv_rmse_by_m[..choice.m_star - 1].iter().all(|v| *v > min));
    }

    #[test]
    fn ranking_ignores_positive_rescaling(seed in any::<u64>(), c in 1e-3f64..1e3, p in 2usize..40) {
        let mut rng = seeded_rng(seed);
        let raw: Vec<f64> = (0..p).map(|_| if rng.gen::<f64>() < 0.3 { 0.0 } else { rng.gen::<f64>() }).collect();
        let a = rank_by_importance(Array1::from(raw.clone()).view()).unwrap();
        let b = rank_by_importance(Array1::from(raw.iter().map(|v| v * c).collect::<Vec<_>>()).view()).unwrap();
        prop_assert_eq!(&a.order, &b.order);
        let beta: Array1<f64> = raw.iter().enumerate().map(|(j, v)| if j % 2 == 0 { *v } else { -v }).collect();
        let mut fit = LinearFit::intercept_only(0.0, p);
        fit.beta = beta.clone();
        let ra = rank_by_coefficient(&fit);
        fit.beta = beta * c;
        prop_assert_eq!(ra.order, rank_by_coefficient(&fit).order);
    }
}

#[test]
fn adding_true_variables_does_not_hurt_ols_cv() {
    for rep in 0..3 {
        let ds = gen_dataset(&ScenarioConfig::new(1000, 5, false, rep, 42)).unwrap();
        let ds = split_train_test(ds, 0.8, 7 + rep).unwrap();
        let (xt, yt) = (ds.train_x(), ds.train_y());
        let opts = CvOptions::default();
        let cv = cv_select_lambda(xt.view(), yt.view(), LASSO_ALPHA, 5, rep).unwrap();
        let fit = fit_at_lambda_min(xt.view(), yt.view(), &cv, &opts).unwrap();
        let ranked = rank_by_coefficient(&fit);
        let choice = forward_subset_select(&ranked, xt.view(), yt.view(), &Evaluator::Ols, 5, rep).unwrap();
        if (1..=5).all(|j| ranked.order.contains(&j)) {
            let first = choice.cv_rmse_by_m[0];
            let last = *choice.cv_rmse_by_m.last().unwrap();
            assert!(last <= first + 1e-6, "replicate {}: {} > {}", rep, last, first);
        }
    }
}

#[test]
fn every_hybrid_inherits_its_selector_subset() {
    let ds = gen_dataset(&ScenarioConfig::new(150, 12, true, 0, 5)).unwrap();
    let ds = split_train_test(ds, 0.8, 6).unwrap();
    for selector in Selector::ALL {
        let reg = run_regularized_pipeline(&ds, selector.alpha(), 5, 21).unwrap();
        for predictor in PresetName::ALL {
            let spec = HybridSpec { selector, predictor };
            let h = run_hybrid_pipeline(&ds, &spec, 5, 21).unwrap();
            assert_eq!(h.choice.selected, reg.choice.selected, "{}", spec.id());
            assert_eq!(h.metrics.jaccard, reg.metrics.jaccard);
            assert_eq!(h.metrics.recovery, reg.metrics.recovery);
        }
    }
}

#[test]
fn blackbox_pipeline_finds_the_support_on_clean_data() {
    let ds = gen_dataset(&ScenarioConfig::new(600, 20, false, 0, 3)).unwrap();
    let ds = split_train_test(ds, 0.8, 4).unwrap();
    let out = run_blackbox_pipeline(&ds, &preset("xgb_like").unwrap(), 5, 1).unwrap();
    assert_eq!(out.metrics.recovery, 1.0, "{:?}", out.choice);
    assert!(out.metrics.rmse < out.full_fit_rmse.unwrap() * 1.5);
}
