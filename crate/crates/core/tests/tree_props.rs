use hybrid_bench::datagen::{gen_dataset, seeded_rng, standard_normal, ScenarioConfig};
use hybrid_bench::trees::{
    feature_importance, fit_bagging, fit_boosting, fit_tree, predict_ensemble, preset, Mtry, Node, PresetName, TreeParams,
};
use ndarray::{Array1, Array2, Axis};
use proptest::prelude::*;
use rand::Rng;

fn sse(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum()
}

/// Best SSE reduction over every feature and midpoint between distinct values.
fn brute_force_gain(x: &Array2<f64>, y: &Array1<f64>, min_leaf: usize) -> f64 {
    let (n, p) = x.dim();
    let parent = sse(y.as_slice().unwrap());
    let mut best = 0.0f64;
    for j in 0..p {
        let mut vals = x.column(j).to_vec();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let (l, r): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| x[[i, j]] <= t);
            if l.len() < min_leaf || r.len() < min_leaf {
                continue;
            }
            let yl: Vec<f64> = l.iter().map(|&i| y[i]).collect();
            let yr: Vec<f64> = r.iter().map(|&i| y[i]).collect();
            best = best.max(parent - sse(&yl) - sse(&yr));
        }
    }
    best
}

fn root_gain(x: &Array2<f64>, y: &Array1<f64>, feature: usize, threshold: f64) -> f64 {
    let (l, r): (Vec<f64>, Vec<f64>) = {
        let mut l = Vec::new();
        let mut r = Vec::new();
        for i in 0..x.nrows() {
            if x[[i, feature]] <= threshold {
                l.push(y[i]);
            } else {
                r.push(y[i]);
            }
        }
        (l, r)
    };
    sse(y.as_slice().unwrap()) - sse(&l) - sse(&r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn root_split_matches_exhaustive_search(
        seed in any::<u64>(),
        n in 2usize..=50,
        p in 1usize..=4,
        min_leaf in 1usize..4,
        levels in prop::sample::select(vec![3.0, 10.0, 1000.0]),
    ) {
        let mut rng = seeded_rng(seed);
        let x = Array2::from_shape_fn((n, p), |_| (rng.gen::<f64>() * levels).floor());
        let y = Array1::from_shape_fn(n, |_| standard_normal(&mut rng));
        let params = TreeParams { max_depth: 1, min_leaf, mtry: Mtry::All, split_candidates: None };
        let tree = fit_tree(x.view(), y.view(), &params, seed).unwrap();
        let oracle = brute_force_gain(&x, &y, min_leaf);
        let scale = sse(y.as_slice().unwrap()).max(1.0);
        match *tree.root() {
            Node::Split { feature, threshold, .. } => {
                let g = root_gain(&x, &y, feature, threshold);
                prop_assert!((g - oracle).abs() <= 1e-9 * scale, "greedy {} vs exhaustive {}", g, oracle);
            }
            Node::Leaf { .. } => prop_assert!(oracle <= 1e-9 * scale, "no split but exhaustive gain {}", oracle),
        }
    }
}

fn friedman_split(n: usize, p: usize, seed: u64) -> (Array2<f64>, Array1<f64>, Array2<f64>, Array1<f64>) {
    let ds = gen_dataset(&ScenarioConfig::new(2 * n, p, true, 0, seed)).unwrap();
    let train: Vec<usize> = (0..n).collect();
    let test: Vec<usize> = (n..2 * n).collect();
    (
        ds.x.select(Axis(0), &train),
        ds.y.select(Axis(0), &train),
        ds.x.select(Axis(0), &test),
        ds.y.select(Axis(0), &test),
    )
}

fn mse(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    (a - b).mapv(|v| v * v).mean().unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

#[test]
fn forest_beats_single_tree_in_median() {
    let params = TreeParams {
        max_depth: 25,
        min_leaf: 5,
        mtry: Mtry::ThirdOfP,
        split_candidates: Some(32),
    };
    let mut diffs = Vec::new();
    for seed in 0..10 {
        let (xt, yt, xs, ys) = friedman_split(500, 10, 1000 + seed);
        let forest = fit_bagging(xt.view(), yt.view(), &params, 100, seed).unwrap();
        let single = fit_bagging(xt.view(), yt.view(), &params, 1, seed).unwrap();
        let f = mse(&predict_ensemble(&forest, xs.view()).unwrap(), &ys);
        let s = mse(&predict_ensemble(&single, xs.view()).unwrap(), &ys);
        diffs.push(s - f);
    }
    assert!(median(diffs.clone()) >= 0.0, "{:?}", diffs);
}

#[test]
fn boosting_training_error_never_increases() {
    let (xt, yt, _, _) = friedman_split(300, 10, 8);
    for name in [PresetName::XgbLike, PresetName::LgbmLike, PresetName::H2oLike] {
        let p = preset(name.as_str()).unwrap();
        assert_eq!(p.subsample, 1.0);
        let model = p.fit(xt.view(), yt.view(), 4).unwrap();
        let mut last = f64::INFINITY;
        for t in 1..=model.trees.len() {
            let e = mse(&predict_ensemble(&model.truncated(t), xt.view()).unwrap(), &yt);
            assert!(e <= last + 1e-12, "{} iteration {}: {} > {}", name, t, e, last);
            last = e;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    // Holds up to exact gain ties, which the lowest-index rule resolves by column position.
    fn importance_is_permutation_equivariant(seed in any::<u64>(), perm_seed in any::<u64>(), bagged in any::<bool>()) {
        let (x, y, _, _) = friedman_split(120, 7, seed);
        let mut perm: Vec<usize> = (0..7).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut seeded_rng(perm_seed));
        let xp = x.select(Axis(1), &perm);
        let params = TreeParams { max_depth: 3, min_leaf: 15, mtry: Mtry::All, split_candidates: Some(32) };
        let fit = |m: &Array2<f64>| if bagged {
            fit_bagging(m.view(), y.view(), &params, 10, 3).unwrap()
        } else {
            fit_boosting(m.view(), y.view(), &params, 10, 0.1, 1.0, 3).unwrap()
        };
        let a = feature_importance(&fit(&x));
        let b = feature_importance(&fit(&xp));
        for (k, &j) in perm.iter().enumerate() {
            prop_assert!((b[k] - a[j]).abs() < 1e-9, "column {} (orig {}): {} vs {}", k, j, b[k], a[j]);
        }
    }
}

#[test]
fn identical_seeds_give_identical_models() {
    let (x, y, _, _) = friedman_split(200, 10, 3);
    for name in PresetName::ALL {
        let p = preset(name.as_str()).unwrap();
        assert_eq!(p.fit(x.view(), y.view(), 9).unwrap(), p.fit(x.view(), y.view(), 9).unwrap());
    }
    let p = preset("catboost_like").unwrap();
    assert_ne!(p.fit(x.view(), y.view(), 9).unwrap(), p.fit(x.view(), y.view(), 10).unwrap());
}

#[test]
fn importance_concentrates_on_true_support() {
    let (x, y, _, _) = friedman_split(1000, 20, 12);
    let model = preset("xgb_like").unwrap().fit(x.view(), y.view(), 1).unwrap();
    let imp = feature_importance(&model);
    assert!((imp.sum() - 1.0).abs() < 1e-12);
    let on_support: f64 = imp.iter().take(5).sum();
    assert!(on_support > 0.9, "{}", on_support);
}
