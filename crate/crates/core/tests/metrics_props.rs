use std::collections::BTreeSet;

use hybrid_bench::metrics::{jaccard, recovery, rmse};
use ndarray::Array1;
use proptest::prelude::*;

fn support() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(1usize..30, 1..12).prop_map(|s| s.into_iter().collect())
}

fn maybe_empty() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(1usize..30, 0..12).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #[test]
    fn jaccard_is_one_exactly_for_equal_sets(s in support(), t in maybe_empty()) {
        let equal = s.iter().collect::<BTreeSet<_>>() == t.iter().collect::<BTreeSet<_>>();
        prop_assert_eq!(jaccard(&s, &t).unwrap() == 1.0, equal);
    }

    #[test]
    fn recovery_dominates_jaccard(s in support(), t in support()) {
        prop_assert!(recovery(&s, &t).unwrap() >= jaccard(&s, &t).unwrap());
    }

    #[test]
    fn metrics_ignore_relabeling(s in support(), t in maybe_empty(), shift in 0usize..50, mult in prop::sample::select(vec![1usize, 3, 7])) {
        let relabel = |v: &[usize]| v.iter().map(|x| x * mult + shift).collect::<Vec<_>>();
        prop_assert_eq!(jaccard(&s, &t).unwrap(), jaccard(&relabel(&s), &relabel(&t)).unwrap());
        prop_assert_eq!(recovery(&s, &t).unwrap(), recovery(&relabel(&s), &relabel(&t)).unwrap());
    }

    #[test]
    fn rmse_is_a_metric(v in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3, -1e3f64..1e3), 1..40)) {
        let a: Array1<f64> = v.iter().map(|t| t.0).collect();
        let b: Array1<f64> = v.iter().map(|t| t.1).collect();
        let c: Array1<f64> = v.iter().map(|t| t.2).collect();
        let ab = rmse(a.view(), b.view()).unwrap();
        let tol = 1e-12 * ab.max(1.0);
        prop_assert!((ab - rmse(b.view(), a.view()).unwrap()).abs() <= tol);
        let ac = rmse(a.view(), c.view()).unwrap();
        let cb = rmse(c.view(), b.view()).unwrap();
        prop_assert!(ab <= ac + cb + tol);
        prop_assert_eq!(rmse(a.view(), a.view()).unwrap(), 0.0);
    }
}
