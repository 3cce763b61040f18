mod common;

use gbfrs::dataset::Dataset;
use gbfrs::feature_selection::{
    forward_select, significance, significance_direct, CMode, SelectionMode,
};
use gbfrs::fuzzy_rough::{
    ball_similarity, classic_dependency, lower_approximation, rescale_dependency,
    weighted_dependency, AttributeSubset, IncrementalDependency,
};
use gbfrs::granular_ball::{compute_center_radius, generate, BallConfig, GranularBallSet};
use proptest::prelude::*;

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (2usize..40, 1usize..5, 2usize..4).prop_flat_map(|(n, d, classes)| {
        (
            // a coarse grid produces duplicate points and distance ties
            prop::collection::vec(prop::collection::vec(0u8..=8, d), n),
            prop::collection::vec(0..classes, n),
        )
            .prop_map(move |(rows, labels)| {
                let rows = rows
                    .into_iter()
                    .map(|r| r.into_iter().map(|v| f64::from(v) / 8.0).collect())
                    .collect();
                Dataset::new(
                    rows,
                    labels,
                    (0..d).map(|j| format!("a{j}")).collect(),
                    (0..classes).map(|c| format!("c{c}")).collect(),
                )
                .unwrap()
            })
    })
}

fn subset_of(d: usize, mask: u32) -> AttributeSubset {
    AttributeSubset::new((0..d).filter(|a| mask & (1 << a) != 0), d).unwrap()
}

fn purity_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.6), Just(0.8), Just(1.0), 0.3f64..=1.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_balls_partition_and_meet_purity(ds in dataset_strategy(), t in purity_strategy(), seed in 0u64..1000) {
        let gbs = generate(&ds, &BallConfig::new(t, seed)).unwrap();
        gbs.validate_against(&ds).unwrap();
        let mut seen = vec![false; ds.n()];
        for b in &gbs.balls {
            prop_assert!(!b.members.is_empty());
            for &i in &b.members {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
            prop_assert!(b.meets(t) || !b.is_splittable(&ds));
        }
        prop_assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn generation_is_deterministic(ds in dataset_strategy(), t in purity_strategy(), seed in 0u64..1000) {
        let a = serde_json::to_string(&generate(&ds, &BallConfig::new(t, seed)).unwrap()).unwrap();
        let b = serde_json::to_string(&generate(&ds, &BallConfig::new(t, seed)).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn centers_commute_with_projection(ds in dataset_strategy(), t in purity_strategy(), mask in 1u32..16) {
        let gbs = generate(&ds, &BallConfig::new(t, 3)).unwrap();
        let b = subset_of(ds.d(), mask);
        prop_assume!(!b.is_empty());
        let projected = ds.project(b.indices()).unwrap();
        for ball in &gbs.balls {
            let pts: Vec<&[f64]> = ball.members.iter().map(|&i| projected.row(i)).collect();
            let (center, _) = compute_center_radius(&pts).unwrap();
            for (k, &a) in b.indices().iter().enumerate() {
                prop_assert!((ball.center[a] - center[k]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn nested_subsets_are_monotone_at_fixed_c(
        ds in dataset_strategy(),
        t in purity_strategy(),
        small in 1u32..16,
        extra in 0u32..16,
        c in 0.5f64..6.0,
    ) {
        let gbs = generate(&ds, &BallConfig::new(t, 1)).unwrap();
        let d = ds.d();
        let s = subset_of(d, small);
        let l = subset_of(d, small | extra);
        prop_assume!(!s.is_empty());
        let ws = weighted_dependency(&gbs, &s, c).unwrap();
        let wl = weighted_dependency(&gbs, &l, c).unwrap();
        prop_assert!(ws.value <= wl.value + 1e-12);
        for (p, q) in ws.per_ball.iter().zip(&wl.per_ball) {
            prop_assert!(p <= &(q + 1e-12));
        }
        for x in &gbs.balls {
            for y in &gbs.balls {
                prop_assert!(ball_similarity(x, y, &l, c) <= ball_similarity(x, y, &s, c) + 1e-12);
            }
        }
    }

    #[test]
    fn rescaling_matches_direct_evaluation(ds in dataset_strategy(), mask in 1u32..16, c1 in 0.25f64..10.0, c2 in 0.25f64..10.0) {
        let gbs = generate(&ds, &BallConfig::new(0.8, 2)).unwrap();
        let b = subset_of(ds.d(), mask);
        prop_assume!(!b.is_empty());
        let at_c1 = weighted_dependency(&gbs, &b, c1).unwrap();
        let direct = weighted_dependency(&gbs, &b, c2).unwrap();
        let scaled = rescale_dependency(&at_c1, c2).unwrap();
        prop_assert!((scaled.value - direct.value).abs() <= 1e-12);
    }

    #[test]
    fn foreign_class_lower_approximation_is_zero(ds in dataset_strategy(), t in purity_strategy(), mask in 1u32..16) {
        let gbs = generate(&ds, &BallConfig::new(t, 4)).unwrap();
        let b = subset_of(ds.d(), mask);
        prop_assume!(!b.is_empty());
        for (j, ball) in gbs.balls.iter().enumerate() {
            for class in 0..ds.class_count() {
                if class != ball.majority_label {
                    prop_assert_eq!(lower_approximation(&gbs, j, class, &b, b.len() as f64), 0.0);
                }
            }
        }
    }

    #[test]
    fn singleton_balls_reproduce_point_dependency(ds in dataset_strategy(), mask in 1u32..16, c in 0.5f64..5.0) {
        let b = subset_of(ds.d(), mask);
        prop_assume!(!b.is_empty());
        let singletons = GranularBallSet::singletons(&ds);
        let ball = weighted_dependency(&singletons, &b, c).unwrap().value;
        let point = classic_dependency(&ds, &b, c).unwrap().value;
        let naive = common::naive_point_dependency(&ds, b.indices(), c);
        prop_assert!((ball - point).abs() <= 1e-10);
        prop_assert!((point - naive).abs() <= 1e-12);
    }

    #[test]
    fn optimized_dependency_matches_naive_loops(ds in dataset_strategy(), t in purity_strategy(), order in Just(()).prop_perturb(|_, mut rng| {
        let mut v: Vec<usize> = (0..4).collect();
        for i in (1..v.len()).rev() {
            let j = (rng.next_u32() as usize) % (i + 1);
            v.swap(i, j);
        }
        v
    })) {
        let gbs = generate(&ds, &BallConfig::new(t, 5)).unwrap();
        let d = ds.d();
        let order: Vec<usize> = order.into_iter().filter(|&a| a < d).collect();
        let mut inc = IncrementalDependency::new(&gbs);
        let mut chosen: Vec<usize> = Vec::new();
        for &a in &order {
            let c = (chosen.len() + 1) as f64;
            let mut grown = chosen.clone();
            grown.push(a);
            let naive = common::naive_ball_dependency(&gbs, &grown, c);
            prop_assert!((inc.with_candidate(a, c) - naive).abs() <= 1e-12);
            let direct = weighted_dependency(&gbs, &AttributeSubset::new(grown.clone(), d).unwrap(), c).unwrap();
            prop_assert!((direct.value - naive).abs() <= 1e-12);
            inc.push(a);
            chosen = grown;
            prop_assert!((inc.current(c) - naive).abs() <= 1e-12);
        }
    }

    #[test]
    fn significance_routes_agree(ds in dataset_strategy(), t in purity_strategy(), mask in 0u32..16, a in 0usize..4) {
        let gbs = generate(&ds, &BallConfig::new(t, 6)).unwrap();
        let d = ds.d();
        let b = subset_of(d, mask);
        prop_assume!(a < d && !b.contains(a));
        let iterative = significance(a, &b, &gbs).unwrap();
        let direct = significance_direct(a, &b, &gbs).unwrap();
        let naive = common::naive_significance(&gbs, a, b.indices());
        prop_assert!((iterative - direct).abs() <= 1e-12);
        prop_assert!((iterative - naive).abs() <= 1e-12);
    }

    #[test]
    fn selection_traces_are_well_formed(ds in dataset_strategy(), t in purity_strategy()) {
        let gbs = generate(&ds, &BallConfig::new(t, 7)).unwrap();
        let trace = forward_select(&gbs, SelectionMode::GranularBall, CMode::Schedule);
        prop_assert!(!trace.chosen.is_empty());
        prop_assert!(trace.chosen.len() <= ds.d());
        prop_assert_eq!(trace.chosen.len(), trace.dependency_path.len());
        prop_assert_eq!(trace.chosen.len(), trace.significance_path.len());
        for w in trace.dependency_path.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        // every round after the first needs a strictly positive gain
        for sig in trace.significance_path.iter().skip(1) {
            prop_assert!(*sig > 0.0);
        }
    }

    #[test]
    fn singleton_ball_selection_equals_point_selection(ds in dataset_strategy()) {
        let singletons = GranularBallSet::singletons(&ds);
        let balls = forward_select(&singletons, SelectionMode::GranularBall, CMode::Schedule);
        let points = forward_select(&ds, SelectionMode::ClassicPoint, CMode::Schedule);
        prop_assert_eq!(balls.chosen, points.chosen);
        prop_assert_eq!(balls.stopped_reason, points.stopped_reason);
    }
}
