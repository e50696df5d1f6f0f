mod common;

use proptest::prelude::*;

use dynttp::analysis::{mann_whitney_one_sided, metrics, normalize_epoch};
use dynttp::dynamics::rng::StreamRng;
use dynttp::dynamics::{
    apply_city_toggles, flip_count, AvailabilityState, DisruptionEvent, Feature,
};
use dynttp::io::{
    generate_instance, instance_to_string, parse_instance_str, GeneratorParams, KnapsackKind,
};
use dynttp::model::{packed_weight, PackingPlan, Solution, Tour};

fn kind() -> impl Strategy<Value = KnapsackKind> {
    prop_oneof![
        Just(KnapsackKind::Uncorrelated),
        Just(KnapsackKind::UncorrelatedSimilarWeights),
        Just(KnapsackKind::BoundedStronglyCorrelated),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_files_round_trip(cities in 2usize..40, per in 1usize..4, kind in kind(), c in 1u32..=10, seed: u64) {
        let params = GeneratorParams { cities, items_per_city: per, kind, capacity_category: c, seed };
        let inst = generate_instance(&params).unwrap();
        let text = instance_to_string(&inst);
        let back = parse_instance_str(&text).unwrap();
        prop_assert_eq!(back.parts(), inst.parts());
        prop_assert_eq!(instance_to_string(&back), text);
        if kind == KnapsackKind::BoundedStronglyCorrelated {
            prop_assert!(inst.items().iter().all(|i| i.profit - i.weight == 100.0));
        }
    }

    #[test]
    fn flip_count_is_within_bounds(d in 0.001f64..=100.0, population in 1usize..5000) {
        let k = flip_count(d, population);
        prop_assert!(k >= 1 && k <= population);
        prop_assert!((k as f64 - d * population as f64 / 100.0).abs() <= 0.5 || k == 1);
    }

    #[test]
    fn city_toggles_keep_tour_and_capacity_valid(seed: u64, steps in 1usize..12) {
        let mut rng = StreamRng::from_seed(seed);
        let inst = common::random_instance(&mut rng, 10, 14);
        let order = common::random_permutation_tour(&mut rng, 10);
        let mut bits = vec![false; 14];
        let mut weight = 0.0;
        for k in 0..14 {
            if rng.chance(0.5) && weight + inst.item(k).weight <= inst.capacity() {
                weight += inst.item(k).weight;
                bits[k] = true;
            }
        }
        let mut sol = Solution::new(Tour::new(order).unwrap(), PackingPlan::from_bits(bits));
        let mut avail = AvailabilityState::full(&inst);
        for epoch in 0..steps {
            let count = 1 + rng.below(4);
            let flipped = rng.sample_distinct(9, count).into_iter().map(|c| c + 1).collect();
            let event = DisruptionEvent { epoch, feature: Feature::Cities, flipped };
            apply_city_toggles(&inst, &mut sol, &mut avail, &event).unwrap();
            prop_assert!(packed_weight(&inst, sol.packing()) <= inst.capacity());
            let mut on_tour = sol.tour().order().to_vec();
            on_tour.sort_unstable();
            let expected: Vec<usize> = avail.available_cities().collect();
            prop_assert_eq!(on_tour, expected);
            for k in sol.packing().packed_items() {
                prop_assert!(avail.is_city_available(inst.item(k).city));
            }
        }
    }

    #[test]
    fn normalization_is_bounded_and_affine_invariant(
        curves in prop::collection::vec(prop::collection::vec(-1000i32..1000, 5), 1..5),
        shift in -64i32..64,
        scale in 1u32..4,
    ) {
        let raw: Vec<Vec<f64>> = curves.iter().map(|c| c.iter().map(|&v| v as f64).collect()).collect();
        let n = normalize_epoch(&raw);
        prop_assert!(n.values.iter().flatten().all(|&v| (0.0..=1.0).contains(&v)));
        if n.max > n.min {
            prop_assert!(n.values.iter().flatten().any(|&v| v == 0.0));
            prop_assert!(n.values.iter().flatten().any(|&v| v == 1.0));
        }
        let factor = (1u32 << scale) as f64;
        let moved: Vec<Vec<f64>> = raw.iter().map(|c| c.iter().map(|v| v * factor + shift as f64).collect()).collect();
        prop_assert_eq!(normalize_epoch(&moved).values, n.values);
    }

    #[test]
    fn monotone_trajectory_auc_below_end(steps in prop::collection::vec(0.0f64..10.0, 1..50)) {
        let mut acc = 0.0;
        let curve: Vec<f64> = steps.iter().map(|s| { acc += s; acc }).collect();
        let m = metrics(&curve).unwrap();
        prop_assert!(m.auc <= m.end + 1e-9);
    }

    #[test]
    fn mann_whitney_is_rank_based(
        a in prop::collection::vec(-50i32..50, 1..10),
        b in prop::collection::vec(-50i32..50, 1..10),
        shift in -100i32..100,
    ) {
        let fa: Vec<f64> = a.iter().map(|&v| v as f64).collect();
        let fb: Vec<f64> = b.iter().map(|&v| v as f64).collect();
        let r = mann_whitney_one_sided(&fa, &fb).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.p));
        prop_assert!(r.u >= 0.0 && r.u <= (a.len() * b.len()) as f64);
        let ta: Vec<f64> = fa.iter().map(|v| 3.0 * v + shift as f64).collect();
        let tb: Vec<f64> = fb.iter().map(|v| 3.0 * v + shift as f64).collect();
        prop_assert_eq!(mann_whitney_one_sided(&ta, &tb).unwrap(), r);
        let swapped = mann_whitney_one_sided(&fb, &fa).unwrap();
        prop_assert!((r.u + swapped.u - (a.len() * b.len()) as f64).abs() < 1e-9);
        if r.exact {
            prop_assert!(r.p + swapped.p >= 1.0 - 1e-12);
        }
    }
}
