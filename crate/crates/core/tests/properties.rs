mod common;

use bt_explain::bounds::{forest_bound, tree_bound, Direction};
use bt_explain::domain::Restriction;
use bt_explain::oracle::DEFAULT_BRUTEFORCE_CAP;
use bt_explain::synth::{random_instance, random_model, SynthConfig};
use bt_explain::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn case(seed: u64, classes: usize, mask: u32) -> (BoostedTree, Instance, Term) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = SynthConfig {
        classes,
        ..SynthConfig::small()
    };
    let bt = random_model(&cfg, &mut rng);
    let x = random_instance(&cfg, bt.schema(), &mut rng);
    let n = bt.schema().len();
    let t = Term::from_indices((0..n).filter(|i| mask >> i & 1 == 1));
    (bt, x, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tree_bounds_are_sound_and_attained(seed in any::<u64>(), classes in 2usize..4, mask in any::<u32>()) {
        let (bt, x, t) = case(seed, classes, mask);
        let r = Restriction::of_term(bt.schema(), &x, &t);
        for (j, f) in bt.forests().iter().enumerate() {
            for (k, tree) in f.trees.iter().enumerate() {
                let (lo, hi) = common::reference_tree_range(&bt, j, k, &x, &t);
                let min = tree_bound(tree, &r, Direction::Min);
                let max = tree_bound(tree, &r, Direction::Max);
                prop_assert_eq!(min.weight, lo);
                prop_assert_eq!(max.weight, hi);
                prop_assert!(min.nodes_visited <= tree.size());
                for b in [&min, &max] {
                    let w = b.witness_instance(tree, &r).expect("witness exists");
                    prop_assert!(r.contains(&w));
                    prop_assert_eq!(tree.eval(&w), b.weight);
                }
            }
        }
    }

    #[test]
    fn bounds_are_monotone_in_the_term(seed in any::<u64>(), mask in any::<u32>(), extra in any::<u32>()) {
        let (bt, x, t) = case(seed, 2, mask);
        let n = bt.schema().len();
        let mut bigger = t.clone();
        for i in (0..n).filter(|i| extra >> i & 1 == 1) {
            bigger.insert(i);
        }
        let f = &bt.forests()[0];
        let r = Restriction::of_term(bt.schema(), &x, &t);
        let rb = Restriction::of_term(bt.schema(), &x, &bigger);
        prop_assert!(forest_bound(f, &r, Direction::Min) <= forest_bound(f, &rb, Direction::Min));
        prop_assert!(forest_bound(f, &r, Direction::Max) >= forest_bound(f, &rb, Direction::Max));
        let full = Restriction::of_term(bt.schema(), &x, &Term::full(n));
        prop_assert_eq!(forest_bound(f, &full, Direction::Min), f.eval(&x));
    }

    #[test]
    fn tree_specific_test_is_sound_and_upward_closed(seed in any::<u64>(), classes in 2usize..4, mask in any::<u32>()) {
        let (bt, x, t) = case(seed, classes, mask);
        let c = bt.classify(&x);
        if ts_test(&bt, &x, &t, c).unwrap() {
            prop_assert!(common::reference_check(&bt, &x, &t).abductive);
            for i in 0..bt.schema().len() {
                let mut sup = t.clone();
                sup.insert(i);
                prop_assert!(ts_test(&bt, &x, &sup, c).unwrap());
            }
        }
    }

    #[test]
    fn oracles_agree_with_enumeration(seed in any::<u64>(), classes in 2usize..4, mask in any::<u32>()) {
        let (bt, x, t) = case(seed, classes, mask);
        let reference = common::reference_check(&bt, &x, &t);
        let brute = is_abductive_bruteforce(&bt, &x, &t, DEFAULT_BRUTEFORCE_CAP).unwrap();
        let decide = is_abductive(&bt, &x, &t, &OracleConfig::unlimited()).unwrap();
        let minimize = is_abductive(&bt, &x, &t, &OracleConfig::unlimited().minimize()).unwrap();
        prop_assert_eq!(brute.abductive(), Some(reference.abductive));
        prop_assert_eq!(decide.abductive(), Some(reference.abductive));
        prop_assert_eq!(minimize.abductive(), Some(reference.abductive));
        prop_assert_eq!(brute.optimal_margin, Some(reference.min_margin));
        if reference.abductive {
            prop_assert_eq!(minimize.optimal_margin, Some(reference.min_margin));
        } else {
            for v in [&brute, &decide, &minimize] {
                let z = v.counterexample.as_ref().expect("counterexample");
                prop_assert!(common::extends(z, &x, &t));
                prop_assert_ne!(bt.classify(z), bt.classify(&x));
            }
        }
    }

    #[test]
    fn explanations_are_abductive_and_minimal(seed in any::<u64>(), classes in 2usize..4, run in 0u64..50) {
        let (bt, x, _) = case(seed, classes, 0);
        let n = bt.schema().len();
        let c = bt.classify(&x);
        let ts = ts_explain(&bt, &x, &EliminationOrder::random(n, seed, run));
        prop_assert!(ts_test(&bt, &x, &ts, c).unwrap());
        prop_assert!(common::reference_check(&bt, &x, &ts).abductive);
        for i in ts.iter() {
            prop_assert!(!ts_test(&bt, &x, &ts.without(i), c).unwrap());
        }
        let order = EliminationOrder::random(n, seed, run + 1000);
        let sr = sr_explain(&bt, &x, &ts, order.as_slice(), &SrConfig::default()).unwrap();
        prop_assert!(sr.minimal_proved);
        prop_assert!(sr.term.is_subset(&ts));
        prop_assert!(common::reference_check(&bt, &x, &sr.term).abductive);
        for i in sr.term.iter() {
            prop_assert!(!common::reference_check(&bt, &x, &sr.term.without(i)).abductive);
        }
    }
}
