use proptest::prelude::*;

use flipview::error::Error;
use flipview::rect::linear_flip_sequence_neighbor_elbows;
use flipview::satisfied::{greedy_sweep, is_satisfied, signed_greedy};
use flipview::transforms::{
    rect_to_satisfied, satisfied_to_rect, treerelax_to_rect, treerelax_to_rect_with,
    TreeRelaxOptions,
};
use flipview::tree::run_heuristic;
use flipview::{
    generate, AllowedElbows, Family, FamilySpec, HeuristicPolicy, PermutationPointSet, Sign,
};

fn random_perm(n: usize, seed: u64) -> PermutationPointSet {
    generate(FamilySpec::new(Family::Random, n, Some(seed))).unwrap()
}

fn perm_strategy(max_n: usize) -> impl Strategy<Value = PermutationPointSet> {
    (1..=max_n)
        .prop_flat_map(|n| Just((1..=n as u32).collect::<Vec<_>>()).prop_shuffle())
        .prop_map(|v| PermutationPointSet::new(v).unwrap())
}

#[test]
fn skipped_realignment_breaks_alignment() {
    // Find an input whose relaxation needs a realignment flip, then drop it.
    let mut found = None;
    'search: for seed in 0..200 {
        let x = random_perm(8, seed);
        let ef = run_heuristic(&x, HeuristicPolicy::MaxHeightDrop).unwrap();
        for i in 0..ef.len() {
            let opts = TreeRelaxOptions {
                skip_realignment_at: Some(i),
            };
            if let Err(e) = treerelax_to_rect_with(&x, &ef, opts) {
                found = Some(e);
                break 'search;
            }
        }
    }
    let err = found.expect("some relaxation uses a realignment flip");
    let Error::Replay { source, .. } = err else {
        panic!("expected a per-step error, got {err}");
    };
    assert!(
        matches!(*source, Error::Invariant { which: "I2", .. }),
        "expected I2, got {source}"
    );
}

#[test]
fn signed_presets_round_trip() {
    for seed in 0..20 {
        let x = random_perm(9, seed);
        for (elbows, sign) in [
            (AllowedElbows::CLASS_M, Sign::Plus),
            (AllowedElbows::CLASS_P, Sign::Minus),
            (AllowedElbows::ONLY_DR, Sign::Plus),
            (AllowedElbows::ONLY_UR, Sign::Minus),
        ] {
            let y = greedy_sweep(&x, sign);
            let fs = satisfied_to_rect(&x, &y, elbows).unwrap();
            assert!(fs.cost() <= 2 * y.cost());
            let back = rect_to_satisfied(&fs).unwrap();
            assert_eq!(back, y);
            assert!(is_satisfied(back.points(), sign));
        }
    }
}

#[test]
fn linear_algorithm_both_pairs() {
    for n in [1, 2, 5, 40] {
        let x = random_perm(n, n as u64);
        for elbows in [AllowedElbows::DOWN_PAIR, AllowedElbows::UP_PAIR] {
            let fs = linear_flip_sequence_neighbor_elbows(&x, elbows).unwrap();
            assert!(fs.replay().unwrap().is_end_state());
        }
        assert!(linear_flip_sequence_neighbor_elbows(&x, AllowedElbows::LEFT_PAIR).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_round_trip(x in perm_strategy(12)) {
        let y = greedy_sweep(&x, Sign::Both);
        prop_assert!(is_satisfied(y.points(), Sign::Both));
        let fs = satisfied_to_rect(&x, &y, AllowedElbows::NONE).unwrap();
        prop_assert!(fs.replay().unwrap().is_end_state());
        prop_assert!(fs.cost() <= 2 * y.cost());
        prop_assert_eq!(rect_to_satisfied(&fs).unwrap(), y);
    }

    #[test]
    fn relaxation_to_rectangulation(x in perm_strategy(20), seed in any::<u64>()) {
        for policy in [HeuristicPolicy::MaxWidthGain, HeuristicPolicy::Random(seed)] {
            let ef = run_heuristic(&x, policy).unwrap();
            prop_assert!(ef.replay().unwrap().is_path());
            let fs = treerelax_to_rect(&x, &ef).unwrap();
            let y = rect_to_satisfied(&fs).unwrap();
            prop_assert!(is_satisfied(y.points(), Sign::Both));
            prop_assert!(y.cost() <= 2 * fs.cost() + x.n());
        }
    }

    #[test]
    fn signed_greedy_is_a_network(x in perm_strategy(16)) {
        let y = signed_greedy(&x);
        prop_assert!(flipview::bounds::is_manhattan_network(&x, y.points()).unwrap());
    }

    #[test]
    fn text_formats_round_trip(x in perm_strategy(10)) {
        let fs = linear_flip_sequence_neighbor_elbows(&x, AllowedElbows::DOWN_PAIR).unwrap();
        prop_assert_eq!(flipview::FlipSequence::parse(&fs.to_text()).unwrap(), fs);
        let ef = run_heuristic(&x, HeuristicPolicy::MaxDepthGain).unwrap();
        prop_assert_eq!(flipview::EdgeFlipSequence::parse(&ef.to_text()).unwrap(), ef);
        let y = greedy_sweep(&x, Sign::Minus);
        prop_assert_eq!(flipview::PointSuperset::parse(&y.to_text("greedy")).unwrap(), y);
    }
}
