//! Property-based checks of the packing and decomposition invariants over
//! randomized windows.

use proptest::prelude::*;

use robinson_core::decomposition::{
    decompose, place_maximal_squares, validate_maximality, CrossKind, PlacementRule,
};
use robinson_core::tiling::{expand_substitution, SquareSubstitution, TilingWindow};
use robinson_core::verify::{
    check_arm_bounds, check_cross_bounds, check_partition, check_sector_partition,
};

fn thue_morse() -> SquareSubstitution {
    SquareSubstitution::from_json(include_str!("../assets/thue_morse.json")).unwrap()
}

prop_compose! {
    fn arb_window()(w in 18u32..40, h in 18u32..40, seed in any::<u64>())
        (cells in proptest::collection::vec(0u16..2, (w * h) as usize),
         w in Just(w), h in Just(h), seed in Just(seed))
        -> TilingWindow
    {
        let _ = seed;
        TilingWindow::new((0, 0), w, h, cells)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_packings_are_maximal(window in arb_window(), n in 2u32..6) {
        prop_assume!(window.width() >= n && window.height() >= n);
        let squares = place_maximal_squares(&window, n, PlacementRule::GreedyLex).unwrap();
        prop_assert_eq!(validate_maximality(window.bounds(), n, &squares), None);
    }

    #[test]
    fn pattern_packings_are_maximal(window in arb_window(), n in 2u32..6) {
        prop_assume!(window.width() >= n && window.height() >= n);
        let marker = TilingWindow::new((0, 0), 1, 1, vec![0]);
        let squares =
            place_maximal_squares(&window, n, PlacementRule::PatternAnchored { marker: &marker })
                .unwrap();
        prop_assert_eq!(validate_maximality(window.bounds(), n, &squares), None);
    }

    #[test]
    fn decomposition_invariants_hold(window in arb_window(), n in 2u32..6) {
        prop_assume!(window.width() >= 8 * n && window.height() >= 8 * n);
        let dec = decompose(&window, n, 3 * n, PlacementRule::GreedyLex).unwrap();
        let (ok, _, detail) = check_arm_bounds(&dec);
        prop_assert!(ok, "{:?}", detail);
        let (ok, _, detail) = check_cross_bounds(&dec);
        prop_assert!(ok, "{:?}", detail);
        let (ok, _, detail) = check_partition(&dec);
        prop_assert!(ok, "{:?}", detail);
        let (ok, _, detail) = check_sector_partition(&dec);
        prop_assert!(ok, "{:?}", detail);
    }

    #[test]
    fn greedy_lex_is_deterministic(window in arb_window(), n in 2u32..6) {
        prop_assume!(window.width() >= n && window.height() >= n);
        let a = decompose(&window, n, 3 * n, PlacementRule::GreedyLex).unwrap();
        let b = decompose(&window, n, 3 * n, PlacementRule::GreedyLex).unwrap();
        prop_assert_eq!(a.squares, b.squares);
        prop_assert_eq!(a.arms, b.arms);
        prop_assert_eq!(a.crosses.len(), b.crosses.len());
    }
}

#[test]
fn pattern_anchored_on_thue_morse_produces_nondegenerate_features() {
    // Pattern anchoring at occurrences of the 2x2 block leaves gaps, so real
    // arms and crosses appear; all invariants must still hold.
    let sub = thue_morse();
    let big = expand_substitution(&sub, "a", 7).unwrap();
    let marker = expand_substitution(&sub, "a", 1).unwrap();
    for n in [3u32, 4, 5] {
        let dec = decompose(&big, n, 3 * n, PlacementRule::PatternAnchored { marker: &marker })
            .unwrap();
        assert_eq!(
            validate_maximality(big.bounds(), n, &dec.squares),
            None,
            "pattern packing must be maximal at n={n}"
        );
        let nondegenerate_arms = dec.arms.iter().filter(|a| !a.degenerate).count();
        assert!(nondegenerate_arms > 0, "expected real arms at n={n}");
        let regular_crosses = dec
            .crosses
            .iter()
            .filter(|c| matches!(c.kind, CrossKind::Regular3 | CrossKind::Regular4))
            .count();
        assert!(regular_crosses > 0, "expected regular crosses at n={n}");
        let (ok, _, detail) = check_arm_bounds(&dec);
        assert!(ok, "{detail:?}");
        let (ok, _, detail) = check_cross_bounds(&dec);
        assert!(ok, "{detail:?}");
        let (ok, _, detail) = check_partition(&dec);
        assert!(ok, "{detail:?}");
        let (ok, _, detail) = check_sector_partition(&dec);
        assert!(ok, "{detail:?}");
    }
}
