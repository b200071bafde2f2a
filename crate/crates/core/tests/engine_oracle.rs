mod support;

use std::sync::Arc;

use ggb_core::gdl;
use support::{engine_enumerable, engine_expected_score, mc_random_score, Reference, ORACLE_GAMES};

#[test]
fn oracle_games_parse() {
    for text in ORACLE_GAMES {
        let d = gdl::parse(text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert!(d.grid_w <= 3 && d.grid_h <= 3);
    }
}

#[test]
fn engine_enumeration_matches_reference_exactly() {
    let mut checked = 0;
    for text in ORACLE_GAMES {
        let d = gdl::parse(text).unwrap();
        if !engine_enumerable(&d) {
            continue;
        }
        let reference = Reference::expected_score(&d);
        let engine = engine_expected_score(&d);
        assert!(
            (reference - engine).abs() < 1e-12,
            "{text}: {reference} vs {engine}"
        );
        checked += 1;
    }
    assert!(checked >= 4);
}

#[test]
fn monte_carlo_converges_to_reference() {
    for (i, text) in ORACLE_GAMES.iter().enumerate() {
        let d = Arc::new(gdl::parse(text).unwrap());
        let exact = Reference::expected_score(&d);
        let (mean, se) = mc_random_score(&d, 20_000, 1_000 * i as u64);
        assert!(
            (mean - exact).abs() <= 3.0 * se.max(1e-12),
            "game {i}: exact {exact}, mc {mean} ± {se}"
        );
    }
}
