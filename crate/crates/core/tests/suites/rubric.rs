use proptest::prelude::*;

use sic_core::rubric::{
    conversation_score, item_max, skill_score, skill_score_with, Dimension, Normalization, RaterRole, RubricError,
    RubricRating, ScoringOptions, INVERTED_ITEM, ITEM_COUNT,
};

use super::common::{run_prop, Check};

const CASES: u32 = 1000;
const DIMS: [Dimension; 4] = [Dimension::Empower, Dimension::Explicit, Dimension::Empathize, Dimension::Overall];

fn items_strategy() -> impl Strategy<Value = [u8; ITEM_COUNT]> {
    let per_item: Vec<_> = (1..=ITEM_COUNT).map(|i| 1u8..=item_max(i)).collect();
    per_item.prop_map(|v| v.try_into().unwrap())
}

fn rating(items: [u8; ITEM_COUNT], rater: &str, role: RaterRole) -> RubricRating {
    RubricRating::new("c1", rater, role, items).unwrap()
}

/// Points from the raw items with the reverse-scored item flipped by hand.
fn hand_points(items: &[u8; ITEM_COUNT], first: usize, last: usize) -> u32 {
    (first..=last)
        .map(|i| if i == INVERTED_ITEM { 6 - items[i - 1] as u32 } else { items[i - 1] as u32 })
        .sum()
}

pub fn scores_in_unit_interval() {
    run_prop(CASES, items_strategy(), |items| {
        let r = rating(items, "tp1", RaterRole::TP);
        for dim in DIMS {
            let s = skill_score(&r, dim);
            prop_assert!(s > 0.0 && s <= 1.0, "{dim} {s}");
            let m = skill_score_with(&r, dim, Normalization::MinMax);
            prop_assert!((0.0..=1.0).contains(&m), "{dim} {m}");
        }
        Ok(())
    });
}

pub fn points_match_hand_sums() {
    run_prop(CASES, items_strategy(), |items| {
        let r = rating(items, "tp1", RaterRole::TP);
        prop_assert_eq!(r.points(Dimension::Empower), hand_points(&items, 1, 7));
        prop_assert_eq!(r.points(Dimension::Explicit), hand_points(&items, 8, 13));
        prop_assert_eq!(r.points(Dimension::Empathize), hand_points(&items, 14, 18));
        prop_assert_eq!(r.qsum(), hand_points(&items, 1, 18));
        prop_assert!((skill_score(&r, Dimension::Overall) - r.qsum() as f64 / 105.0).abs() < 1e-15);
        Ok(())
    });
}

/// Raising any item raises its skill score, except the reverse-scored
/// item, which lowers it. Other skills are untouched.
pub fn item_monotonicity() {
    run_prop(CASES, (items_strategy(), 1usize..=ITEM_COUNT), |(items, item)| {
        if items[item - 1] == item_max(item) {
            return Ok(());
        }
        let mut up = items;
        up[item - 1] += 1;
        let a = rating(items, "tp1", RaterRole::TP);
        let b = rating(up, "tp1", RaterRole::TP);
        for dim in DIMS {
            let (sa, sb) = (skill_score(&a, dim), skill_score(&b, dim));
            if !dim.items().contains(&item) {
                prop_assert_eq!(sa, sb);
            } else if item == INVERTED_ITEM {
                prop_assert!(sb < sa);
            } else {
                prop_assert!(sb > sa);
            }
        }
        Ok(())
    });
}

pub fn rater_order_does_not_matter() {
    let strategy = (prop::collection::vec(items_strategy(), 5), 0usize..5, any::<bool>());
    run_prop(CASES, strategy, |(all, shift, swap)| {
        let ratings: Vec<RubricRating> = all
            .iter()
            .enumerate()
            .map(|(i, it)| rating(*it, &format!("r{i}"), if i == 0 { RaterRole::SP } else { RaterRole::TP }))
            .collect();
        let mut permuted = ratings.clone();
        permuted.rotate_left(shift);
        if swap {
            permuted.swap(0, 4);
        }
        let opts = ScoringOptions::default();
        let a = conversation_score(&ratings, opts).unwrap();
        let b = conversation_score(&permuted, opts).unwrap();
        for dim in DIMS {
            prop_assert!((a.get(dim) - b.get(dim)).abs() < 1e-12);
        }
        prop_assert_eq!(a.n_raters, 5);
        Ok(())
    });
}

pub fn extreme_ratings() {
    let mut low = [1u8; ITEM_COUNT];
    low[INVERTED_ITEM - 1] = 5;
    let mut high: [u8; ITEM_COUNT] = std::array::from_fn(|i| item_max(i + 1));
    high[INVERTED_ITEM - 1] = 1;
    let low = rating(low, "a", RaterRole::TP);
    let high = rating(high, "a", RaterRole::TP);
    for dim in DIMS {
        assert_eq!(skill_score(&high, dim), 1.0);
        assert_eq!(skill_score_with(&low, dim, Normalization::MinMax), 0.0);
        assert!((skill_score(&low, dim) - dim.min_points() as f64 / dim.max_points() as f64).abs() < 1e-15);
    }
    assert_eq!([40, 35, 30, 105], DIMS.map(Dimension::max_points));
}

pub fn rating_validation() {
    let mut items = [3u8; ITEM_COUNT];
    items[6] = 10;
    assert!(RubricRating::new("c", "r", RaterRole::SP, items).is_ok());
    items[0] = 6;
    assert_eq!(RubricRating::new("c", "r", RaterRole::SP, items), Err(RubricError::InvalidRating { item: 1, value: 6 }));
    items[0] = 0;
    assert!(RubricRating::new("c", "r", RaterRole::SP, items).is_err());
}

pub fn strict_scoring_needs_full_panel() {
    let it = [3u8; ITEM_COUNT];
    let mut ratings = vec![rating(it, "sp", RaterRole::SP)];
    ratings.extend((1..=3).map(|i| rating(it, &format!("tp{i}"), RaterRole::TP)));
    let strict = ScoringOptions { lenient: false, ..Default::default() };
    assert_eq!(conversation_score(&ratings, strict), Err(RubricError::RaterCountMismatch { sp: 1, tp: 3 }));
    assert_eq!(conversation_score(&ratings, ScoringOptions { lenient: true, ..strict }).unwrap().n_raters, 4);
    ratings.push(rating(it, "tp4", RaterRole::TP));
    assert!(conversation_score(&ratings, strict).is_ok());
    assert_eq!(conversation_score(&[], strict), Err(RubricError::NoRatings));
    let other = RubricRating::new("c2", "x", RaterRole::TP, it).unwrap();
    ratings.push(other);
    assert_eq!(conversation_score(&ratings, ScoringOptions { lenient: true, ..strict }), Err(RubricError::MixedConversations));
}

#[allow(dead_code)]
pub const CHECKS: &[Check] = &[
    ("scores_in_unit_interval", scores_in_unit_interval),
    ("points_match_hand_sums", points_match_hand_sums),
    ("item_monotonicity", item_monotonicity),
    ("rater_order_does_not_matter", rater_order_does_not_matter),
    ("extreme_ratings", extreme_ratings),
    ("rating_validation", rating_validation),
    ("strict_scoring_needs_full_panel", strict_scoring_needs_full_panel),
];
