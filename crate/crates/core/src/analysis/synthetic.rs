//! Seeded synthetic ratings shaped like a two-arm pre/post trial, for
//! exercising the pipeline when no real export is at hand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::rubric::{item_max, Arm, RaterRole, RubricRating, INVERTED_ITEM, ITEM_COUNT};

use super::{conversation_id, Order, RatingRow, RatingsDataset};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n_control: usize,
    pub n_sophie: usize,
    /// Mean latent skill before the intervention, as a fraction of the scale.
    pub baseline: f64,
    pub baseline_sd: f64,
    pub gain_control: f64,
    pub gain_sophie: f64,
    /// Per-item noise on the fraction scale.
    pub item_noise: f64,
    /// Ratings removed at random after generation.
    pub missing_ratings: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_control: 25,
            n_sophie: 26,
            baseline: 0.55,
            baseline_sd: 0.12,
            gain_control: 0.06,
            gain_sophie: 0.15,
            item_noise: 0.12,
            missing_ratings: 4,
            seed: 7,
        }
    }
}

pub const SYNTHETIC_RATERS: [(&str, RaterRole); 5] =
    [("sp", RaterRole::SP), ("tp1", RaterRole::TP), ("tp2", RaterRole::TP), ("tp3", RaterRole::TP), ("tp4", RaterRole::TP)];

fn item_value(frac: f64, item: usize) -> u8 {
    let max = item_max(item) as f64;
    let v = (1.0 + frac.clamp(0.0, 1.0) * (max - 1.0)).round() as u8;
    if item == INVERTED_ITEM {
        6 - v
    } else {
        v
    }
}

pub fn synthetic_dataset(spec: &SyntheticSpec) -> RatingsDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let skill = Normal::new(spec.baseline, spec.baseline_sd.max(0.0)).expect("finite parameters");
    let noise = Normal::new(0.0, spec.item_noise.max(0.0)).expect("finite parameters");
    let bias = Normal::new(0.0, 0.04).expect("finite parameters");
    let rater_bias: Vec<f64> = SYNTHETIC_RATERS.iter().map(|_| bias.sample(&mut rng)).collect();
    let cases = ["Lung cancer", "Pancreatic cancer", "Breast cancer"];

    let mut rows = Vec::new();
    let arms = std::iter::repeat(Arm::Control).take(spec.n_control).chain(std::iter::repeat(Arm::Sophie).take(spec.n_sophie));
    for (p, arm) in arms.enumerate() {
        let pid = format!("P{:03}", p + 1);
        let base = skill.sample(&mut rng);
        let gain = match arm {
            Arm::Control => spec.gain_control,
            Arm::Sophie => spec.gain_sophie,
        };
        for order in [Order::Pre, Order::Post] {
            let level = base + if order == Order::Post { gain } else { 0.0 };
            let case = cases[rng.random_range(0..cases.len())];
            for (r, (rater, role)) in SYNTHETIC_RATERS.iter().enumerate() {
                let mut items = [0u8; ITEM_COUNT];
                for (i, slot) in items.iter_mut().enumerate() {
                    *slot = item_value(level + rater_bias[r] + noise.sample(&mut rng), i + 1);
                }
                let rating = RubricRating::new(conversation_id(&pid, order), *rater, *role, items).expect("values in scale");
                rows.push(RatingRow { participant_id: pid.clone(), arm, order, case_title: case.into(), rating, line: 0 });
            }
        }
    }
    for _ in 0..spec.missing_ratings.min(rows.len()) {
        let i = rng.random_range(0..rows.len());
        rows.remove(i);
    }
    for (i, r) in rows.iter_mut().enumerate() {
        r.line = i as u64 + 2;
    }
    rows.into_iter().collect()
}
