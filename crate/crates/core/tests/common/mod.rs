#![allow(dead_code)]

use gidseg::ScalarField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_field(rng: &mut impl Rng, w: usize, h: usize, lo: f64, hi: f64) -> ScalarField {
    ScalarField::from_fn(w, h, |_, _| rng.random_range(lo..hi))
}
