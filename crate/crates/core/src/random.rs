//! Seeded samplers for randomized verification sweeps.
//!
//! Every sampler draws from a caller-supplied generator, so a sweep is
//! reproducible from one recorded seed.

use std::f64::consts::TAU;
use std::ops::Range;

use rand::Rng;

use crate::affine::DeformationParams;
use crate::fuchsian::{Letter, Word};
use crate::lorentz::{LorentzIsometry, LorentzVector};

/// A vector with components uniform in `[-scale, scale]`.
pub fn random_vector(rng: &mut impl Rng, scale: f64) -> LorentzVector {
    LorentzVector::new(
        rng.random_range(-scale..=scale),
        rng.random_range(-scale..=scale),
        rng.random_range(-scale..=scale),
    )
}

/// A hyperbolic isometry with translation length drawn from `lengths`,
/// conjugated by a random rotation-boost-rotation so its axis lands in
/// general position.  The conjugating boost is kept short to bound the
/// conditioning of the result.
pub fn random_hyperbolic(rng: &mut impl Rng, lengths: Range<f64>) -> LorentzIsometry {
    let length = rng.random_range(lengths);
    let mover = LorentzIsometry::rotation(rng.random_range(0.0..TAU))
        * LorentzIsometry::standard_boost(rng.random_range(0.1..1.5))
        * LorentzIsometry::rotation(rng.random_range(0.0..TAU));
    mover * LorentzIsometry::standard_boost(length) * mover.inverse()
}

/// A freely reduced word of exactly `len` letters over `g_1, ..., g_b`,
/// uniform at each step among the letters that do not cancel.
pub fn random_word(rng: &mut impl Rng, b: usize, len: usize) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let letter = Letter::new(rng.random_range(1..=b), rng.random_bool(0.5));
        if letters.last().is_some_and(|last| *last == letter.inverse()) {
            continue;
        }
        letters.push(letter);
    }
    Word::from_letters(letters)
}

/// Deformation parameters with all entries uniform in `[-scale, scale]`.
pub fn random_params(rng: &mut impl Rng, b: usize, scale: f64) -> DeformationParams {
    let mut draw = |n: usize| (0..n).map(|_| rng.random_range(-scale..=scale)).collect();
    DeformationParams {
        alpha: draw(b + 1),
        beta: draw(b - 2),
        t: draw(b - 2),
    }
}
