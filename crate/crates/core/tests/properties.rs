//! Cross-module property sweeps on generic inputs.
//!
//! The unit suites pin hand-picked fixtures; these tests assert the
//! algebraic identities on random data, with the default symmetric
//! four-holed sphere as the shared holonomy.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Matrix3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use margulis_core::affine::{coboundary, phi, DeformationParams};
use margulis_core::fuchsian::{build_holonomy, Holonomy, HolonomySpec};
use margulis_core::liealg::{killing, psi, psi_inv};
use margulis_core::lorentz::LorentzVector;
use margulis_core::random::{random_hyperbolic, random_params, random_vector, random_word};

fn hol3() -> &'static Holonomy {
    static HOL: OnceLock<Holonomy> = OnceLock::new();
    HOL.get_or_init(|| build_holonomy(&HolonomySpec::symmetric(3)).unwrap())
}

fn vec3(scale: f64) -> impl Strategy<Value = LorentzVector> {
    prop::array::uniform3(-scale..scale).prop_map(|[a, b, c]| LorentzVector::new(a, b, c))
}

proptest! {
    #[test]
    fn cross_product_represents_the_determinant(
        x in vec3(1.0),
        y in vec3(1.0),
        z in vec3(1.0),
    ) {
        let det = Matrix3::from_columns(&[x.0, y.0, z.0]).determinant();
        prop_assert!((x.cross(&y).inner(&z) - det).abs() < 1e-10);
        prop_assert!((x.cross(&y) + y.cross(&x)).euclidean_norm() < 1e-12);
        prop_assert!(x.cross(&y).inner(&x).abs() < 1e-12);
    }

    #[test]
    fn isometries_preserve_form_and_cross(
        seed in any::<u64>(),
        x in vec3(1.0),
        y in vec3(1.0),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_hyperbolic(&mut rng, 0.5..2.5);
        prop_assert!((g.apply(&x).inner(&g.apply(&y)) - x.inner(&y)).abs() < 1e-9);
        let equivariance = (g.apply(&x.cross(&y)) - g.apply(&x).cross(&g.apply(&y)))
            .euclidean_norm();
        prop_assert!(equivariance < 1e-9);
    }

    #[test]
    fn frames_transform_covariantly(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_hyperbolic(&mut rng, 0.5..2.5);
        let q = random_hyperbolic(&mut rng, 0.2..1.0);
        let base = g.hyperbolic_frame().unwrap();
        let moved = (q * g * q.inverse()).hyperbolic_frame().unwrap();
        prop_assert!((moved.lambda - base.lambda).abs() < 1e-8);
        let axis_gap = (moved.x_zero - q.apply(&base.x_zero)).euclidean_norm();
        prop_assert!(axis_gap < 1e-7);
    }

    #[test]
    fn psi_is_a_killing_isometry(x in vec3(2.0), y in vec3(2.0)) {
        let (mx, my) = (psi_inv(&x), psi_inv(&y));
        prop_assert!((killing(&mx, &my) - x.inner(&y)).abs() < 1e-12);
        prop_assert!((psi(&mx) - x).euclidean_norm() < 1e-15);
    }

    #[test]
    fn cocycle_law_holds_on_random_words(seed in any::<u64>()) {
        let hol = hol3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_params(&mut rng, 3, 1.0);
        let u = phi(hol, &p).unwrap();
        let v = random_word(&mut rng, 3, 1 + (seed % 8) as usize);
        let w = random_word(&mut rng, 3, 1 + (seed / 8 % 8) as usize);

        let direct = u.evaluate(&v.concat(&w));
        let rho_v = hol.evaluate(&v);
        let composed = u.evaluate(&v) + rho_v.apply(&u.evaluate(&w));
        // When v and w mostly cancel, the two routes cancel terms of size
        // |rho(v)| |u(w)| down to a small remainder; error is relative to
        // the terms, not the remainder.
        let scale = 1.0
            + u.evaluate(&v).euclidean_norm()
            + rho_v.matrix().norm() * u.evaluate(&w).euclidean_norm();
        prop_assert!((direct - composed).euclidean_norm() < 1e-10 * scale);
    }

    #[test]
    fn coordinates_are_linear_and_pin_the_parameters(seed in any::<u64>()) {
        let hol = hol3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_params(&mut rng, 3, 1.0);
        let q = random_params(&mut rng, 3, 1.0);

        let coords = phi(hol, &p).unwrap().cohomology_coordinates().unwrap();
        for (got, want) in coords.iter().zip(p.alpha.iter().chain(p.beta.iter())) {
            prop_assert!((got - want).abs() < 1e-8);
        }

        let sum = DeformationParams::from_vec(
            3,
            &p.to_vec()
                .iter()
                .zip(q.to_vec().iter())
                .map(|(a, b)| a + b)
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let coords_q = phi(hol, &q).unwrap().cohomology_coordinates().unwrap();
        let coords_sum = phi(hol, &sum).unwrap().cohomology_coordinates().unwrap();
        for k in 0..coords.len() {
            prop_assert!((coords_sum[k] - coords[k] - coords_q[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn coboundary_coordinates_vanish(v in vec3(2.0)) {
        let coords = coboundary(hol3(), &v).cohomology_coordinates().unwrap();
        for c in coords {
            prop_assert!(c.abs() < 1e-9);
        }
    }
}

/// Matching coordinates plus matching invariants on a word sweep force the
/// difference to be a coboundary, recoverable by least squares on the
/// generator equations `u(g) = v - rho(g) v`.
#[test]
fn matching_invariants_reconstruct_the_coboundary() {
    let hol = hol3();
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let p = random_params(&mut rng, 3, 1.0);
    let u1 = phi(hol, &p).unwrap();
    let shift = random_vector(&mut rng, 1.5);
    let u2 = u1.plus(&coboundary(hol, &shift));

    let diff = u2.plus(&u1.scaled(-1.0));
    for c in diff.cohomology_coordinates().unwrap() {
        assert!(c.abs() < 1e-9, "coordinate {c} should vanish");
    }
    for k in 0..200 {
        let w = random_word(&mut rng, 3, 1 + k % 3);
        let inv = diff.margulis(&w).unwrap();
        // A vanishing invariant is the cancellation of B-pairings of size
        // |u(w)| |axis|, which bounds what f64 can resolve.
        let (axis, _) = margulis_core::liealg::word_axis(hol, &w).unwrap();
        let scale = 1.0 + diff.evaluate(&w).euclidean_norm() * axis.euclidean_norm();
        assert!(
            inv.abs() < 1e-12 * scale + 1e-9,
            "invariant {inv} should vanish at {w}"
        );
    }

    // Dense least-squares fit of the translation vector from all stored
    // generator values.
    let b = hol.b();
    let mut a = DMatrix::zeros(3 * (b + 1), 3);
    let mut rhs = DVector::zeros(3 * (b + 1));
    for i in 1..=b + 1 {
        let g = hol.generator(i).unwrap();
        let block = Matrix3::identity() - g.matrix();
        a.view_mut((3 * (i - 1), 0), (3, 3)).copy_from(&block);
        let val = diff.value(i).unwrap();
        rhs.rows_mut(3 * (i - 1), 3)
            .copy_from(&nalgebra::Vector3::new(val.x1(), val.x2(), val.x3()));
    }
    let fit = a
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .expect("least-squares solve");
    let v = LorentzVector::new(fit[0], fit[1], fit[2]);
    assert!((v - shift).euclidean_norm() < 1e-8);
    let delta = coboundary(hol, &v);
    for i in 1..=b + 1 {
        let gap = (diff.value(i).unwrap() - delta.value(i).unwrap()).euclidean_norm();
        assert!(gap < 1e-6, "generator {i} residual {gap:.3e}");
    }
}
