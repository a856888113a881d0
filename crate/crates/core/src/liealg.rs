//! The `sl(2,R)` model of the Lorentzian plane and the `SL(2,R)` double
//! cover of `SO^0(2,1)`.
//!
//! Traceless 2x2 matrices carry the Killing-type form `(X,Y) -> tr(XY)/2`,
//! which matches `B` under the linear isomorphism
//!
//! ```text
//! psi([[v1, v2], [v3, -v1]]) = (v1, (v2 + v3)/2, (-v2 + v3)/2)
//! ```
//!
//! Conjugation by a unimodular matrix then acts on the model as an
//! isometry ([`adjoint`]), every hyperbolic isometry admits a canonical
//! positive-trace lift ([`lift`]), and translation lengths along axes are
//! read off traces ([`translation_length`]).  The finite-difference
//! derivative of a deformed translation length lives here too
//! ([`length_derivative`]), as does the geometric pairing driving twist
//! deformations ([`twist_pairing`]).

use nalgebra::Matrix2;

use crate::affine::Cocycle;
use crate::error::{Error, Result};
use crate::fuchsian::{Holonomy, Word};
use crate::lorentz::{LorentzIsometry, LorentzVector};

/// Trace allowed to deviate from zero in [`TracelessMatrix`].
pub const TRACELESS_EPS: f64 = 1e-12;

/// Determinant allowed to deviate from one in [`UnimodularMatrix`].
pub const UNIMODULAR_EPS: f64 = 1e-10;

/// Default probe step for [`length_derivative`].
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// An element of `sl(2,R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracelessMatrix(Matrix2<f64>);

impl TracelessMatrix {
    pub fn try_new(m: Matrix2<f64>) -> Result<Self> {
        let tr = m.trace();
        if tr.abs() > TRACELESS_EPS {
            return Err(Error::InvalidSpec(format!(
                "matrix has trace {tr:.3e}, expected traceless"
            )));
        }
        Ok(TracelessMatrix(m))
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    pub fn scale(&self, s: f64) -> TracelessMatrix {
        TracelessMatrix(self.0 * s)
    }

    /// Exponential of a traceless 2x2 matrix, in closed form: with
    /// `d = -det(X)` this is `cosh(√d) I + sinh(√d)/√d X` for `d > 0`,
    /// the circular analogue for `d < 0`, and `I + X` at `d = 0`.
    pub fn exp(&self) -> UnimodularMatrix {
        let d = -self.0.determinant();
        let eye = Matrix2::identity();
        let m = if d > 1e-30 {
            let r = d.sqrt();
            eye * r.cosh() + self.0 * (r.sinh() / r)
        } else if d < -1e-30 {
            let r = (-d).sqrt();
            eye * r.cos() + self.0 * (r.sin() / r)
        } else {
            eye + self.0
        };
        UnimodularMatrix(m)
    }
}

/// An element of `SL(2,R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnimodularMatrix(Matrix2<f64>);

impl UnimodularMatrix {
    pub fn try_new(m: Matrix2<f64>) -> Result<Self> {
        let det = m.determinant();
        if (det - 1.0).abs() > UNIMODULAR_EPS {
            return Err(Error::InvalidSpec(format!(
                "matrix has determinant {det}, expected 1"
            )));
        }
        Ok(UnimodularMatrix(m))
    }

    pub fn identity() -> Self {
        UnimodularMatrix(Matrix2::identity())
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Exact inverse via the adjugate (determinant is 1).
    pub fn inverse(&self) -> UnimodularMatrix {
        let m = &self.0;
        UnimodularMatrix(Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]))
    }
}

impl std::ops::Mul for UnimodularMatrix {
    type Output = UnimodularMatrix;
    fn mul(self, rhs: UnimodularMatrix) -> UnimodularMatrix {
        UnimodularMatrix(self.0 * rhs.0)
    }
}

/// The isomorphism `sl(2,R) -> R^{2,1}` intertwining `tr(XY)/2` with `B`.
pub fn psi(x: &TracelessMatrix) -> LorentzVector {
    let m = x.matrix();
    let (v1, v2, v3) = (m[(0, 0)], m[(0, 1)], m[(1, 0)]);
    LorentzVector::new(v1, (v2 + v3) / 2.0, (-v2 + v3) / 2.0)
}

/// Inverse of [`psi`]: `(x1, x2, x3) -> [[x1, x2 - x3], [x2 + x3, -x1]]`.
pub fn psi_inv(v: &LorentzVector) -> TracelessMatrix {
    TracelessMatrix(Matrix2::new(
        v.x1(),
        v.x2() - v.x3(),
        v.x2() + v.x3(),
        -v.x1(),
    ))
}

/// Half-trace pairing on `sl(2,R)`; equals `B(psi(x), psi(y))`.
pub fn killing(x: &TracelessMatrix, y: &TracelessMatrix) -> f64 {
    (x.matrix() * y.matrix()).trace() / 2.0
}

/// The action of `SL(2,R)` on the model: the matrix of
/// `X -> g X g^-1` in the `psi` basis.  This is a surjection onto
/// `SO^0(2,1)` with kernel `{±I}`.
pub fn adjoint(g: &UnimodularMatrix) -> LorentzIsometry {
    let basis = [
        Matrix2::new(1.0, 0.0, 0.0, -1.0),
        Matrix2::new(0.0, 1.0, 1.0, 0.0),
        Matrix2::new(0.0, -1.0, 1.0, 0.0),
    ];
    let ginv = g.inverse();
    let mut columns = [nalgebra::Vector3::zeros(); 3];
    for (k, e) in basis.iter().enumerate() {
        let image = g.matrix() * e * ginv.matrix();
        let v = psi(&TracelessMatrix(image));
        columns[k] = nalgebra::Vector3::new(v.x1(), v.x2(), v.x3());
    }
    LorentzIsometry::from_matrix_unchecked(nalgebra::Matrix3::from_columns(&columns))
}

/// The positive-trace lift of a hyperbolic isometry:
/// `exp((l/2) psi_inv(x_zero))` where `l` is the translation length.
/// Satisfies `adjoint(lift(g)) = g` and `trace > 2`.
pub fn lift(g: &LorentzIsometry) -> Result<UnimodularMatrix> {
    let frame = g.hyperbolic_frame()?;
    let l = -frame.lambda.ln();
    Ok(psi_inv(&frame.x_zero).scale(l / 2.0).exp())
}

/// Translation length of a hyperbolic unimodular matrix,
/// `2 arccosh(|tr|/2)`.
pub fn translation_length(g: &UnimodularMatrix) -> Result<f64> {
    let t = g.trace().abs();
    if t <= 2.0 + 1e-10 {
        return Err(Error::NotHyperbolic {
            reason: format!("|trace| = {t} is not above 2"),
        });
    }
    Ok(2.0 * (t / 2.0).acosh())
}

/// One of the two `SL(2,R)` lifts of a word's image: the product of the
/// letter lifts, multiplied right to left.
///
/// Entries grow like `e^{l/2}` where the `SO(2,1)` product grows like
/// `e^{l}`, so words stay numerically usable about twice as deep into
/// the group.  The overall sign is whatever the letter lifts multiply
/// to; quantities read from it must not depend on that sign.
pub fn word_lift(hol: &Holonomy, w: &Word) -> Result<UnimodularMatrix> {
    let mut acc = UnimodularMatrix::identity();
    for letter in w.letters().iter().rev() {
        let frame = hol.generator_frame(letter.index)?;
        let half = -frame.lambda.ln() / 2.0;
        let g = psi_inv(&frame.x_zero).scale(half).exp();
        acc = if letter.inverted { g.inverse() } else { g } * acc;
    }
    Ok(acc)
}

/// Neutral axis vector and translation length of a word's image.
///
/// A hyperbolic lift is `±(cosh(l/2) I + sinh(l/2) psi_inv(x_zero))`, so
/// the traceless part of [`word_lift`] recovers the axis directly.  On
/// long words this is the only reliable route: eigenvector extraction
/// from the 3x3 image loses the contracting fixed point once the entries
/// dwarf the contracted eigenvalue.
pub fn word_axis(hol: &Holonomy, w: &Word) -> Result<(LorentzVector, f64)> {
    let m = word_lift(hol, w)?;
    let length = translation_length(&m)?;
    let scale = (m.trace() / 2.0).signum() * (length / 2.0).sinh();
    let half_gap = (m.matrix()[(0, 0)] - m.matrix()[(1, 1)]) / 2.0;
    let z = TracelessMatrix(Matrix2::new(
        half_gap,
        m.matrix()[(0, 1)],
        m.matrix()[(1, 0)],
        -half_gap,
    ));
    Ok((psi(&z).scale(1.0 / scale), length))
}

/// First variation of translation length along a cocycle direction.
///
/// Deform `w`'s lift by `t -> lift(w) * exp(t * psi_inv(u(w)))` and return
/// the central difference of `t -> translation_length / 2` at step `step`
/// (`DEFAULT_FD_STEP` when `None`).  By the first-variation identity this
/// approximates the Margulis invariant of `u` at `w` to second order in
/// the step.
pub fn length_derivative(u: &Cocycle<'_>, w: &Word, step: Option<f64>) -> Result<f64> {
    let step = step.unwrap_or(DEFAULT_FD_STEP);
    let g = word_lift(u.holonomy(), w)?;
    let direction = psi_inv(&u.evaluate(w));
    let half_length_at = |t: f64| -> Result<f64> {
        let probe = g * direction.scale(t).exp();
        let trace = probe.trace().abs();
        if trace <= 2.0 + 1e-10 {
            return Err(Error::StepLeavesHyperbolicLocus { trace });
        }
        Ok(translation_length(&probe)? / 2.0)
    };
    Ok((half_length_at(step)? - half_length_at(-step)?) / (2.0 * step))
}

/// Geometric coefficient of a twist deformation on the crossing curve:
/// `B(y0 - g_{l+1} y0, x_zero(f_l))` where `y0` is the axis vector of the
/// `l`-th dividing curve.  Equals `cos(theta) + cos(theta')` for the two
/// crossing angles returned by [`twist_angles`].
///
/// Fails with [`Error::AxesDisjoint`] if either crossing certificate
/// `|B| <= 1` fails.
pub fn twist_pairing(hol: &Holonomy, l: usize) -> Result<f64> {
    let (cos_theta, minus_cos_theta_prime) = crossing_pairings(hol, l)?;
    Ok(cos_theta - minus_cos_theta_prime)
}

/// The two crossing angles `(theta, theta')` of the `l`-th crossing curve
/// with the `l`-th dividing axis and its translate, reported for
/// diagnostics; their cosines sum to [`twist_pairing`].
pub fn twist_angles(hol: &Holonomy, l: usize) -> Result<(f64, f64)> {
    let (cos_theta, minus_cos_theta_prime) = crossing_pairings(hol, l)?;
    Ok((
        cos_theta.clamp(-1.0, 1.0).acos(),
        std::f64::consts::PI - minus_cos_theta_prime.clamp(-1.0, 1.0).acos(),
    ))
}

/// Returns `(B(y0, xf), B(g_{l+1} y0, xf))`, certifying both values lie
/// in `[-1, 1]` (the axes genuinely cross).
fn crossing_pairings(hol: &Holonomy, l: usize) -> Result<(f64, f64)> {
    let y0 = hol.dividing_frame(l)?.x_zero;
    let xf = hol.crossing_frame(l)?.x_zero;
    let translated = hol.generator(l + 1)?.apply(&y0);
    let at_p = y0.inner(&xf);
    let at_q = translated.inner(&xf);
    for pairing in [at_p, at_q] {
        if pairing.abs() > 1.0 + crate::lorentz::NULL_EPS {
            return Err(Error::AxesDisjoint { pairing });
        }
    }
    Ok((at_p, at_q))
}

/// Residuals of the twist-angle formula for the length derivative along a
/// crossing curve.
#[derive(Debug, Clone, Copy)]
pub struct TwistFormulaCheck {
    /// Finite-difference half-derivative of the deformed length.
    pub derivative: f64,
    /// Margulis invariant of the deformed cocycle at the crossing curve.
    pub margulis: f64,
    /// Predicted value `margulis(base, f_l) + t_l * twist_pairing(l)`.
    pub predicted: f64,
    /// `|derivative - predicted|`.
    pub residual: f64,
    /// `|margulis - predicted|`.
    pub margulis_residual: f64,
}

/// Check the closed form for the length variation of the `l`-th crossing
/// curve under the deformation with parameters `p`: the half-derivative
/// must equal `margulis(base(p), f_l) + t_l * twist_pairing(l)`.
pub fn verify_twist_formula(
    hol: &Holonomy,
    p: &crate::affine::DeformationParams,
    l: usize,
    step: Option<f64>,
) -> Result<TwistFormulaCheck> {
    let base = crate::affine::base_cocycle(hol, &p.alpha, &p.beta)?;
    let full = crate::affine::phi(hol, p)?;
    let w = Word::crossing(l, hol.b())?;
    let derivative = length_derivative(&full, &w, step)?;
    let margulis = full.margulis(&w)?;
    let predicted = base.margulis(&w)? + p.t[l - 1] * twist_pairing(hol, l)?;
    Ok(TwistFormulaCheck {
        derivative,
        margulis,
        predicted,
        residual: (derivative - predicted).abs(),
        margulis_residual: (margulis - predicted).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(a: f64) -> UnimodularMatrix {
        UnimodularMatrix::try_new(Matrix2::new(a, 0.0, 0.0, 1.0 / a)).unwrap()
    }

    #[test]
    fn psi_sends_basis_to_unit_vectors() {
        let e1 = TracelessMatrix::try_new(Matrix2::new(1.0, 0.0, 0.0, -1.0)).unwrap();
        let e2 = TracelessMatrix::try_new(Matrix2::new(0.0, 1.0, 1.0, 0.0)).unwrap();
        let e3 = TracelessMatrix::try_new(Matrix2::new(0.0, -1.0, 1.0, 0.0)).unwrap();
        assert_eq!(psi(&e1), LorentzVector::new(1.0, 0.0, 0.0));
        assert_eq!(psi(&e2), LorentzVector::new(0.0, 1.0, 0.0));
        assert_eq!(psi(&e3), LorentzVector::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn psi_roundtrip_and_killing_isometry() {
        let samples = [
            LorentzVector::new(0.3, -1.2, 0.7),
            LorentzVector::new(-2.0, 0.01, 5.5),
            LorentzVector::new(0.0, 0.0, 1.0),
        ];
        for (x, y) in samples.iter().zip(samples.iter().rev()) {
            let mx = psi_inv(x);
            let my = psi_inv(y);
            assert!((psi(&mx) - *x).euclidean_norm() < 1e-15);
            assert_abs_diff_eq!(killing(&mx, &my), x.inner(y), epsilon = 1e-12);
        }
    }

    #[test]
    fn adjoint_of_diagonal_is_standard_boost() {
        let g = adjoint(&diag((0.5f64).exp()));
        let expected = LorentzIsometry::standard_boost(1.0);
        assert!((g.matrix() - expected.matrix()).norm() < 1e-12);
        let f = g.hyperbolic_frame().unwrap();
        assert_abs_diff_eq!(f.lambda, (-1.0f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.x_zero.x1(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn adjoint_is_a_homomorphism_and_even() {
        let a = UnimodularMatrix::try_new(Matrix2::new(1.3, 0.4, 0.7, (1.0 + 0.4 * 0.7) / 1.3))
            .unwrap();
        let b = diag(2.0);
        let lhs = adjoint(&(a * b));
        let rhs = adjoint(&a) * adjoint(&b);
        assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-10);
        let neg = UnimodularMatrix::try_new(-a.matrix()).unwrap();
        assert!((adjoint(&neg).matrix() - adjoint(&a).matrix()).norm() < 1e-14);
        // Lands in the isometry group.
        LorentzIsometry::try_new(*adjoint(&a).matrix()).unwrap();
    }

    #[test]
    fn lift_of_standard_boost_is_diagonal() {
        let g = LorentzIsometry::standard_boost(1.0);
        let l = lift(&g).unwrap();
        assert!((l.matrix() - diag((0.5f64).exp()).matrix()).norm() < 1e-10);
        assert!(l.trace() > 2.0);
    }

    #[test]
    fn lift_commutes_with_inverse_and_sections_adjoint() {
        let r = LorentzIsometry::rotation(0.8);
        let g = r * LorentzIsometry::standard_boost(1.7) * r.inverse();
        let lg = lift(&g).unwrap();
        assert!((adjoint(&lg).matrix() - g.matrix()).norm() < 1e-8);
        let lginv = lift(&g.inverse()).unwrap();
        assert!((lginv.matrix() - lg.inverse().matrix()).norm() < 1e-8);
        assert_abs_diff_eq!(lg.trace(), 2.0 * (1.7f64 / 2.0).cosh(), epsilon = 1e-9);
    }

    #[test]
    fn translation_length_reads_traces() {
        assert_abs_diff_eq!(
            translation_length(&diag(1.0f64.exp())).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        let g = diag(0.7f64.exp());
        let mut power = g;
        for n in 2..=4 {
            power = power * g;
            assert_abs_diff_eq!(
                translation_length(&power).unwrap(),
                n as f64 * 1.4,
                epsilon = 1e-10
            );
        }
        let rot = UnimodularMatrix::try_new(Matrix2::new(0.6, -0.8, 0.8, 0.6)).unwrap();
        assert!(matches!(
            translation_length(&rot),
            Err(Error::NotHyperbolic { .. })
        ));
    }

    #[test]
    fn exp_solves_both_signs() {
        // Spacelike direction: hyperbolic one-parameter group.
        let x = psi_inv(&LorentzVector::new(1.0, 0.0, 0.0));
        let e = x.scale(0.5).exp();
        assert!((e.matrix() - diag(0.5f64.exp()).matrix()).norm() < 1e-14);
        // Timelike direction: rotation group, checked against period.
        let t = psi_inv(&LorentzVector::new(0.0, 0.0, 1.0));
        let r = t.scale(std::f64::consts::PI).exp();
        assert!((r.matrix() + Matrix2::identity()).norm() < 1e-12);
        // Null direction: unipotent.
        let n = psi_inv(&LorentzVector::new(0.0, 1.0, 1.0));
        let u = n.scale(3.0).exp();
        assert!((u.matrix() - (Matrix2::identity() + 3.0 * n.matrix())).norm() < 1e-14);
    }

    #[test]
    fn word_axis_agrees_with_frames_on_short_words() {
        use crate::fuchsian::{build_holonomy, HolonomySpec};

        let hol = build_holonomy(&HolonomySpec::symmetric(3)).unwrap();
        let words = [
            Word::generator(1),
            Word::generator(2).inverse(),
            Word::dividing(1, 3).unwrap(),
            Word::crossing(1, 3).unwrap(),
            Word::generator(1).concat(&Word::generator(3).inverse()),
        ];
        for w in &words {
            let (axis, length) = word_axis(&hol, w).unwrap();
            let frame = hol.evaluate(w).hyperbolic_frame().unwrap();
            assert!(
                (axis - frame.x_zero).euclidean_norm() < 1e-9,
                "axis of {w} disagrees with the frame"
            );
            assert_abs_diff_eq!(length, -frame.lambda.ln(), epsilon = 1e-9);

            let lifted = word_lift(&hol, w).unwrap();
            let direct = lift(&hol.evaluate(w)).unwrap();
            let gap = (lifted.matrix() - direct.matrix()).norm();
            let flipped = (lifted.matrix() + direct.matrix()).norm();
            assert!(gap.min(flipped) < 1e-8, "word lift of {w} off by {gap:.3e}");
        }
    }

    #[test]
    fn conjugated_lift_still_sections() {
        // Regression guard for the equivariance of frames under conjugation.
        let k = adjoint(
            &UnimodularMatrix::try_new(Matrix2::new(0.9, 0.2, -0.3, (1.0 - 0.06) / 0.9)).unwrap(),
        );
        let g = k * LorentzIsometry::standard_boost(2.0) * k.inverse();
        let lg = lift(&g).unwrap();
        assert!((adjoint(&lg).matrix() - g.matrix()).norm() < 1e-9);
    }

}
