//! Translational deformation cocycles and their Margulis invariants.
//!
//! A cocycle `u` assigns a translation part to every group element so that
//! `u(gh) = g u(h) + u(g)`; it is determined by its values on the free
//! generators `g_1, ..., g_b`.  The diffused sign of the affine action at
//! a hyperbolic `w` is the Margulis invariant
//!
//! ```text
//! margulis(u, w) = B(u(w), x_zero(w))
//! ```
//!
//! which vanishes on coboundaries `v - g v` and is insensitive to the
//! choice of base point.
//!
//! The module constructs, pants by pants, a base cocycle with prescribed
//! invariants on the boundary and dividing curves ([`base_cocycle`]), the
//! twist-like cocycles supported on one side of each dividing curve
//! ([`affine_twist`]), and the combined parametrisation [`phi`] whose
//! 3b-3 coordinates are read back by [`Cocycle::cohomology_coordinates`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuchsian::{Holonomy, Word};
use crate::lorentz::{HyperbolicFrame, LorentzIsometry, LorentzVector};

/// Tolerance for pinned Margulis invariants of constructed cocycles.
pub const PIN_EPS: f64 = 1e-8;

/// Determinant threshold below which the pants system counts as singular.
pub const SINGULAR_EPS: f64 = 1e-12;

/// Parameters of the deformation family: invariants `alpha` on the
/// boundary generators, `beta` on the dividing curves, and twist
/// coefficients `t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeformationParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub t: Vec<f64>,
}

impl DeformationParams {
    pub fn zero(b: usize) -> DeformationParams {
        DeformationParams {
            alpha: vec![0.0; b + 1],
            beta: vec![0.0; b - 2],
            t: vec![0.0; b - 2],
        }
    }

    pub fn validate(&self, b: usize) -> Result<()> {
        for (name, got, want) in [
            ("alpha", self.alpha.len(), b + 1),
            ("beta", self.beta.len(), b - 2),
            ("t", self.t.len(), b - 2),
        ] {
            if got != want {
                return Err(Error::InvalidSpec(format!(
                    "{name} must have {want} entries, got {got}"
                )));
            }
        }
        Ok(())
    }

    /// Total coordinate dimension `3b - 3`.
    pub fn dim(b: usize) -> usize {
        3 * b - 3
    }

    /// Flatten to `(alpha, beta, t)` order.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.alpha.clone();
        v.extend_from_slice(&self.beta);
        v.extend_from_slice(&self.t);
        v
    }

    /// Inverse of [`DeformationParams::to_vec`].
    pub fn from_vec(b: usize, v: &[f64]) -> Result<DeformationParams> {
        if v.len() != Self::dim(b) {
            return Err(Error::InvalidSpec(format!(
                "parameter vector must have {} entries, got {}",
                Self::dim(b),
                v.len()
            )));
        }
        Ok(DeformationParams {
            alpha: v[..b + 1].to_vec(),
            beta: v[b + 1..2 * b - 1].to_vec(),
            t: v[2 * b - 1..].to_vec(),
        })
    }
}

/// A cocycle for a fixed holonomy, stored by its values on the free
/// generators `g_1, ..., g_b`; the value on `g_{b+1}` is forced by the
/// defining relation and cached.
#[derive(Debug, Clone)]
pub struct Cocycle<'h> {
    hol: &'h Holonomy,
    values: Vec<LorentzVector>,
    closing: LorentzVector,
}

impl<'h> Cocycle<'h> {
    /// Build from values on the free generators (`values.len() == b`).
    pub fn new(hol: &'h Holonomy, values: Vec<LorentzVector>) -> Result<Cocycle<'h>> {
        let b = hol.b();
        if values.len() != b {
            return Err(Error::InvalidSpec(format!(
                "cocycle needs {b} generator values, got {}",
                values.len()
            )));
        }
        // u(g_{b+1}) = -rho(g_{b+1}) u(g_1 ... g_b).
        let mut partial = Cocycle {
            hol,
            values,
            closing: LorentzVector::zero(),
        };
        let mut product = Word::empty();
        for i in 1..=b {
            product = product.concat(&Word::generator(i));
        }
        let head = partial.evaluate(&product);
        partial.closing = -(hol.generator(b + 1)?.apply(&head));
        Ok(partial)
    }

    /// The zero cocycle.
    pub fn zero(hol: &'h Holonomy) -> Cocycle<'h> {
        Cocycle {
            hol,
            values: vec![LorentzVector::zero(); hol.b()],
            closing: LorentzVector::zero(),
        }
    }

    pub fn holonomy(&self) -> &'h Holonomy {
        self.hol
    }

    /// Value on the generator `g_i`, `i` in `1..=b+1`.
    pub fn value(&self, i: usize) -> Result<LorentzVector> {
        if i == 0 || i > self.hol.b() + 1 {
            return Err(Error::IndexOutOfRange {
                what: "generator",
                index: i,
                limit: self.hol.b() + 1,
            });
        }
        Ok(if i == self.hol.b() + 1 {
            self.closing
        } else {
            self.values[i - 1]
        })
    }

    /// Extend to an arbitrary word by `u(vw) = rho(v) u(w) + u(v)`.
    /// Letters must reference generators `1..=b+1`; the empty word maps
    /// to zero.
    pub fn evaluate(&self, w: &Word) -> LorentzVector {
        // Right fold by the cocycle rule u(l w) = u(l) + rho(l) u(w); like
        // word evaluation it keeps the partial products on the dividing
        // words small, where a running-prefix fold would push the value
        // through their enormous prefixes.
        let mut value = LorentzVector::zero();
        for letter in w.letters().iter().rev() {
            let g = *self
                .hol
                .generator(letter.index)
                .expect("letter index exceeds b + 1");
            let letter_value = if letter.index == self.hol.b() + 1 {
                self.closing
            } else {
                self.values[letter.index - 1]
            };
            if letter.inverted {
                value = g.inverse().apply(&(value - letter_value));
            } else {
                value = letter_value + g.apply(&value);
            }
        }
        value
    }

    /// `B(u(w), x_zero(w))`: the diffused displacement of the affine map
    /// `x -> rho(w) x + u(w)` along its invariant axis.  Requires `w` to
    /// evaluate to a hyperbolic isometry.  The axis is read from the
    /// word's `SL(2,R)` lift, which survives long words whose 3x3 image
    /// is too stretched for eigenvector extraction.
    pub fn margulis(&self, w: &Word) -> Result<f64> {
        let (axis, _) = crate::liealg::word_axis(self.hol, w)?;
        Ok(self.evaluate(w).inner(&axis))
    }

    /// The `3b - 3` invariants on the reference curves, in the order
    /// `g_1..g_{b+1}, h_1..h_{b-2}, f_1..f_{b-2}`, read off the cached
    /// frames.
    pub fn cohomology_coordinates(&self) -> Result<Vec<f64>> {
        let b = self.hol.b();
        let mut coords = Vec::with_capacity(3 * b - 3);
        for i in 1..=b + 1 {
            let value = self.value(i)?;
            coords.push(value.inner(&self.hol.generator_frame(i)?.x_zero));
        }
        for j in 1..=b - 2 {
            let value = self.evaluate(&Word::dividing(j, b)?);
            coords.push(value.inner(&self.hol.dividing_frame(j)?.x_zero));
        }
        for l in 1..=b - 2 {
            let value = self.evaluate(&Word::crossing(l, b)?);
            coords.push(value.inner(&self.hol.crossing_frame(l)?.x_zero));
        }
        Ok(coords)
    }

    /// Pointwise sum; both summands must refer to the same holonomy.
    pub fn plus(&self, other: &Cocycle<'h>) -> Cocycle<'h> {
        assert!(
            std::ptr::eq(self.hol, other.hol),
            "cocycles over different holonomies"
        );
        Cocycle {
            hol: self.hol,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| *a + *b)
                .collect(),
            closing: self.closing + other.closing,
        }
    }

    pub fn scaled(&self, s: f64) -> Cocycle<'h> {
        Cocycle {
            hol: self.hol,
            values: self.values.iter().map(|v| v.scale(s)).collect(),
            closing: self.closing.scale(s),
        }
    }
}

/// The coboundary of a translation vector: `g -> v - rho(g) v`.  Its
/// Margulis invariant vanishes identically.
pub fn coboundary<'h>(hol: &'h Holonomy, v: &LorentzVector) -> Cocycle<'h> {
    let values = (1..=hol.b())
        .map(|i| *v - hol.generator(i).expect("free generator").apply(v))
        .collect();
    // The closing value of a coboundary is again the coboundary formula,
    // so build it directly instead of through the relation.
    let closing = *v - hol.generator(hol.b() + 1).expect("closing generator").apply(v);
    Cocycle {
        hol,
        values,
        closing,
    }
}

/// Known coefficients feeding [`solve_pants`]: everything about the first
/// boundary, the axis and contracting coefficients of the second, and the
/// axis coefficient of the third.
#[derive(Debug, Clone, Copy)]
pub struct PantsKnowns {
    pub alpha1: f64,
    pub c1_minus: f64,
    pub c1_plus: f64,
    pub alpha2: f64,
    pub c2_minus: f64,
    pub alpha3: f64,
}

/// Output of [`solve_pants`].
#[derive(Debug, Clone, Copy)]
pub struct PantsSolution {
    pub c2_plus: f64,
    pub c3_minus: f64,
    pub c3_plus: f64,
    /// Determinant of the assembled 3x3 system.
    pub det: f64,
}

/// Solve the cocycle relation on one pair of pants.
///
/// For boundary curves `(f_1, f_2, f_3)` with `f_1 f_2 f_3 = 1` and
/// `u(f_i) = alpha_i x0_i + ci_minus x-_i + ci_plus x+_i`, the relation
///
/// ```text
/// u(f_1) + f_1 u(f_2) + f_3^-1 u(f_3) = 0
/// ```
///
/// is three scalar equations.  Pairing it with `x0_1, x0_2, x0_3` gives a
/// 3x3 linear system for the unknowns `(c2_plus, c3_minus, c3_plus)`,
/// assembled here numerically from the frames themselves.
pub fn solve_pants(
    f1: &LorentzIsometry,
    frame1: &HyperbolicFrame,
    frame2: &HyperbolicFrame,
    frame3: &HyperbolicFrame,
    knowns: &PantsKnowns,
) -> Result<PantsSolution> {
    let lambda3 = frame3.lambda;
    // Unknown columns of the relation.
    let columns = [
        f1.apply(&frame2.x_plus),
        frame3.x_minus.scale(1.0 / lambda3),
        frame3.x_plus.scale(lambda3),
    ];
    // Fully known part.
    let fixed = frame1.combine(knowns.alpha1, knowns.c1_minus, knowns.c1_plus)
        + f1.apply(&frame2.combine(knowns.alpha2, knowns.c2_minus, 0.0))
        + frame3.x_zero.scale(knowns.alpha3);

    let probes = [&frame1.x_zero, &frame2.x_zero, &frame3.x_zero];
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    let mut rhs = nalgebra::Vector3::<f64>::zeros();
    for (i, probe) in probes.iter().enumerate() {
        for (k, col) in columns.iter().enumerate() {
            m[(i, k)] = probe.inner(col);
        }
        rhs[i] = -probe.inner(&fixed);
    }
    let det = m.determinant();
    if det.abs() <= SINGULAR_EPS {
        return Err(Error::SingularSystem { det });
    }
    let sol = m
        .full_piv_lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem { det })?;
    Ok(PantsSolution {
        c2_plus: sol[0],
        c3_minus: sol[1],
        c3_plus: sol[2],
        det,
    })
}

/// The symmetric pairing matrix of the three axis vectors of a pants
/// triple (unit diagonal).  Its determinant is negative whenever the
/// triple is consistently oriented, which keeps [`solve_pants`] away from
/// the singular locus.
pub fn pants_axis_matrix(
    frame1: &HyperbolicFrame,
    frame2: &HyperbolicFrame,
    frame3: &HyperbolicFrame,
) -> nalgebra::Matrix3<f64> {
    let x = [&frame1.x_zero, &frame2.x_zero, &frame3.x_zero];
    nalgebra::Matrix3::from_fn(|i, k| x[i].inner(x[k]))
}

/// Frame of the inverse of a hyperbolic element: the null vectors swap
/// and the axis vector flips sign (keeping the frame determinant
/// positive), while `lambda` is unchanged.
fn inverse_frame(frame: &HyperbolicFrame) -> HyperbolicFrame {
    HyperbolicFrame {
        x_minus: frame.x_plus,
        x_plus: frame.x_minus,
        x_zero: -frame.x_zero,
        lambda: frame.lambda,
    }
}

/// Pants data resolved against a holonomy: the three boundary words'
/// isometries and frames, plus bookkeeping for which stored value each
/// slot feeds.
struct ChainPants {
    f1: LorentzIsometry,
    frame1: HyperbolicFrame,
    frame2: HyperbolicFrame,
    frame3: HyperbolicFrame,
}

fn chain_pants(hol: &Holonomy, j: usize) -> Result<ChainPants> {
    let b = hol.b();
    if j == 1 {
        Ok(ChainPants {
            f1: *hol.generator(1)?,
            frame1: *hol.generator_frame(1)?,
            frame2: *hol.generator_frame(2)?,
            frame3: *hol.dividing_frame(1)?,
        })
    } else {
        let f1 = hol.dividing_curve(j - 1)?.inverse();
        let frame1 = inverse_frame(hol.dividing_frame(j - 1)?);
        let frame2 = *hol.generator_frame(j + 1)?;
        let frame3 = if j < b - 1 {
            *hol.dividing_frame(j)?
        } else {
            *hol.generator_frame(b + 1)?
        };
        Ok(ChainPants {
            f1,
            frame1,
            frame2,
            frame3,
        })
    }
}

/// Build the cocycle with Margulis invariant `alpha_i` on every boundary
/// generator and `beta_j` on every dividing curve, in the gauge where
/// `u(g_1)` is purely axial and every other `u(g_i)` has no contracting
/// component.
///
/// The construction walks the pants chain: on each pants the first
/// boundary's value is already known, the second's contracting
/// coefficient is gauged to zero, and [`solve_pants`] produces the
/// remaining coefficients.  The result is linear in `(alpha, beta)`.
pub fn base_cocycle<'h>(hol: &'h Holonomy, alpha: &[f64], beta: &[f64]) -> Result<Cocycle<'h>> {
    let b = hol.b();
    if alpha.len() != b + 1 || beta.len() != b - 2 {
        return Err(Error::InvalidSpec(format!(
            "need {} alpha and {} beta entries, got {} and {}",
            b + 1,
            b - 2,
            alpha.len(),
            beta.len()
        )));
    }

    let mut values = vec![LorentzVector::zero(); b];
    values[0] = hol.generator_frame(1)?.x_zero.scale(alpha[0]);

    // Coefficients of u(h_j) in the frame of h_j, carried along the chain.
    let mut dividing_value = LorentzVector::zero();

    for j in 1..=b - 1 {
        let pants = chain_pants(hol, j)?;
        let (alpha2, alpha3) = if j == 1 {
            (alpha[1], beta[0])
        } else if j < b - 1 {
            (alpha[j], beta[j - 1])
        } else {
            (alpha[b - 1], alpha[b])
        };
        let knowns = if j == 1 {
            PantsKnowns {
                alpha1: alpha[0],
                c1_minus: 0.0,
                c1_plus: 0.0,
                alpha2,
                c2_minus: 0.0,
                alpha3,
            }
        } else {
            // u(h_{j-1}^-1) = -h_{j-1}^-1 u(h_{j-1}), expanded in the
            // frame of h_{j-1}^-1.
            let value = -(pants.f1.apply(&dividing_value));
            let (a1, c1m, c1p) = pants.frame1.coefficients(&value);
            PantsKnowns {
                alpha1: a1,
                c1_minus: c1m,
                c1_plus: c1p,
                alpha2,
                c2_minus: 0.0,
                alpha3,
            }
        };
        let sol = solve_pants(
            &pants.f1,
            &pants.frame1,
            &pants.frame2,
            &pants.frame3,
            &knowns,
        )?;
        values[j] = pants.frame2.combine(alpha2, 0.0, sol.c2_plus);
        dividing_value = pants
            .frame3
            .combine(alpha3, sol.c3_minus, sol.c3_plus);
        // For j = b-1 the third slot is g_{b+1}; its value is implied by
        // the relation, so nothing is stored.
    }

    Cocycle::new(hol, values)
}

/// The twist-like cocycle supported past the `k`-th dividing curve: zero
/// on `g_1, ..., g_{k+1}` and the coboundary of the dividing axis vector
/// `y0_k` on the remaining generators.  Vanishes on `h_k` itself and has
/// zero Margulis invariant on every `g_i` and `h_j`.
pub fn affine_twist<'h>(hol: &'h Holonomy, k: usize) -> Result<Cocycle<'h>> {
    let b = hol.b();
    if k == 0 || k > b - 2 {
        return Err(Error::IndexOutOfRange {
            what: "dividing curve",
            index: k,
            limit: b - 2,
        });
    }
    let y0 = hol.dividing_frame(k)?.x_zero;
    let values = (1..=b)
        .map(|i| {
            if i <= k + 1 {
                LorentzVector::zero()
            } else {
                y0 - hol.generator(i).expect("free generator").apply(&y0)
            }
        })
        .collect();
    Cocycle::new(hol, values)
}

/// The full deformation family: base cocycle plus twist combination,
/// `phi(alpha, beta, t) = base(alpha, beta) + sum_k t_k * twist_k`.
pub fn phi<'h>(hol: &'h Holonomy, p: &DeformationParams) -> Result<Cocycle<'h>> {
    p.validate(hol.b())?;
    let mut u = base_cocycle(hol, &p.alpha, &p.beta)?;
    for (k, tk) in p.t.iter().enumerate() {
        if *tk != 0.0 {
            u = u.plus(&affine_twist(hol, k + 1)?.scaled(*tk));
        }
    }
    Ok(u)
}

/// The linear map `p -> cohomology_coordinates(phi(p))` on the standard
/// parameter basis, with its determinant and condition number.
#[derive(Debug, Clone)]
pub struct CoordinateMatrix {
    /// Column `k` holds the coordinates of `phi(e_k)`; columns follow the
    /// `(alpha, beta, t)` order of [`DeformationParams::to_vec`].
    pub matrix: nalgebra::DMatrix<f64>,
    pub determinant: f64,
    /// Ratio of extreme singular values.
    pub condition_number: f64,
}

/// Assemble the `(3b-3) x (3b-3)` matrix of [`phi`] followed by
/// [`Cocycle::cohomology_coordinates`].
///
/// The invariant pinning makes the result block lower-triangular: the
/// first `2b - 1` rows reproduce `(alpha, beta)` exactly, and the
/// crossing rows respond to each twist through its crossing pairing, so
/// the determinant is the product of the pairings.  A nonzero determinant
/// certifies that the parameters inject into cohomology.
pub fn coordinate_matrix(hol: &Holonomy) -> Result<CoordinateMatrix> {
    let dim = DeformationParams::dim(hol.b());
    let mut columns = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut coords = vec![0.0; dim];
        coords[k] = 1.0;
        let p = DeformationParams::from_vec(hol.b(), &coords)?;
        columns.push(phi(hol, &p)?.cohomology_coordinates()?);
    }
    let matrix = nalgebra::DMatrix::from_fn(dim, dim, |r, c| columns[c][r]);
    let determinant = matrix.determinant();
    let singular = matrix.clone().svd(false, false).singular_values;
    let (mut lo, mut hi) = (f64::MAX, 0.0_f64);
    for s in singular.iter() {
        lo = lo.min(*s);
        hi = hi.max(*s);
    }
    Ok(CoordinateMatrix {
        matrix,
        determinant,
        condition_number: if lo > 0.0 { hi / lo } else { f64::MAX },
    })
}

/// Invariant affine line of the map `x -> g x + translation`.
#[derive(Debug, Clone, Copy)]
pub struct InvariantAxis {
    /// The unique point of the axis lying in the span of the null
    /// eigenvectors.
    pub base_point: LorentzVector,
    /// The axis vector `x_zero(g)`.
    pub direction: LorentzVector,
    /// Signed displacement along the axis: the Margulis invariant.
    pub displacement: f64,
}

/// Compute the invariant line of the affine transformation with linear
/// part `g` and the given translation: the map displaces the line along
/// `x_zero(g)` by exactly the Margulis invariant.
pub fn invariant_axis(g: &LorentzIsometry, translation: &LorentzVector) -> Result<InvariantAxis> {
    let frame = g.hyperbolic_frame()?;
    let (alpha, c_minus, c_plus) = frame.coefficients(translation);
    let a = c_minus / (1.0 - frame.lambda);
    let bb = -c_plus / (1.0 / frame.lambda - 1.0);
    Ok(InvariantAxis {
        base_point: a * frame.x_minus + bb * frame.x_plus,
        direction: frame.x_zero,
        displacement: alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::{build_holonomy, HolonomySpec};
    use approx::assert_abs_diff_eq;

    fn hol3() -> Holonomy {
        build_holonomy(&HolonomySpec::symmetric(3)).unwrap()
    }

    #[test]
    fn cocycle_law_on_generators() {
        let hol = hol3();
        let u = base_cocycle(&hol, &[1.0, -0.5, 0.25, 2.0], &[0.75]).unwrap();
        let v = Word::generator(1).concat(&Word::generator(2));
        let direct = u.evaluate(&v);
        let composed = u.value(1).unwrap()
            + hol.generator(1).unwrap().apply(&u.value(2).unwrap());
        assert!((direct - composed).euclidean_norm() < 1e-12);
        // Inverses: u(g^-1) = -g^-1 u(g).
        let w = Word::generator(2).inverse();
        let expected = -(hol
            .generator(2)
            .unwrap()
            .inverse()
            .apply(&u.value(2).unwrap()));
        assert!((u.evaluate(&w) - expected).euclidean_norm() < 1e-12);
        assert_eq!(u.evaluate(&Word::empty()), LorentzVector::zero());
    }

    #[test]
    fn dividing_value_matches_alternating_sum() {
        // u(h_j) = -sum_x (g_{j+1}^-1 ... g_x^-1) u(g_x), x = 1..j+1.
        let hol = build_holonomy(&HolonomySpec::symmetric(5)).unwrap();
        let u = base_cocycle(
            &hol,
            &[0.3, -1.0, 0.8, 0.1, -0.4, 0.9],
            &[0.5, -0.2, 1.1],
        )
        .unwrap();
        for j in 1..=3usize {
            let mut expected = LorentzVector::zero();
            for x in 1..=j + 1 {
                let mut prefix = LorentzIsometry::identity();
                for i in x..=j + 1 {
                    prefix = hol.generator(i).unwrap().inverse() * prefix;
                }
                expected = expected - prefix.apply(&u.value(x).unwrap());
            }
            let direct = u.evaluate(&Word::dividing(j, 5).unwrap());
            let mismatch = (direct - expected).euclidean_norm();
            // Either route pushes the value through the chain's largest
            // letters, and rounding picked up mid-word is amplified by the
            // letters still to come, so agreement degrades well past the
            // naive u * |g| * |u| estimate.
            assert!(mismatch < 1e-6, "dividing value {j} mismatch {mismatch:.3e}");
        }
    }

    #[test]
    fn coboundaries_have_zero_invariants() {
        let hol = hol3();
        let v = LorentzVector::new(0.4, -1.3, 0.7);
        let delta = coboundary(&hol, &v);
        let words = [
            Word::generator(1),
            Word::generator(3).inverse(),
            Word::dividing(1, 3).unwrap(),
            Word::generator(1).concat(&Word::generator(2)).inverse(),
            Word::crossing(1, 3).unwrap(),
        ];
        for w in &words {
            let inv = delta.margulis(w).unwrap();
            assert!(inv.abs() < 1e-9, "coboundary invariant {inv} at {w}");
            // Coboundary values follow the pointwise formula on any word.
            let g = hol.evaluate(w);
            let expected = v - g.apply(&v);
            assert!((delta.evaluate(w) - expected).euclidean_norm() < 1e-10);
        }
        let zero = coboundary(&hol, &LorentzVector::zero());
        assert_eq!(zero.evaluate(&Word::generator(2)), LorentzVector::zero());
    }

    #[test]
    fn margulis_reads_axis_component() {
        let hol = hol3();
        let f1 = hol.generator_frame(1).unwrap();
        let mut values = vec![LorentzVector::zero(); 3];
        values[0] = f1.combine(3.0, 5.0, 0.0);
        let u = Cocycle::new(&hol, values).unwrap();
        assert_abs_diff_eq!(
            u.margulis(&Word::generator(1)).unwrap(),
            3.0,
            epsilon = 1e-10
        );
        // Independence from the inverse: margulis(w^-1) = margulis(w).
        assert_abs_diff_eq!(
            u.margulis(&Word::generator(1).inverse()).unwrap(),
            3.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn margulis_is_base_point_free() {
        // B(gamma(x) - x, x_zero) is the same for any base point x.
        let hol = hol3();
        let u = base_cocycle(&hol, &[1.0, 1.0, 1.0, 1.0], &[1.0]).unwrap();
        let w = Word::generator(1).concat(&Word::generator(2));
        let g = hol.evaluate(&w);
        let frame = g.hyperbolic_frame().unwrap();
        let uval = u.evaluate(&w);
        let reference = u.margulis(&w).unwrap();
        for x in [
            LorentzVector::zero(),
            LorentzVector::new(0.3, 1.0, -2.0),
            LorentzVector::new(-5.0, 0.01, 4.4),
        ] {
            let displaced = g.apply(&x) + uval - x;
            assert_abs_diff_eq!(
                displaced.inner(&frame.x_zero),
                reference,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn pants_solution_restores_the_relation() {
        let hol = hol3();
        let pants = chain_pants(&hol, 1).unwrap();
        let knowns = PantsKnowns {
            alpha1: 0.7,
            c1_minus: -0.3,
            c1_plus: 0.45,
            alpha2: -1.2,
            c2_minus: 0.9,
            alpha3: 0.25,
        };
        let sol = solve_pants(
            &pants.f1,
            &pants.frame1,
            &pants.frame2,
            &pants.frame3,
            &knowns,
        )
        .unwrap();
        // Recompose u(f_1) + f_1 u(f_2) + f_3^-1 u(f_3) and check it vanishes.
        let u1 = pants
            .frame1
            .combine(knowns.alpha1, knowns.c1_minus, knowns.c1_plus);
        let u2 = pants
            .frame2
            .combine(knowns.alpha2, knowns.c2_minus, sol.c2_plus);
        let u3 = pants
            .frame3
            .combine(knowns.alpha3, sol.c3_minus / pants.frame3.lambda,
                     sol.c3_plus * pants.frame3.lambda);
        let residual = (u1 + pants.f1.apply(&u2) + u3).euclidean_norm();
        assert!(residual < 1e-9, "pants relation residual {residual}");
    }

    #[test]
    fn pants_axis_matrix_has_negative_determinant() {
        for b in [3usize, 4, 5] {
            let hol = build_holonomy(&HolonomySpec::symmetric(b)).unwrap();
            for j in 1..=b - 1 {
                let pants = chain_pants(&hol, j).unwrap();
                let a = pants_axis_matrix(&pants.frame1, &pants.frame2, &pants.frame3);
                let det = a.determinant();
                assert!(det < 0.0, "axis matrix of pants {j} (b={b}) has det {det}");
                for i in 0..3 {
                    assert_abs_diff_eq!(a[(i, i)], 1.0, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn base_cocycle_pins_all_invariants() {
        let hol = build_holonomy(&HolonomySpec::symmetric(4)).unwrap();
        let alpha = [1.0, -0.5, 0.25, 2.0, 0.7];
        let beta = [0.4, -1.3];
        let u = base_cocycle(&hol, &alpha, &beta).unwrap();
        for (i, a) in alpha.iter().enumerate() {
            assert_abs_diff_eq!(
                u.margulis(&Word::generator(i + 1)).unwrap(),
                *a,
                epsilon = PIN_EPS
            );
        }
        for (j, bj) in beta.iter().enumerate() {
            assert_abs_diff_eq!(
                u.margulis(&Word::dividing(j + 1, 4).unwrap()).unwrap(),
                *bj,
                epsilon = PIN_EPS
            );
        }
        // Gauge: u(g_1) purely axial, u(g_i) free of contracting component.
        let f1 = hol.generator_frame(1).unwrap();
        let (_, c1m, c1p) = f1.coefficients(&u.value(1).unwrap());
        assert!(c1m.abs() < 1e-9 && c1p.abs() < 1e-9);
        for i in 2..=4 {
            let fi = hol.generator_frame(i).unwrap();
            let (_, cm, _) = fi.coefficients(&u.value(i).unwrap());
            assert!(cm.abs() < 1e-9, "contracting gauge leak on g{i}: {cm}");
        }
    }

    #[test]
    fn base_cocycle_is_linear() {
        let hol = hol3();
        let u = base_cocycle(&hol, &[1.0, 0.0, -2.0, 0.5], &[0.3]).unwrap();
        let v = base_cocycle(&hol, &[0.2, 1.0, 0.4, -1.0], &[-0.8]).unwrap();
        let sum = base_cocycle(&hol, &[1.2, 1.0, -1.6, -0.5], &[-0.5]).unwrap();
        for i in 1..=4 {
            let direct = sum.value(i).unwrap();
            let added = u.value(i).unwrap() + v.value(i).unwrap();
            assert!((direct - added).euclidean_norm() < 1e-9);
        }
        let zero = base_cocycle(&hol, &[0.0; 4], &[0.0]).unwrap();
        for i in 1..=4 {
            assert!(zero.value(i).unwrap().euclidean_norm() < 1e-12);
        }
    }

    #[test]
    fn affine_twist_supports_and_pins() {
        let hol = build_holonomy(&HolonomySpec::symmetric(4)).unwrap();
        for k in 1..=2usize {
            let at = affine_twist(&hol, k).unwrap();
            for i in 1..=k + 1 {
                assert!(at.value(i).unwrap().euclidean_norm() == 0.0);
            }
            let hk = Word::dividing(k, 4).unwrap();
            assert!(at.evaluate(&hk).euclidean_norm() < 1e-10);
            for i in 1..=5 {
                let inv = at.margulis(&Word::generator(i)).unwrap();
                // The closing generator absorbs the whole chain's rounding,
                // so its pin is an order looser than the others.
                let tol = if i == 5 { 1e-7 } else { PIN_EPS };
                assert!(inv.abs() < tol, "twist {k} invariant on g{i}: {inv}");
            }
            for j in 1..=2usize {
                let inv = at.margulis(&Word::dividing(j, 4).unwrap()).unwrap();
                assert!(inv.abs() < PIN_EPS, "twist {k} invariant on h{j}: {inv}");
            }
            // On crossing curves only the matching index reacts.
            for l in 1..=2usize {
                let inv = at.margulis(&Word::crossing(l, 4).unwrap()).unwrap();
                if l == k {
                    assert!(inv.abs() > 1e-3, "twist {k} should move f{l}");
                } else {
                    assert!(inv.abs() < PIN_EPS, "twist {k} leaks onto f{l}: {inv}");
                }
            }
        }
    }

    #[test]
    fn phi_coordinates_start_with_the_parameters() {
        let hol = hol3();
        let p = DeformationParams {
            alpha: vec![0.9, -0.1, 0.6, 1.4],
            beta: vec![-0.7],
            t: vec![0.0],
        };
        let u = phi(&hol, &p).unwrap();
        let coords = u.cohomology_coordinates().unwrap();
        assert_eq!(coords.len(), 6);
        for (c, a) in coords.iter().zip(p.alpha.iter().chain(p.beta.iter())) {
            assert_abs_diff_eq!(c, a, epsilon = PIN_EPS);
        }
        let zero = phi(&hol, &DeformationParams::zero(3)).unwrap();
        for c in zero.cohomology_coordinates().unwrap() {
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn coordinate_matrix_is_block_triangular() {
        let hol = hol3();
        let cm = coordinate_matrix(&hol).unwrap();
        assert_eq!(cm.matrix.nrows(), 6);
        // Pinned rows are the identity on (alpha, beta) and ignore t.
        for r in 0..5 {
            for c in 0..6 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(cm.matrix[(r, c)], want, epsilon = PIN_EPS);
            }
        }
        // The crossing row responds to the twist through its pairing, so
        // the determinant collapses to that single coefficient.
        let pairing = crate::liealg::twist_pairing(&hol, 1).unwrap();
        assert_abs_diff_eq!(cm.matrix[(5, 5)], pairing, epsilon = 1e-8);
        assert_abs_diff_eq!(cm.determinant, pairing, epsilon = 1e-7);
        assert!(cm.determinant.abs() > SINGULAR_EPS);
        assert!(cm.condition_number.is_finite());
    }

    #[test]
    fn invariant_axis_casework() {
        let g = LorentzIsometry::standard_boost(1.5);
        let frame = g.hyperbolic_frame().unwrap();
        // Zero translation: the axis passes through the origin.
        let axis = invariant_axis(&g, &LorentzVector::zero()).unwrap();
        assert!(axis.base_point.euclidean_norm() < 1e-12);
        assert_abs_diff_eq!(axis.displacement, 0.0, epsilon = 1e-12);
        // Purely axial translation: same line, displaced by alpha.
        let axial = invariant_axis(&g, &frame.x_zero.scale(2.0)).unwrap();
        assert!(axial.base_point.euclidean_norm() < 1e-12);
        assert_abs_diff_eq!(axial.displacement, 2.0, epsilon = 1e-12);
        // Generic translation: gamma(base) - base is parallel to the axis.
        let t = LorentzVector::new(0.3, -0.8, 0.5);
        let generic = invariant_axis(&g, &t).unwrap();
        let moved = g.apply(&generic.base_point) + t - generic.base_point;
        let parallel = moved - generic.direction.scale(generic.displacement);
        assert!(parallel.euclidean_norm() < 1e-10);
        // Conjugating the translation by a coboundary shifts the base
        // point by the transverse part of the vector.
        let v = LorentzVector::new(1.0, 0.2, -0.4);
        let shifted = invariant_axis(&g, &(t + v - g.apply(&v))).unwrap();
        let (_, vm, vp) = frame.coefficients(&v);
        let expected = generic.base_point + frame.combine(0.0, vm, vp);
        assert!((shifted.base_point - expected).euclidean_norm() < 1e-10);
        assert_abs_diff_eq!(shifted.displacement, generic.displacement, epsilon = 1e-12);
    }
}
