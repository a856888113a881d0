//! Linear algebra of the Lorentzian plane `R^{2,1}`.
//!
//! Vectors carry the symmetric bilinear form
//!
//! ```text
//! B(x, y) = x1*y1 + x2*y2 - x3*y3
//! ```
//!
//! with `x3` the timelike coordinate.  The module provides the causal
//! classification of vectors, the Lorentzian cross product, the
//! orientation-preserving isometry group `SO^0(2,1)`, and the attracting /
//! repelling / axis frame of a hyperbolic isometry.  Everything downstream
//! (holonomies, cocycles, invariants) is built on these primitives.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vectors with `|B(x, x)|` at most this threshold count as lightlike.
pub const NULL_EPS: f64 = 1e-9;

/// Residual allowed when certifying that a matrix preserves `B`.
pub const ISOMETRY_EPS: f64 = 1e-9;

/// Minimal eigenvalue separation for an element to count as hyperbolic.
pub const EIGENVALUE_GAP: f64 = 1e-8;

const METRIC_SIGNS: [f64; 3] = [1.0, 1.0, -1.0];

/// A vector of the Lorentzian plane `R^{2,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzVector(#[serde(with = "vector3_serde")] pub Vector3<f64>);

mod vector3_serde {
    use nalgebra::Vector3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector3<f64>, s: S) -> Result<S::Ok, S::Error> {
        [v.x, v.y, v.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector3<f64>, D::Error> {
        let [x, y, z] = <[f64; 3]>::deserialize(d)?;
        Ok(Vector3::new(x, y, z))
    }
}

impl LorentzVector {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        LorentzVector(Vector3::new(x1, x2, x3))
    }

    pub fn zero() -> Self {
        LorentzVector(Vector3::zeros())
    }

    pub fn x1(&self) -> f64 {
        self.0.x
    }

    pub fn x2(&self) -> f64 {
        self.0.y
    }

    pub fn x3(&self) -> f64 {
        self.0.z
    }

    /// The bilinear form `B(self, other) = x1*y1 + x2*y2 - x3*y3`.
    pub fn inner(&self, other: &LorentzVector) -> f64 {
        self.0.x * other.0.x + self.0.y * other.0.y - self.0.z * other.0.z
    }

    /// The Lorentzian cross product, characterised by
    /// `B(x.cross(y), z) = det(x, y, z)` for all `z`.
    ///
    /// Concretely this is the Euclidean cross product with the timelike
    /// coordinate flipped, and it satisfies
    /// `B(x⊠y, z⊠w) = B(x,w)B(y,z) - B(x,z)B(y,w)`.
    pub fn cross(&self, other: &LorentzVector) -> LorentzVector {
        let e = self.0.cross(&other.0);
        LorentzVector(Vector3::new(e.x, e.y, -e.z))
    }

    /// Causal type and, for causal vectors, the time orientation.
    ///
    /// Vectors with `|B(x,x)| <= NULL_EPS` are classified lightlike; the
    /// orientation is `None` exactly for spacelike vectors and the zero
    /// vector.
    pub fn classify(&self) -> CausalClass {
        let b = self.inner(self);
        let kind = if b > NULL_EPS {
            CausalKind::Spacelike
        } else if b < -NULL_EPS {
            CausalKind::Timelike
        } else {
            CausalKind::Lightlike
        };
        let orientation = if kind == CausalKind::Spacelike || self.0.norm() == 0.0 {
            None
        } else if self.0.z > 0.0 {
            Some(TimeOrientation::Future)
        } else {
            Some(TimeOrientation::Past)
        };
        CausalClass { kind, orientation }
    }

    pub fn scale(&self, s: f64) -> LorentzVector {
        LorentzVector(self.0 * s)
    }

    /// Euclidean norm, used only for normalising null eigenvectors.
    pub fn euclidean_norm(&self) -> f64 {
        self.0.norm()
    }
}

impl std::ops::Add for LorentzVector {
    type Output = LorentzVector;
    fn add(self, rhs: LorentzVector) -> LorentzVector {
        LorentzVector(self.0 + rhs.0)
    }
}

impl std::ops::Sub for LorentzVector {
    type Output = LorentzVector;
    fn sub(self, rhs: LorentzVector) -> LorentzVector {
        LorentzVector(self.0 - rhs.0)
    }
}

impl std::ops::Neg for LorentzVector {
    type Output = LorentzVector;
    fn neg(self) -> LorentzVector {
        LorentzVector(-self.0)
    }
}

impl std::ops::Mul<LorentzVector> for f64 {
    type Output = LorentzVector;
    fn mul(self, rhs: LorentzVector) -> LorentzVector {
        rhs.scale(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CausalKind {
    Spacelike,
    Timelike,
    Lightlike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TimeOrientation {
    Future,
    Past,
}

/// Result of [`LorentzVector::classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CausalClass {
    pub kind: CausalKind,
    pub orientation: Option<TimeOrientation>,
}

/// An element of `SO^0(2,1)`: preserves `B`, has determinant 1, and
/// preserves the future cone (`m33 > 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzIsometry(Matrix3<f64>);

impl LorentzIsometry {
    /// Certify a raw matrix as an isometry.  The Gram residual
    /// `g^T J g - J` and `det(g) - 1` must stay below [`ISOMETRY_EPS`].
    pub fn try_new(m: Matrix3<f64>) -> Result<Self> {
        let j = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        let gram = m.transpose() * j * m - j;
        let gram_residual = gram.norm();
        if gram_residual > ISOMETRY_EPS {
            return Err(Error::NotIsometry {
                reason: format!("Gram residual {gram_residual:.3e}"),
            });
        }
        let det = m.determinant();
        if (det - 1.0).abs() > ISOMETRY_EPS {
            return Err(Error::NotIsometry {
                reason: format!("determinant {det}"),
            });
        }
        if m[(2, 2)] <= 0.0 {
            return Err(Error::NotIsometry {
                reason: format!("reverses time orientation (m33 = {})", m[(2, 2)]),
            });
        }
        Ok(LorentzIsometry(m))
    }

    /// Wrap a matrix that is an isometry by construction.
    pub(crate) fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        LorentzIsometry(m)
    }

    pub fn identity() -> Self {
        LorentzIsometry(Matrix3::identity())
    }

    /// The boost translating by hyperbolic length `l` along the spine
    /// geodesic fixed pointwise by rotations about the `x3`-axis.  Its
    /// frame is `x_minus = (0,1,1)/√2`, `x_plus = (0,-1,1)/√2`,
    /// `x_zero = (1,0,0)` and `lambda = exp(-l)`.
    pub fn standard_boost(l: f64) -> Self {
        let (c, s) = (l.cosh(), l.sinh());
        LorentzIsometry(Matrix3::new(
            1.0, 0.0, 0.0, //
            0.0, c, -s, //
            0.0, -s, c,
        ))
    }

    /// Elliptic rotation by `theta` about the timelike axis.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        LorentzIsometry(Matrix3::new(
            c, -s, 0.0, //
            s, c, 0.0, //
            0.0, 0.0, 1.0,
        ))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Exact inverse `J g^T J`, valid because `g^T J g = J`.
    ///
    /// For a matrix slightly off the isometry locus this is not the
    /// literal matrix inverse (they differ by the Gram defect), but it is
    /// the better inverse here: it stays within rounding distance of the
    /// exact group element, while a faithful matrix inverse would amplify
    /// the defect by the square of the conditioning.
    pub fn inverse(&self) -> LorentzIsometry {
        let mut t = self.0.transpose();
        for i in 0..3 {
            for k in 0..3 {
                t[(i, k)] *= METRIC_SIGNS[i] * METRIC_SIGNS[k];
            }
        }
        LorentzIsometry(t)
    }

    pub fn apply(&self, v: &LorentzVector) -> LorentzVector {
        LorentzVector(self.0 * v.0)
    }

    /// Squeeze out the Gram defect a chain of products accumulates, by
    /// the quadratically convergent correction `g <- g (3I - JgᵀJg) / 2`.
    /// Long conjugation chains otherwise leave defects around 1e-12 that
    /// later products amplify past certification thresholds.
    ///
    /// The computed defect itself carries rounding noise of order
    /// `u * |g|^2`, so correcting below that floor would inject noise of
    /// order `|g|^3 * u` instead of removing error; such defects are left
    /// alone.
    pub(crate) fn renormalized(&self) -> LorentzIsometry {
        let j = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        let mut g = self.0;
        for _ in 0..3 {
            let defect = j * g.transpose() * j * g - Matrix3::identity();
            let floor = 1e-14 * (1.0 + g.norm_squared());
            if defect.norm() <= floor {
                break;
            }
            g -= g * defect * 0.5;
        }
        LorentzIsometry(g)
    }

    /// Eigenvalue data of a hyperbolic element: the two null eigenvectors
    /// and the spacelike axis vector.
    ///
    /// * `x_minus`, `x_plus`: future-pointing null eigenvectors for the
    ///   eigenvalues `lambda < 1` and `1/lambda`, of Euclidean length 1;
    /// * `x_zero`: eigenvector for 1 with `B(x_zero, x_zero) = 1`, sign
    ///   fixed by `det(x_zero, x_minus, x_plus) > 0`;
    /// * `lambda`: the contracting eigenvalue, in `(0, 1)`.
    ///
    /// Entries are expected to be of moderate size (below about 1e6);
    /// far beyond that the eigenvalue certification loses accuracy.
    pub fn hyperbolic_frame(&self) -> Result<HyperbolicFrame> {
        let eigenvalues = self.real_eigenvalues()?;
        let [lo, mid, hi] = eigenvalues;
        if lo <= 0.0 {
            return Err(Error::NotHyperbolic {
                reason: format!("non-positive eigenvalue {lo}"),
            });
        }
        if !(hi - mid > EIGENVALUE_GAP && mid - lo > EIGENVALUE_GAP) {
            return Err(Error::NotHyperbolic {
                reason: format!("eigenvalues {lo}, {mid}, {hi} are not separated"),
            });
        }
        if (lo - 1.0).abs() <= EIGENVALUE_GAP || (hi - 1.0).abs() <= EIGENVALUE_GAP {
            return Err(Error::NotHyperbolic {
                reason: format!("non-unit eigenvalues {lo}, {hi} too close to 1"),
            });
        }

        let x_minus = normalize_null(eigenvector(&self.0, lo));
        let x_plus = normalize_null(eigenvector(&self.0, hi));
        let mut x_zero = eigenvector(&self.0, mid);
        let b = x_zero.inner(&x_zero);
        if b <= 0.0 {
            return Err(Error::NotHyperbolic {
                reason: format!("axis vector is not spacelike (B = {b})"),
            });
        }
        x_zero = x_zero.scale(1.0 / b.sqrt());
        let det = Matrix3::from_columns(&[x_zero.0, x_minus.0, x_plus.0]).determinant();
        if det < 0.0 {
            x_zero = -x_zero;
        }
        // The cubic root inherits rounding of order `u * |g|^3` from the
        // determinant coefficient.  `J x_plus` is a left eigenvector for
        // the contracting eigenvalue, so the two-sided Rayleigh quotient
        // reads lambda back with error only quadratic in the eigenvector
        // residuals.
        let mut lambda = lo;
        let den = x_plus.inner(&x_minus);
        if den.abs() > 1e-6 {
            let rayleigh = x_plus.inner(&self.apply(&x_minus)) / den;
            if rayleigh.is_finite() && rayleigh > 0.0 && rayleigh < 1.0 {
                lambda = rayleigh;
            }
        }
        Ok(HyperbolicFrame {
            x_minus,
            x_plus,
            x_zero,
            lambda,
        })
    }

    /// Translation length along the axis, `-ln(lambda)`.
    pub fn translation_length(&self) -> Result<f64> {
        Ok(-self.hyperbolic_frame()?.lambda.ln())
    }

    /// Roots of the characteristic polynomial, sorted ascending.
    fn real_eigenvalues(&self) -> Result<[f64; 3]> {
        let m = &self.0;
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::NotHyperbolic {
                reason: "matrix has non-finite entries".to_string(),
            });
        }
        let c2 = m.trace();
        let c1 = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
            + m[(0, 0)] * m[(2, 2)]
            - m[(0, 2)] * m[(2, 0)]
            + m[(1, 1)] * m[(2, 2)]
            - m[(1, 2)] * m[(2, 1)];
        let c0 = m.determinant();
        cubic_real_roots(c2, c1, c0).ok_or_else(|| Error::NotHyperbolic {
            reason: "complex eigenvalue pair (elliptic element)".to_string(),
        })
    }
}

impl std::ops::Mul for LorentzIsometry {
    type Output = LorentzIsometry;
    fn mul(self, rhs: LorentzIsometry) -> LorentzIsometry {
        LorentzIsometry(self.0 * rhs.0)
    }
}

impl std::ops::Mul<&LorentzVector> for &LorentzIsometry {
    type Output = LorentzVector;
    fn mul(self, rhs: &LorentzVector) -> LorentzVector {
        self.apply(rhs)
    }
}

/// Null/axis eigenvector frame of a hyperbolic isometry.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HyperbolicFrame {
    pub x_minus: LorentzVector,
    pub x_plus: LorentzVector,
    pub x_zero: LorentzVector,
    pub lambda: f64,
}

impl HyperbolicFrame {
    /// `B(x_minus, x_plus)`, always negative; the normaliser used when
    /// expanding vectors in frame coordinates.
    pub fn null_pairing(&self) -> f64 {
        self.x_minus.inner(&self.x_plus)
    }

    /// Coefficients `(alpha, c_minus, c_plus)` of `v` in the basis
    /// `(x_zero, x_minus, x_plus)`.
    pub fn coefficients(&self, v: &LorentzVector) -> (f64, f64, f64) {
        let kappa = self.null_pairing();
        let alpha = v.inner(&self.x_zero);
        let c_minus = v.inner(&self.x_plus) / kappa;
        let c_plus = v.inner(&self.x_minus) / kappa;
        (alpha, c_minus, c_plus)
    }

    /// Reassemble `alpha*x_zero + c_minus*x_minus + c_plus*x_plus`.
    pub fn combine(&self, alpha: f64, c_minus: f64, c_plus: f64) -> LorentzVector {
        alpha * self.x_zero + c_minus * self.x_minus + c_plus * self.x_plus
    }
}

/// Crossing angle of the axes of two hyperbolic isometries,
/// `arccos B(x_zero(g), x_zero(h))` in `[0, pi]`.
///
/// Fails with [`Error::AxesDisjoint`] when the pairing lies outside
/// `[-1, 1]` beyond [`NULL_EPS`]; values inside the guard band are clamped.
pub fn axis_angle(g: &LorentzIsometry, h: &LorentzIsometry) -> Result<f64> {
    let fg = g.hyperbolic_frame()?;
    let fh = h.hyperbolic_frame()?;
    let pairing = fg.x_zero.inner(&fh.x_zero);
    if pairing.abs() > 1.0 + NULL_EPS {
        return Err(Error::AxesDisjoint { pairing });
    }
    Ok(pairing.clamp(-1.0, 1.0).acos())
}

/// Real roots of `x^3 - c2 x^2 + c1 x - c0`, ascending, or `None` when a
/// complex pair is present.  Uses the trigonometric form on the depressed
/// cubic, which is stable for the well-separated spectra handled here.
fn cubic_real_roots(c2: f64, c1: f64, c0: f64) -> Option<[f64; 3]> {
    // Depress: x = y + c2/3 gives y^3 + p y + q = 0.
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = -2.0 * c2.powi(3) / 27.0 + c2 * c1 / 3.0 - c0;
    let discriminant = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if discriminant > 1e-13 * (1.0 + q * q + p * p) {
        return None;
    }
    let mut roots = if p >= 0.0 {
        // p ~ 0 with non-positive discriminant forces a numerically triple root.
        [shift; 3]
    } else {
        let r = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let mut ys = [0.0f64; 3];
        for (k, y) in ys.iter_mut().enumerate() {
            *y = 2.0 * r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
        }
        ys.map(|y| y + shift)
    };
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(roots)
}

/// Kernel direction of a (numerically) rank-2 matrix: the largest cross
/// product of two rows, polished by one inverse-iteration step.
fn kernel_direction(m: &Matrix3<f64>) -> Vector3<f64> {
    let r0: Vector3<f64> = m.row(0).transpose();
    let r1: Vector3<f64> = m.row(1).transpose();
    let r2: Vector3<f64> = m.row(2).transpose();
    let candidates = [r0.cross(&r1), r0.cross(&r2), r1.cross(&r2)];
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if c.norm() > best.norm() {
            best = *c;
        }
    }
    let mut v = best.normalize();
    // One step of inverse iteration with a tiny regularising shift tightens
    // the direction when the cross products are ill-conditioned.
    let shifted = m + Matrix3::identity() * 1e-13 * (1.0 + m.norm());
    if let Some(lu) = shifted.full_piv_lu().solve(&v) {
        if lu.norm() > 0.0 {
            let refined = lu.normalize();
            if (m * refined).norm() < (m * v).norm() {
                v = refined;
            }
        }
    }
    v
}

fn eigenvector(m: &Matrix3<f64>, eigenvalue: f64) -> LorentzVector {
    LorentzVector(kernel_direction(&(m - Matrix3::identity() * eigenvalue)))
}

/// Scale a null eigenvector to Euclidean length 1, future-pointing.
fn normalize_null(v: LorentzVector) -> LorentzVector {
    let scaled = v.scale(1.0 / v.euclidean_norm());
    if scaled.x3() < 0.0 {
        -scaled
    } else {
        scaled
    }
}
