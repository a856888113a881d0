//! Error type shared by all modules of the crate.

/// Everything that can go wrong when building holonomies, frames, and
/// deformation data.  Numerical guards surface here rather than panicking,
/// so callers can distinguish "bad input" from "mathematical degeneracy".
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A 3x3 matrix failed the isometry certificate (Gram residual, unit
    /// determinant, or time orientation).
    #[error("not a time-orientation-preserving Lorentz isometry: {reason}")]
    NotIsometry { reason: String },

    /// An element expected to be hyperbolic (three real eigenvalues, well
    /// separated, exactly one equal to 1) is not.
    #[error("element is not hyperbolic: {reason}")]
    NotHyperbolic { reason: String },

    /// Two axes were required to cross but their normals pair outside
    /// [-1, 1], so the axes are disjoint in the hyperbolic plane.
    #[error("axes do not cross: normal pairing {pairing} lies outside [-1, 1]")]
    AxesDisjoint { pairing: f64 },

    /// The holonomy builder produced generators violating one of the
    /// orientation inequalities even after the bounded repair attempt.
    #[error("holonomy construction failed: {inequality}")]
    ConstructionFailed { inequality: String },

    /// The 3x3 linear system on a pair of pants is numerically singular.
    #[error("pants system is singular: |det| = {det:.3e}")]
    SingularSystem { det: f64 },

    /// A finite-difference probe left the hyperbolic locus, so no
    /// translation length exists at the perturbed point.
    #[error("finite-difference step leaves the hyperbolic locus: |trace| = {trace}")]
    StepLeavesHyperbolicLocus { trace: f64 },

    /// Surface data that cannot describe a holed-sphere holonomy
    /// (too few holes, non-positive lengths, mismatched array sizes).
    #[error("invalid surface data: {0}")]
    InvalidSpec(String),

    /// A generator / curve index outside the valid range.
    #[error("index {index} out of range for {what} (valid 1..={limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
