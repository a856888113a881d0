//! Affine deformations of Fuchsian holonomies in the Lorentzian plane.
//!
//! The crate builds holonomy representations of holed spheres into
//! `SO^0(2,1)`, assembles translational deformation cocycles with
//! prescribed Margulis invariants, relates those invariants to first
//! variations of translation lengths through the `SL(2,R)` double cover,
//! and scans word families for the sign obstruction to properness of the
//! induced affine actions.
//!
//! Module map:
//!
//! * [`lorentz`] — the bilinear form, causal types, cross product,
//!   isometries, hyperbolic frames;
//! * [`fuchsian`] — words, holed-sphere data, and the pants-chain
//!   holonomy builder;
//! * [`affine`] — cocycles, Margulis invariants, the pants linear system,
//!   base cocycles, and affine twists;
//! * [`liealg`] — the `sl(2,R)` model of `R^{2,1}`, lifts, translation
//!   lengths, and finite-difference length derivatives;
//! * [`proper`] — word enumeration and the opposite-sign scan;
//! * [`random`] — seeded samplers used by verification sweeps.

pub mod affine;
pub mod error;
pub mod fuchsian;
pub mod liealg;
pub mod lorentz;
pub mod proper;
pub mod random;

pub use error::{Error, Result};
