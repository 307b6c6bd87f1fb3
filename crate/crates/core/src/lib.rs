//! Symmetric triangle-network certifier.
//!
//! Decides whether a permutation-symmetric three-outcome-bit distribution
//! admits a symmetric triangle realization, by testing ring inflations of
//! increasing size with exact linear programming. Infeasibility comes with a
//! Farkas certificate that is verified in exact rational arithmetic.

pub mod certificates;
pub mod cli;
pub mod dist;
pub mod inflation;
pub mod lin;
pub mod localmodel;
pub mod lp;
pub mod scalar;
pub mod symmetry;

pub use scalar::{Rat, Scalar};

/// Exact sparse row, the form every certificate is stated in.
pub type RatRow = lin::SparseVec<Rat>;
/// Float row used by the hint passes.
pub type F64Row = lin::SparseVec<f64>;
/// Bivariate polynomial in (E1, E2) with exact coefficients.
pub type RatPoly = lin::Poly2<Rat>;
