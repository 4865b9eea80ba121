//! Spectral flow, Z2-valued spectral flow and index theory for banded
//! lattice operators with two limit backgrounds and a finite perturbation.
//!
//! The representation is exact: an operator is a pair of banded Laurent
//! symbols (left/right background) plus a finite window block, and the
//! algebraic operations (`+`, `*`, adjoint, transpose, fold/unfold) stay
//! inside this class without approximation. All spectral quantities —
//! Fredholm indices, spectral flow along operator paths, Z2 indices and
//! their pairings — reduce to finite Hermitian eigenproblems with rigorous
//! enclosure arguments, so integer outputs are exact.

use num_traits::{FromPrimitive, ToPrimitive};

pub mod cone;
pub mod corpus;
pub mod dilation;
pub mod error;
pub mod flow;
pub mod fredholm;
pub mod json;
pub mod operator;
pub mod range;
pub mod spectrum;
pub mod symbol;
pub mod symmetry;
pub mod verify;

/// Scalar bound for all numerics: a real field with `f64` interchange.
pub trait Real: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy {}
impl<T: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy> Real for T {}

/// Complex scalar over `R`.
pub type C<R> = num_complex::Complex<R>;
/// Dense complex matrix over `R`.
pub type CMat<R> = nalgebra::DMatrix<C<R>>;

/// Convert an `f64` literal into the working scalar type.
pub fn r<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 conversion")
}

pub use error::{Error, Result};
pub use operator::{Domain, LatticeOperator};
pub use range::SiteRange;
pub use symbol::LaurentSymbol;

/// Double-precision operator.
pub type Op64 = LatticeOperator<f64>;
/// Single-precision operator.
pub type Op32 = LatticeOperator<f32>;
/// Double-precision symbol.
pub type Symbol64 = LaurentSymbol<f64>;
/// Single-precision symbol.
pub type Symbol32 = LaurentSymbol<f32>;
