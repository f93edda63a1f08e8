//! Numerical laboratory for the regularized Dirac sea vacuum of Minkowski space
//! viewed as a causal fermion system.
//!
//! The crate is organised bottom-up:
//!
//! * [`minkowski`] — spacetime points, Dirac matrices and the spin scalar product.
//! * [`specfun`] — complex Bessel functions `K0, K1, J0, J1, Y0, Y1`.
//! * [`quadrature`] — adaptive Gauss–Kronrod and tensor Gauss–Legendre engines.
//! * [`kernel`] — the regularized kernel `P^{nε}(x,y)` by momentum quadrature and in
//!   closed form, plus the derived scalars `ν±`, `tr_vac` and localized states.
//! * [`causal`] — closed chains, spectral classification and light-cone factors.
//! * [`sandbox`] — a finite plane-wave truncation of the negative-energy space with
//!   explicit local correlation and smeared operator matrices.
//! * [`probes`] — ε-scaling experiments and power-law fits.
//! * [`acceptance`] — the pinned acceptance suite shared by tests and the CLI.

// Negated comparisons reject NaN along with out-of-range values; tabulated rule
// constants keep the digits of their sources.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod acceptance;
pub mod causal;
pub mod error;
pub mod exec;
pub mod kernel;
pub mod minkowski;
pub mod probes;
pub mod quadrature;
pub mod sandbox;
pub mod specfun;

pub use error::{Error, Result};
pub use exec::Exec;
pub use minkowski::{SpacetimePoint, SpinMatrix, Spinor};
pub use num_complex::Complex64 as C64;
