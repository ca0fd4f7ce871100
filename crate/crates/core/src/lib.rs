//! Spectral solver and numerical verification harness for the Stokes system
//! with free (stress) boundary conditions in the half-space `R^d_+`.
//!
//! The crate evaluates the explicit per-mode resolvent solution operators of
//! the problem, composes them into the solution operators `S(lambda)` and
//! `P(lambda)`, inverts the Fourier–Laplace transform over a sector contour to
//! obtain the generalized semigroup `T(t)`, `P(t)`, and drives a Lagrangian
//! fixed-point iteration for the nonlinear free-boundary problem at desk
//! scale (`d = 2, 3`).
//!
//! Everything in the numerical core is deterministic: parallel loops reduce
//! in fixed order, so results are independent of the worker count.

pub mod error;
pub mod grid;
pub mod harness;
pub mod lagrangian;
pub mod resolvent;
pub mod semigroup;
pub mod symbols;
pub mod wellposed;

pub use error::{Result, ShsError};
pub use grid::field::{Layout, SpectralField};
pub use grid::{BesovIndex, TangentialGrid, TimeGrid, VerticalGrid};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
