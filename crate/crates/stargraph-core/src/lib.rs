//! Spectral statistics of quantum star graphs.
//!
//! A star graph is a metric graph with `b` bonds of lengths `L_1..L_b` joined
//! at a single central vertex.  With Neumann conditions (continuity and zero
//! derivative-sum at the centre, zero derivative at the outer ends) the
//! eigenvalue wavenumbers are the positive roots of the secular function
//!
//! ```text
//!     Z(k) = sum_j tan(k L_j),
//! ```
//!
//! one root in each gap between consecutive poles of the tangent lattice.
//! This crate computes:
//!
//! - the spectrum itself ([`spectrum`]): pole enumeration and a safeguarded
//!   bisection/Newton solver with extended-precision phase reduction, so that
//!   residuals stay meaningful even when `sec^2(k L)` blows up near bunched
//!   poles;
//! - normalised eigenfunctions and diagonal matrix elements of bond-indicator
//!   and smooth per-bond observables ([`wavefunction`]);
//! - the Faddeeva function `w(z) = exp(-z^2) erfc(-iz)` and the complex error
//!   function over the sectors needed here ([`special`]);
//! - the large-graph limit distribution `F(R)` of indicator matrix elements
//!   and its auxiliary functions ([`limitdist`]), via Filon-type oscillatory
//!   quadrature ([`quad`]);
//! - empirical distributions of matrix elements over the spectrum plus
//!   Kolmogorov-Smirnov-style comparisons ([`stats`]);
//! - explicitly constructed subsequences of eigenfunctions that localise on a
//!   pair of bonds ([`scars`]).
//!
//! The crate is `no_std` (with `alloc`); all floating-point transcendentals
//! go through `libm` so results are identical with or without the standard
//! library.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod fmath;
pub mod graph;
pub mod limitdist;
pub mod quad;
pub mod scars;
pub mod special;
pub mod spectrum;
pub mod stats;
pub mod wavefunction;

pub use graph::{GraphConfig, SmoothFn, SmoothObservable, SplitObservable, StarGraph};
pub use limitdist::{CdfTable, LimitParams};
pub use scars::ScarCertificate;
pub use spectrum::{EigenvalueRecord, Pole, SolverConfig};
pub use stats::EmpiricalDistribution;
pub use wavefunction::Eigenfunction;

pub type Complex64 = num_complex::Complex<f64>;
