//! Walk sums, closed-form asymptotics and spectral diagnostics for Hill
//! operators `L = -d²/dx² + v(x)` on `[0, π]` with periodic (`Per+`) or
//! antiperiodic (`Per-`) boundary conditions, where `v` is a trigonometric
//! polynomial with even harmonics.
//!
//! The crate is organised around three independent routes to the same
//! question (is the system of eigenfunctions a Riesz basis?):
//!
//! - [`walkgen`] sums the weights of admissible lattice walks `-n → n` and
//!   `n → -n`, exactly in complex-rational arithmetic, with certified
//!   truncation tails;
//! - [`closedform`] evaluates the leading asymptotic terms of those sums for
//!   the three covered potential families, together with the Fibonacci and
//!   Catalan combinatorics behind them;
//! - [`spectral`] builds the truncated Fourier–Galerkin matrix of the
//!   operator and extracts the eigenvalue pair in each disc `n² + D`, with
//!   the Gram angle between the two eigenvectors computed in high precision.
//!
//! [`verdict`] combines the three into a single basis/non-basis report and
//! [`cli`] exposes everything as the `hill` command.

pub mod cli;
pub mod closedform;
pub mod error;
pub mod exact;
pub mod parallel;
pub mod potential;
pub mod spectral;
pub mod verdict;
pub mod walkgen;

pub use error::{Error, Result};
pub use potential::{parse_potential, FamilyTag, Potential, Reparam};
pub use spectral::{Bc, SpectralPair, TruncatedOperator};
pub use verdict::{BasisVerdict, Prediction};
pub use walkgen::{Direction, Walk, WalkSumResult};
