//! Numerical toolkit for geometrically infinitely divisible (GID) laws.
//!
//! A law is GID when its transform has the form `1/(1+ψ)` with `ψ(0) = 0`
//! and `ψ'` completely monotone. The crate provides:
//!
//! - [`transform_core`]: ψ-exponents, transforms, geometric compounding and
//!   a finite-difference complete-monotonicity checker.
//! - [`distributions`]: seeded samplers for Mittag-Leffler, Linnik,
//!   positive-stable and related families, Mittag-Leffler CDFs, Talbot
//!   inversion, empirical transforms and Kolmogorov-Smirnov statistics.
//! - [`renewal`]: renewal-process simulation, a Volterra solver for
//!   `Z = z + Z * F` and the compound-then-scale fixed-point iteration.
//! - [`pointproc`]: p-thinning, superposition and the thinning checks.
//! - [`feller`]: discrete renewal sequences of simple random walks and their
//!   GID witnesses.

pub mod distributions;
pub mod error;
pub mod feller;
pub mod pointproc;
pub mod renewal;
pub mod transform_core;

pub use error::{Error, Result};
