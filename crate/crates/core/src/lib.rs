//! # microcc
//!
//! A desk-scale laboratory for compensated compactness under
//! pseudodifferential constraints. Fields live on periodic grids
//! `[0, 2π)^n`; operators act through their symbols; quadratic forms are
//! tested on the operator cone; oscillating families probe the weak
//! continuity of `Q(u_k)`.
//!
//! Module map:
//!
//! * [`grid`]: torus grids, discrete Fourier analysis, pairings, Sobolev norms.
//! * [`symbols`]: total and principal symbols, pushforward, freezing.
//! * [`quantize`]: Kohn–Nirenberg application, commutators, order probes.
//! * [`cone`]: pointwise operator cones, vanishing certificates, Gårding constants.
//! * [`geometry`]: semi-Riemannian metrics, bundle metrics, partitions of unity.
//! * [`sequences`]: oscillatory families and convergence tables.
//! * [`experiments`]: scenario configs, the runner, and report output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cone;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod quantize;
pub mod sampling;
pub mod sequences;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used for symbol values and quadratic-form coefficients.
pub type CMat = nalgebra::DMatrix<Complex64>;
/// Dense real matrix used for metrics and jacobians.
pub type RMat = nalgebra::DMatrix<f64>;
