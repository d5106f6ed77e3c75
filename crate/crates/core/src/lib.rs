//! Spectral analysis of the non-self-adjoint Mathieu-Hill operator
//!
//! The operator acts as `-y'' + q(x) y` with the complex two-term potential
//! `q(x) = a e^{-2πix} + b e^{2πix}`. For each quasi-momentum `t` the
//! restriction `H_t` carries the boundary conditions `y(1) = e^{it} y(0)`,
//! `y'(1) = e^{it} y'(0)`, and the spectrum of the whole-line operator is the
//! union of the arcs traced by the eigenvalues of `H_t` as `t` runs over
//! `[0, π]`.
//!
//! Modules:
//!
//! - [`model`]: potentials, quasi-momenta, band labels and solver settings.
//! - [`floquet`]: truncated Fourier (Floquet) matrix, dense eigensolver, band
//!   labeling and an exact two-mode reduction for near-degenerate pairs.
//! - [`shooting`]: fundamental solutions, Hill discriminant `F(λ)` and its
//!   λ-derivatives, Newton on `F(λ) = 2 cos t`, critical points of `F`.
//! - [`asymptotics`]: closed-form gap and splitting predictors and the
//!   truncated perturbation series.
//! - [`spectrum`]: arc continuation and separation/gap reports.
//! - [`singularity`]: biorthogonal pairing `d_n(t)`, projection norms and the
//!   arithmetic classification of asymptotic spectrality.
//! - [`cli`]: the command-line front end used by the `hill-spectra` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod floquet;
pub mod model;
pub mod shooting;
pub mod singularity;
pub mod spectrum;

pub use error::{Error, Result};
pub use model::{BandIndex, PotentialCoeffs, QuasiMomentum, SolverConfig, SubBand};
pub use num_complex::Complex64;
