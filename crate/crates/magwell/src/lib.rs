//! Spectral toolkit for magnetic wells on the flat 2-torus.
//!
//! Low-lying eigenvalues of the Bochner Laplacian Δ^{L^p} of a positive line
//! bundle L^p over a flat 2-torus behave like
//!
//!   λ_j(Δ^{L^p}) = p·τ₀ + μ_j + o(1),   p → ∞,
//!
//! where τ₀ = min B is the depth of the magnetic well and μ_j are the
//! eigenvalues of a Toeplitz model operator on the lowest Landau level at the
//! well. This crate provides both sides of that comparison and the machinery
//! to measure the remainder:
//!
//! - [`field`]: flux-quantized Fourier fields, τ = B, and well finding;
//! - [`fock`]: Landau-level bases, Bergman kernels, Toeplitz matrices of
//!   polynomial symbols, and closed-form / Williamson spectral oracles;
//! - [`ladder`]: the ladder-operator algebra b, b⁺ and the subprincipal
//!   scalar J_{1,2} entering the model operator;
//! - [`lattice`]: gauge-covariant 5-point discretization of Δ^{L^p} and of
//!   the renormalized operator Δ_p = Δ^{L^p} - pτ via link phases;
//! - [`eig`]: deterministic lowest-eigenpair solver for Hermitian matvec
//!   operators plus eigenvalue cluster detection;
//! - [`pipeline`]: p-sweeps with Richardson extrapolation, lowest-Landau-level
//!   reduction, localization and quasimode diagnostics, gap tracking;
//! - [`acceptance`]: the end-to-end verification suite driven by `cargo test`
//!   and by `magwell verify`;
//! - [`oracle`]: independent reference implementations (quadrature, symbolic
//!   differentiation) used only to cross-check the main code paths.

pub mod acceptance;
pub mod config;
pub mod eig;
pub mod error;
pub mod field;
pub mod fock;
pub mod ladder;
pub mod lattice;
pub mod oracle;
pub mod pipeline;

pub use error::{Error, Result};
