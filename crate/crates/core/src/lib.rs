//! Spectral toolkit for the Anderson Hamiltonian `H = -Δ + ξ` on the flat
//! two-dimensional torus `[0,2π)²`, where `ξ` is spatial white noise and the
//! operator is defined through Wick renormalization of the singular product.
//!
//! Everything is built on a plain Fourier representation at finite resolution:
//!
//! * [`grid`] / [`field`] — the `N×N` frequency lattice and complex
//!   coefficient fields, with exact Plancherel bookkeeping and dealiased
//!   products,
//! * [`lp`] — sharp Littlewood-Paley blocks, Besov/Sobolev norms,
//! * [`noise`] — white-noise sampling, mollification, the renormalization
//!   constant `c_ε` and the enhanced noise `(ξ_ε, X₁, X₂, Π(X₁,ξ_ε) − c_ε)`,
//! * [`para`] — Bony paraproducts, the resonant term, intertwined and
//!   truncated paraproducts, the remainder/reconstruction pair of maps and
//!   corrector/swap diagnostics,
//! * [`hamiltonian`] / [`eigen`] / [`spectrum`] — the renormalized operator,
//!   dense and Lanczos eigensolvers, spectral statistics (counting function,
//!   eigenvalue sandwich, eigenfunction growth, spectral projectors),
//! * [`cheb`] / [`dispersive`] — Schrödinger and wave propagators (eigenbasis
//!   and matrix-free Chebyshev routes), space-time norm measurements and
//!   scaling-exponent fits,
//! * [`pde`] — split-step and trigonometric integrators for the cubic
//!   multiplicative Schrödinger and wave equations plus a local
//!   well-posedness contraction probe,
//! * [`oracle`] — independent brute-force reference implementations used by
//!   the verification suites.

pub mod cheb;
pub mod dispersive;
pub mod eigen;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod noise;
pub mod oracle;
pub mod para;
pub mod pde;
pub mod random;
pub mod spectrum;
pub mod stats;

pub use error::{CoreError, Result};
pub use field::Field;
pub use grid::Grid;

/// Version tag embedded in every coefficient dump and data file so that runs
/// can be tied to the exact normalization conventions of the code that
/// produced them.
pub const CONVENTION_VERSION: u32 = 1;
