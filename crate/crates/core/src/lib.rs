//! Transient Debye-Mie multipole coefficients for a perfectly conducting sphere.
//!
//! The surface current is expanded in tangential vector spherical harmonics
//! (`Ψ_n^m`, `Φ_n^m`). Galerkin testing of the time-domain EFIE and MFIE with
//! the same harmonics decouples every mode into a scalar Volterra equation in
//! time whose kernel is one of four piecewise-polynomial functions built from
//!
//! ```text
//! K_n^(0)(t) = c/(2a²) · P_n(1 − c²t²/(2a²)),   0 ≤ t ≤ 2a/c
//! ```
//!
//! Each equation is discretized with pulse × shifted-Legendre functions in time
//! and marched step by step. Frequency-domain references and a companion-matrix
//! eigen-analysis close the loop.
//!
//! Modules, bottom-up:
//! * [`specfun`]: Legendre, spherical Bessel/Hankel, Gauss-Legendre, `Y_n^m`.
//! * [`vsh`]: vector spherical harmonics and incident-field projections.
//! * [`kernels`]: the reduced Volterra kernels and their analytic transforms.
//! * [`mot`]: block assembly and marching-on-in-time.
//! * [`stability`]: companion matrices and a dense eigensolver.
//! * [`fdmie`]: frequency-domain mode solutions and TD↔FD comparison.

pub mod error;
pub mod fdmie;
pub mod kernels;
pub mod linalg;
pub mod mot;
pub mod specfun;
pub mod stability;
pub mod vsh;

pub use error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;
/// Vacuum permeability (H/m).
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;
/// Free-space wave impedance μ0·c (Ω).
pub const ETA0: f64 = MU0 * C0;
