use thiserror::Error;

use crate::kernels::KernelKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("singular leading block Z_0 for kernel {kind} at degree n={n}")]
    SingularBlock { kind: KernelKind, n: usize },

    #[error("eigenvalue iteration did not converge for eigenvalue index {index} after {iterations} sweeps")]
    NoConvergence { index: usize, iterations: usize },

    #[error("reference spectrum has zero norm")]
    ZeroReference,

    #[error("kernel spectrum |K(ω)| = {magnitude:e} at f = {freq_hz:e} Hz is below the division guard")]
    Resonance { freq_hz: f64, magnitude: f64 },

    #[error("length mismatch: {0}")]
    Mismatch(String),
}
