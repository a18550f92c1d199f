//! Pseudo-spectral toolkit for viscous flow in the periodic strip
//! `S = T_lx × (0, 1)`: Fourier collocation in `x`, second-order finite
//! differences in `y`.
//!
//! The crate pairs two time integrators — the scaled anisotropic system
//! ([`ans`]) and its hydrostatic limit ([`hydro`]) — with the dyadic
//! (Littlewood-Paley) analysis tools needed to monitor them: Besov and
//! Chemin-Lerner norms ([`dyadic`], [`norms`]), analyticity-radius tracking
//! ([`tracker`]), and an epsilon-sweep comparison harness ([`harness`]).

pub mod ans;
pub mod checkpoint;
pub mod config;
pub mod dyadic;
pub mod grid;
pub mod harness;
pub mod hydro;
pub mod norms;
pub mod report;
pub mod tracker;
pub mod tridiag;

use std::fmt;

/// Crate-wide error type. `is_validation` splits bad input (CLI exit 1)
/// from numerical failure during a run (CLI exit 2).
#[derive(Debug)]
pub enum Error {
    /// Grid or configuration parameters out of range, unknown keys, etc.
    Invalid(String),
    /// An operation required the real-parity flag and it was not set.
    ParityMissing(&'static str),
    /// Inverse transform produced a non-real field.
    ImaginaryResidue { max_imag: f64, tol: f64 },
    /// `∂x ∫ u dy` does not vanish: the vertical velocity cannot close.
    CompatibilityViolation { k: i64, residual: f64, tol: f64 },
    /// `exp(r |k|)` would overflow for the largest grid wavenumber.
    WeightOverflow { exponent: f64 },
    /// Radius estimation needs at least four populated dyadic blocks.
    InsufficientSpectralContent { nonzero_blocks: usize },
    /// Paired trajectories drifted apart in time.
    TimeMismatch { t_a: f64, t_b: f64, dt: f64 },
    /// NaN/overflow detected while stepping.
    Instability { t: f64, detail: String },
    /// Post-projection divergence above the configured tolerance.
    DivergenceExceeded { t: f64, value: f64, tol: f64 },
    /// An analyticity band shrank to zero during a run.
    BandCollapsed { t: f64, which: &'static str },
    /// Initial data too large for the guaranteed-existence regime.
    SmallnessGate { norm: f64, bound: f64 },
    /// Log-linear fits need positive samples inside the window.
    DegenerateFit(String),
    Io(std::io::Error),
    BadCheckpoint(String),
}

impl Error {
    /// True for errors that indicate bad input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_)
                | Error::ParityMissing(_)
                | Error::Io(_)
                | Error::BadCheckpoint(_)
                | Error::SmallnessGate { .. }
                | Error::CompatibilityViolation { .. }
                | Error::WeightOverflow { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::ParityMissing(op) => {
                write!(f, "{op}: spectral field is not flagged as real-parity")
            }
            Error::ImaginaryResidue { max_imag, tol } => write!(
                f,
                "inverse transform left imaginary residue {max_imag:.3e} (tolerance {tol:.1e})"
            ),
            Error::CompatibilityViolation { k, residual, tol } => write!(
                f,
                "compatibility violation at k = {k}: |v(k, 1)| = {residual:.3e} > {tol:.1e}"
            ),
            Error::WeightOverflow { exponent } => write!(
                f,
                "analytic weight exponent {exponent:.1} exceeds the overflow guard (700)"
            ),
            Error::InsufficientSpectralContent { nonzero_blocks } => write!(
                f,
                "radius fit needs >= 4 populated dyadic blocks, found {nonzero_blocks}"
            ),
            Error::TimeMismatch { t_a, t_b, dt } => write!(
                f,
                "paired states at t = {t_a} and t = {t_b} differ by more than dt/2 = {}",
                dt / 2.0
            ),
            Error::Instability { t, detail } => {
                write!(f, "numerical instability at t = {t:.6}: {detail}")
            }
            Error::DivergenceExceeded { t, value, tol } => write!(
                f,
                "divergence {value:.3e} exceeds tolerance {tol:.1e} at t = {t:.6}"
            ),
            Error::BandCollapsed { t, which } => {
                write!(f, "analyticity band {which} collapsed at t = {t:.6}")
            }
            Error::SmallnessGate { norm, bound } => write!(
                f,
                "weighted data norm {norm:.3e} exceeds the smallness gate {bound:.3e}"
            ),
            Error::DegenerateFit(msg) => write!(f, "degenerate fit: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::BadCheckpoint(msg) => write!(f, "bad checkpoint: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
