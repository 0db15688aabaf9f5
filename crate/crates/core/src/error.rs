//! Error types shared across the crate.

use crate::prelude::*;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A model parameter violates a construction invariant.
    InvalidModel(String),
    /// A sector basis would exceed the configured state cap.
    Capacity {
        states: u128,
        cap: usize,
        n: u32,
        modes: usize,
    },
    /// A resolvent denominator is not strictly positive at the requested
    /// spectral value; carries the occupation index and the offending z.
    Admissibility { index: u32, z: f64 },
    /// A geometric series in the continued-fraction recursion has ratio >= 1,
    /// signalling z outside the validity region of the flow.
    DivergentSeries { index: u32, z: f64 },
    /// Parameters are outside the regime where the construction is proven;
    /// the message suggests how to move back in.
    Regime(String),
    /// An iterative solver did not reach its tolerance.
    Solver { message: String, residual: f64 },
    /// The complement block of a Feshbach step is numerically singular,
    /// i.e. z collides with an eigenvalue of the reduced Hamiltonian.
    IsospectralCollision { index: u32, z: f64, near_null: f64 },
    /// The inverted block lost its positivity margin.
    GapRegime { smallest: f64, required: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidModel(msg) => write!(f, "invalid model: {msg}"),
            Error::Capacity {
                states,
                cap,
                n,
                modes,
            } => write!(
                f,
                "sector basis for N={n}, M={modes} needs {states} states, above the cap of {cap}"
            ),
            Error::Admissibility { index, z } => write!(
                f,
                "non-positive resolvent denominator at occupation index i={index} for z={z}"
            ),
            Error::DivergentSeries { index, z } => write!(
                f,
                "geometric series diverges at occupation index i={index} for z={z}"
            ),
            Error::Regime(msg) => write!(f, "outside the controlled regime: {msg}"),
            Error::Solver { message, residual } => {
                write!(f, "solver failed: {message} (residual {residual:e})")
            }
            Error::IsospectralCollision {
                index,
                z,
                near_null,
            } => write!(
                f,
                "complement block singular at step i={index}, z={z}: near-null eigenvalue {near_null:e}"
            ),
            Error::GapRegime { smallest, required } => write!(
                f,
                "inverted block positivity failed: smallest eigenvalue {smallest:e} < required {required:e}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
