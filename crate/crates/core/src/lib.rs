//! Ground-state construction for the particle-number-preserving Bogoliubov
//! Hamiltonian of N bosons in a box, in the strong-interaction regime.
//!
//! The crate has two faces that check each other:
//!
//! * scalar recursions for a single interacting mode pair (continued-fraction
//!   tables, fixed-point energies, auxiliary sequences) in [`threemode`];
//! * an operator-level Feshbach-Schur flow on finite occupation-number sector
//!   matrices in [`cascade`], seeded by the bases and Hamiltonian assembly of
//!   [`fockspace`] and validated against brute-force diagonalization oracles.
//!
//! [`truncation`] adds the finite-depth expansions and their error reports.
//!
//! Everything is deterministic: identical inputs produce bit-identical
//! numbers regardless of scheduling. The crate is `no_std`-compatible with
//! `alloc` (enable the `libm` feature instead of `std`).

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(not(feature = "std"))]
extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("either the `std` or the `libm` feature must be enabled");

#[cfg(not(feature = "std"))]
pub(crate) mod prelude {
    pub use alloc::format;
    pub use alloc::string::String;
    pub use alloc::vec;
    pub use alloc::vec::Vec;
}

#[cfg(feature = "std")]
pub(crate) mod prelude {
    pub use std::format;
    pub use std::string::String;
    pub use std::vec;
    pub use std::vec::Vec;
}

pub(crate) mod math;

pub mod cascade;
pub mod error;
pub mod fockspace;
pub mod linalg;
pub mod threemode;
pub mod truncation;

pub use error::{Error, Result};
