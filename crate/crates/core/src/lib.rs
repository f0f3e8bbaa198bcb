//! Hong-Ou-Mandel interferometric spectroscopy of a four-level molecular
//! sample probed by entangled photon pairs.
//!
//! Units throughout: hbar = 1, energies in eV, times in eV^-1.

pub mod biphoton;
pub mod error;
pub mod hom;
pub mod matter;
pub mod numerics;
pub mod schmidt;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
