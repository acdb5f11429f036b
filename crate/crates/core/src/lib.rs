//! Numerical workbench for twisted groupoid convolution operators.
//!
//! Builds magnetic lattice Hamiltonians, Toeplitz/Wiener-Hopf compressions
//! and partial-action reductions as representations of twisted groupoid
//! kernels, and verifies quasi-orbit decomposition formulas for essential
//! spectra, essential numerical ranges, Fredholm criteria and
//! non-propagation bounds at desk scale.

pub mod cocycle;
pub mod eigen;
pub mod error;
pub mod flux;
pub mod group;
pub mod groupoid;
pub mod kernel;
pub mod modelfile;
pub mod models;
pub mod propagation;
pub mod rep;
pub mod report;
pub mod spectral;
pub mod unit_space;
pub mod verify;

pub use error::{Error, Result};
