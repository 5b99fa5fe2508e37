//! Hamiltonian-Krein index computations for solitary waves of KdV- and
//! BBM-type equations with fractional dispersion.
//!
//! The pipeline is: solve the ground state ([`waves`]), assemble the
//! linearized operator ([`operators`]), count negative eigenvalues and
//! classify the Hamiltonian spectrum ([`spectra`]), then compare the index
//! formula against the direct count ([`verdicts`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod export;
pub mod grid;
pub mod operators;
pub mod spectra;
pub mod verdicts;
pub mod waves;

pub use error::{Error, Result};
pub use grid::{inner_product, make_grid, Multiplier, RealField, SpectralGrid};
