//! Gaussian Hermitian random matrices with index symmetries.
//!
//! Matrices are `2n x 2n`, indexed by signed sites `-n..=-1, 1..=n`. The
//! crate samples the symmetry-constrained ensembles, diagonalizes them
//! (densely or through exact block reductions), evaluates limiting spectral
//! laws and correlator formulas, and estimates the same quantities by Monte
//! Carlo.

pub mod domain;
pub mod eig;
pub mod laws;
pub mod error;
pub mod fluct;
pub mod rng;
pub mod sampler;

pub use domain::{pos, site, validate_spec, ComplexMatrix, EnsembleSpec, HermitianMatrix, Spectrum, SymmetryClass};
pub use error::{Error, Result};
pub use num_complex::Complex64;
