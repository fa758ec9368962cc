//! Frustration-free projector Hamiltonians on finite lattice regions:
//! exact diagonalization, detectability-lemma checks, overlap functionals
//! and certified spectral-gap lower bounds.

pub mod certify;
pub mod delta;
pub mod dl;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod model;
pub mod pvbs;
pub mod space;
pub mod spectral;
pub mod threshold;

pub use error::{Error, Result};
