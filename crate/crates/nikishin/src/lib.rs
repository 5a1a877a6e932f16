//! Nikishin systems of measures on the real line and the unit circle.
//!
//! The crate builds systems from generator measures, assembles their
//! generalized Hankel and Toeplitz moment matrices, decides normality,
//! computes type II multiple orthogonal polynomials, and checks the
//! determinant identities behind the normality theorems.

pub mod detkit;
pub mod error;
pub mod index;
pub mod linalg;
pub mod measure;
pub mod mop;
pub mod precise;
pub mod spectral;
pub mod system;

pub use error::{Error, Result};
