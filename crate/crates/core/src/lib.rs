//! Point-gap topology of interacting non-Hermitian fermion models.

pub mod cli;
pub mod error;
pub mod fock;
pub mod model;
pub mod observables;
pub mod oracles;
pub mod spectral;
pub mod topology;

pub use error::{Error, Result};
