//! Cup-product pairing values on cyclotomic p-units.
//!
//! For an irregular pair `(p, r)` the pairing values `e_{i,r}` are pinned
//! down (up to a scalar) by an explicit linear system over `Z/p`. This crate
//! builds and solves that system, computes the Bernoulli-number data that
//! feeds the associated Galois relation, and checks the numerical
//! consequences downstream of it.

pub mod bernoulli;
pub mod cli;
pub mod error;
pub mod galois;
pub mod ihara;
pub mod linalg;
pub mod modring;
pub mod relations;
pub mod verify;

pub use error::{Error, Result};
