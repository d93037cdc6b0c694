//! Reed-Solomon codes over composite field towers with cut-set optimal
//! repair of multiple erasures.

pub mod base_algebra;
pub mod cli;
pub mod error;
pub mod grs_code;
pub mod linalg;
pub mod monomial_space;
pub mod repair_engine;
pub mod repair_sets;
pub mod tower_field;
pub mod verifier;

pub use error::{Error, Result};
