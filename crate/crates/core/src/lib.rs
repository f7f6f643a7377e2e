//! Torsional rigidity, Newtonian and logarithmic capacity, and the
//! scale-invariant shape functionals built from them.

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod exact;
pub mod functionals;
pub mod geometry;
pub mod quad;
pub mod report;
pub mod rng;
pub mod search;
pub mod special;

pub use error::{Error, Result};
