//! Numerical laboratory for the S¹-invariant Riemann-sphere model.

pub mod bergman;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod functionals;
pub mod geodesic;
pub mod numerics;
pub mod potential;

pub use error::{LabError, Result};
