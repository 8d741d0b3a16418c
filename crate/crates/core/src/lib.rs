//! Feature-space sketching for regularized logistic regression and GLMs.
//!
//! Fits the full and the sketched problem, evaluates the forward-error
//! sandwich, the low-rank additive loss bound and the cross-entropy bound,
//! and computes the classification complexity measure μ exactly by linear
//! programming.

pub mod bounds;
pub mod datagen;
pub mod error;
pub mod glm;
pub mod json;
pub mod linalg;
pub mod mu;
pub mod sketch;
pub mod solver;

pub use error::{Error, Result};
