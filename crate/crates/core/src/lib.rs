//! Numerical verification engine for almost contact B-metric manifolds.
//!
//! Scalar fields are closed-form expression trees evaluated as second-order
//! jets; the curvature engine works pointwise on dense tensors built from
//! those jets. Scenario files bundle a structure, an optional contact
//! conformal transformation, an optional soliton and a list of named checks.

pub mod analysis;
pub mod conformal;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod jets;
pub mod manifold;
pub mod oracle;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod soliton;
pub mod tensor;

pub use error::{Error, Result};
