//! Reliability assessment from road-testing evidence.
//!
//! * [`cbi`]: conservative Bayesian bounds on a per-mile failure probability
//!   and the mileage solvers built on them.
//! * [`oracle`]: brute-force minimisation over feasible priors, used to check
//!   [`cbi`] independently.
//! * [`baseline`]: classical and conjugate Beta-prior comparisons.
//! * [`data`], [`srgm`], [`evaluation`]: disengagement data, reliability
//!   growth models and prequential evaluation of their predictions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod cbi;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod oracle;
pub mod quadrature;
pub mod root;
pub mod simulate;
pub mod special;
pub mod srgm;

pub use error::{Error, Result};
pub use exec::Parallelism;
