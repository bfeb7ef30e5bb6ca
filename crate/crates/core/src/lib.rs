//! Monotone rearrangement of estimated quantile and distribution curves:
//! curve containers, the rearrangement operator and its analytic theory,
//! isotonic regression, instrumental quantile estimators, bootstrap bands,
//! and seeded Monte Carlo experiments.

pub mod analytic;
pub mod curves;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod functionals;
pub mod inference;
pub mod isotonic;
pub mod rearrangement;

pub use curves::{make_grid, lp_distance, DomainMap, GridCurve, Norm, SampledCurve, StepCdf};
pub use error::{Error, Result};
pub use rearrangement::{invert_cdf, pre_cdf, pre_cdf_default, rearrange};
