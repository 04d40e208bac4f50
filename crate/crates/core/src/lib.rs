//! Two-stage day-ahead electricity price forecasting.
//!
//! Stage 1 forecasts drivers that are unknown at planning time (prices,
//! load, renewables) from their own history. Stage 2 regresses the target
//! on the augmented feature set: those forecasts, constructed market
//! factors, covariates published ahead of delivery, and calendar fields.

// Validation is written as `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod explain;
pub mod factors;
pub mod forecast;
pub mod gbdt;
pub mod ingest;
pub mod linalg;
pub mod linreg;
pub mod synthgen;

pub use error::{Error, Result};
