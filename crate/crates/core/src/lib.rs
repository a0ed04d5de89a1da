//! Interspace-relative spectral computations for operators on Hilbert scales.
//!
//! Operators are coefficient matrices in a fixed basis; interspaces are
//! weighted ℓ² sequence spaces. Everything infinite is approached through
//! finite sections whose stabilization is tracked explicitly.

pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod extension;
pub mod geneig;
pub mod linalg;
pub mod models;
pub mod operator;
pub mod quadrature;
pub mod report;
pub mod resolvent;
pub mod scale;

pub use config::{Grid, IntervalConfig, RunConfig};
pub use error::{Error, Result};
pub use operator::{certify, CoefficientOperator, ContinuityCertificate};
pub use resolvent::Status;
pub use scale::{BasisTag, CoefficientVector, ScaleFamily, ScaleSpace, Sequence};
