//! Singular-value laboratory for the integration, Cesàro and Hausdorff
//! moment operators and their compositions.

pub mod analysis;
pub mod error;
pub mod figures;
pub mod discretize;
pub mod linalg;
pub mod ncnc;
pub mod numerics;
pub mod operators;
pub mod spectra;

pub use error::{Error, ErrorKind, Result};
