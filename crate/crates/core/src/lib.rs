//! Numerical toolkit for sampling, interpolation and completeness questions
//! in the Paley-Wiener space of entire functions of exponential type `pi`.

pub mod analytic;
pub mod counterexample;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod mp;
pub mod precision;
pub mod pw;
mod quad;
pub mod radius;
pub mod sequences;

pub use error::{Error, Result};
pub use precision::PrecisionConfig;
