//! Exact linear algebra over `ℚ` or `F_p`.

mod diagram;
mod matrix;
mod scalar;

pub use diagram::{Colimit, FinDiagram, Limit};
pub use matrix::{Matrix, MatrixText};
pub use scalar::{format_rational, parse_rational, Field, Scalar};
