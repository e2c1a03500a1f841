//! Exact sheaf computations on T-sites.
//!
//! Two backends are supported: finite posets with the Alexandrov topology, and
//! the rational line with bounded semilinear opens as the distinguished family.
//! Sheaves on both are stored stalk-wise as functors on a finite poset.

pub mod error;
pub mod exactla;
pub mod lineorder;
pub mod cellsheaf;
pub mod tsheaf;
pub mod homalg;
pub mod oracle;
pub mod functors;
pub mod spectrum;
pub mod backends;
pub mod suite;

pub use error::{Error, Result};
