//! Approximate solutions of interval-valued optimization problems
//!
//! ```text
//! min f(x) = [fL(x), fU(x)]   s.t.  g_j(x) <= 0,  j = 1..m
//! ```
//!
//! under the lower-upper (LU) interval order: interval algebra, sample-based
//! certifiers for the six solution concepts, constructive descent and
//! Ekeland-type procedures on finite ground sets, and ε-subdifferential KKT
//! verification for convex instances.

pub mod certify;
pub mod cli;
pub mod error;
pub mod existence;
pub mod expr;
pub mod interval;
pub mod kkt;
pub mod linalg;
pub mod problem;
pub mod report;
pub mod scalarize;

pub use error::{Error, Result};
pub use expr::Expr;
pub use interval::Interval;
