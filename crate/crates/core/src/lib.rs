//! Fractional Poisson extension operators on the unit ball.
//!
//! The crate evaluates the kernels `p̃_α` and their half-space counterparts,
//! the radial functions `h` and `Ĩₙ`, the extension operators, sharp
//! constants and extremal functions, and the moving-sphere comparison, and
//! checks the identities and inequalities that tie them together.

// `!(x > 0.0)` deliberately rejects NaN; coefficient tables keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod extend;
pub mod geom;
pub mod identities;
pub mod infunc;
pub mod kernel;
pub mod msphere;
pub mod quad;
pub mod report;
pub mod specfun;
pub mod vars;
pub mod zonal;

pub use error::{Error, Result};
pub use specfun::Params;
