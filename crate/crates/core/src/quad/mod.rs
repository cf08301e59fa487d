//! Deterministic quadrature on intervals, spheres and balls.

pub mod adaptive;
pub mod extrap;
pub mod grids;
pub mod rules;
pub mod sum;

pub use adaptive::{adaptive_1d, adaptive_1d_with, AdaptiveConfig, Estimate};
pub use grids::{BallGrid, SphereGrid, DEFAULT_R_MAX};
pub use rules::{gauss_jacobi, gauss_legendre, graded_rule, Rule1D};
pub use sum::{neumaier_sum, NeumaierSum};

use crate::error::Result;

/// Default absolute tolerance for one-dimensional integrals.
pub const TOL_1D: f64 = 1e-10;
/// Default tolerance for sphere integrals.
pub const TOL_SPHERE: f64 = 1e-8;
/// Default tolerance for ball integrals.
pub const TOL_BALL: f64 = 1e-7;

/// Product grid on `Sⁿ⁻¹` at the given level.
pub fn sphere_grid(n: usize, level: usize) -> Result<SphereGrid> {
    SphereGrid::new(n, level)
}

/// Tensor grid on `Bⁿ`.
pub fn ball_grid(n: usize, level: usize, r_max: f64) -> Result<BallGrid> {
    BallGrid::new(n, level, r_max)
}
