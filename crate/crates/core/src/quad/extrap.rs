//! Least-squares fits used to extrapolate sequences to a limit.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Basis function evaluated at the abscissa `h`.
pub type Basis = fn(f64) -> f64;

/// Coefficients `c` minimising `Σ (Σ_k c_k φ_k(h_j) − y_j)²`, via SVD.
pub fn least_squares(hs: &[f64], ys: &[f64], basis: &[Basis]) -> Result<Vec<f64>> {
    if hs.len() != ys.len() || hs.len() < basis.len() {
        return Err(Error::Extrapolation("too few samples for the fit".into()));
    }
    let a = DMatrix::from_fn(hs.len(), basis.len(), |i, k| basis[k](hs[i]));
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let x = svd.solve(&b, 1e-14).map_err(|e| Error::Extrapolation(format!("least-squares solve failed: {e}")))?;
    Ok(x.iter().copied().collect())
}

/// Limit at `h → 0` of samples `(h_j, y_j)` for a model whose first basis
/// function is the constant 1.
pub fn limit_at_zero(hs: &[f64], ys: &[f64], basis: &[Basis]) -> Result<f64> {
    Ok(least_squares(hs, ys, basis)?[0])
}
