//! Conformal maps between the upper half-space and the ball, Möbius maps of the
//! ball and sphere inversions, each returned with its conformal factor.
//!
//! Slice-level `*_raw` variants exist for quadrature loops; the typed entry
//! points validate their inputs.

use crate::error::{Error, Result};
use serde::Serialize;

/// Points closer than this to the north pole are rejected by [`psi_inv`].
pub const NORTH_POLE_EXCLUSION: f64 = 1e-12;
/// Tolerance on `|ξ| = 1` for boundary points.
pub const BOUNDARY_TOL: f64 = 1e-12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A point of the closed unit ball, with an explicit boundary flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallPoint {
    coords: Vec<f64>,
    boundary: bool,
}

impl BallPoint {
    /// Interior point, `|x| < 1`.
    pub fn interior(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("ball point needs finite coordinates".into()));
        }
        if norm2(&coords) >= 1.0 {
            return Err(Error::Domain(format!("|x| = {} is not interior", norm2(&coords).sqrt())));
        }
        Ok(Self { coords, boundary: false })
    }

    /// Boundary point; `|ξ|` must equal 1 within [`BOUNDARY_TOL`].
    pub fn boundary(coords: Vec<f64>) -> Result<Self> {
        let r = norm2(&coords).sqrt();
        if !r.is_finite() || (r - 1.0).abs() > BOUNDARY_TOL {
            return Err(Error::Domain(format!("|ξ| = {r} is not on the unit sphere")));
        }
        Ok(Self { coords, boundary: true })
    }

    /// Boundary point obtained by normalizing a nonzero vector.
    pub fn on_sphere(mut coords: Vec<f64>) -> Result<Self> {
        let r = norm2(&coords).sqrt();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        coords.iter_mut().for_each(|c| *c /= r);
        Ok(Self { coords, boundary: true })
    }

    pub fn origin(n: usize) -> Self {
        Self { coords: vec![0.0; n], boundary: false }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_boundary(&self) -> bool {
        self.boundary
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.coords).sqrt()
    }

    /// `1 − |x|²`, exactly zero for flagged boundary points.
    pub fn one_minus_norm2(&self) -> f64 {
        if self.boundary {
            0.0
        } else {
            1.0 - norm2(&self.coords)
        }
    }
}

/// A point `(y′, yₙ)` of the closed upper half-space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfSpacePoint {
    horizontal: Vec<f64>,
    height: f64,
}

impl HalfSpacePoint {
    pub fn new(horizontal: Vec<f64>, height: f64) -> Result<Self> {
        if !(height >= 0.0) || !height.is_finite() || horizontal.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("invalid half-space point, height {height}")));
        }
        Ok(Self { horizontal, height })
    }

    /// Boundary point `(w, 0)`.
    pub fn boundary(w: Vec<f64>) -> Result<Self> {
        Self::new(w, 0.0)
    }

    /// Build from full coordinates `(y′, yₙ)`.
    pub fn from_coords(y: &[f64]) -> Result<Self> {
        let (last, head) = y.split_last().ok_or_else(|| Error::Domain("empty point".into()))?;
        Self::new(head.to_vec(), *last)
    }

    pub fn horizontal(&self) -> &[f64] {
        &self.horizontal
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn is_boundary(&self) -> bool {
        self.height == 0.0
    }

    pub fn dim(&self) -> usize {
        self.horizontal.len() + 1
    }

    pub fn to_coords(&self) -> Vec<f64> {
        let mut v = self.horizontal.clone();
        v.push(self.height);
        v
    }
}

/// Image of a point together with the conformal factor at the source point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalImage<P> {
    pub image: P,
    pub factor: f64,
}

/// `Ψ(y)` written into `out`; returns `|Ψ′(y)| = 2/(1 + 2yₙ + |y|²)`.
pub fn psi_raw(y: &[f64], out: &mut [f64]) -> f64 {
    let n = y.len();
    let yy = norm2(y);
    let d = 1.0 + 2.0 * y[n - 1] + yy;
    for i in 0..n - 1 {
        out[i] = 2.0 * y[i] / d;
    }
    out[n - 1] = (yy - 1.0) / d;
    2.0 / d
}

/// `Ψ⁻¹(x)` written into `out`; returns `|(Ψ⁻¹)′(x)| = 2/(1 − 2xₙ + |x|²)`.
pub fn psi_inv_raw(x: &[f64], out: &mut [f64]) -> f64 {
    let n = x.len();
    let xx = norm2(x);
    let e = 1.0 - 2.0 * x[n - 1] + xx;
    for i in 0..n - 1 {
        out[i] = 2.0 * x[i] / e;
    }
    out[n - 1] = (1.0 - xx) / e;
    2.0 / e
}

/// The map from the closed upper half-space onto the closed ball.
pub fn psi(y: &HalfSpacePoint) -> ConformalImage<BallPoint> {
    let yc = y.to_coords();
    let mut out = vec![0.0; yc.len()];
    let factor = psi_raw(&yc, &mut out);
    ConformalImage { image: BallPoint { coords: out, boundary: y.is_boundary() }, factor }
}

/// Inverse of [`psi`]; the factor is `|(Ψ⁻¹)′(x)| = 1/|Ψ′(Ψ⁻¹(x))|`.
pub fn psi_inv(x: &BallPoint) -> Result<ConformalImage<HalfSpacePoint>> {
    let n = x.dim();
    let mut pole = vec![0.0; n];
    pole[n - 1] = 1.0;
    if dist2(x.coords(), &pole).sqrt() < NORTH_POLE_EXCLUSION {
        return Err(Error::SingularPoint("Ψ⁻¹ is undefined at the north pole".into()));
    }
    let mut out = vec![0.0; n];
    let factor = psi_inv_raw(x.coords(), &mut out);
    let height = if x.is_boundary() { 0.0 } else { out[n - 1].max(0.0) };
    out.pop();
    Ok(ConformalImage { image: HalfSpacePoint { horizontal: out, height }, factor })
}

/// `Φ_a(x)` written into `out`; returns `|Φ_a′(x)| = (1 − |a|²)/(1 − 2a·x + |a|²|x|²)`.
///
/// The denominator is `|a|²|a* − x|²` with `a* = a/|a|²`.
pub fn mobius_raw(a: &[f64], x: &[f64], out: &mut [f64]) -> f64 {
    let aa = norm2(a);
    let xx = norm2(x);
    let ax = dot(a, x);
    let den = 1.0 - 2.0 * ax + aa * xx;
    let xa2 = dist2(x, a);
    for i in 0..a.len() {
        out[i] = (a[i] * xa2 + (1.0 - aa) * (a[i] - x[i])) / den;
    }
    (1.0 - aa) / den
}

/// The Möbius self-map of the ball exchanging `a` and the origin.
pub fn mobius(a: &BallPoint, x: &BallPoint) -> Result<ConformalImage<BallPoint>> {
    if a.is_boundary() || a.norm() >= 1.0 {
        return Err(Error::Domain("Möbius center must be interior".into()));
    }
    if a.norm() == 0.0 {
        return Err(Error::Domain("Möbius center a = 0 is the identity map".into()));
    }
    if a.dim() != x.dim() {
        return Err(Error::Domain("dimension mismatch".into()));
    }
    let mut out = vec![0.0; x.dim()];
    let factor = mobius_raw(a.coords(), x.coords(), &mut out);
    if x.is_boundary() {
        let r = norm2(&out).sqrt();
        out.iter_mut().for_each(|c| *c /= r);
    }
    Ok(ConformalImage { image: BallPoint { coords: out, boundary: x.is_boundary() }, factor })
}

/// `φ_{λ,v}(y)` written into `out` (`v` horizontal, length `n − 1`); returns `λ²/|y − v|²`.
pub fn invert_raw(lambda: f64, v: &[f64], y: &[f64], out: &mut [f64]) -> f64 {
    let n = y.len();
    let mut d2 = y[n - 1] * y[n - 1];
    for i in 0..n - 1 {
        d2 += (y[i] - v[i]) * (y[i] - v[i]);
    }
    let s = lambda * lambda / d2;
    for i in 0..n - 1 {
        out[i] = v[i] + s * (y[i] - v[i]);
    }
    out[n - 1] = s * y[n - 1];
    s
}

/// Inversion in the sphere of radius `λ` centered at the boundary point `(v, 0)`.
pub fn invert(lambda: f64, v: &[f64], y: &HalfSpacePoint) -> Result<ConformalImage<HalfSpacePoint>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("λ = {lambda} must be positive")));
    }
    if v.len() + 1 != y.dim() {
        return Err(Error::Domain("dimension mismatch".into()));
    }
    let yc = y.to_coords();
    if y.is_boundary() && dist2(y.horizontal(), v) == 0.0 {
        return Err(Error::SingularPoint("inversion center".into()));
    }
    let mut out = vec![0.0; yc.len()];
    let factor = invert_raw(lambda, v, &yc, &mut out);
    let height = if y.is_boundary() { 0.0 } else { out[yc.len() - 1] };
    out.pop();
    Ok(ConformalImage { image: HalfSpacePoint { horizontal: out, height }, factor })
}

/// Orthonormal basis of the complement of a unit vector, as `n − 1` rows.
///
/// Built from a Householder reflection that sends the coordinate axis of the
/// largest component of `axis` to `±axis`; smooth in `axis` away from ties.
pub fn orthonormal_complement(axis: &[f64]) -> Vec<Vec<f64>> {
    let n = axis.len();
    let k = (0..n).max_by(|&i, &j| axis[i].abs().partial_cmp(&axis[j].abs()).unwrap()).unwrap_or(0);
    let s = if axis[k] >= 0.0 { 1.0 } else { -1.0 };
    // u = axis + s e_k ; H = I − 2uuᵀ/|u|² maps e_k to −s·axis
    let mut u = axis.to_vec();
    u[k] += s;
    let uu = norm2(&u);
    let mut rows = Vec::with_capacity(n - 1);
    for j in (0..n).filter(|&j| j != k) {
        let mut col: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
        let c = 2.0 * u[j] / uu;
        for i in 0..n {
            col[i] -= c * u[i];
        }
        rows.push(col);
    }
    rows
}
