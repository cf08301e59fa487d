//! Product grids on spheres and balls.

use crate::error::{Error, Result};
use crate::quad::rules::{composite_rule, gauss_jacobi, Rule1D};
use crate::quad::sum::neumaier_sum;
use crate::specfun::{ball_volume, check_dim, sphere_area};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Default outer radius of the interior part of a [`BallGrid`].
pub const DEFAULT_R_MAX: f64 = 0.995;
/// Geometric panels in the boundary shell `[r_max, 1)`.
const SHELL_PANELS: usize = 20;
// Azimuthal offset keeping nodes off the coordinate axes.
const AZIMUTH_OFFSET: f64 = 1.0 / 3.0;

/// Nodes and weights on the unit sphere `Sᵐ ⊂ ℝᵐ⁺¹` (flattened points).
///
/// `S⁰ = {±1}` with unit weights; `S¹` uses `2·level` trapezoid nodes; `Sᵐ`
/// for `m ≥ 2` writes `ξ = (√(1−t²) η, t)` with `η ∈ Sᵐ⁻¹` and integrates
/// `t` by Gauss–Jacobi for the weight `(1 − t²)^{(m−2)/2}`.
pub fn sphere_nodes(m: usize, level: usize) -> (Vec<f64>, Vec<f64>) {
    match m {
        0 => (vec![-1.0, 1.0], vec![1.0, 1.0]),
        1 => {
            let k = 2 * level;
            let mut pts = Vec::with_capacity(2 * k);
            for j in 0..k {
                let th = 2.0 * PI * (j as f64 + AZIMUTH_OFFSET) / k as f64;
                pts.push(th.cos());
                pts.push(th.sin());
            }
            (pts, vec![2.0 * PI / k as f64; k])
        }
        _ => {
            let (inner, iw) = sphere_nodes(m - 1, level);
            let a = (m as f64 - 2.0) / 2.0;
            let rule = gauss_jacobi(level, a, a);
            let mut pts = Vec::with_capacity(rule.len() * inner.len() / m * (m + 1));
            let mut wts = Vec::with_capacity(rule.len() * iw.len());
            for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
                let s = (1.0 - t * t).sqrt();
                for (eta, we) in inner.chunks_exact(m).zip(&iw) {
                    pts.extend(eta.iter().map(|e| s * e));
                    pts.push(*t);
                    wts.push(wt * we);
                }
            }
            (pts, wts)
        }
    }
}

/// Hyperspherical product grid on `Sⁿ⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    n: usize,
    level: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n: usize, level: usize) -> Result<Self> {
        check_dim(n)?;
        if level == 0 {
            return Err(Error::Config("sphere grid level must be ≥ 1".into()));
        }
        let (points, weights) = sphere_nodes(n - 1, level);
        Ok(Self { n, level, points, weights })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.n..(i + 1) * self.n]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points.chunks_exact(self.n).zip(self.weights.iter().copied())
    }

    /// `Σ wᵢ f(ξᵢ)`, evaluated in parallel and summed in node order.
    pub fn integrate<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> f64 {
        let vals: Vec<f64> = (0..self.len()).into_par_iter().map(|i| self.weights[i] * f(self.point(i))).collect();
        neumaier_sum(vals)
    }

    /// Serial variant of [`SphereGrid::integrate`].
    pub fn integrate_serial<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        neumaier_sum(self.iter().map(|(p, w)| w * f(p)))
    }
}

/// Tensor grid on `Bⁿ`: a radial rule carrying the `r^{n−1}` factor times a
/// [`SphereGrid`].
///
/// The radial rule is composite Gauss–Legendre on dyadic panels of
/// `[0, r_max]` followed by a shell of geometric panels on `[r_max, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallGrid {
    n: usize,
    level: usize,
    r_max: f64,
    radial: Rule1D,
    shell_start: usize,
    sphere: SphereGrid,
}

impl BallGrid {
    pub fn new(n: usize, level: usize, r_max: f64) -> Result<Self> {
        check_dim(n)?;
        if !(r_max > 0.0 && r_max < 1.0) {
            return Err(Error::Config(format!("r_max = {r_max} must lie in (0, 1)")));
        }
        let sphere = SphereGrid::new(n, level)?;
        let (radial, shell_start) = radial_rule(n, level, r_max);
        Ok(Self { n, level, r_max, radial, shell_start, sphere })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn sphere(&self) -> &SphereGrid {
        &self.sphere
    }

    /// Radial nodes and weights (weights include `r^{n−1}`).
    pub fn radial(&self) -> &Rule1D {
        &self.radial
    }

    /// Index of the first radial node beyond `r_max`.
    pub fn shell_start(&self) -> usize {
        self.shell_start
    }

    pub fn len(&self) -> usize {
        self.radial.len() * self.sphere.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sum of all weights; equals `ωₙ` up to rounding.
    pub fn total_weight(&self) -> f64 {
        neumaier_sum(self.radial.weights.iter().copied()) * neumaier_sum(self.sphere.weights.iter().copied())
    }

    /// `∫ g(r) r^{n−1} dr` for a per-radius quantity `g(r)` (e.g. a sphere
    /// integral at radius `r`), parallel over radii with ordered reduction.
    pub fn integrate_radial<F: Fn(f64) -> f64 + Sync>(&self, g: F) -> f64 {
        let vals: Vec<f64> =
            (0..self.radial.len()).into_par_iter().map(|i| self.radial.weights[i] * g(self.radial.nodes[i])).collect();
        neumaier_sum(vals)
    }

    /// `∫_{Bⁿ} f(x) dx`.
    pub fn integrate<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> f64 {
        let n = self.n;
        self.integrate_radial(|r| {
            let mut x = vec![0.0; n];
            self.sphere.integrate_serial(|xi| {
                for (k, c) in xi.iter().enumerate() {
                    x[k] = r * c;
                }
                f(&x)
            })
        })
    }
}

fn radial_rule(n: usize, level: usize, r_max: f64) -> (Rule1D, usize) {
    let mut breaks = vec![0.0];
    let mut s = 0.5;
    while 1.0 - s < r_max {
        breaks.push(1.0 - s);
        s /= 2.0;
    }
    breaks.push(r_max);
    let inner = composite_rule(&breaks, level);
    let gap = 1.0 - r_max;
    let mut shell_breaks: Vec<f64> = (0..=SHELL_PANELS).map(|j| 1.0 - gap * 0.5f64.powi(j as i32)).collect();
    shell_breaks.push(1.0);
    let shell = composite_rule(&shell_breaks, level);
    let start = inner.len();
    let mut rule = Rule1D::concat(&[inner, shell]);
    for (x, w) in rule.nodes.iter().zip(rule.weights.iter_mut()) {
        *w *= x.powi(n as i32 - 1);
    }
    (rule, start)
}

/// Sphere area and ball volume as integrated by the grids, for diagnostics.
pub fn grid_sanity(n: usize, level: usize) -> Result<(f64, f64, f64, f64)> {
    let s = SphereGrid::new(n, level)?;
    let b = BallGrid::new(n, level, DEFAULT_R_MAX)?;
    Ok((s.integrate(|_| 1.0), sphere_area(n - 1), b.total_weight(), ball_volume(n)))
}
