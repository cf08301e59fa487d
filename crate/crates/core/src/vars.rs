//! Norms, sharp constants, the two inequality checkers, the extremal family,
//! Euler–Lagrange and Kazdan–Warner residuals, and the planar Carleman case.

use crate::error::{Error, Result};
use crate::extend::{random_unit, BoundaryFunction, Descriptor, ExtendConfig, ExtensionField, Smoothness};
use crate::geom::{dist2, mobius_raw, norm2, orthonormal_complement};
use crate::infunc::RadialProfile;
use crate::kernel::BallKernel;
use crate::quad::adaptive::Estimate;
use crate::quad::grids::{sphere_nodes, BallGrid, SphereGrid, DEFAULT_R_MAX};
use crate::quad::rules::{composite_rule, Rule1D};
use crate::quad::sum::{neumaier_sum, NeumaierSum};
use crate::specfun::{check_dim, sphere_area, Params};
use crate::zonal::{kernel_mass, zonal_rule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Evaluation radius used when integrating extensions over a whole ball grid.
const GRID_EVAL_MAX: f64 = 1.0 - 1e-13;
/// Geometric panels toward `r = 1` in the radial rules of the sharp constants.
const RADIAL_PANELS: i32 = 44;

/// Grid resolution shared by the checkers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarsConfig {
    /// Ball grid level (radial nodes per panel and sphere level).
    pub level: usize,
    /// Level of boundary sphere grids.
    pub sphere_level: usize,
    pub r_max: f64,
}

impl VarsConfig {
    /// Defaults scaled so that a ball grid stays near 10⁶ nodes.
    pub fn for_dim(n: usize) -> Self {
        let level = match n {
            2 => 32,
            3 => 20,
            4 => 12,
            _ => 8,
        };
        Self { level, sphere_level: 32, r_max: DEFAULT_R_MAX }
    }

    /// The configuration used for error estimates (coarser by a quarter).
    pub fn coarse(&self) -> Self {
        Self { level: (self.level * 3 / 4).max(2), sphere_level: (self.sphere_level * 3 / 4).max(2), ..*self }
    }
}

/// `(∫_{Bⁿ} |g|^s)^{1/s}`.
pub fn norm_ball<G: Fn(&[f64]) -> f64 + Sync>(g: G, s: f64, grid: &BallGrid) -> f64 {
    grid.integrate(|x| g(x).abs().powf(s)).powf(1.0 / s)
}

/// `(∫_{Sⁿ⁻¹} |f|^s)^{1/s}`.
pub fn norm_sphere(f: &BoundaryFunction, s: f64, grid: &SphereGrid) -> f64 {
    grid.integrate(|xi| f.eval(xi).abs().powf(s)).powf(1.0 / s)
}

/// `‖e^f‖_{L^s(Sⁿ⁻¹)}`.
pub fn norm_sphere_exp(f: &BoundaryFunction, s: f64, grid: &SphereGrid) -> f64 {
    grid.integrate(|xi| (s * f.eval(xi)).exp()).powf(1.0 / s)
}

fn field_for_grid(params: Params, f: &BoundaryFunction) -> Result<ExtensionField> {
    let cfg = ExtendConfig { r_eval_max: GRID_EVAL_MAX, ..Default::default() };
    ExtensionField::with_config(params, f.clone(), cfg)
}

/// `∫_{Bⁿ} w(r)·g(P̃f(x)) dx` on a ball grid, one shell at a time.
fn ball_integral_of_extension<W, G>(field: &ExtensionField, grid: &BallGrid, w: W, g: G) -> Result<f64>
where
    W: Fn(f64) -> Result<f64> + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    let radial = grid.radial();
    let sphere = grid.sphere();
    let shells: Vec<Result<f64>> = (0..radial.len())
        .into_par_iter()
        .map(|i| {
            let r = radial.nodes[i];
            let ev = field.at_radius(r)?;
            let mut s = NeumaierSum::new();
            for (dir, wt) in sphere.iter() {
                s.add(wt * g(ev.value(dir)?));
            }
            Ok(radial.weights[i] * w(r)? * s.value())
        })
        .collect();
    let vals = shells.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(neumaier_sum(vals))
}

/// Φ_a applied to a sphere point; returns `|Φ_a′(ξ)|`.
fn mobius_on_sphere(a: &[f64], xi: &[f64], out: &mut [f64]) -> f64 {
    let factor = mobius_raw(a, xi, out);
    let r = norm2(out).sqrt();
    out.iter_mut().for_each(|c| *c /= r);
    factor
}

/// `|Φ_a′(ξ)|` on the sphere as a zonal profile in `t = â·ξ`.
fn mobius_factor_profile(a_norm: f64) -> impl Fn(f64) -> f64 + Send + Sync + Copy {
    move |t: f64| (1.0 - a_norm * a_norm) / ((1.0 - a_norm).powi(2) + 2.0 * a_norm * (1.0 - t))
}

/// Conformal action of `Φ_a` on boundary data: `f(Φ_a ξ)·|Φ_a′(ξ)|^{eps/2}`
/// in the subcritical case and `f∘Φ_a + ln|Φ_a′|` in the limit case.
/// `a = 0` is the identity.
pub fn conformal_action(f: &BoundaryFunction, a: &[f64], params: &Params) -> Result<BoundaryFunction> {
    let n = params.n();
    if a.len() != n || f.dim() != n {
        return Err(Error::Domain("dimension mismatch".into()));
    }
    let an = norm2(a).sqrt();
    if !(an < 1.0) {
        return Err(Error::Domain(format!("|a| = {an} must be below 1")));
    }
    if an == 0.0 {
        return Ok(f.clone());
    }
    let prof = mobius_factor_profile(an);
    if params.is_limit() {
        if let Some(c) = f.as_constant() {
            return BoundaryFunction::zonal(n, a, move |t| c + prof(t).ln());
        }
        if let Descriptor::Extremal { zeta } = f.descriptor() {
            // the family is closed: extremal(ζ)∘Φ_a + ln|Φ_a′| = extremal(Φ_a ζ)
            let mut z = vec![0.0; n];
            mobius_raw(a, zeta, &mut z);
            return extremal(n, &z);
        }
        let smooth = f_smooth(f);
        let (f, a) = (f.clone(), a.to_vec());
        return BoundaryFunction::custom(
            n,
            move |xi| {
                let mut y = vec![0.0; xi.len()];
                let d = mobius_on_sphere(&a, xi, &mut y);
                f.eval(&y) + d.ln()
            },
            smooth,
        );
    }
    let e = params.eps() / 2.0;
    if let Some(c) = f.as_constant() {
        return BoundaryFunction::zonal(n, a, move |t| c * prof(t).powf(e));
    }
    let smooth = f_smooth(f);
    let (f, a) = (f.clone(), a.to_vec());
    BoundaryFunction::custom(
        n,
        move |xi| {
            let mut y = vec![0.0; xi.len()];
            let d = mobius_on_sphere(&a, xi, &mut y);
            f.eval(&y) * d.powf(e)
        },
        smooth,
    )
}

fn f_smooth(f: &BoundaryFunction) -> Smoothness {
    match f.smoothness() {
        Smoothness::LogSingular => Smoothness::LogSingular,
        _ => Smoothness::Smooth,
    }
}

/// `Cₙ = −ln|Sⁿ⁻¹|/(n − 1)`.
pub fn c_n(n: usize) -> f64 {
    -sphere_area(n - 1).ln() / (n as f64 - 1.0)
}

/// `ln((1 − |ζ|²)/|ξ − ζ|²) + Cₙ`.
pub fn extremal(n: usize, zeta: &[f64]) -> Result<BoundaryFunction> {
    check_dim(n)?;
    if zeta.len() != n {
        return Err(Error::Domain("ζ has wrong dimension".into()));
    }
    let z = norm2(zeta).sqrt();
    if !(z < 1.0) {
        return Err(Error::Domain(format!("|ζ| = {z} must be below 1")));
    }
    let d = Descriptor::Extremal { zeta: zeta.to_vec() };
    let cn = c_n(n);
    if z == 0.0 {
        return Ok(BoundaryFunction::constant(n, cn)?.with_descriptor(d));
    }
    // |ξ − ζ|² = (1 − z)² + 2z(1 − t)
    let f = BoundaryFunction::zonal(n, zeta, move |t| {
        ((1.0 - z * z) / ((1.0 - z).powi(2) + 2.0 * z * (1.0 - t))).ln() + cn
    })?;
    Ok(f.with_descriptor(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SharpKind {
    Subcritical { n: usize, alpha: f64 },
    Limit { n: usize },
}

/// A sharp constant realised by its optimizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpConstant {
    pub value: f64,
    pub kind: SharpKind,
    pub method: String,
    /// Difference to the same computation at half the radial resolution.
    pub error: f64,
}

/// Composite Gauss–Legendre on `[0, 1]` with `m` nodes per panel, dyadic
/// toward `r = 1`.
pub fn radial_rule_to_one(m: usize) -> Rule1D {
    let mut breaks = vec![0.0];
    for k in 1..=RADIAL_PANELS {
        breaks.push(1.0 - 0.5f64.powi(k));
    }
    breaks.push(1.0);
    composite_rule(&breaks, m)
}

fn radial_moment<G: Fn(f64) -> Result<f64> + Sync>(n: usize, m: usize, g: G) -> Result<f64> {
    let rule = radial_rule_to_one(m);
    let vals: Vec<Result<f64>> = (0..rule.len())
        .into_par_iter()
        .map(|i| {
            let r = rule.nodes[i];
            Ok(rule.weights[i] * r.powi(n as i32 - 1) * g(r)?)
        })
        .collect();
    Ok(neumaier_sum(vals.into_iter().collect::<Result<Vec<f64>>>()?))
}

/// Default radial nodes per panel for the sharp constants.
pub const SHARP_NODES: usize = 16;

/// `S_{n,α} = ‖P̃_α 1‖_{L^q(Bⁿ)} / |Sⁿ⁻¹|^{1/p}`.
pub fn sharp_subcrit(params: &Params) -> Result<SharpConstant> {
    sharp_subcrit_with(params, SHARP_NODES)
}

pub fn sharp_subcrit_with(params: &Params, m: usize) -> Result<SharpConstant> {
    let n = params.n();
    let (Some(p), Some(q)) = (params.p(), params.q()) else {
        return Err(Error::Domain("the subcritical constant needs α > 2 − n".into()));
    };
    if n < 3 {
        return Err(Error::Domain("the subcritical constant needs n ≥ 3".into()));
    }
    let area = sphere_area(n - 1);
    let eval = |m: usize| -> Result<f64> {
        let mom = radial_moment(n, m, |r| Ok(kernel_mass(params, r).powf(q)))?;
        Ok((area * mom).powf(1.0 / q) / area.powf(1.0 / p))
    };
    let (v, vc) = (eval(m)?, eval((m / 2).max(2))?);
    Ok(SharpConstant {
        value: v,
        kind: SharpKind::Subcritical { n, alpha: params.alpha() },
        method: "radial integral of h^q".into(),
        error: (v - vc).abs(),
    })
}

/// `Sₙ = ‖e^{Ĩₙ}‖_{Lⁿ(Bⁿ)} / |Sⁿ⁻¹|^{1/(n−1)}`.
pub fn sharp_limit(n: usize) -> Result<SharpConstant> {
    sharp_limit_with(n, SHARP_NODES)
}

pub fn sharp_limit_with(n: usize, m: usize) -> Result<SharpConstant> {
    check_dim(n)?;
    let prof = RadialProfile::best(n)?;
    let nf = n as f64;
    let area = sphere_area(n - 1);
    let eval = |m: usize| -> Result<f64> {
        let mom = radial_moment(n, m, |r| Ok((nf * prof.value(r)?).exp()))?;
        Ok((area * mom).powf(1.0 / nf) / area.powf(1.0 / (nf - 1.0)))
    };
    let (v, vc) = (eval(m)?, eval((m / 2).max(2))?);
    Ok(SharpConstant {
        value: v,
        kind: SharpKind::Limit { n },
        method: format!("radial integral of exp(n I_n), {}", prof.method()),
        error: (v - vc).abs(),
    })
}

/// The constant boundary value `C*(n) = −ln ∫₀¹ e^{nĨₙ} r^{n−1} dr` that
/// zeroes the Euler–Lagrange residual; the radial form follows from
/// `∫ p̃_{2−n}(rη, ξ) dη = h(r) = 1`.
pub fn c_star(n: usize, m: usize) -> Result<f64> {
    check_dim(n)?;
    let prof = RadialProfile::best(n)?;
    let nf = n as f64;
    Ok(-radial_moment(n, m, |r| Ok((nf * prof.value(r)?).exp()))?.ln())
}

/// Both sides of an inequality with quadrature error estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub relative_slack: f64,
    pub lhs_error: f64,
    pub rhs_error: f64,
}

impl InequalityReport {
    pub fn new(lhs: Estimate, rhs: Estimate) -> Self {
        Self {
            lhs: lhs.value,
            rhs: rhs.value,
            slack: rhs.value - lhs.value,
            relative_slack: (rhs.value - lhs.value) / rhs.value.abs(),
            lhs_error: lhs.error,
            rhs_error: rhs.error,
        }
    }

    pub fn error_bound(&self) -> f64 {
        self.lhs_error + self.rhs_error
    }

    /// The inequality holds up to the error bound.
    pub fn holds(&self) -> bool {
        self.slack >= -self.error_bound()
    }
}

fn two_level<F: Fn(&VarsConfig) -> Result<f64>>(cfg: &VarsConfig, f: F) -> Result<Estimate> {
    let v = f(cfg)?;
    let c = f(&cfg.coarse())?;
    Ok(Estimate { value: v, error: (v - c).abs() + 1e-13 * v.abs() })
}

/// `‖P̃_α f‖_{L^q(Bⁿ)} ≤ S_{n,α}‖f‖_{L^p(Sⁿ⁻¹)}`.
pub fn check_subcrit(params: &Params, f: &BoundaryFunction, cfg: &VarsConfig) -> Result<InequalityReport> {
    let n = params.n();
    let (Some(p), Some(q)) = (params.p(), params.q()) else {
        return Err(Error::Domain("the subcritical inequality needs α > 2 − n".into()));
    };
    let field = field_for_grid(*params, f)?;
    let lhs = two_level(cfg, |c| {
        let grid = BallGrid::new(n, c.level, c.r_max)?;
        Ok(ball_integral_of_extension(&field, &grid, |_| Ok(1.0), |u| u.abs().powf(q))?.powf(1.0 / q))
    })?;
    let s = sharp_subcrit(params)?;
    let rhs = two_level(cfg, |c| Ok(s.value * norm_sphere(f, p, &SphereGrid::new(n, c.sphere_level)?)))?;
    Ok(InequalityReport::new(lhs, Estimate { value: rhs.value, error: rhs.error + s.error }))
}

/// `‖e^{Ĩₙ + P̃_{2−n}F}‖_{Lⁿ(Bⁿ)} ≤ Sₙ‖e^F‖_{L^{n−1}(Sⁿ⁻¹)}`.
pub fn check_limit(n: usize, f: &BoundaryFunction, cfg: &VarsConfig) -> Result<InequalityReport> {
    let params = Params::limit(n)?;
    let nf = n as f64;
    let prof = RadialProfile::best(n)?;
    let field = field_for_grid(params, f)?;
    let lhs = two_level(cfg, |c| {
        let grid = BallGrid::new(n, c.level, c.r_max)?;
        let v = ball_integral_of_extension(&field, &grid, |r| Ok((nf * prof.value(r)?).exp()), |u| (nf * u).exp())?;
        Ok(v.powf(1.0 / nf))
    })?;
    let s = sharp_limit(n)?;
    let rhs = two_level(cfg, |c| Ok(s.value * norm_sphere_exp(f, nf - 1.0, &SphereGrid::new(n, c.sphere_level)?)))?;
    Ok(InequalityReport::new(lhs, Estimate { value: rhs.value, error: rhs.error + s.error }))
}

/// Seeded random bounded boundary data: low-order harmonics, amplitude ≤ 1.
pub fn random_boundary(n: usize, seed: u64, count: usize) -> Result<Vec<BoundaryFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| BoundaryFunction::random_smooth(n, &mut rng, 3, 3, 1.0)).collect()
}

/// `check_limit` on seeded random data; a negative slack beyond the error
/// bound would falsify the inequality.
pub fn falsification_probe(n: usize, seed: u64, count: usize, cfg: &VarsConfig) -> Result<Vec<InequalityReport>> {
    random_boundary(n, seed, count)?.iter().map(|f| check_limit(n, f, cfg)).collect()
}

/// `e^{(n−1)f(ξ)} − ∫_{Bⁿ} e^{nĨₙ + nP̃_{2−n}f} p̃_{2−n}(x, ξ) dx`.
///
/// The ball integral uses polar coordinates about `ξ`: the radial rule of a
/// [`BallGrid`], a polar rule graded toward `ξ`, and an inner `Sⁿ⁻²` grid.
pub fn el_residual(n: usize, f: &BoundaryFunction, xi: &[f64], cfg: &VarsConfig) -> Result<Estimate> {
    if xi.len() != n || (norm2(xi).sqrt() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("ξ must be a unit vector in ℝⁿ".into()));
    }
    let params = Params::limit(n)?;
    let field = field_for_grid(params, f)?;
    let integral = two_level(cfg, |c| el_integral(&field, xi, c))?;
    let lead = ((n as f64 - 1.0) * f.eval(xi)).exp();
    Ok(Estimate { value: lead - integral.value, error: integral.error })
}

fn el_integral(field: &ExtensionField, xi: &[f64], cfg: &VarsConfig) -> Result<f64> {
    let n = xi.len();
    let nf = n as f64;
    let kernel = BallKernel::new(field.params());
    let prof = RadialProfile::best(n)?;
    let grid = BallGrid::new(n, cfg.level, cfg.r_max)?;
    let radial = grid.radial();
    let frame = orthonormal_complement(xi);
    let (eta, eta_w) = sphere_nodes(n - 2, (cfg.level / 2).max(2));
    let shells: Vec<Result<f64>> = (0..radial.len())
        .into_par_iter()
        .map(|i| {
            let r = radial.nodes[i];
            let ev = field.at_radius(r)?;
            let theta = zonal_rule(r, 8);
            let one_m = (1.0 - r) * (1.0 + r);
            let mut dir = vec![0.0; n];
            let mut s = NeumaierSum::new();
            for (&th, &wt) in theta.nodes.iter().zip(&theta.weights) {
                let (st, ct) = th.sin_cos();
                let k = kernel.eval_parts(one_m, crate::zonal::zonal_q(r, th));
                let mut ring = NeumaierSum::new();
                for (e, &we) in eta.chunks_exact(n - 1).zip(&eta_w) {
                    for (c, x0) in dir.iter_mut().zip(xi) {
                        *c = ct * x0;
                    }
                    for (j, row) in frame.iter().enumerate() {
                        for (c, b) in dir.iter_mut().zip(row) {
                            *c += st * e[j] * b;
                        }
                    }
                    ring.add(we * (nf * ev.value(&dir)?).exp());
                }
                s.add(wt * st.powi(n as i32 - 2) * k * ring.value());
            }
            Ok(radial.weights[i] * (nf * prof.value(r)?).exp() * s.value())
        })
        .collect();
    Ok(neumaier_sum(shells.into_iter().collect::<Result<Vec<f64>>>()?))
}

/// `∫_{Sⁿ⁻¹} (X_i K)·f^{2(n−1)/(n−2+α)} dξ` for the conformal generator
/// `X_i = e_i − ξ_i ξ` (tangential gradient of `ξ_i`). `X_i K` is a
/// five-point difference along the great circle through `ξ` in direction `X_i`.
pub fn kw_integral<K: Fn(&[f64]) -> f64 + Sync>(
    params: &Params,
    k: K,
    f: &BoundaryFunction,
    generator: usize,
    grid: &SphereGrid,
) -> Result<f64> {
    let n = params.n();
    let Some(p) = params.p() else {
        return Err(Error::Domain("the Kazdan–Warner integral needs α > 2 − n".into()));
    };
    if generator >= n {
        return Err(Error::Domain(format!("generator index {generator} out of range")));
    }
    let h = 1e-3;
    let vals: Vec<Result<f64>> = grid
        .iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(xi, w)| {
            let xn: Vec<f64> = (0..n).map(|j| if j == generator { 1.0 } else { 0.0 } - xi[generator] * xi[j]).collect();
            let at = |t: f64| {
                let y: Vec<f64> = xi.iter().zip(&xn).map(|(a, b)| a + t * b).collect();
                let r = norm2(&y).sqrt();
                k(&y.iter().map(|c| c / r).collect::<Vec<_>>())
            };
            let xk = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
            let fv = f.eval(xi);
            if fv < 0.0 {
                return Err(Error::Domain("f must be nonnegative".into()));
            }
            Ok(w * xk * fv.powf(p))
        })
        .collect();
    Ok(neumaier_sum(vals.into_iter().collect::<Result<Vec<f64>>>()?))
}

/// Planar data for the Carleman inequality.
#[derive(Debug, Clone)]
pub enum CarlemanField {
    /// `u = P̃₀f`, the harmonic extension of `f`.
    Harmonic(BoundaryFunction),
    /// `u = −2 ln|x − x₀| + c` with `|x₀| > 1`.
    LogFamily { x0: [f64; 2], c: f64 },
}

/// `∫_{B²} e^{2u} ≤ (1/4π)(∫_{S¹} e^u dθ)²`.
pub fn carleman(u: &CarlemanField, cfg: &VarsConfig) -> Result<InequalityReport> {
    let (lhs, rhs) = match u {
        CarlemanField::Harmonic(f) => {
            if f.dim() != 2 {
                return Err(Error::Domain("the Carleman harness is planar".into()));
            }
            let field = field_for_grid(Params::new(2, 0.0)?, f)?;
            let lhs = two_level(cfg, |c| {
                let grid = BallGrid::new(2, c.level, c.r_max)?;
                ball_integral_of_extension(&field, &grid, |_| Ok(1.0), |v| (2.0 * v).exp())
            })?;
            let rhs = two_level(cfg, |c| {
                let s = SphereGrid::new(2, c.sphere_level)?.integrate(|xi| f.eval(xi).exp());
                Ok(s * s / (4.0 * PI))
            })?;
            (lhs, rhs)
        }
        CarlemanField::LogFamily { x0, c } => {
            if norm2(x0) <= 1.0 {
                return Err(Error::Domain("x₀ must lie outside the closed disk".into()));
            }
            let u = |x: &[f64]| -dist2(x, x0).ln() + c;
            let lhs = two_level(cfg, |g| Ok(BallGrid::new(2, g.level, g.r_max)?.integrate(|x| (2.0 * u(x)).exp())))?;
            let rhs = two_level(cfg, |g| {
                let s = SphereGrid::new(2, g.sphere_level)?.integrate(|xi| u(xi).exp());
                Ok(s * s / (4.0 * PI))
            })?;
            (lhs, rhs)
        }
    };
    Ok(InequalityReport::new(lhs, rhs))
}

/// Seeded random unit vector, exposed for harnesses.
pub fn seeded_unit(n: usize, seed: u64) -> Vec<f64> {
    random_unit(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extend::HarmonicTerm;
    use crate::specfun::ball_volume;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::E;

    fn e_n(n: usize) -> Vec<f64> {
        let mut e = vec![0.0; n];
        e[n - 1] = 1.0;
        e
    }

    #[test]
    fn ball_norm_examples() {
        let g = BallGrid::new(3, 12, DEFAULT_R_MAX).unwrap();
        assert_relative_eq!(norm_ball(|_| 1.0, 3.0, &g), ball_volume(3).powf(1.0 / 3.0), max_relative = 1e-12);
        let g = BallGrid::new(2, 16, DEFAULT_R_MAX).unwrap();
        assert_relative_eq!(norm_ball(|x| norm2(x).sqrt(), 2.0, &g), (PI / 2.0).sqrt(), max_relative = 1e-12);
        let g = BallGrid::new(4, 12, DEFAULT_R_MAX).unwrap();
        let prof = RadialProfile::best(4).unwrap();
        let v = norm_ball(|x| prof.value(norm2(x).sqrt()).unwrap().exp(), 4.0, &g);
        let exact = (PI * PI * (E * E - 3.0) / 4.0).powf(0.25);
        assert_relative_eq!(v, exact, max_relative = 1e-10);
    }

    #[test]
    fn sphere_norm_examples() {
        for n in 2..=5 {
            let g = SphereGrid::new(n, 16).unwrap();
            let one = BoundaryFunction::constant(n, 1.0).unwrap();
            let s = n as f64 - 1.0;
            assert_relative_eq!(norm_sphere(&one, s, &g), sphere_area(n - 1).powf(1.0 / s), max_relative = 1e-12);
        }
        let g = SphereGrid::new(3, 16).unwrap();
        let f = BoundaryFunction::coordinate(3, 2).unwrap();
        assert_relative_eq!(norm_sphere(&f, 2.0, &g), (4.0 * PI / 3.0).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn extremal_examples() {
        assert_abs_diff_eq!(c_n(2), -(2.0 * PI).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(c_n(2), -1.8379, epsilon = 1e-4);
        for n in 2..=5 {
            let zero = extremal(n, &vec![0.0; n]).unwrap();
            assert_eq!(zero.as_constant(), Some(c_n(n)));
            let g = SphereGrid::new(n, 32).unwrap();
            for z in [0.0, 0.3, 0.6] {
                let mut zeta = seeded_unit(n, 4);
                zeta.iter_mut().for_each(|c| *c *= z);
                let f = extremal(n, &zeta).unwrap();
                assert_abs_diff_eq!(norm_sphere_exp(&f, n as f64 - 1.0, &g), 1.0, epsilon = 1e-8);
            }
        }
        assert!(extremal(3, &[0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn conformal_action_examples() {
        let a = [0.2, -0.1, 0.3];
        let p = Params::new(3, 0.5).unwrap();
        let one = BoundaryFunction::constant(3, 1.0).unwrap();
        let fa = conformal_action(&one, &a, &p).unwrap();
        let xi = seeded_unit(3, 1);
        let mut y = [0.0; 3];
        let d = mobius_raw(&a, &xi, &mut y);
        assert_abs_diff_eq!(fa.eval(&xi), d.powf(p.eps() / 2.0), epsilon = 1e-12);
        // L^p norm is preserved
        let g = SphereGrid::new(3, 32).unwrap();
        let f = BoundaryFunction::harmonic(
            3,
            vec![
                HarmonicTerm { amp: 1.0, degree: 0, axis: vec![1.0, 0.0, 0.0] },
                HarmonicTerm { amp: 0.4, degree: 2, axis: vec![0.0, 0.6, 0.8] },
            ],
        )
        .unwrap();
        let fa = conformal_action(&f, &a, &p).unwrap();
        let pp = p.p().unwrap();
        assert_relative_eq!(norm_sphere(&fa, pp, &g), norm_sphere(&f, pp, &g), max_relative = 1e-8);
        // limit case: extremal(0) goes to extremal(a)
        let lim = Params::limit(3).unwrap();
        let f0 = extremal(3, &[0.0; 3]).unwrap();
        let fa = conformal_action(&f0, &a, &lim).unwrap();
        let fz = extremal(3, &a).unwrap();
        let generic = conformal_action(&f0.shifted(0.0), &a, &lim).unwrap();
        for s in 0..5 {
            let xi = seeded_unit(3, 10 + s);
            assert_abs_diff_eq!(fa.eval(&xi), fz.eval(&xi), epsilon = 1e-12);
            assert_abs_diff_eq!(generic.eval(&xi), fz.eval(&xi), epsilon = 1e-12);
        }
        // the closed form of the action on the family agrees with composition
        let z = [0.1, 0.4, -0.2];
        let fz = extremal(3, &z).unwrap();
        let act = conformal_action(&fz, &a, &lim).unwrap();
        let fz_plain = BoundaryFunction::custom(3, move |x| fz.eval(x), Smoothness::Smooth).unwrap();
        let direct = conformal_action(&fz_plain, &a, &lim).unwrap();
        for s in 0..5 {
            let xi = seeded_unit(3, 20 + s);
            assert_abs_diff_eq!(act.eval(&xi), direct.eval(&xi), epsilon = 1e-12);
        }
    }

    #[test]
    fn sharp_constant_examples() {
        let s2 = sharp_limit(2).unwrap();
        assert_abs_diff_eq!(s2.value, 1.0 / (2.0 * PI.sqrt()), epsilon = 1e-12);
        let s4 = sharp_limit(4).unwrap();
        let exact = (PI * PI * (E * E - 3.0) / 4.0).powf(0.25) / (2.0 * PI * PI).powf(1.0 / 3.0);
        assert_abs_diff_eq!(s4.value, exact, epsilon = 1e-12);
        for n in [3, 5] {
            let a = sharp_limit_with(n, 16).unwrap().value;
            let b = sharp_limit_with(n, 32).unwrap().value;
            assert!(a > 0.0 && (a - b).abs() < 1e-10);
        }
        let s30 = sharp_subcrit(&Params::new(3, 0.0).unwrap()).unwrap();
        let exact = (4.0 * PI / 3.0).powf(1.0 / 6.0) / (4.0 * PI).powf(0.25);
        assert_abs_diff_eq!(s30.value, exact, epsilon = 1e-13);
        let a = sharp_subcrit_with(&Params::new(3, 0.5).unwrap(), 16).unwrap().value;
        let b = sharp_subcrit_with(&Params::new(3, 0.5).unwrap(), 32).unwrap().value;
        assert!(a > 0.0 && (a - b).abs() < 1e-8);
        assert!(sharp_subcrit(&Params::limit(3).unwrap()).is_err());
    }

    #[test]
    fn c_star_closed_forms() {
        assert_abs_diff_eq!(c_star(2, 16).unwrap(), 2f64.ln(), epsilon = 1e-13);
        assert_abs_diff_eq!(c_star(4, 16).unwrap(), (8.0 / (E * E - 3.0)).ln(), epsilon = 1e-12);
        let a = c_star(3, 16).unwrap();
        assert_abs_diff_eq!(a, c_star(3, 32).unwrap(), epsilon = 1e-10);
    }

    #[test]
    fn subcritical_checker() {
        let cfg = VarsConfig { level: 16, sphere_level: 24, r_max: DEFAULT_R_MAX };
        for a in [-0.5, 0.0, 0.5] {
            let p = Params::new(3, a).unwrap();
            let one = BoundaryFunction::constant(3, 1.0).unwrap();
            let rep = check_subcrit(&p, &one, &cfg).unwrap();
            assert!(rep.relative_slack.abs() < 1e-6, "{rep:?}");
        }
        let p = Params::new(3, 0.5).unwrap();
        let f = BoundaryFunction::harmonic(
            3,
            vec![
                HarmonicTerm { amp: 1.0, degree: 0, axis: e_n(3) },
                HarmonicTerm { amp: 0.3, degree: 1, axis: e_n(3) },
            ],
        )
        .unwrap();
        let rep = check_subcrit(&p, &f, &cfg).unwrap();
        assert!(rep.slack > 3.0 * rep.error_bound(), "{rep:?}");
        let one = BoundaryFunction::constant(3, 1.0).unwrap();
        let fphi = conformal_action(&one, &[0.1, 0.2, -0.1], &p).unwrap();
        let rep = check_subcrit(&p, &fphi, &cfg).unwrap();
        assert!(rep.relative_slack.abs() < 1e-6, "{rep:?}");
    }

    #[test]
    fn limit_checker() {
        for n in [2, 3] {
            let cfg = VarsConfig::for_dim(n);
            let zero = BoundaryFunction::constant(n, 0.0).unwrap();
            let rep = check_limit(n, &zero, &cfg).unwrap();
            assert!(rep.relative_slack.abs() < 1e-9, "{rep:?}");
            let mut zeta = seeded_unit(n, 2);
            zeta.iter_mut().for_each(|c| *c *= 0.4);
            let f = extremal(n, &zeta).unwrap().shifted(-c_n(n));
            let rep = check_limit(n, &f, &cfg).unwrap();
            assert!(rep.relative_slack.abs() < 1e-4, "{rep:?}");
            let s = BoundaryFunction::zonal(n, &e_n(n), |t| 0.5 * t.sin()).unwrap();
            let rep = check_limit(n, &s, &cfg).unwrap();
            assert!(rep.slack > 3.0 * rep.error_bound(), "{rep:?}");
        }
    }

    #[test]
    fn el_residual_examples() {
        let cfg = VarsConfig::for_dim(2);
        let xi = seeded_unit(2, 1);
        let f = BoundaryFunction::constant(2, 2f64.ln()).unwrap();
        assert!(el_residual(2, &f, &xi, &cfg).unwrap().value.abs() < 1e-6);
        let f = BoundaryFunction::constant(2, c_n(2)).unwrap();
        let expect = 1.0 / (2.0 * PI) - 1.0 / (8.0 * PI * PI);
        let v = el_residual(2, &f, &xi, &cfg).unwrap().value;
        assert_abs_diff_eq!(v, expect, epsilon = 1e-6);
        assert_abs_diff_eq!(v, 0.1465, epsilon = 1e-4);
        let cfg = VarsConfig::for_dim(3);
        let f = BoundaryFunction::constant(3, 0.3).unwrap();
        let a = el_residual(3, &f, &seeded_unit(3, 5), &cfg).unwrap().value;
        let b = el_residual(3, &f, &seeded_unit(3, 6), &cfg).unwrap().value;
        assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        let cs = c_star(3, 16).unwrap();
        let f = BoundaryFunction::constant(3, cs).unwrap();
        assert!(el_residual(3, &f, &seeded_unit(3, 5), &cfg).unwrap().value.abs() < 1e-8);
    }

    #[test]
    fn kw_examples() {
        let p = Params::new(3, 0.5).unwrap();
        let g = SphereGrid::new(3, 24).unwrap();
        let f = BoundaryFunction::zonal(3, &e_n(3), |t| 1.0 + 0.3 * t * t).unwrap();
        assert_eq!(kw_integral(&p, |_| 2.0, &f, 0, &g).unwrap(), 0.0);
        for i in 0..2 {
            assert!(kw_integral(&p, |x| x[2], &f, i, &g).unwrap().abs() < 1e-8);
            let one = BoundaryFunction::constant(3, 1.0).unwrap();
            assert!(kw_integral(&p, |x| x[2], &one, i, &g).unwrap().abs() < 1e-8);
        }
        // the generator along eₙ does not annihilate ξₙ: ∫(1 − ξₙ²) = 8π/3
        let one = BoundaryFunction::constant(3, 1.0).unwrap();
        assert_abs_diff_eq!(kw_integral(&p, |x| x[2], &one, 2, &g).unwrap(), 8.0 * PI / 3.0, epsilon = 1e-8);
    }

    #[test]
    fn carleman_examples() {
        let cfg = VarsConfig::for_dim(2);
        let c = BoundaryFunction::constant(2, 0.7).unwrap();
        let rep = carleman(&CarlemanField::Harmonic(c), &cfg).unwrap();
        assert_relative_eq!(rep.lhs, PI * 1.4f64.exp(), max_relative = 1e-12);
        assert!(rep.relative_slack.abs() < 1e-12);
        let rep = carleman(&CarlemanField::LogFamily { x0: [1.5, 0.0], c: 0.2 }, &cfg).unwrap();
        assert!(rep.relative_slack.abs() < 1e-5, "{rep:?}");
        let f =
            BoundaryFunction::harmonic(2, vec![HarmonicTerm { amp: 0.4, degree: 1, axis: vec![0.0, 1.0] }]).unwrap();
        let rep = carleman(&CarlemanField::Harmonic(f), &cfg).unwrap();
        assert!(rep.slack > 3.0 * rep.error_bound(), "{rep:?}");
    }
}
