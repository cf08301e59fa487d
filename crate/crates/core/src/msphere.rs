//! Moving spheres on the half-space: the transform `f_{λ,v}`, the starting
//! radius `λ₀`, the critical radius `λ̄₀`, and the interior and half-ball
//! checks built on them.
//!
//! Half-space boundary data are stored as `f = f̃∘Ψ + ln|Ψ′|` with `f̃` on
//! `Sⁿ⁻¹`. Comparison grids are sphere grids pushed to `ℝⁿ⁻¹` by `Ψ⁻¹`.

use crate::error::{Error, Result};
use crate::extend::{extend_half_limit, pullback_log_psi, BoundaryFunction, ExtendConfig, ExtensionField, Smoothness};
use crate::geom::{dist2, norm2, psi_raw, HalfSpacePoint};
use crate::infunc::RadialProfile;
use crate::kernel::k_diff;
use crate::quad::adaptive::Estimate;
use crate::quad::grids::SphereGrid;
use crate::quad::rules::composite_rule;
use crate::quad::sum::NeumaierSum;
use crate::specfun::Params;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Relative roundoff assumed for pointwise evaluations of `f` and `f_{λ,v}`.
const EVAL_ROUNDOFF: f64 = 1e-13;
/// Grid points this close (relative to `λ`) to the sphere `|w − v| = λ` are
/// skipped by the strict predicates: there the two sides agree identically.
const SPHERE_BAND: f64 = 1e-9;
/// Halving budget of [`start_lambda`].
pub const MAX_HALVINGS: usize = 40;

/// Half-space boundary data `f = f̃∘Ψ + ln|Ψ′|`.
#[derive(Debug, Clone)]
pub struct HalfData {
    tilde: BoundaryFunction,
}

impl HalfData {
    pub fn new(tilde: BoundaryFunction) -> Self {
        Self { tilde }
    }

    pub fn dim(&self) -> usize {
        self.tilde.dim()
    }

    pub fn tilde(&self) -> &BoundaryFunction {
        &self.tilde
    }

    /// `f(w)` for `w ∈ ℝⁿ⁻¹`.
    pub fn eval(&self, w: &[f64]) -> f64 {
        let n = self.dim();
        let mut y = w.to_vec();
        y.push(0.0);
        let mut xi = vec![0.0; n];
        let d = psi_raw(&y, &mut xi);
        self.tilde.eval(&xi) + d.ln()
    }

    /// The sphere pullback `f∘Ψ⁻¹ = f̃ + ln(1 − ξₙ)`.
    pub fn pulled(&self) -> Result<BoundaryFunction> {
        BoundaryFunction::sum(vec![self.tilde.clone(), pullback_log_psi(self.dim())?])
    }

    /// `f_{λ,v} = f∘φ_{λ,v} + ln|φ′_{λ,v}|`, again of the form `g̃∘Ψ + ln|Ψ′|`
    /// with `g̃ = f̃∘M + ln|M′|` and `M = Ψ∘φ∘Ψ⁻¹`.
    pub fn transformed(&self, lambda: f64, v: &[f64]) -> Result<HalfData> {
        let n = self.dim();
        if v.len() + 1 != n || !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain("transform needs λ > 0 and v ∈ ℝⁿ⁻¹".into()));
        }
        let tilde = self.tilde.clone();
        let v = v.to_vec();
        let g = BoundaryFunction::custom(
            n,
            move |xi| {
                let (img, lnm) = sphere_conjugate(lambda, &v, xi);
                tilde.eval(&img) + lnm
            },
            match self.tilde.smoothness() {
                Smoothness::LogSingular => Smoothness::LogSingular,
                _ => Smoothness::Smooth,
            },
        )?;
        Ok(HalfData { tilde: g })
    }

    /// `P_{2−n}f(y)` by pullback to the ball with the generic routes.
    pub fn extension(&self, y: &HalfSpacePoint) -> Result<Estimate> {
        extend_half_limit(&self.pulled()?, y)
    }

    /// `P_{2−n}f(y) = (P̃_{2−n}f̃)(Ψy) + Ĩₙ(|Ψy|) + ln|Ψ′(y)|`, using the closed
    /// form of the extension of `ln(1 − ξₙ)`; constant `f̃` needs no quadrature.
    pub fn extension_fast(&self, y: &[f64], field: Option<&ExtensionField>, prof: &RadialProfile) -> Result<f64> {
        let n = self.dim();
        let mut x = vec![0.0; n];
        let d = psi_raw(y, &mut x);
        let r = norm2(&x).sqrt();
        let base = match (self.tilde.as_constant(), field) {
            (Some(c), _) => c,
            (None, Some(fl)) => fl.value(&x)?,
            (None, None) => ExtensionField::new(Params::limit(n)?, self.tilde.clone())?.value(&x)?,
        };
        Ok(base + prof.value(r)? + d.ln())
    }
}

/// `M(ξ)` and `ln|M′(ξ)|` for `M = Ψ∘φ_{λ,v}∘Ψ⁻¹` on the sphere.
///
/// With `w = Ψ⁻¹ξ`, `u = w − v`:
/// `|M′| = λ²(1 + |w|²) / (|u|²(1 + |v|²) + 2λ² v·u + λ⁴)`, finite at `w = v`
/// and as `w → ∞`.
fn sphere_conjugate(lambda: f64, v: &[f64], xi: &[f64]) -> (Vec<f64>, f64) {
    let n = xi.len();
    let l2 = lambda * lambda;
    let vv = norm2(v);
    let mut s = vec![0.0; n];
    let mut vy = v.to_vec();
    vy.push(0.0);
    if 1.0 - xi[n - 1] < 1e-24 {
        // ξ = north pole, w = ∞: M(ξ) = Ψ(v)
        psi_raw(&vy, &mut s);
        return (s, (l2 / (1.0 + vv)).ln());
    }
    // w = Ψ⁻¹(ξ) on the boundary: w_i = ξ_i/(1 − ξₙ)
    let e = 1.0 - xi[n - 1];
    let w: Vec<f64> = xi[..n - 1].iter().map(|c| c / e).collect();
    let u: Vec<f64> = w.iter().zip(v).map(|(a, b)| a - b).collect();
    let uu = norm2(&u);
    let vu: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
    // 1 + |w|² = 2/(1 − ξₙ) on the sphere
    let lnm = (l2 * 2.0 / e).ln() - (uu * (1.0 + vv) + 2.0 * l2 * vu + l2 * l2).ln();
    let img = if uu == 0.0 {
        let mut p = vec![0.0; n];
        p[n - 1] = 1.0;
        p
    } else {
        let mut z: Vec<f64> = v.iter().zip(&u).map(|(a, b)| a + l2 * b / uu).collect();
        z.push(0.0);
        psi_raw(&z, &mut s);
        s
    };
    (img, lnm)
}

/// `f_{λ,v}(w) = f(φ_{λ,v}(w)) + ln(λ²/|w − v|²)` for generic boundary data.
pub fn boundary_transform<F: Fn(&[f64]) -> f64>(f: F, lambda: f64, v: &[f64], w: &[f64]) -> Result<f64> {
    if !(lambda > 0.0) || v.len() != w.len() {
        return Err(Error::Domain("transform needs λ > 0 and matching dimensions".into()));
    }
    let d2 = dist2(w, v);
    if d2 == 0.0 {
        return Err(Error::SingularPoint("w equals the inversion center".into()));
    }
    let s = lambda * lambda / d2;
    let img: Vec<f64> = w.iter().zip(v).map(|(a, b)| b + s * (a - b)).collect();
    Ok(f(&img) + s.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MovingSphereConfig {
    pub v0: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Level of the sphere grid pushed to `ℝⁿ⁻¹`.
    pub level: usize,
    /// Relative width at which bisection stops.
    pub tol: f64,
}

impl MovingSphereConfig {
    pub fn new(v0: Vec<f64>) -> Self {
        Self { v0, lambda_min: 1e-12, lambda_max: 1e3, level: 24, tol: 1e-3 }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.v0.len() + 1 != n {
            return Err(Error::Config("v0 must lie in ℝⁿ⁻¹".into()));
        }
        if !(self.lambda_min > 0.0 && self.lambda_min < self.lambda_max) || !(self.tol > 0.0) || self.level < 2 {
            return Err(Error::Config("need 0 < λ_min < λ_max, tol > 0 and level ≥ 2".into()));
        }
        Ok(())
    }
}

/// Boundary comparison grid: `Ψ⁻¹` of the sphere grid, north pole excluded.
pub fn comparison_grid(n: usize, level: usize) -> Result<Vec<Vec<f64>>> {
    let g = SphereGrid::new(n, level)?;
    Ok(g.iter()
        .filter(|(xi, _)| 1.0 - xi[n - 1] > 1e-9)
        .map(|(xi, _)| {
            let e = 1.0 - xi[n - 1];
            xi[..n - 1].iter().map(|c| c / e).collect()
        })
        .collect())
}

fn margin(a: f64, b: f64) -> f64 {
    10.0 * EVAL_ROUNDOFF * (1.0 + a.abs() + b.abs())
}

/// `f_{λ,v}(w) − f(w)` at `w`, with the roundoff margin for that pair.
fn difference(f: &HalfData, lambda: f64, v: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let fw = f.eval(w);
    let fl = boundary_transform(|z| f.eval(z), lambda, v, w)?;
    Ok((fl - fw, margin(fl, fw)))
}

/// `f_{λ,v} < f` strictly at every grid point outside the sphere.
pub fn outside_predicate(f: &HalfData, lambda: f64, v: &[f64], grid: &[Vec<f64>]) -> Result<bool> {
    let bad = grid
        .par_iter()
        .filter(|w| dist2(w, v).sqrt() > lambda * (1.0 + SPHERE_BAND))
        .map(|w| difference(f, lambda, v, w).map(|(d, m)| d >= -m))
        .collect::<Result<Vec<bool>>>()?;
    Ok(!bad.into_iter().any(|b| b))
}

/// Minimum of `f_{λ,v} − f` over the inside points `φ_{λ,v}(w)`, `w` an
/// exterior grid point, together with the largest roundoff margin.
pub fn inside_minimum(f: &HalfData, lambda: f64, v: &[f64], grid: &[Vec<f64>]) -> Result<(f64, f64)> {
    let vals = grid
        .par_iter()
        .filter(|w| dist2(w, v).sqrt() > lambda * (1.0 + SPHERE_BAND))
        .map(|w| {
            let s = lambda * lambda / dist2(w, v);
            let inner: Vec<f64> = w.iter().zip(v).map(|(a, b)| b + s * (a - b)).collect();
            difference(f, lambda, v, &inner)
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    Ok(vals.into_iter().fold((f64::INFINITY, 0.0), |(m, g), (d, e)| (m.min(d), g.max(e))))
}

/// `f_{λ,v} > f` strictly inside the sphere on the grid.
pub fn inside_predicate(f: &HalfData, lambda: f64, v: &[f64], grid: &[Vec<f64>]) -> Result<bool> {
    let (m, e) = inside_minimum(f, lambda, v, grid)?;
    Ok(m > e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StartResult {
    pub lambda0: f64,
    pub certified: bool,
    pub halvings: usize,
}

/// Largest `λ₀ = 2^{−k}` such that `f_{λ,v₀} < f` outside the sphere on the
/// grid for `λ ∈ {λ₀, λ₀/2, …, λ₀/16}`. Failure within [`MAX_HALVINGS`] is
/// reported with `certified = false`.
pub fn start_lambda(f: &HalfData, cfg: &MovingSphereConfig) -> Result<StartResult> {
    cfg.validate(f.dim())?;
    let grid = comparison_grid(f.dim(), cfg.level)?;
    let mut lambda = 1.0;
    for k in 0..=MAX_HALVINGS {
        let mut ok = true;
        for j in 0..5 {
            if !outside_predicate(f, lambda * 0.5f64.powi(j), &cfg.v0, &grid)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(StartResult { lambda0: lambda, certified: true, halvings: k });
        }
        lambda *= 0.5;
    }
    Ok(StartResult { lambda0: lambda, certified: false, halvings: MAX_HALVINGS })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalResult {
    pub lambda_bar: f64,
    /// Bracket `[lo, hi]`: the inside predicate holds at `lo` and fails at `hi`.
    pub lo: f64,
    pub hi: f64,
    /// `min over λ ∈ [lo, hi]` of `sup_grid |f_{λ,v₀} − f|`.
    pub witness: f64,
    pub witness_lambda: f64,
    pub unbounded: bool,
    pub start: StartResult,
}

/// `sup_grid |f_{λ,v} − f|`.
pub fn sup_difference(f: &HalfData, lambda: f64, v: &[f64], grid: &[Vec<f64>]) -> Result<f64> {
    let vals = grid
        .par_iter()
        .filter(|w| dist2(w, v) > 0.0)
        .map(|w| difference(f, lambda, v, w).map(|(d, _)| d.abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Critical radius `λ̄₀ = sup{λ : f_{μ,v₀} > f inside for all μ < λ}` by
/// doubling from the certified `λ₀` and bisection.
pub fn critical_lambda(f: &HalfData, cfg: &MovingSphereConfig) -> Result<CriticalResult> {
    let start = start_lambda(f, cfg)?;
    if !start.certified {
        return Err(Error::Precondition("the sphere could not be started".into()));
    }
    let v = &cfg.v0;
    let grid = comparison_grid(f.dim(), cfg.level)?;
    let mut lo = start.lambda0.max(cfg.lambda_min);
    let mut hi = lo;
    let mut unbounded = true;
    while hi < cfg.lambda_max {
        hi = (2.0 * hi).min(cfg.lambda_max);
        if !inside_predicate(f, hi, v, &grid)? {
            unbounded = false;
            break;
        }
        lo = hi;
    }
    if unbounded {
        return Ok(CriticalResult {
            lambda_bar: cfg.lambda_max,
            lo,
            hi,
            witness: f64::NAN,
            witness_lambda: f64::NAN,
            unbounded,
            start,
        });
    }
    while hi - lo > cfg.tol * lo {
        let mid = 0.5 * (lo + hi);
        if inside_predicate(f, mid, v, &grid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // golden-section search for the equality witness within the bracket
    let g = |l: f64| sup_difference(f, l, v, &grid);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    for _ in 0..60 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d)?;
        }
    }
    let (witness, witness_lambda) = if gc < gd { (gc, c) } else { (gd, d) };
    Ok(CriticalResult { lambda_bar: 0.5 * (lo + hi), lo, hi, witness, witness_lambda, unbounded, start })
}

/// `(P_{2−n}f(y), P_{2−n}f_{λ,v}(y))` at each probe, with error estimates.
pub fn interior_comparison(
    f: &HalfData,
    lambda: f64,
    v: &[f64],
    probes: &[HalfSpacePoint],
) -> Result<Vec<(Estimate, Estimate)>> {
    let g = f.transformed(lambda, v)?;
    let (pf, pg) = (f.pulled()?, g.pulled()?);
    probes.par_iter().map(|y| Ok((extend_half_limit(&pf, y)?, extend_half_limit(&pg, y)?))).collect()
}

/// Both sides of the half-ball form of the Euler–Lagrange equation at a
/// boundary point `w` with `|w − v| < λ`:
/// `e^{(n−1)f_{λ,v}(w)} − e^{(n−1)f(w)}` and
/// `∫_{B⁺_λ(v)} (e^{nP f_{λ,v}} − e^{nP f}) K(v, λ; y, w) dy`.
///
/// `P f_{λ,v} = (P f)∘φ + ln|φ′|`. The integral uses polar coordinates
/// about `w`, in which the kernel singularity is bounded.
pub fn elup_identity(f: &HalfData, lambda: f64, v: &[f64], w: &[f64], level: usize) -> Result<(f64, f64)> {
    let n = f.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::MethodMismatch { method: "half-ball identity".into(), n });
    }
    if v.len() + 1 != n || w.len() + 1 != n {
        return Err(Error::Domain("v and w must lie in ℝⁿ⁻¹".into()));
    }
    let dw2 = dist2(w, v);
    if dw2.sqrt() >= lambda {
        return Err(Error::Domain("w must lie inside the sphere".into()));
    }
    let nf = n as f64;
    let l2 = lambda * lambda;
    let prof = RadialProfile::best(n)?;
    let params = Params::limit(n)?;
    let field = match f.tilde().as_constant() {
        Some(_) => None,
        None => Some(ExtensionField::with_config(params, f.tilde().clone(), ExtendConfig::default())?),
    };
    let pf = |y: &[f64]| f.extension_fast(y, field.as_ref(), &prof);
    let lhs = ((nf - 1.0) * boundary_transform(|z| f.eval(z), lambda, v, w)?).exp() - ((nf - 1.0) * f.eval(w)).exp();

    // directions θ in the upper half-sphere
    let dirs: Vec<(Vec<f64>, f64)> = if n == 2 {
        let r = composite_rule(&[0.0, PI / 8.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, 7.0 * PI / 8.0, PI], level);
        r.nodes.iter().zip(&r.weights).map(|(&t, &wt)| (vec![t.cos(), t.sin()], wt)).collect()
    } else {
        let rp = composite_rule(&[0.0, PI / 8.0, PI / 4.0, 3.0 * PI / 8.0, 7.0 * PI / 16.0, PI / 2.0], level);
        let m = 4 * level;
        let mut out = Vec::new();
        for (&psi, &wp) in rp.nodes.iter().zip(&rp.weights) {
            for j in 0..m {
                let ph = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                let (sp, cp) = psi.sin_cos();
                out.push((vec![sp * ph.cos(), sp * ph.sin(), cp], wp * sp * 2.0 * PI / m as f64));
            }
        }
        out
    };
    let mut wy = w.to_vec();
    wy.push(0.0);
    let mut vy = v.to_vec();
    vy.push(0.0);
    let terms = dirs
        .par_iter()
        .map(|(th, wt)| -> Result<f64> {
            // distance from w to the sphere |y − v| = λ along θ
            let b: f64 = th.iter().zip(wy.iter().zip(&vy)).map(|(t, (a, c))| t * (a - c)).sum();
            let rmax = -b + (b * b + l2 - dw2).sqrt();
            let mut breaks: Vec<f64> = (0..=25).rev().map(|k| rmax * 0.5f64.powi(k)).collect();
            breaks.insert(0, 0.0);
            let rr = composite_rule(&breaks, level);
            let mut s = NeumaierSum::new();
            for (&rho, &wr) in rr.nodes.iter().zip(&rr.weights) {
                let y: Vec<f64> = wy.iter().zip(th).map(|(a, t)| a + rho * t).collect();
                let yp = HalfSpacePoint::from_coords(&y)?;
                let d2 = dist2(&y, &vy);
                let sc = l2 / d2;
                let phy: Vec<f64> = y.iter().zip(&vy).map(|(a, c)| c + sc * (a - c)).collect();
                let p_f = pf(&y)?;
                let p_g = pf(&phy)? + sc.ln();
                let k = k_diff(n, v, lambda, &yp, w)?;
                s.add(wr * rho.powi(n as i32 - 1) * ((nf * p_g).exp() - (nf * p_f).exp()) * k);
            }
            Ok(wt * s.value())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut total = NeumaierSum::new();
    terms.into_iter().for_each(|t| total.add(t));
    Ok((lhs, total.value()))
}
