//! Extension of boundary data into the ball by the kernel `p̃_α`, the
//! half-space extension by pullback through `Ψ`, and finite-difference
//! residuals of the extension equation and the hyperbolic Laplacian.
//!
//! Three evaluation routes are used:
//! - spherical harmonics and zonal profiles with a converged expansion go
//!   through the Funk–Hecke multipliers `m_ℓ(r)`;
//! - zonal data without a usable expansion (log poles) use a nested
//!   polar/azimuthal adaptive integral about the data's axis;
//! - arbitrary data use a product rule in polar coordinates about `x̂`,
//!   graded toward the kernel peak.

use crate::error::{Error, Result};
use crate::geom::{dist2, dot, norm2, orthonormal_complement, psi_inv_raw, psi_raw, BallPoint, HalfSpacePoint};
use crate::kernel::BallKernel;
use crate::quad::adaptive::{adaptive_1d_with, AdaptiveConfig, Estimate};
use crate::quad::grids::sphere_nodes;
use crate::quad::rules::{graded_rule, Rule1D};
use crate::quad::sum::NeumaierSum;
use crate::specfun::{ball_prefactor, check_dim, sphere_area, Params};
use crate::zonal::{gegenbauer_all, multipliers, peak_scale, ZonalExpansion, DEFAULT_MAX_DEGREE};
use rand::Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Default largest `|x|` at which the extension is evaluated.
pub const DEFAULT_R_EVAL_MAX: f64 = 0.995;
/// Largest `|x|` of a residual probe.
pub const PROBE_RADIUS_MAX: f64 = 0.9;
/// Default finite-difference step of the residual operators.
pub const DEFAULT_FD_STEP: f64 = 1e-3;
/// Tail tolerance under which a zonal expansion replaces the nested route.
pub const EXPANSION_TOL: f64 = 1e-10;

pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Closed-form description attached to a boundary function.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Descriptor {
    Constant(f64),
    Extremal { zeta: Vec<f64> },
    Coordinate(usize),
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Analytic,
    Smooth,
    /// Logarithmic singularity at isolated boundary points.
    LogSingular,
}

/// `amp · P_degree(axis · ξ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicTerm {
    pub amp: f64,
    pub degree: usize,
    pub axis: Vec<f64>,
}

#[derive(Clone)]
enum Repr {
    Constant(f64),
    Harmonic(Vec<HarmonicTerm>),
    Zonal {
        axis: Vec<f64>,
        profile: ProfileFn,
        expansion: Option<Arc<ZonalExpansion>>,
    },
    /// `coeff · ln(1 − axis·ξ)`.
    LogPole {
        axis: Vec<f64>,
        coeff: f64,
    },
    Custom(PointFn),
    Sum(Vec<BoundaryFunction>),
}

/// A real function on `Sⁿ⁻¹` with the structure the extension routes use.
#[derive(Clone)]
pub struct BoundaryFunction {
    n: usize,
    repr: Repr,
    descriptor: Descriptor,
    smoothness: Smoothness,
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Constant(c) => format!("Constant({c})"),
            Repr::Harmonic(t) => format!("Harmonic({t:?})"),
            Repr::Zonal { axis, expansion, .. } => {
                format!("Zonal(axis={axis:?}, degree={:?})", expansion.as_ref().map(|e| e.degree()))
            }
            Repr::LogPole { axis, coeff } => format!("LogPole(axis={axis:?}, coeff={coeff})"),
            Repr::Custom(_) => "Custom".to_string(),
            Repr::Sum(p) => format!("Sum({p:?})"),
        };
        f.debug_struct("BoundaryFunction")
            .field("n", &self.n)
            .field("kind", &kind)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

fn unit_axis(axis: &[f64]) -> Result<Vec<f64>> {
    let r = norm2(axis).sqrt();
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain("axis must be a nonzero finite vector".into()));
    }
    Ok(axis.iter().map(|a| a / r).collect())
}

fn basis(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

impl BoundaryFunction {
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { n, repr: Repr::Constant(c), descriptor: Descriptor::Constant(c), smoothness: Smoothness::Analytic })
    }

    /// The coordinate function `ξ_i` (zero-based index).
    pub fn coordinate(n: usize, i: usize) -> Result<Self> {
        check_dim(n)?;
        if i >= n {
            return Err(Error::Domain(format!("coordinate {i} out of range for n = {n}")));
        }
        let mut f = Self::harmonic(n, vec![HarmonicTerm { amp: 1.0, degree: 1, axis: basis(n, i) }])?;
        f.descriptor = Descriptor::Coordinate(i);
        Ok(f)
    }

    /// A finite sum of zonal spherical harmonics.
    pub fn harmonic(n: usize, terms: Vec<HarmonicTerm>) -> Result<Self> {
        check_dim(n)?;
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            if t.axis.len() != n {
                return Err(Error::Domain("harmonic axis has wrong dimension".into()));
            }
            out.push(HarmonicTerm { axis: unit_axis(&t.axis)?, ..t });
        }
        Ok(Self { n, repr: Repr::Harmonic(out), descriptor: Descriptor::Custom, smoothness: Smoothness::Analytic })
    }

    /// `g(axis·ξ)`. A Gegenbauer expansion is fitted and used when its tail is
    /// below [`EXPANSION_TOL`]; otherwise the nested route applies.
    pub fn zonal<G: Fn(f64) -> f64 + Send + Sync + 'static>(n: usize, axis: &[f64], g: G) -> Result<Self> {
        check_dim(n)?;
        if axis.len() != n {
            return Err(Error::Domain("zonal axis has wrong dimension".into()));
        }
        let axis = unit_axis(axis)?;
        let ex = ZonalExpansion::fit(n, &g, DEFAULT_MAX_DEGREE);
        let expansion = ex.converged(EXPANSION_TOL).then(|| Arc::new(ex));
        let smoothness = if expansion.is_some() { Smoothness::Analytic } else { Smoothness::Smooth };
        Ok(Self {
            n,
            repr: Repr::Zonal { axis, profile: Arc::new(g), expansion },
            descriptor: Descriptor::Custom,
            smoothness,
        })
    }

    /// `coeff · ln(1 − axis·ξ)`, singular at `ξ = axis` when `coeff ≠ 0`.
    pub fn log_pole(n: usize, axis: &[f64], coeff: f64) -> Result<Self> {
        check_dim(n)?;
        if axis.len() != n {
            return Err(Error::Domain("pole axis has wrong dimension".into()));
        }
        Ok(Self {
            n,
            repr: Repr::LogPole { axis: unit_axis(axis)?, coeff },
            descriptor: Descriptor::Custom,
            smoothness: Smoothness::LogSingular,
        })
    }

    /// Arbitrary data; extended by the generic product-rule route.
    pub fn custom<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(
        n: usize,
        f: F,
        smoothness: Smoothness,
    ) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { n, repr: Repr::Custom(Arc::new(f)), descriptor: Descriptor::Custom, smoothness })
    }

    pub fn sum(parts: Vec<BoundaryFunction>) -> Result<Self> {
        let n = parts.first().map(|p| p.n).ok_or_else(|| Error::Domain("empty sum".into()))?;
        if parts.iter().any(|p| p.n != n) {
            return Err(Error::Domain("dimension mismatch in sum".into()));
        }
        let smoothness = parts.iter().map(|p| p.smoothness).max_by_key(|s| *s as u8).unwrap();
        Ok(Self { n, repr: Repr::Sum(parts), descriptor: Descriptor::Custom, smoothness })
    }

    /// `self + c`.
    pub fn shifted(&self, c: f64) -> Self {
        if let Repr::Constant(a) = self.repr {
            return Self::constant(self.n, a + c).expect("dimension already checked");
        }
        let mut s = Self::sum(vec![self.clone(), Self::constant(self.n, c).unwrap()]).unwrap();
        if let Descriptor::Extremal { .. } = self.descriptor {
            s.descriptor = Descriptor::Custom;
        }
        s
    }

    pub fn with_descriptor(mut self, d: Descriptor) -> Self {
        self.descriptor = d;
        self
    }

    /// Random low-order harmonic combination with total amplitude at most
    /// `amp_total`: a constant plus `terms` zonal harmonics of degree
    /// `1..=max_degree` about random axes.
    pub fn random_smooth<R: Rng>(
        n: usize,
        rng: &mut R,
        terms: usize,
        max_degree: usize,
        amp_total: f64,
    ) -> Result<Self> {
        check_dim(n)?;
        let share = amp_total / (terms as f64 + 1.0);
        let mut hs = vec![HarmonicTerm { amp: share * rng.gen_range(-1.0..1.0), degree: 0, axis: basis(n, 0) }];
        for _ in 0..terms {
            hs.push(HarmonicTerm {
                amp: share * rng.gen_range(-1.0..1.0),
                degree: rng.gen_range(1..=max_degree.max(1)),
                axis: random_unit(n, rng),
            });
        }
        Self::harmonic(n, hs)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Degree of the fitted expansion of a zonal function, if one is used.
    pub fn expansion_degree(&self) -> Option<usize> {
        match &self.repr {
            Repr::Zonal { expansion, .. } => expansion.as_ref().map(|e| e.degree()),
            _ => None,
        }
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    /// Constant value, if the function is constant by construction.
    pub fn as_constant(&self) -> Option<f64> {
        match &self.repr {
            Repr::Constant(c) => Some(*c),
            Repr::Sum(p) => p.iter().map(|q| q.as_constant()).sum(),
            _ => None,
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        match &self.repr {
            Repr::Constant(c) => *c,
            Repr::Harmonic(terms) => {
                let deg = terms.iter().map(|t| t.degree).max().unwrap_or(0);
                let mut p = vec![0.0; deg + 1];
                terms
                    .iter()
                    .map(|t| {
                        gegenbauer_all(self.n, dot(&t.axis, xi).clamp(-1.0, 1.0), &mut p[..=t.degree]);
                        t.amp * p[t.degree]
                    })
                    .sum()
            }
            Repr::Zonal { axis, profile, .. } => profile(dot(axis, xi).clamp(-1.0, 1.0)),
            // 1 − a·ξ = |ξ − a|²/2 on the sphere, accurate near the pole
            Repr::LogPole { axis, coeff } => coeff * (0.5 * dist2(axis, xi)).ln(),
            Repr::Custom(f) => f(xi),
            Repr::Sum(parts) => parts.iter().map(|p| p.eval(xi)).sum(),
        }
    }

    /// Upper bound for `sup |f|` on the sphere, when one is available.
    pub fn sup_bound(&self) -> Option<f64> {
        match &self.repr {
            Repr::Constant(c) => Some(c.abs()),
            Repr::Harmonic(t) => Some(t.iter().map(|t| t.amp.abs()).sum()),
            Repr::Zonal { expansion: Some(e), .. } => Some(e.coeffs().iter().map(|a| a.abs()).sum::<f64>() + e.tail()),
            Repr::Zonal { .. } | Repr::Custom(_) => None,
            Repr::LogPole { coeff, .. } => (*coeff == 0.0).then_some(0.0),
            Repr::Sum(p) => p.iter().map(|q| q.sup_bound()).sum(),
        }
    }

    fn multiplier_degree(&self) -> Option<usize> {
        match &self.repr {
            Repr::Constant(_) => Some(0),
            Repr::Harmonic(t) => t.iter().map(|t| t.degree).max(),
            Repr::Zonal { expansion: Some(e), .. } => Some(e.degree()),
            Repr::Sum(p) => p.iter().filter_map(|q| q.multiplier_degree()).max(),
            _ => None,
        }
    }
}

/// Uniformly distributed unit vector.
pub fn random_unit<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2 = norm2(&v);
        if r2 > 1e-4 && r2 <= 1.0 {
            let r = r2.sqrt();
            return v.into_iter().map(|c| c / r).collect();
        }
    }
}

/// Uniformly distributed point of the ball of radius `rmax`.
pub fn random_ball_point<R: Rng>(n: usize, rmax: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-rmax..rmax)).collect();
        if norm2(&v) < rmax * rmax {
            return v;
        }
    }
}

/// Which evaluation route to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Multipliers where possible, nested zonal for log poles, generic otherwise.
    Auto,
    /// Generic product rule for every non-constant part.
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendConfig {
    pub r_eval_max: f64,
    pub route: Route,
    /// Absolute tolerance of the nested adaptive route.
    pub tol: f64,
    /// Gauss–Legendre nodes per polar panel of the generic route.
    pub theta_nodes: usize,
    /// Level of the inner `Sⁿ⁻²` grid of the generic route.
    pub inner_level: usize,
}

impl Default for ExtendConfig {
    fn default() -> Self {
        Self { r_eval_max: DEFAULT_R_EVAL_MAX, route: Route::Auto, tol: 1e-11, theta_nodes: 16, inner_level: 16 }
    }
}

/// `P̃_α f` as an evaluable field.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    params: Params,
    boundary: BoundaryFunction,
    cfg: ExtendConfig,
    kernel: BallKernel,
}

impl ExtensionField {
    pub fn new(params: Params, boundary: BoundaryFunction) -> Result<Self> {
        Self::with_config(params, boundary, ExtendConfig::default())
    }

    pub fn with_config(params: Params, boundary: BoundaryFunction, cfg: ExtendConfig) -> Result<Self> {
        if boundary.dim() != params.n() {
            return Err(Error::Domain("boundary data and parameters differ in dimension".into()));
        }
        if !(cfg.r_eval_max > 0.0 && cfg.r_eval_max < 1.0) {
            return Err(Error::Config(format!("r_eval_max = {} must lie in (0, 1)", cfg.r_eval_max)));
        }
        let kernel = BallKernel::new(&params);
        Ok(Self { params, boundary, cfg, kernel })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn boundary(&self) -> &BoundaryFunction {
        &self.boundary
    }

    pub fn config(&self) -> &ExtendConfig {
        &self.cfg
    }

    /// Value with an error estimate at interior `x` (raw coordinates).
    pub fn eval(&self, x: &[f64]) -> Result<Estimate> {
        let n = self.params.n();
        if x.len() != n {
            return Err(Error::Domain("point has wrong dimension".into()));
        }
        let r = norm2(x).sqrt();
        if !r.is_finite() || r > self.cfg.r_eval_max {
            return Err(Error::Precondition(format!(
                "|x| = {r} exceeds the evaluation radius {}",
                self.cfg.r_eval_max
            )));
        }
        let xhat: Vec<f64> = if r > 0.0 { x.iter().map(|c| c / r).collect() } else { basis(n, n - 1) };
        let mult = match (self.cfg.route, self.boundary.multiplier_degree()) {
            (Route::Auto, Some(d)) => multipliers(&self.params, r, d),
            _ => multipliers(&self.params, r, 0),
        };
        let mut ctx = EvalCtx { field: self, x, r, xhat: &xhat, mult: &mult };
        ctx.eval(&self.boundary)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.eval(x).map(|e| e.value)
    }

    /// Evaluator on the sphere of radius `r`, sharing the multipliers.
    pub fn at_radius(&self, r: f64) -> Result<RadiusEvaluator<'_>> {
        if !(r >= 0.0) || r > self.cfg.r_eval_max {
            return Err(Error::Precondition(format!(
                "|x| = {r} exceeds the evaluation radius {}",
                self.cfg.r_eval_max
            )));
        }
        let d = match self.cfg.route {
            Route::Auto => self.boundary.multiplier_degree().unwrap_or(0),
            Route::Generic => 0,
        };
        Ok(RadiusEvaluator { field: self, r, mult: multipliers(&self.params, r, d) })
    }

    /// Residual of the extension equation at `x`; see [`cs_operator_residual_fn`].
    pub fn cs_residual(&self, x: &[f64], h: f64) -> Result<f64> {
        cs_operator_residual_fn(&self.params, |y| self.value(y), x, h)
    }
}

/// [`ExtensionField`] restricted to one radius.
pub struct RadiusEvaluator<'a> {
    field: &'a ExtensionField,
    r: f64,
    mult: Vec<f64>,
}

impl RadiusEvaluator<'_> {
    pub fn radius(&self) -> f64 {
        self.r
    }

    /// Value at `r·dir` for a unit vector `dir`.
    pub fn value(&self, dir: &[f64]) -> Result<f64> {
        let x: Vec<f64> = dir.iter().map(|c| self.r * c).collect();
        let mut ctx = EvalCtx { field: self.field, x: &x, r: self.r, xhat: dir, mult: &self.mult };
        ctx.eval(&self.field.boundary).map(|e| e.value)
    }
}

struct EvalCtx<'a> {
    field: &'a ExtensionField,
    x: &'a [f64],
    r: f64,
    xhat: &'a [f64],
    mult: &'a [f64],
}

impl EvalCtx<'_> {
    fn eval(&mut self, f: &BoundaryFunction) -> Result<Estimate> {
        let auto = self.field.cfg.route == Route::Auto;
        let n = f.n;
        match &f.repr {
            Repr::Constant(c) => Ok(exact(c * self.mult[0])),
            Repr::Harmonic(terms) if auto => {
                let deg = terms.iter().map(|t| t.degree).max().unwrap_or(0);
                let mut p = vec![0.0; deg + 1];
                let mut s = NeumaierSum::new();
                let mut scale = 0.0;
                for t in terms {
                    gegenbauer_all(n, dot(&t.axis, self.xhat).clamp(-1.0, 1.0), &mut p[..=t.degree]);
                    s.add(t.amp * self.mult[t.degree] * p[t.degree]);
                    scale += t.amp.abs();
                }
                Ok(Estimate { value: s.value(), error: 1e-13 * scale.max(1.0) })
            }
            Repr::Zonal { axis, expansion: Some(e), .. } if auto => {
                let t = dot(axis, self.xhat).clamp(-1.0, 1.0);
                Ok(Estimate { value: e.extend_with(self.mult, t), error: 1e-13 + e.tail() })
            }
            Repr::Zonal { axis, profile, .. } if auto => {
                let g = profile.clone();
                self.nested(axis, move |th| g(th.cos()), false)
            }
            Repr::LogPole { axis, coeff } if auto => {
                let c = *coeff;
                if c == 0.0 {
                    return Ok(exact(0.0));
                }
                self.nested(
                    axis,
                    move |th| {
                        let s = (0.5 * th).sin();
                        c * (2.0 * s * s).ln()
                    },
                    true,
                )
            }
            Repr::Sum(parts) => {
                let mut v = NeumaierSum::new();
                let mut e = 0.0;
                for p in parts {
                    let est = self.eval(p)?;
                    v.add(est.value);
                    e += est.error;
                }
                Ok(Estimate { value: v.value(), error: e })
            }
            _ => Ok(self.generic(f)),
        }
    }

    /// Nested route for zonal data `g(θ)` about `axis`, `θ` the polar angle.
    fn nested<G: Fn(f64) -> f64>(&self, axis: &[f64], g: G, pole_singular: bool) -> Result<Estimate> {
        let params = &self.field.params;
        let n = params.n();
        let r = self.r;
        let alpha = params.alpha();
        let sexp = (n as f64 - alpha) / 2.0;
        let one_m_r2 = (1.0 - r) * (1.0 + r);
        let front = ball_prefactor(params) * one_m_r2.powf(1.0 - alpha);
        // x = r (cb·axis + sb·e⊥)
        let xa = dot(self.x, axis);
        let perp: Vec<f64> = self.x.iter().zip(axis).map(|(xi, a)| xi - xa * a).collect();
        let pr = norm2(&perp).sqrt();
        let (cb, sb) = if r > 0.0 { ((xa / r).clamp(-1.0, 1.0), pr / r) } else { (1.0, 0.0) };
        let beta0 = sb.atan2(cb);
        let rc = r * cb;
        let rs = r * sb;
        let inner_area = if n >= 3 { sphere_area(n - 3) } else { 0.0 };
        let tol = self.field.cfg.tol;
        let inner = |th: f64| -> f64 {
            let (st, ct) = th.sin_cos();
            let a = (rc - ct) * (rc - ct);
            let d = |cbeta: f64, sbeta: f64| a + (rs - st * cbeta).powi(2) + (st * sbeta).powi(2);
            if n == 2 {
                return (-sexp * d(1.0, 0.0).ln()).exp() + (-sexp * d(-1.0, 0.0).ln()).exp();
            }
            let width = ((1.0 - r) + (th - beta0).abs()) / (st * sb).max(1e-300).sqrt();
            let mut breaks = vec![0.0];
            let mut s = width / 4.0;
            while s < PI && breaks.len() < 60 {
                breaks.push(s);
                s *= 2.0;
            }
            breaks.push(PI);
            let f = |b: f64| {
                let (sbeta, cbeta) = b.sin_cos();
                sbeta.powi(n as i32 - 3) * (-sexp * d(cbeta, sbeta).ln()).exp()
            };
            let cfg = AdaptiveConfig { abs_tol: 0.0, rel_tol: 1e-13, max_subdivisions: 300 };
            let est = match adaptive_1d_with(f, &breaks, cfg) {
                Ok(e) => e.value,
                Err(Error::Quadrature { best, .. }) => best,
                Err(_) => f64::NAN,
            };
            inner_area * est
        };
        let outer = |th: f64| th.sin().powi(n as i32 - 2) * g(th) * inner(th);
        let mut breaks = vec![0.0, PI];
        let w = (1.0 - r).max(1e-12);
        let mut s = w / 4.0;
        while s < PI {
            for p in [beta0 - s, beta0 + s] {
                if p > 0.0 && p < PI {
                    breaks.push(p);
                }
            }
            s *= 2.0;
        }
        if beta0 > 0.0 && beta0 < PI {
            breaks.push(beta0);
        }
        if pole_singular {
            let mut s = 0.5;
            while s > 1e-14 {
                breaks.push(s);
                s *= 0.25;
            }
        }
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let cfg = AdaptiveConfig { abs_tol: tol / front.max(1e-300), rel_tol: 1e-13, max_subdivisions: 400 };
        let est = adaptive_1d_with(outer, &breaks, cfg).map_err(|e| match e {
            Error::Quadrature { best, error } => Error::Quadrature { best: front * best, error: front * error },
            other => other,
        })?;
        Ok(Estimate { value: front * est.value, error: front * est.error })
    }

    /// Product rule in polar coordinates about `x̂`, run at two resolutions.
    fn generic(&self, f: &BoundaryFunction) -> Estimate {
        let cfg = &self.field.cfg;
        let fine = generic_route(&self.field.kernel, f, self.x, self.xhat, cfg.theta_nodes, cfg.inner_level);
        let coarse = generic_route(
            &self.field.kernel,
            f,
            self.x,
            self.xhat,
            (cfg.theta_nodes * 3 / 4).max(4),
            (cfg.inner_level * 2 / 3).max(2),
        );
        Estimate { value: fine, error: (fine - coarse).abs() }
    }
}

fn exact(v: f64) -> Estimate {
    Estimate { value: v, error: 1e-14 * v.abs().max(1.0) }
}

fn generic_route(kernel: &BallKernel, f: &BoundaryFunction, x: &[f64], pole: &[f64], m: usize, level: usize) -> f64 {
    let n = x.len();
    let r = norm2(x).sqrt();
    let one_m_x2 = (1.0 - r) * (1.0 + r);
    let frame = orthonormal_complement(pole);
    let (eta, eta_w) = sphere_nodes(n - 2, level);
    let delta = peak_scale(r);
    let theta: Rule1D = graded_rule(0.0, PI, if delta >= PI { f64::INFINITY } else { delta }, m, PI / 8.0);
    let mut xi = vec![0.0; n];
    let mut total = NeumaierSum::new();
    for (&th, &wt) in theta.nodes.iter().zip(&theta.weights) {
        let (st, ct) = th.sin_cos();
        let mut ring = NeumaierSum::new();
        for (e, &we) in eta.chunks_exact(n - 1).zip(&eta_w) {
            for (k, c) in xi.iter_mut().enumerate() {
                *c = ct * pole[k];
            }
            for (j, row) in frame.iter().enumerate() {
                let s = st * e[j];
                for (c, b) in xi.iter_mut().zip(row) {
                    *c += s * b;
                }
            }
            ring.add(we * kernel.eval_parts(one_m_x2, dist2(x, &xi)) * f.eval(&xi));
        }
        total.add(wt * st.powi(n as i32 - 2) * ring.value());
    }
    total.value()
}

/// `P̃_α f(x)` with its error estimate.
pub fn extend_ball(params: &Params, f: &BoundaryFunction, x: &BallPoint) -> Result<Estimate> {
    extend_ball_with(params, f, x, ExtendConfig::default())
}

pub fn extend_ball_with(params: &Params, f: &BoundaryFunction, x: &BallPoint, cfg: ExtendConfig) -> Result<Estimate> {
    if x.is_boundary() {
        return Err(Error::Domain("extension is evaluated at interior points".into()));
    }
    ExtensionField::with_config(*params, f.clone(), cfg)?.eval(x.coords())
}

/// `P_{2−n} f(y)` for half-space data given by its sphere pullback
/// `f ∘ Ψ⁻¹`, evaluated as `P̃_{2−n}(f ∘ Ψ⁻¹)(Ψ(y))`.
pub fn extend_half_limit(f_pulled: &BoundaryFunction, y: &HalfSpacePoint) -> Result<Estimate> {
    extend_half_limit_with(f_pulled, y, ExtendConfig::default())
}

pub fn extend_half_limit_with(f_pulled: &BoundaryFunction, y: &HalfSpacePoint, cfg: ExtendConfig) -> Result<Estimate> {
    if y.is_boundary() {
        return Err(Error::Domain("extension is evaluated at interior points".into()));
    }
    let params = Params::limit(f_pulled.dim())?;
    let yc = y.to_coords();
    let mut x = vec![0.0; yc.len()];
    psi_raw(&yc, &mut x);
    ExtensionField::with_config(params, f_pulled.clone(), cfg)?.eval(&x)
}

/// North pole `eₙ`.
pub fn north_pole(n: usize) -> Vec<f64> {
    basis(n, n - 1)
}

/// Sphere pullback of `w ↦ ln|Ψ′(w)|`, which is `ln(1 − ξₙ)`.
pub fn pullback_log_psi(n: usize) -> Result<BoundaryFunction> {
    BoundaryFunction::log_pole(n, &north_pole(n), 1.0)
}

/// Sphere pullback of `w ↦ ln|φ′_{λ,v}(w)| = ln(λ²/|w − v|²)`:
/// `2 ln λ − ln 2 + ln|Ψ′(v)| − ln(1 − s·ξ) + ln(1 − ξₙ)` with `s = Ψ(v, 0)`.
pub fn pullback_log_inversion(n: usize, lambda: f64, v: &[f64]) -> Result<BoundaryFunction> {
    if v.len() + 1 != n || !(lambda > 0.0) {
        return Err(Error::Domain("inversion needs λ > 0 and v ∈ ℝⁿ⁻¹".into()));
    }
    let mut vy = v.to_vec();
    vy.push(0.0);
    let mut s = vec![0.0; n];
    let dpsi = psi_raw(&vy, &mut s);
    BoundaryFunction::sum(vec![
        BoundaryFunction::constant(n, 2.0 * lambda.ln() - 2f64.ln() + dpsi.ln())?,
        BoundaryFunction::log_pole(n, &s, -1.0)?,
        pullback_log_psi(n)?,
    ])
}

/// Sphere pullback `ξ ↦ f(Ψ⁻¹(ξ))` of half-space boundary data.
pub fn pullback_half<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(
    n: usize,
    f: F,
    smoothness: Smoothness,
) -> Result<BoundaryFunction> {
    BoundaryFunction::custom(
        n,
        move |xi| {
            let mut w = vec![0.0; xi.len()];
            psi_inv_raw(xi, &mut w);
            f(&w[..xi.len() - 1])
        },
        smoothness,
    )
}

/// Value, gradient and Laplacian of `u` at `x` by 5-point central differences.
pub fn fd_grad_laplacian<F: Fn(&[f64]) -> Result<f64>>(u: F, x: &[f64], h: f64) -> Result<(f64, Vec<f64>, f64)> {
    let n = x.len();
    let u0 = u(x)?;
    let mut grad = vec![0.0; n];
    let mut lap = 0.0;
    let mut y = x.to_vec();
    for i in 0..n {
        let mut at = |d: f64| {
            y[i] = x[i] + d;
            let v = u(&y);
            y[i] = x[i];
            v
        };
        let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
        grad[i] = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
        lap += (-p2 + 16.0 * p1 - 30.0 * u0 + 16.0 * m1 - m2) / (12.0 * h * h);
    }
    Ok((u0, grad, lap))
}

fn check_probe(x: &[f64], h: f64) -> Result<()> {
    let r = norm2(x).sqrt();
    if r > PROBE_RADIUS_MAX {
        return Err(Error::Precondition(format!("probe |x| = {r} exceeds {PROBE_RADIUS_MAX}")));
    }
    if r + 2.0 * h > DEFAULT_R_EVAL_MAX {
        return Err(Error::Precondition("finite-difference stencil leaves the evaluable region".into()));
    }
    Ok(())
}

/// `((1−|x|²)/2)^{α−1}·[(1−|x|²)/2·Δu − α x·∇u + α(2−n−α)/2·u]`, which is
/// `div[((1−|x|²)/2)^α ∇u] + α(2−n−α)/2·((1−|x|²)/2)^{α−1} u`.
pub fn cs_operator_residual_fn<F: Fn(&[f64]) -> Result<f64>>(params: &Params, u: F, x: &[f64], h: f64) -> Result<f64> {
    check_probe(x, h)?;
    let (u0, grad, lap) = fd_grad_laplacian(u, x, h)?;
    let n = params.n() as f64;
    let a = params.alpha();
    let s = (1.0 - norm2(x)) / 2.0;
    Ok(s.powf(a - 1.0) * (s * lap - a * dot(x, &grad) + a * (2.0 - n - a) / 2.0 * u0))
}

/// Residual of the extension equation for an [`ExtensionField`] at `x`.
pub fn cs_operator_residual(params: &Params, field: &ExtensionField, x: &BallPoint) -> Result<f64> {
    cs_operator_residual_fn(params, |y| field.value(y), x.coords(), DEFAULT_FD_STEP)
}

/// `((1−|x|²)/2)² Δu + (n−2)(1−|x|²)/2·⟨x, ∇u⟩`.
pub fn hyp_harmonic_residual<F: Fn(&[f64]) -> Result<f64>>(u: F, x: &[f64], h: f64) -> Result<f64> {
    check_probe(x, h)?;
    let (_, grad, lap) = fd_grad_laplacian(u, x, h)?;
    let s = (1.0 - norm2(x)) / 2.0;
    Ok(s * s * lap + (x.len() as f64 - 2.0) * s * dot(x, &grad))
}
