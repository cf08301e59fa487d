//! Zonal reductions: Gegenbauer polynomials, Funk–Hecke multipliers of the
//! ball kernel, and expansions of zonal boundary profiles.

use crate::quad::rules::{composite_rule, graded_breakpoints, Rule1D};
use crate::quad::sum::neumaier_sum;
use crate::specfun::{ball_prefactor, sphere_area, Params};
use std::f64::consts::PI;

/// Nodes per panel of the graded zonal rule.
pub const ZONAL_NODES: usize = 16;
/// Largest degree fitted by [`ZonalExpansion::fit`] by default.
pub const DEFAULT_MAX_DEGREE: usize = 96;

/// `|x − ξ|²` for `|x| = r`, `|ξ| = 1` at angle `φ`, in the cancellation-free
/// form `(1 − r)² + 4r sin²(φ/2)`.
#[inline]
pub fn zonal_q(r: f64, phi: f64) -> f64 {
    let s = (0.5 * phi).sin();
    (1.0 - r) * (1.0 - r) + 4.0 * r * s * s
}

/// Scale of the kernel peak at `φ = 0` for radius `r`.
pub fn peak_scale(r: f64) -> f64 {
    if r <= 0.0 {
        f64::INFINITY
    } else {
        (1.0 - r) / r.sqrt()
    }
}

/// Graded composite Gauss–Legendre rule on `[0, π]` for zonal integrands at
/// radius `r` carrying oscillation up to degree `degree`.
///
/// The rule depends smoothly on `r`, so finite differences of integrals taken
/// with it are free of adaptive-refinement jumps.
pub fn zonal_rule(r: f64, degree: usize) -> Rule1D {
    let max_len = if degree == 0 { PI / 4.0 } else { (PI / 4.0).min(8.0 / degree as f64) };
    let d = peak_scale(r);
    let d = if d >= PI { f64::INFINITY } else { d };
    composite_rule(&graded_breakpoints(0.0, PI, d, max_len), ZONAL_NODES)
}

/// Normalised Gegenbauer polynomials `P_ℓ` for `Sⁿ⁻¹` (`P_ℓ(1) = 1`),
/// `ℓ = 0..out.len()`, at `t`. For `n = 2` these are Chebyshev polynomials.
pub fn gegenbauer_all(n: usize, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = t;
    }
    let nm2 = n as f64 - 2.0;
    for l in 1..out.len().saturating_sub(1) {
        let lf = l as f64;
        out[l + 1] = ((2.0 * lf + nm2) * t * out[l] - lf * out[l - 1]) / (lf + nm2);
    }
}

/// Single normalised Gegenbauer polynomial.
pub fn gegenbauer(n: usize, l: usize, t: f64) -> f64 {
    let mut buf = vec![0.0; l + 1];
    gegenbauer_all(n, t, &mut buf);
    buf[l]
}

/// Funk–Hecke multipliers `m_ℓ(r)`, `ℓ = 0..=max_degree`, of the ball
/// kernel: `P̃_α[P_ℓ(e·ξ)](x) = m_ℓ(|x|) P_ℓ(e·x/|x|)`. `m_0 = h`.
pub fn multipliers(params: &Params, r: f64, max_degree: usize) -> Vec<f64> {
    let n = params.n();
    let mut m = vec![0.0; max_degree + 1];
    let pref = ball_prefactor(params);
    if r == 0.0 {
        m[0] = pref * sphere_area(n - 1);
        return m;
    }
    let s = (n as f64 - params.alpha()) / 2.0;
    let front = pref * sphere_area(n - 2) * ((1.0 - r) * (1.0 + r)).powf(1.0 - params.alpha());
    let rule = zonal_rule(r, max_degree);
    let mut p = vec![0.0; max_degree + 1];
    let mut terms: Vec<Vec<f64>> = vec![Vec::with_capacity(rule.len()); max_degree + 1];
    for (&phi, &w) in rule.nodes.iter().zip(&rule.weights) {
        let base = w * phi.sin().powi(n as i32 - 2) * (-s * zonal_q(r, phi).ln()).exp();
        gegenbauer_all(n, phi.cos(), &mut p);
        for l in 0..=max_degree {
            terms[l].push(base * p[l]);
        }
    }
    for l in 0..=max_degree {
        m[l] = front * neumaier_sum(terms[l].iter().copied());
    }
    m
}

/// Kernel mass `h(r) = ∫ p̃_α(x, ξ) dξ` at `|x| = r`.
pub fn kernel_mass(params: &Params, r: f64) -> f64 {
    multipliers(params, r, 0)[0]
}

/// A zonal profile `g(e·ξ)` expanded as `Σ a_ℓ P_ℓ(e·ξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalExpansion {
    n: usize,
    coeffs: Vec<f64>,
    tail: f64,
}

impl ZonalExpansion {
    /// Project `g` onto `P_0..P_L` by composite Gauss–Legendre in the angle.
    pub fn fit<G: Fn(f64) -> f64>(n: usize, g: G, max_degree: usize) -> Self {
        let panels = 64.max(max_degree);
        let breaks: Vec<f64> = (0..=panels).map(|k| PI * k as f64 / panels as f64).collect();
        let rule = composite_rule(&breaks, ZONAL_NODES);
        let mut p = vec![0.0; max_degree + 1];
        let mut num = vec![Vec::with_capacity(rule.len()); max_degree + 1];
        let mut den = vec![Vec::with_capacity(rule.len()); max_degree + 1];
        for (&phi, &w) in rule.nodes.iter().zip(&rule.weights) {
            let t = phi.cos();
            let wt = w * phi.sin().powi(n as i32 - 2);
            let gv = g(t);
            gegenbauer_all(n, t, &mut p);
            for l in 0..=max_degree {
                num[l].push(wt * gv * p[l]);
                den[l].push(wt * p[l] * p[l]);
            }
        }
        let coeffs: Vec<f64> = (0..=max_degree)
            .map(|l| neumaier_sum(num[l].iter().copied()) / neumaier_sum(den[l].iter().copied()))
            .collect();
        let k = (max_degree / 4).max(1);
        let tail = coeffs[max_degree + 1 - k..].iter().map(|c| c.abs()).sum::<f64>();
        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
        let cutoff = 1e-17 * scale;
        let last = coeffs.iter().rposition(|c| c.abs() > cutoff).unwrap_or(0);
        Self { n, coeffs: coeffs[..=last].to_vec(), tail }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Sum of `|a_ℓ|` over the top quarter of fitted degrees.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// Tail below `tol` relative to `max(1, max |a_ℓ|)`.
    pub fn converged(&self, tol: f64) -> bool {
        let scale = self.coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        self.tail <= tol * scale
    }

    /// Evaluate the truncated series at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let mut p = vec![0.0; self.coeffs.len()];
        gegenbauer_all(self.n, t, &mut p);
        neumaier_sum(self.coeffs.iter().zip(&p).map(|(a, b)| a * b))
    }

    /// Extension at radius `r` along a direction with `e·x̂ = t`, given the
    /// multipliers at `r`.
    pub fn extend_with(&self, mult: &[f64], t: f64) -> f64 {
        let mut p = vec![0.0; self.coeffs.len()];
        gegenbauer_all(self.n, t, &mut p);
        neumaier_sum((0..self.coeffs.len()).map(|l| self.coeffs[l] * mult[l] * p[l]))
    }
}
