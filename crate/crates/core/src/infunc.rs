//! The radial functions `h(r)` (kernel mass) and `Ĩₙ(r)`, evaluated by
//! independent methods, with induction, hyperbolic-Laplacian and boundary
//! checks.

use crate::error::{Error, Result};
use crate::quad::adaptive::{adaptive_1d_with, AdaptiveConfig, Estimate};
use crate::quad::extrap::{least_squares, Basis};
use crate::quad::rules::graded_breakpoints;
use crate::specfun::{c_alpha, check_dim, digamma, ln_gamma, sphere_area, Params};
use crate::zonal::{kernel_mass, peak_scale, zonal_q};
use serde::Serialize;
use std::f64::consts::{LN_2, PI};
use std::fmt;

/// Absolute tolerance of the log-moment integral in the integral method.
pub const IN_INTEGRAL_TOL: f64 = 1e-14;
/// Step of the two-point first-derivative stencil.
pub const FD_STEP_1: f64 = 1e-5;
/// Step of the five-point stencils.
pub const FD_STEP_5: f64 = 1e-3;
/// Closest approach to `r ∈ {0, 1}` accepted by the finite-difference path.
pub const FD_ENDPOINT_GUARD: f64 = 1e-4;
/// Closest approach to `r ∈ {0, 1}` accepted by the hyperbolic residual.
pub const HYP_ENDPOINT_GUARD: f64 = 1e-3;
// Below this radius the Ĩ₃ closed form is summed as a power series.
const N3_SERIES_RADIUS: f64 = 0.1;

/// Evaluation method for `Ĩₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Integral,
    ClosedEven,
    ClosedN3,
    Induction,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Integral => "integral",
            Method::ClosedEven => "closed_even",
            Method::ClosedN3 => "closed_n3",
            Method::Induction => "induction",
        };
        f.write_str(s)
    }
}

impl Method {
    pub fn applies_to(self, n: usize) -> bool {
        match self {
            Method::Integral => (2..=6).contains(&n),
            Method::ClosedEven => n.is_multiple_of(2) && (2..=6).contains(&n),
            Method::ClosedN3 => n == 3,
            Method::Induction => (4..=6).contains(&n),
        }
    }

    /// Whether derivatives are available in closed form.
    pub fn is_analytic(self) -> bool {
        !matches!(self, Method::Integral)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("radius {r} outside [0, 1)")));
    }
    Ok(())
}

fn check_method(n: usize, method: Method) -> Result<()> {
    check_dim(n)?;
    if !method.applies_to(n) {
        return Err(Error::MethodMismatch { method: method.to_string(), n });
    }
    Ok(())
}

/// `h(r) = ∫ p̃_α(x, ξ) dξ` at `|x| = r`, by the zonal reduction.
pub fn mass_h(params: &Params, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(kernel_mass(params, r))
}

/// Lower and upper bounds for `h(r)`:
/// `(2/(1+r))^ε Γ((n−α)/2)Γ((n−1)/2)/(Γ(n−1)Γ((1−α)/2))` and `(2/(1+r))^ε`.
pub fn mass_bounds(params: &Params, r: f64) -> (f64, f64) {
    let n = params.n() as f64;
    let a = params.alpha();
    let upper = (2.0 / (1.0 + r)).powf(params.eps());
    let ratio = (ln_gamma((n - a) / 2.0).unwrap() + ln_gamma((n - 1.0) / 2.0).unwrap()
        - ln_gamma(n - 1.0).unwrap()
        - ln_gamma((1.0 - a) / 2.0).unwrap())
    .exp();
    (upper * ratio, upper)
}

/// Which power of `1 − 2r cos φ + r²` a [`zonal_power`] integral uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZonalPower {
    PowerK,
    PowerKPlus1,
}

/// `∫₀^π sin^{k−1}φ (1 − 2r cos φ + r²)^{−k or −(k+1)} dφ` by adaptive
/// quadrature.
pub fn zonal_power(k: usize, r: f64, variant: ZonalPower) -> Result<Estimate> {
    if k < 2 {
        return Err(Error::Domain("zonal power needs k ≥ 2".into()));
    }
    check_radius(r)?;
    let e = match variant {
        ZonalPower::PowerK => k as f64,
        ZonalPower::PowerKPlus1 => k as f64 + 1.0,
    };
    let breaks = graded_breakpoints(0.0, PI, peak_scale(r), PI / 4.0);
    let cfg = AdaptiveConfig { abs_tol: 0.0, rel_tol: 1e-15, max_subdivisions: 200 };
    adaptive_1d_with(|phi| phi.sin().powi(k as i32 - 1) * zonal_q(r, phi).powf(-e), &breaks, cfg)
}

/// Closed forms of the [`zonal_power`] integrals:
/// `A_k/(1−r²)^k` and `A_k (1+r²)/(1−r²)^{k+2}`, `A_k = 2^{k−1}Γ(k/2)²/Γ(k)`.
pub fn zonal_power_closed(k: usize, r: f64, variant: ZonalPower) -> f64 {
    let kf = k as f64;
    let a = ((kf - 1.0) * LN_2 + 2.0 * ln_gamma(kf / 2.0).unwrap() - ln_gamma(kf).unwrap()).exp();
    let s = (1.0 - r) * (1.0 + r);
    match variant {
        ZonalPower::PowerK => a / s.powi(k as i32),
        ZonalPower::PowerKPlus1 => a * (1.0 + r * r) / s.powi(k as i32 + 2),
    }
}

/// `K_n = 2^{n−2} Γ((n−1)/2)² / Γ(n−1)`, the normaliser of the limit-case
/// zonal kernel.
fn zonal_norm(n: usize) -> f64 {
    let nf = n as f64;
    ((nf - 2.0) * LN_2 + 2.0 * ln_gamma((nf - 1.0) / 2.0).unwrap() - ln_gamma(nf - 1.0).unwrap()).exp()
}

/// Rational form of `2 ln 2 − ψ(n−1) + ψ((n−1)/2)`.
pub fn in_constant(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        (n / 2..=n - 2).map(|k| 1.0 / k as f64).sum()
    } else {
        2.0 * LN_2 - ((n - 1) / 2..=n - 2).map(|k| 1.0 / k as f64).sum::<f64>()
    }
}

/// The same constant from digamma values.
pub fn in_constant_digamma(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * LN_2 - digamma(nf - 1.0).unwrap() + digamma((nf - 1.0) / 2.0).unwrap()
}

/// `(1/K_n) ∫₀^π sin^{n−2}φ ((1−r²)/q)^{n−1} ln(q/(1−r²)²) dφ`.
fn log_moment(n: usize, r: f64) -> Result<Estimate> {
    let s = (1.0 - r) * (1.0 + r);
    let breaks = graded_breakpoints(0.0, PI, peak_scale(r), PI / 4.0);
    let cfg = AdaptiveConfig { abs_tol: IN_INTEGRAL_TOL, rel_tol: 0.0, max_subdivisions: 200 };
    let k = zonal_norm(n);
    let f = |phi: f64| {
        let q = zonal_q(r, phi);
        phi.sin().powi(n as i32 - 2) * (s / q).powi(n as i32 - 1) * (q / (s * s)).ln()
    };
    let e = adaptive_1d_with(f, &breaks, cfg)?;
    Ok(Estimate { value: e.value / k, error: e.error / k })
}

/// The scaled log-moment `aₙ(r)`, with `Ĩₙ = 2aₙ − 2 ln(1−r²) + const`.
pub fn a_n(n: usize, r: f64) -> Result<f64> {
    check_dim(n)?;
    check_radius(r)?;
    let s = (1.0 - r) * (1.0 + r);
    Ok((log_moment(n, r)?.value + 2.0 * s.ln()) / 2.0)
}

fn closed_even_coeffs(n: usize) -> Vec<(i32, f64)> {
    let nf = n as f64;
    (1..n / 2)
        .map(|k| {
            let kf = k as f64;
            let c = (ln_gamma((nf - 2.0) / 2.0).unwrap() + ln_gamma(nf - kf - 1.0).unwrap()
                - ln_gamma(nf - 2.0).unwrap()
                - ln_gamma(nf / 2.0 - kf).unwrap())
            .exp()
                / (2.0 * kf);
            (k as i32, c)
        })
        .collect()
}

/// Closed form for even `n`: value and first two derivatives in `r`.
fn closed_even(n: usize, r: f64) -> [f64; 3] {
    let s = (1.0 - r) * (1.0 + r);
    let mut out = [0.0; 3];
    for (k, c) in closed_even_coeffs(n) {
        let kf = k as f64;
        out[0] += c * s.powi(k);
        // d/dr s^k = −2kr s^{k−1}
        out[1] += -2.0 * c * kf * r * s.powi(k - 1);
        out[2] += -2.0 * c * kf * (s.powi(k - 1) - 2.0 * (kf - 1.0) * r * r * s.powi(k - 2));
    }
    out
}

/// Closed form for `n = 3`: value and first two derivatives in `r`.
fn closed_n3(r: f64) -> [f64; 3] {
    if r < N3_SERIES_RADIUS {
        // g/(2r) = −1 − Σ_{k≥1} 2 r^{2k} / ((2k−1)(2k)(2k+1))
        let mut out = [2.0 * LN_2 - 1.0, 0.0, 0.0];
        for k in 1..40 {
            let kf = k as f64;
            let c = 2.0 / ((2.0 * kf - 1.0) * (2.0 * kf) * (2.0 * kf + 1.0));
            let p = 2 * k;
            out[0] -= c * r.powi(p);
            out[1] -= c * (p as f64) * r.powi(p - 1);
            out[2] -= c * (p as f64) * (p as f64 - 1.0) * r.powi(p - 2);
            if c * r.powi(p - 2) < 1e-20 {
                break;
            }
        }
        return out;
    }
    let (lm, lp) = ((1.0 - r).ln(), (1.0 + r).ln());
    let g = (1.0 - r).powi(2) * lm - (1.0 + r).powi(2) * lp;
    let g1 = -2.0 * (1.0 - r) * lm - 2.0 * (1.0 + r) * lp - 2.0;
    let g2 = 2.0 * (lm - lp);
    [2.0 * LN_2 + g / (2.0 * r), g1 / (2.0 * r) - g / (2.0 * r * r), g2 / (2.0 * r) - g1 / (r * r) + g / (r * r * r)]
}

/// Closed-form value and derivatives of `Ĩ_{n−2}` used by the induction method.
fn lower_closed(n: usize, r: f64) -> [f64; 3] {
    if n == 5 {
        closed_n3(r)
    } else {
        closed_even(n - 2, r)
    }
}

/// Induction method: `Ĩₙ` from the closed form of `Ĩ_{n−2}`.
fn induction(n: usize, r: f64) -> [f64; 3] {
    let m = n as f64 - 3.0;
    let [v, d1, d2] = lower_closed(n, r);
    // Ĩ'_{n−2}/r, continuous at r = 0
    let d1_over_r = if r < 1e-6 { d2 } else { d1 / r };
    let value = (1.0 - r.powi(4)) / (4.0 * m) * d1_over_r + v + (1.0 - r * r) / (2.0 * m);
    let deriv = if r < 1e-6 {
        0.0
    } else {
        -(3.0 * r.powi(4) + 1.0) / (4.0 * r * r * m) * d1 + (1.0 - r.powi(4)) / (4.0 * r * m) * d2 + d1 - r / m
    };
    [value, deriv, f64::NAN]
}

/// `Ĩₙ(r)` by the chosen method.
pub fn i_n(n: usize, r: f64, method: Method) -> Result<f64> {
    check_method(n, method)?;
    check_radius(r)?;
    Ok(match method {
        Method::Integral => log_moment(n, r)?.value + in_constant(n),
        Method::ClosedEven => closed_even(n, r)[0],
        Method::ClosedN3 => closed_n3(r)[0],
        Method::Induction => induction(n, r)[0],
    })
}

/// `Ĩₙ(r)` from the raw definition with digamma constants:
/// `2[2^{1−n}c ∫ (1−r²)^{n−1} ln|x−ξ| / |x−ξ|^{2n−2} dξ − ln(1−r²) + ln 2
/// − ψ(n−1)/2 + ψ((n−1)/2)/2]`.
pub fn i_n_first_form(n: usize, r: f64) -> Result<f64> {
    check_dim(n)?;
    check_radius(r)?;
    let nf = n as f64;
    let params = Params::limit(n)?;
    let pref = 2f64.powf(1.0 - nf) * c_alpha(&params) * sphere_area(n - 2);
    let s = (1.0 - r) * (1.0 + r);
    let breaks = graded_breakpoints(0.0, PI, peak_scale(r), PI / 4.0);
    let cfg = AdaptiveConfig { abs_tol: IN_INTEGRAL_TOL, rel_tol: 0.0, max_subdivisions: 200 };
    let e = adaptive_1d_with(
        |phi| {
            let q = zonal_q(r, phi);
            phi.sin().powi(n as i32 - 2) * (s / q).powi(n as i32 - 1) * 0.5 * q.ln()
        },
        &breaks,
        cfg,
    )?;
    let d = pref * e.value - s.ln() + LN_2 - digamma(nf - 1.0)? / 2.0 + digamma((nf - 1.0) / 2.0)? / 2.0;
    Ok(2.0 * d)
}

/// `Ĩₙ` as a radial profile with a fixed evaluation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadialProfile {
    n: usize,
    method: Method,
}

impl RadialProfile {
    pub fn new(n: usize, method: Method) -> Result<Self> {
        check_method(n, method)?;
        Ok(Self { n, method })
    }

    /// Closed form where one exists, the induction method from `Ĩ₃` for
    /// `n = 5`.
    pub fn best(n: usize) -> Result<Self> {
        check_dim(n)?;
        let method = match n {
            3 => Method::ClosedN3,
            5 => Method::Induction,
            _ => Method::ClosedEven,
        };
        Self::new(n, method)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        i_n(self.n, r, self.method)
    }

    /// `dĨₙ/dr`: analytic for closed forms, two-point central difference
    /// (step [`FD_STEP_1`]) otherwise.
    pub fn d1(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        match self.method {
            Method::ClosedEven => Ok(closed_even(self.n, r)[1]),
            Method::ClosedN3 => Ok(closed_n3(r)[1]),
            Method::Induction => Ok(induction(self.n, r)[1]),
            Method::Integral => {
                if !(FD_ENDPOINT_GUARD..=1.0 - FD_ENDPOINT_GUARD).contains(&r) {
                    return Err(Error::Domain(format!("r = {r} too close to an endpoint for the stencil")));
                }
                let h = FD_STEP_1;
                Ok((self.value(r + h)? - self.value(r - h)?) / (2.0 * h))
            }
        }
    }

    /// `(Ĩₙ′, Ĩₙ″)`: analytic for closed forms, five-point central
    /// differences with step `h` otherwise.
    pub fn derivs5(&self, r: f64, h: f64) -> Result<(f64, f64)> {
        check_radius(r)?;
        match self.method {
            Method::ClosedEven => {
                let d = closed_even(self.n, r);
                Ok((d[1], d[2]))
            }
            Method::ClosedN3 => {
                let d = closed_n3(r);
                Ok((d[1], d[2]))
            }
            _ => {
                if r - 2.0 * h <= 0.0 || r + 2.0 * h >= 1.0 {
                    return Err(Error::Domain(format!("r = {r} too close to an endpoint for the stencil")));
                }
                let f: Vec<f64> =
                    [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|k| self.value(r + k * h)).collect::<Result<_>>()?;
                let d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h);
                let d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
                Ok((d1, d2))
            }
        }
    }
}

/// Profile for `Ĩ_{n−2}` paired with `method` in the induction relation:
/// a closed form when one exists, else `method`.
fn lower_profile(n: usize, method: Method) -> Result<RadialProfile> {
    let m = n - 2;
    match method {
        Method::Integral => RadialProfile::new(m, Method::Integral),
        _ => RadialProfile::best(m),
    }
}

/// Residual of the induction relation
/// `Ĩₙ = (1−r⁴)/(4r(n−3)) Ĩ′_{n−2} + Ĩ_{n−2} + (1−r²)/(2(n−3))`
/// with both sides from the integral method and `Ĩ′_{n−2}` by central
/// difference.
pub fn induction_residual(n: usize, r: f64) -> Result<f64> {
    induction_residual_with(n, r, Method::Integral)
}

/// [`induction_residual`] with a chosen method: closed forms (and analytic
/// derivatives) are used wherever `method` is analytic and applicable.
pub fn induction_residual_with(n: usize, r: f64, method: Method) -> Result<f64> {
    if !(4..=6).contains(&n) {
        return Err(Error::Domain(format!("induction relation needs 4 ≤ n ≤ 6, got {n}")));
    }
    check_radius(r)?;
    if r == 0.0 {
        return Err(Error::Domain("induction relation is singular at r = 0".into()));
    }
    let upper = if method.applies_to(n) && method != Method::Induction {
        RadialProfile::new(n, method)?
    } else {
        RadialProfile::new(n, Method::Integral)?
    };
    let lower = lower_profile(n, method)?;
    let m = n as f64 - 3.0;
    let rhs = (1.0 - r.powi(4)) / (4.0 * r * m) * lower.d1(r)? + lower.value(r)? + (1.0 - r * r) / (2.0 * m);
    Ok(upper.value(r)? - rhs)
}

/// `((1−r²)/2)² (Ĩ″ + (n−1)Ĩ′/r) + (n−2) r (1−r²) Ĩ′/2 + (n−2)(1−r²)/2`.
pub fn hyp_laplace_residual_in(n: usize, r: f64, method: Method) -> Result<f64> {
    hyp_laplace_residual_in_step(n, r, method, FD_STEP_5)
}

/// [`hyp_laplace_residual_in`] with an explicit finite-difference step.
pub fn hyp_laplace_residual_in_step(n: usize, r: f64, method: Method, h: f64) -> Result<f64> {
    check_method(n, method)?;
    if !(HYP_ENDPOINT_GUARD..=1.0 - HYP_ENDPOINT_GUARD).contains(&r) {
        return Err(Error::Domain(format!("r = {r} too close to an endpoint")));
    }
    if n == 2 {
        return Ok(0.0);
    }
    let (d1, d2) = RadialProfile::new(n, method)?.derivs5(r, h)?;
    let nf = n as f64;
    let s = (1.0 - r) * (1.0 + r);
    Ok((s / 2.0).powi(2) * (d2 + (nf - 1.0) * d1 / r) + (nf - 2.0) * r * s * d1 / 2.0 + (nf - 2.0) * s / 2.0)
}

/// Extrapolated boundary behaviour of `Ĩₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryLimit {
    pub value: f64,
    pub slope: f64,
    /// Disagreement between fits on `j = 4..14` and `j = 5..14`.
    pub value_spread: f64,
    pub slope_spread: f64,
}

/// Divergence threshold for the two boundary fits.
pub const BOUNDARY_SPREAD_TOL: f64 = 1e-5;

const VALUE_BASIS: [Basis; 6] = [|_| 1.0, |h| h, |h| h * h, |h| h * h * h.ln(), |h| h * h * h, |h| h * h * h * h.ln()];
const SLOPE_BASIS: [Basis; 5] = [|_| 1.0, |h| h, |h| h * h.ln(), |h| h * h, |h| h * h * h.ln()];

fn boundary_fit(hs: &[f64], vals: &[f64]) -> Result<(f64, f64)> {
    let value = least_squares(hs, vals, &VALUE_BASIS)?[0];
    let quot: Vec<f64> = hs.iter().zip(vals).map(|(h, v)| (value - v) / h).collect();
    let slope = least_squares(hs, &quot, &SLOPE_BASIS)?[0];
    Ok((value, slope))
}

/// Limit value and slope of `Ĩₙ` at `r = 1` from samples `r = 1 − 2^{−j}`,
/// `j = 4..14`, by least-squares extrapolation of the values and of the
/// difference quotients `(Ĩ(1) − Ĩ(r))/(1 − r)`.
pub fn boundary_check(n: usize) -> Result<BoundaryLimit> {
    check_dim(n)?;
    let hs: Vec<f64> = (4..=14).map(|j| 0.5f64.powi(j)).collect();
    let vals: Vec<f64> = hs.iter().map(|h| i_n(n, 1.0 - h, Method::Integral)).collect::<Result<_>>()?;
    let (value, slope) = boundary_fit(&hs, &vals)?;
    let (v2, s2) = boundary_fit(&hs[1..], &vals[1..])?;
    let out = BoundaryLimit { value, slope, value_spread: (value - v2).abs(), slope_spread: (slope - s2).abs() };
    if out.value_spread > BOUNDARY_SPREAD_TOL || out.slope_spread > BOUNDARY_SPREAD_TOL || !value.is_finite() {
        return Err(Error::Extrapolation(format!(
            "boundary fits disagree: value spread {:e}, slope spread {:e}",
            out.value_spread, out.slope_spread
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::ball_prefactor;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mass_examples() {
        for n in 2..=6 {
            for &r in &[0.0, 0.4, 0.9, 0.99] {
                assert_abs_diff_eq!(mass_h(&Params::limit(n).unwrap(), r).unwrap(), 1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(mass_h(&Params::new(n, 0.0).unwrap(), r).unwrap(), 1.0, epsilon = 1e-10);
            }
            let p = Params::new(n, 0.3).unwrap();
            assert_abs_diff_eq!(mass_h(&p, 0.0).unwrap(), sphere_area(n - 1) * ball_prefactor(&p), epsilon = 1e-14);
        }
        assert!(mass_h(&Params::limit(3).unwrap(), 1.0).is_err());
    }

    #[test]
    fn mass_bounds_hold() {
        for n in 2..=6 {
            for &a in &[2.0 - n as f64, -0.5, 0.0, 0.5, 0.9] {
                if a < 2.0 - n as f64 {
                    continue;
                }
                let p = Params::new(n, a).unwrap();
                for &r in &[0.0, 0.3, 0.7, 0.99] {
                    let h = mass_h(&p, r).unwrap();
                    let (lo, hi) = mass_bounds(&p, r);
                    assert!(lo - 1e-10 <= h && h <= hi + 1e-10, "n={n} a={a} r={r}");
                    assert!(r.powi(n as i32 - 1) * h <= 1.0 + 1e-10);
                }
            }
        }
    }

    #[test]
    fn zonal_power_examples() {
        let e = zonal_power(2, 0.5, ZonalPower::PowerK).unwrap();
        assert_abs_diff_eq!(e.value, 32.0 / 9.0, epsilon = 1e-13);
        let e = zonal_power(2, 0.5, ZonalPower::PowerKPlus1).unwrap();
        assert_abs_diff_eq!(e.value, 640.0 / 81.0, epsilon = 1e-13);
        for k in 2..=6 {
            let kf = k as f64;
            let lim = PI.sqrt() * (ln_gamma(kf / 2.0).unwrap() - ln_gamma((kf + 1.0) / 2.0).unwrap()).exp();
            assert_abs_diff_eq!(zonal_power(k, 1e-9, ZonalPower::PowerK).unwrap().value, lim, epsilon = 1e-7);
            for &r in &[0.1, 0.5, 0.9] {
                for v in [ZonalPower::PowerK, ZonalPower::PowerKPlus1] {
                    let c = zonal_power_closed(k, r, v);
                    assert!((zonal_power(k, r, v).unwrap().value - c).abs() <= 1e-12 * c.max(1.0));
                }
            }
        }
    }

    #[test]
    fn constants_agree_with_digamma() {
        for n in 2..=6 {
            assert_abs_diff_eq!(in_constant(n), in_constant_digamma(n), epsilon = 1e-13);
        }
    }

    #[test]
    fn in_examples() {
        for &r in &[0.0, 0.3, 0.8] {
            assert_abs_diff_eq!(i_n(2, r, Method::Integral).unwrap(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(i_n(2, r, Method::ClosedEven).unwrap(), 0.0, epsilon = 0.0);
            let s = 1.0 - r * r;
            assert_abs_diff_eq!(i_n(4, r, Method::ClosedEven).unwrap(), s / 2.0, epsilon = 1e-15);
            assert_abs_diff_eq!(i_n(6, r, Method::ClosedEven).unwrap(), s / 2.0 + s * s / 12.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(i_n(3, 0.0, Method::ClosedN3).unwrap(), 4f64.ln() - 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(i_n(3, 1e-6, Method::ClosedN3).unwrap(), 4f64.ln() - 1.0, epsilon = 1e-12);
        assert!(matches!(i_n(5, 0.3, Method::ClosedEven), Err(Error::MethodMismatch { .. })));
        assert!(matches!(i_n(4, 0.3, Method::ClosedN3), Err(Error::MethodMismatch { .. })));
    }

    #[test]
    fn n3_series_matches_closed_form_at_switch() {
        let r = N3_SERIES_RADIUS;
        let a = closed_n3(r * (1.0 - 1e-12));
        let b = closed_n3(r * (1.0 + 1e-12));
        for i in 0..3 {
            assert_abs_diff_eq!(a[i], b[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn integral_matches_closed_forms() {
        for &r in &[0.0, 0.05, 0.3, 0.6, 0.95] {
            for (n, m) in [(3, Method::ClosedN3), (4, Method::ClosedEven), (6, Method::ClosedEven)] {
                let a = i_n(n, r, Method::Integral).unwrap();
                let b = i_n(n, r, m).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
            for n in 4..=6 {
                let a = i_n(n, r, Method::Integral).unwrap();
                let b = i_n(n, r, Method::Induction).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn first_form_agrees() {
        assert_abs_diff_eq!(i_n_first_form(4, 0.0).unwrap(), 0.5, epsilon = 1e-12);
        for n in 2..=6 {
            for &r in &[0.2, 0.7] {
                let a = i_n_first_form(n, r).unwrap();
                let b = i_n(n, r, Method::Integral).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn in_is_twice_alpha_derivative_of_mass() {
        let h = 1e-5;
        for n in 3..=6 {
            let a0 = 2.0 - n as f64;
            for &r in &[0.2, 0.6] {
                let hp = mass_h(&Params::new(n, a0 + h).unwrap(), r).unwrap();
                let hpp = mass_h(&Params::new(n, a0 + 2.0 * h).unwrap(), r).unwrap();
                // one-sided second-order difference (α cannot go below 2 − n)
                let d = (-3.0 * 1.0 + 4.0 * hp - hpp) / (2.0 * h);
                assert_abs_diff_eq!(2.0 * d, i_n(n, r, Method::Integral).unwrap(), epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn an_recursion_holds() {
        // aₙ = (1−r⁴)/(4r(n−3)) a′_{n−2} + a_{n−2} + 1/(2(n−2)) + (1+r²)/(4(n−3))
        for n in 4..=6 {
            let m = n as f64 - 3.0;
            for &r in &[0.2, 0.5, 0.8] {
                let h = 1e-5;
                let d = (a_n(n - 2, r + h).unwrap() - a_n(n - 2, r - h).unwrap()) / (2.0 * h);
                let rhs = (1.0 - r.powi(4)) / (4.0 * r * m) * d
                    + a_n(n - 2, r).unwrap()
                    + 1.0 / (2.0 * (n as f64 - 2.0))
                    + (1.0 + r * r) / (4.0 * m);
                assert_abs_diff_eq!(a_n(n, r).unwrap(), rhs, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn induction_examples() {
        for &r in &[0.1, 0.5, 0.9] {
            assert_abs_diff_eq!(induction_residual_with(4, r, Method::ClosedEven).unwrap(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(induction_residual_with(6, r, Method::ClosedEven).unwrap(), 0.0, epsilon = 1e-15);
        }
        for k in 1..=9 {
            let r = k as f64 / 10.0;
            assert!(induction_residual(5, r).unwrap().abs() < 1e-6);
        }
        assert!(induction_residual(3, 0.5).is_err());
        assert!(induction_residual(5, 0.99995).is_err());
    }

    #[test]
    fn hyperbolic_residual_examples() {
        for &r in &[0.05, 0.3, 0.6, 0.9] {
            assert_abs_diff_eq!(hyp_laplace_residual_in(4, r, Method::ClosedEven).unwrap(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(hyp_laplace_residual_in(2, r, Method::Integral).unwrap(), 0.0, epsilon = 0.0);
            assert!(hyp_laplace_residual_in(3, r, Method::ClosedN3).unwrap().abs() < 1e-5);
            assert!(hyp_laplace_residual_in(6, r, Method::ClosedEven).unwrap().abs() < 1e-12);
            assert!(hyp_laplace_residual_in(5, r, Method::Integral).unwrap().abs() < 1e-5);
        }
        assert!(hyp_laplace_residual_in(3, 0.9995, Method::ClosedN3).is_err());
    }

    #[test]
    fn boundary_examples() {
        let b = boundary_check(4).unwrap();
        assert_abs_diff_eq!(b.value, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(b.slope, -1.0, epsilon = 1e-4);
        let b = boundary_check(3).unwrap();
        assert_abs_diff_eq!(b.value, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(b.slope, -1.0, epsilon = 1e-4);
        let b = boundary_check(2).unwrap();
        assert_abs_diff_eq!(b.value, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(b.slope, 0.0, epsilon = 1e-4);
    }
}
