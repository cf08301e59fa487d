//! Poisson kernels on the ball and the half-space, and the moving-sphere
//! difference kernel `K`.

use crate::error::{Error, Result};
use crate::geom::{dist2, invert_raw, BallPoint, HalfSpacePoint};
use crate::specfun::{ball_prefactor, c_alpha, check_dim, Params};
use serde::Serialize;

/// Default tolerance on `|w − v₀| = λ` for [`k_diff_radial_derivative`].
pub const KGRADIENT_SPHERE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
}

/// `base^e`, by repeated squaring when `e` is an integer of moderate size.
pub fn powr(base: f64, e: f64) -> f64 {
    let r = e.round();
    if e == r && r.abs() <= 64.0 {
        base.powi(r as i32)
    } else {
        base.powf(e)
    }
}

/// Ball kernel `p̃_α(x, ξ) = 2^{α−1} c_{n,α} (1 − |x|²)^{1−α} / |x − ξ|^{n−α}`
/// with the constants hoisted.
#[derive(Debug, Clone, Copy)]
pub struct BallKernel {
    n: usize,
    pref: f64,
    weight_exp: f64,
    half_dist_exp: f64,
}

impl BallKernel {
    pub fn new(params: &Params) -> Self {
        Self {
            n: params.n(),
            pref: ball_prefactor(params),
            weight_exp: 1.0 - params.alpha(),
            half_dist_exp: (params.n() as f64 - params.alpha()) / 2.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `2^{α−1} c_{n,α}`.
    pub fn prefactor(&self) -> f64 {
        self.pref
    }

    /// Kernel from `1 − |x|²` and `|x − ξ|²`.
    #[inline]
    pub fn eval_parts(&self, one_minus_x2: f64, d2: f64) -> f64 {
        self.pref * powr(one_minus_x2, self.weight_exp) / powr(d2, self.half_dist_exp)
    }

    /// Kernel from raw coordinates (no validation).
    #[inline]
    pub fn eval_raw(&self, x: &[f64], xi: &[f64]) -> f64 {
        let xx: f64 = x.iter().map(|v| v * v).sum();
        self.eval_parts(1.0 - xx, dist2(x, xi))
    }
}

/// Half-space kernel `p_α(y, w) = c_{n,α} yₙ^{1−α} / |y − w|^{n−α}`.
#[derive(Debug, Clone, Copy)]
pub struct HalfKernel {
    c: f64,
    weight_exp: f64,
    half_dist_exp: f64,
}

impl HalfKernel {
    pub fn new(params: &Params) -> Self {
        Self {
            c: c_alpha(params),
            weight_exp: 1.0 - params.alpha(),
            half_dist_exp: (params.n() as f64 - params.alpha()) / 2.0,
        }
    }

    /// `y` full coordinates, `w` horizontal coordinates of a boundary point.
    #[inline]
    pub fn eval_raw(&self, y: &[f64], w: &[f64]) -> f64 {
        let n = y.len();
        let mut d2 = y[n - 1] * y[n - 1];
        for i in 0..n - 1 {
            d2 += (y[i] - w[i]) * (y[i] - w[i]);
        }
        self.c * powr(y[n - 1], self.weight_exp) / powr(d2, self.half_dist_exp)
    }
}

/// Ball Poisson kernel at an interior `x` and a boundary `ξ`.
pub fn pk_ball(params: &Params, x: &BallPoint, xi: &BallPoint) -> Result<KernelValue> {
    if x.is_boundary() || x.norm() >= 1.0 {
        return Err(Error::Domain("ball kernel needs an interior x".into()));
    }
    if !xi.is_boundary() {
        return Err(Error::Domain("ball kernel needs a boundary ξ".into()));
    }
    if x.dim() != params.n() || xi.dim() != params.n() {
        return Err(Error::Domain("dimension mismatch".into()));
    }
    let k = BallKernel::new(params);
    Ok(KernelValue { value: k.eval_parts(x.one_minus_norm2(), dist2(x.coords(), xi.coords())) })
}

/// Half-space Poisson kernel at an interior `y` and a boundary `w`.
pub fn pk_half(params: &Params, y: &HalfSpacePoint, w: &HalfSpacePoint) -> Result<KernelValue> {
    if y.is_boundary() {
        return Err(Error::Domain("half-space kernel needs yₙ > 0".into()));
    }
    if !w.is_boundary() {
        return Err(Error::Domain("half-space kernel needs a boundary w".into()));
    }
    if y.dim() != params.n() || w.dim() != params.n() {
        return Err(Error::Domain("dimension mismatch".into()));
    }
    let k = HalfKernel::new(params);
    Ok(KernelValue { value: k.eval_raw(&y.to_coords(), w.horizontal()) })
}

fn check_kdiff_inputs(n: usize, v0: &[f64], lambda: f64, y: &HalfSpacePoint, w: &[f64]) -> Result<()> {
    check_dim(n)?;
    if y.dim() != n || v0.len() != n - 1 || w.len() != n - 1 {
        return Err(Error::Domain("dimension mismatch".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("λ = {lambda} must be positive")));
    }
    if y.is_boundary() {
        return Err(Error::Domain("K needs an interior y".into()));
    }
    Ok(())
}

/// `K(v₀, λ; y, w) = p_{2−n}(y, w) − p_{2−n}(φ_{λ,v₀}(y), w)`.
///
/// Evaluated through `A = |y − w|²`, `B = (λ² − |w − v₀|²)(λ² − |y − v₀|²)/λ²`,
/// `K = c yₙ^{n−1} [A^{1−n} − (A + B)^{1−n}]`, with the bracket factored so
/// that its sign is that of `B` exactly.
pub fn k_diff(n: usize, v0: &[f64], lambda: f64, y: &HalfSpacePoint, w: &[f64]) -> Result<f64> {
    check_kdiff_inputs(n, v0, lambda, y, w)?;
    let yc = y.to_coords();
    let c = c_alpha(&Params::limit(n)?);
    let yn = y.height();
    let a = dist2(&yc[..n - 1], w) + yn * yn;
    let l2 = lambda * lambda;
    let wv = dist2(w, v0);
    let yv = dist2(&yc[..n - 1], v0) + yn * yn;
    if yv == 0.0 {
        return Err(Error::SingularPoint("y at the inversion center".into()));
    }
    let b = (l2 - wv) * (l2 - yv) / l2;
    let ab = a + b;
    let m = (n - 1) as i32;
    // (A+B)^m − A^m = B Σ_{j<m} (A+B)^j A^{m−1−j}
    let mut sum = 0.0;
    for j in 0..m {
        sum += ab.powi(j) * a.powi(m - 1 - j);
    }
    let bracket = b * sum / (a.powi(m) * ab.powi(m));
    Ok(c * yn.powi(m) * bracket)
}

/// `K` evaluated literally from its definition (two kernel evaluations).
pub fn k_diff_direct(n: usize, v0: &[f64], lambda: f64, y: &HalfSpacePoint, w: &[f64]) -> Result<f64> {
    check_kdiff_inputs(n, v0, lambda, y, w)?;
    let k = HalfKernel::new(&Params::limit(n)?);
    let yc = y.to_coords();
    let mut img = vec![0.0; n];
    invert_raw(lambda, v0, &yc, &mut img);
    Ok(k.eval_raw(&yc, w) - k.eval_raw(&img, w))
}

/// `⟨∇_w K, w − v₀⟩` at a point `w` of the sphere `|w − v₀| = λ`.
pub fn k_diff_radial_derivative(n: usize, v0: &[f64], lambda: f64, y: &HalfSpacePoint, w: &[f64]) -> Result<f64> {
    k_diff_radial_derivative_with_tol(n, v0, lambda, y, w, KGRADIENT_SPHERE_TOL)
}

/// [`k_diff_radial_derivative`] with an explicit sphere tolerance.
pub fn k_diff_radial_derivative_with_tol(
    n: usize,
    v0: &[f64],
    lambda: f64,
    y: &HalfSpacePoint,
    w: &[f64],
    tol: f64,
) -> Result<f64> {
    check_kdiff_inputs(n, v0, lambda, y, w)?;
    let wv = dist2(w, v0);
    if (wv.sqrt() - lambda).abs() > tol * lambda.max(1.0) {
        return Err(Error::Precondition(format!("|w − v₀| = {} differs from λ = {lambda}", wv.sqrt())));
    }
    let yc = y.to_coords();
    let c = c_alpha(&Params::limit(n)?);
    let yn = y.height();
    let yv = dist2(&yc[..n - 1], v0) + yn * yn;
    let wy = dist2(&yc[..n - 1], w) + yn * yn;
    Ok(-2.0 * (n as f64 - 1.0) * c * yn.powi(n as i32 - 1) * (wv - yv) / wy.powi(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{mobius_raw, psi_raw};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if r > 0.1 && r < 1.0 {
                return v.iter().map(|c| c / r).collect();
            }
        }
    }

    #[test]
    fn ball_kernel_examples() {
        let p = Params::new(2, 0.0).unwrap();
        let x = BallPoint::interior(vec![0.5, 0.0]).unwrap();
        let xi = BallPoint::boundary(vec![1.0, 0.0]).unwrap();
        assert_relative_eq!(pk_ball(&p, &x, &xi).unwrap().value, 3.0 / (2.0 * PI), max_relative = 1e-14);
        let p = Params::new(4, -0.7).unwrap();
        let o = BallPoint::origin(4);
        let xi = BallPoint::boundary(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(pk_ball(&p, &o, &xi).unwrap().value, ball_prefactor(&p), max_relative = 1e-14);
        assert!(pk_ball(&p, &xi, &xi).is_err());
    }

    #[test]
    fn harmonic_case_is_classical_poisson() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=6 {
            let p = Params::new(n, 0.0).unwrap();
            let area = crate::specfun::sphere_area(n - 1);
            for _ in 0..20 {
                let xi = unit(&mut rng, n);
                let x: Vec<f64> = unit(&mut rng, n).iter().map(|c| c * 0.7).collect();
                let k = BallKernel::new(&p).eval_raw(&x, &xi);
                let xx: f64 = x.iter().map(|c| c * c).sum();
                let expect = (1.0 - xx) / (area * dist2(&x, &xi).powf(n as f64 / 2.0));
                assert_relative_eq!(k, expect, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn half_kernel_examples() {
        let p = Params::new(2, 0.0).unwrap();
        let y = HalfSpacePoint::new(vec![0.0], 1.0).unwrap();
        let w = HalfSpacePoint::boundary(vec![0.0]).unwrap();
        assert_relative_eq!(pk_half(&p, &y, &w).unwrap().value, 1.0 / PI, max_relative = 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let p = Params::new(3, rng.gen_range(-1.0..0.9)).unwrap();
            let k = HalfKernel::new(&p);
            let y = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.1..2.0)];
            let w = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let t: f64 = rng.gen_range(0.1..5.0);
            let ty: Vec<f64> = y.iter().map(|c| c * t).collect();
            let tw: Vec<f64> = w.iter().map(|c| c * t).collect();
            assert_relative_eq!(k.eval_raw(&ty, &tw), t.powi(-2) * k.eval_raw(&y, &w), max_relative = 1e-12);
        }
    }

    #[test]
    fn psi_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.gen_range(2..=6);
            let alpha = rng.gen_range((2.0 - n as f64)..0.99);
            let p = Params::new(n, alpha).unwrap();
            let mut y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            y[n - 1] = rng.gen_range(0.05..2.0);
            let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            w[n - 1] = 0.0;
            let (mut x, mut xi) = (vec![0.0; n], vec![0.0; n]);
            let fy = psi_raw(&y, &mut x);
            let fw = psi_raw(&w, &mut xi);
            let one_minus = 2.0 * y[n - 1] * fy;
            let lhs = BallKernel::new(&p).eval_parts(one_minus, dist2(&x, &xi));
            let rhs = HalfKernel::new(&p).eval_raw(&y, &w[..n - 1])
                * fy.powf((2.0 - n as f64 - alpha) / 2.0)
                * fw.powf((alpha - n as f64) / 2.0);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn mobius_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let n = rng.gen_range(2..=6);
            let alpha = rng.gen_range((2.0 - n as f64)..0.99);
            let p = Params::new(n, alpha).unwrap();
            let k = BallKernel::new(&p);
            let a: Vec<f64> = unit(&mut rng, n).iter().map(|c| c * rng.gen_range(0.05..0.8)).collect();
            let x: Vec<f64> = unit(&mut rng, n).iter().map(|c| c * rng.gen_range(0.0..0.9)).collect();
            let xi = unit(&mut rng, n);
            let (mut px, mut pxi) = (vec![0.0; n], vec![0.0; n]);
            let fx = mobius_raw(&a, &x, &mut px);
            let fxi = mobius_raw(&a, &xi, &mut pxi);
            let one_minus = fx * (1.0 - x.iter().map(|c| c * c).sum::<f64>());
            let lhs = k.eval_parts(one_minus, dist2(&px, &pxi));
            let rhs =
                k.eval_raw(&x, &xi) * fx.powf((2.0 - n as f64 - alpha) / 2.0) * fxi.powf((alpha - n as f64) / 2.0);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn inversion_covariance_limit_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(2..=6);
            let k = HalfKernel::new(&Params::limit(n).unwrap());
            let lam = rng.gen_range(0.2..3.0);
            let v: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            y[n - 1] = rng.gen_range(0.05..2.0);
            let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            w[n - 1] = 0.0;
            let (mut py, mut pw) = (vec![0.0; n], vec![0.0; n]);
            invert_raw(lam, &v, &y, &mut py);
            let fw = invert_raw(lam, &v, &w, &mut pw);
            let lhs = k.eval_raw(&py, &pw[..n - 1]);
            let rhs = k.eval_raw(&y, &w[..n - 1]) * fw.powi(1 - n as i32);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn k_diff_examples() {
        let y = HalfSpacePoint::new(vec![0.0, 0.0], 0.5).unwrap();
        let k = k_diff(3, &[0.0, 0.0], 1.0, &y, &[0.25, 0.0]).unwrap();
        assert!(k > 0.0);
        let direct = k_diff_direct(3, &[0.0, 0.0], 1.0, &y, &[0.25, 0.0]).unwrap();
        assert_relative_eq!(k, direct, max_relative = 1e-12);
        let on = HalfSpacePoint::new(vec![0.6, 0.0], 0.8).unwrap();
        assert_eq!(k_diff(3, &[0.0, 0.0], 1.0, &on, &[0.25, 0.1]).unwrap(), 0.0);
    }

    #[test]
    fn k_diff_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..500 {
            let n = rng.gen_range(2..=6);
            let lam = rng.gen_range(0.3..2.0);
            let v: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut h: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let yn = rng.gen_range(0.1..2.0);
            let y = HalfSpacePoint::new(h.clone(), yn).unwrap();
            h.iter_mut().for_each(|c| *c += rng.gen_range(-1.0..1.0));
            let a = k_diff(n, &v, lam, &y, &h).unwrap();
            let b = k_diff_direct(n, &v, lam, &y, &h).unwrap();
            let scale = HalfKernel::new(&Params::limit(n).unwrap()).eval_raw(&y.to_coords(), &h);
            assert!((a - b).abs() <= 1e-11 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn radial_derivative_examples() {
        let v = [0.1, -0.2];
        let lam = 0.8;
        let w = [0.1 + lam, -0.2];
        let on = HalfSpacePoint::new(vec![0.1, -0.2 + 0.6 * lam], 0.8 * lam).unwrap();
        assert_eq!(k_diff_radial_derivative(3, &v, lam, &on, &w).unwrap(), 0.0);
        let inside = HalfSpacePoint::new(vec![0.1, -0.2], 0.3).unwrap();
        assert!(k_diff_radial_derivative(3, &v, lam, &inside, &w).unwrap() < 0.0);
        let off = [0.1 + lam * 1.01, -0.2];
        assert!(matches!(k_diff_radial_derivative(3, &v, lam, &inside, &off), Err(Error::Precondition(_))));
    }
}
