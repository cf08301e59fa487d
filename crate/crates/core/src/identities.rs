//! Seeded sweeps over the pointwise identities of the conformal maps and
//! kernels. Each sweep returns the worst relative discrepancy it saw.

use crate::error::Result;
use crate::extend::random_unit;
use crate::geom::{dist2, invert_raw, mobius_raw, norm2, psi_raw, HalfSpacePoint};
use crate::kernel::{k_diff, k_diff_radial_derivative, BallKernel, HalfKernel};
use crate::specfun::{Params, MAX_DIM, MIN_DIM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Outcome of a sweep: sample count, worst relative error, and the number of
/// samples that violated a sign condition (zero for pure equalities).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sweep {
    pub samples: usize,
    pub max_rel_error: f64,
    pub violations: usize,
}

impl Sweep {
    fn new() -> Self {
        Self { samples: 0, max_rel_error: 0.0, violations: 0 }
    }

    fn push(&mut self, lhs: f64, rhs: f64) {
        self.samples += 1;
        let e = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        self.max_rel_error = self.max_rel_error.max(e);
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_params(r: &mut ChaCha8Rng) -> Params {
    let n = r.gen_range(MIN_DIM..=MAX_DIM);
    let alpha = r.gen_range((2.0 - n as f64)..0.99);
    Params::new(n, alpha).expect("sampled inside the admissible range")
}

fn random_upper(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut y: Vec<f64> = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
    y[n - 1] = r.gen_range(0.05..2.0);
    y
}

fn random_boundary(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n - 1).map(|_| r.gen_range(-2.0..2.0)).collect()
}

/// A boundary point of ℝⁿ₊ with its zero height coordinate appended.
fn random_boundary_point(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w = random_boundary(r, n);
    w.resize(n, 0.0);
    w
}

fn scaled_unit(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let s = r.gen_range(lo..hi);
    random_unit(n, r).into_iter().map(|c| c * s).collect()
}

/// `p̃_α(Ψy, Ψw) = p_α(y, w) |Ψ′(y)|^{(2−n−α)/2} |Ψ′(w)|^{(α−n)/2}`.
pub fn psi_kernel_covariance(seed: u64, count: usize) -> Sweep {
    let mut r = rng(seed);
    let mut s = Sweep::new();
    for _ in 0..count {
        let p = random_params(&mut r);
        let (n, a) = (p.n(), p.alpha());
        let y = random_upper(&mut r, n);
        let w = random_boundary_point(&mut r, n);
        let (mut x, mut xi) = (vec![0.0; n], vec![0.0; n]);
        let fy = psi_raw(&y, &mut x);
        let fw = psi_raw(&w, &mut xi);
        let lhs = BallKernel::new(&p).eval_parts(2.0 * y[n - 1] * fy, dist2(&x, &xi));
        let rhs = HalfKernel::new(&p).eval_raw(&y, &w[..n - 1])
            * fy.powf((2.0 - n as f64 - a) / 2.0)
            * fw.powf((a - n as f64) / 2.0);
        s.push(lhs, rhs);
    }
    s
}

/// `p̃_α(Φx, Φξ) = p̃_α(x, ξ) |Φ′(x)|^{(2−n−α)/2} |Φ′(ξ)|^{(α−n)/2}`.
pub fn mobius_kernel_covariance(seed: u64, count: usize) -> Sweep {
    let mut r = rng(seed);
    let mut s = Sweep::new();
    for _ in 0..count {
        let p = random_params(&mut r);
        let (n, al) = (p.n(), p.alpha());
        let k = BallKernel::new(&p);
        let a = scaled_unit(&mut r, n, 0.05, 0.8);
        let x = scaled_unit(&mut r, n, 0.0, 0.9);
        let xi = random_unit(n, &mut r);
        let (mut px, mut pxi) = (vec![0.0; n], vec![0.0; n]);
        let fx = mobius_raw(&a, &x, &mut px);
        let fxi = mobius_raw(&a, &xi, &mut pxi);
        let lhs = k.eval_parts(fx * (1.0 - norm2(&x)), dist2(&px, &pxi));
        let rhs = k.eval_raw(&x, &xi) * fx.powf((2.0 - n as f64 - al) / 2.0) * fxi.powf((al - n as f64) / 2.0);
        s.push(lhs, rhs);
    }
    s
}

/// `p_{2−n}(φy, φw) = p_{2−n}(y, w) |φ′(w)|^{1−n}`.
pub fn inversion_kernel_covariance(seed: u64, count: usize) -> Sweep {
    let mut r = rng(seed);
    let mut s = Sweep::new();
    for _ in 0..count {
        let n = r.gen_range(MIN_DIM..=MAX_DIM);
        let k = HalfKernel::new(&Params::limit(n).expect("valid dimension"));
        let lam = r.gen_range(0.2..3.0);
        let v: Vec<f64> = (0..n - 1).map(|_| r.gen_range(-1.0..1.0)).collect();
        let y = random_upper(&mut r, n);
        let w = random_boundary_point(&mut r, n);
        let (mut py, mut pw) = (vec![0.0; n], vec![0.0; n]);
        invert_raw(lam, &v, &y, &mut py);
        let fw = invert_raw(lam, &v, &w, &mut pw);
        let lhs = k.eval_raw(&py, &pw[..n - 1]);
        let rhs = k.eval_raw(&y, &w[..n - 1]) * fw.powi(1 - n as i32);
        s.push(lhs, rhs);
    }
    s
}

/// `|Φ_a′(x)| = (1 − |Φ_a(x)|²)/(1 − |x|²)`.
pub fn mobius_factor_identity(seed: u64, count: usize) -> Sweep {
    let mut r = rng(seed);
    let mut s = Sweep::new();
    for _ in 0..count {
        let n = r.gen_range(MIN_DIM..=MAX_DIM);
        let a = scaled_unit(&mut r, n, 0.01, 0.9);
        let x = scaled_unit(&mut r, n, 0.0, 0.95);
        let mut px = vec![0.0; n];
        let f = mobius_raw(&a, &x, &mut px);
        s.push(f, (1.0 - norm2(&px)) / (1.0 - norm2(&x)));
    }
    s
}

/// `|Φx − Φξ|² = |Φ′(x)| |Φ′(ξ)| |x − ξ|²`.
pub fn mobius_distance_identity(seed: u64, count: usize) -> Sweep {
    let mut r = rng(seed);
    let mut s = Sweep::new();
    for _ in 0..count {
        let n = r.gen_range(MIN_DIM..=MAX_DIM);
        let a = scaled_unit(&mut r, n, 0.01, 0.9);
        let x = scaled_unit(&mut r, n, 0.0, 0.95);
        let xi = if r.gen_bool(0.5) { random_unit(n, &mut r) } else { scaled_unit(&mut r, n, 0.0, 0.95) };
        let (mut px, mut pxi) = (vec![0.0; n], vec![0.0; n]);
        let fx = mobius_raw(&a, &x, &mut px);
        let fxi = mobius_raw(&a, &xi, &mut pxi);
        s.push(dist2(&px, &pxi), fx * fxi * dist2(&x, &xi));
    }
    s
}

/// `|φ′(w)| |φ′(φw)| = 1` at boundary points.
pub fn inversion_jacobian_duality(seed: u64, count: usize) -> Sweep {
    let mut r = rng(seed);
    let mut s = Sweep::new();
    for _ in 0..count {
        let n = r.gen_range(MIN_DIM..=MAX_DIM);
        let lam = r.gen_range(0.2..3.0);
        let v: Vec<f64> = (0..n - 1).map(|_| r.gen_range(-1.0..1.0)).collect();
        let w = random_boundary_point(&mut r, n);
        let (mut pw, mut ppw) = (vec![0.0; n], vec![0.0; n]);
        let f1 = invert_raw(lam, &v, &w, &mut pw);
        let f2 = invert_raw(lam, &v, &pw, &mut ppw);
        s.push(f1 * f2, 1.0);
    }
    s
}

/// `K · (λ² − |w − v₀|²)(λ² − |y − v₀|²) ≥ 0`; violations are counted.
pub fn k_sign_identity(seed: u64, count: usize) -> Result<Sweep> {
    let mut r = rng(seed);
    let mut s = Sweep::new();
    for _ in 0..count {
        let n = r.gen_range(MIN_DIM..=MAX_DIM);
        let lam = r.gen_range(0.2..3.0);
        let v: Vec<f64> = (0..n - 1).map(|_| r.gen_range(-1.0..1.0)).collect();
        let yc = random_upper(&mut r, n);
        let w = random_boundary(&mut r, n);
        let y = HalfSpacePoint::from_coords(&yc)?;
        let k = k_diff(n, &v, lam, &y, &w)?;
        let yv = dist2(&yc[..n - 1], &v) + yc[n - 1] * yc[n - 1];
        let prod = k * (lam * lam - dist2(&w, &v)) * (lam * lam - yv);
        s.samples += 1;
        if prod < 0.0 {
            s.violations += 1;
        }
    }
    Ok(s)
}

/// Central difference of `K` along `w − v₀` (step `1e−5·λ`) against the
/// closed-form radial derivative on the sphere `|w − v₀| = λ`.
pub fn k_gradient_fd(seed: u64, count: usize) -> Result<Sweep> {
    let mut r = rng(seed);
    let mut s = Sweep::new();
    while s.samples < count {
        let n = r.gen_range(MIN_DIM..=MAX_DIM);
        let lam = r.gen_range(0.3..2.0);
        let v: Vec<f64> = (0..n - 1).map(|_| r.gen_range(-1.0..1.0)).collect();
        let u = if n == 2 { vec![if r.gen_bool(0.5) { 1.0 } else { -1.0 }] } else { random_unit(n - 1, &mut r) };
        let w: Vec<f64> = v.iter().zip(&u).map(|(a, b)| a + lam * b).collect();
        // keep |y − v₀|/λ away from 1, where the derivative vanishes
        let ratio = if r.gen_bool(0.5) { r.gen_range(0.2..0.8) } else { r.gen_range(1.25..2.5) };
        let dir = random_unit(n, &mut r);
        let mut yc: Vec<f64> = (0..n).map(|i| if i < n - 1 { v[i] } else { 0.0 } + lam * ratio * dir[i]).collect();
        yc[n - 1] = yc[n - 1].abs().max(0.05 * lam);
        let y = HalfSpacePoint::from_coords(&yc)?;
        let exact = k_diff_radial_derivative(n, &v, lam, &y, &w)?;
        let h = 1e-5 * lam;
        let shift = |t: f64| -> Vec<f64> { w.iter().zip(&u).map(|(a, b)| a + t * b).collect() };
        let fd = (k_diff(n, &v, lam, &y, &shift(h))? - k_diff(n, &v, lam, &y, &shift(-h))?) / (2.0 * h) * lam;
        s.push(fd, exact);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_sweeps_hold() {
        for sw in [
            psi_kernel_covariance(1, 200),
            mobius_kernel_covariance(2, 200),
            inversion_kernel_covariance(3, 200),
            mobius_factor_identity(4, 200),
            mobius_distance_identity(5, 200),
            inversion_jacobian_duality(6, 200),
        ] {
            assert_eq!(sw.samples, 200);
            assert!(sw.max_rel_error < 1e-12, "{sw:?}");
        }
    }

    #[test]
    fn k_sign_and_gradient() {
        let s = k_sign_identity(7, 10_000).unwrap();
        assert_eq!((s.samples, s.violations), (10_000, 0));
        let g = k_gradient_fd(8, 100).unwrap();
        assert!(g.max_rel_error < 1e-6, "{g:?}");
    }

    #[test]
    fn sweeps_are_reproducible() {
        assert_eq!(mobius_kernel_covariance(11, 50), mobius_kernel_covariance(11, 50));
        assert_eq!(k_gradient_fd(3, 20).unwrap(), k_gradient_fd(3, 20).unwrap());
    }
}
