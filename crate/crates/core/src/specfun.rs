//! Gamma-family special functions, sphere measures and the `(n, α)` parameter pair.

use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::{LN_2, PI};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Smallest supported dimension.
pub const MIN_DIM: usize = 2;
/// Largest supported dimension; tensor quadrature beyond this is too costly.
pub const MAX_DIM: usize = 6;

/// Dimension `n` and order parameter `α` with `2 − n ≤ α < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    n: usize,
    alpha: f64,
}

impl Params {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        check_dim(n)?;
        if !alpha.is_finite() {
            return Err(Error::InvalidParams(format!("alpha = {alpha} is not finite")));
        }
        let lo = 2.0 - n as f64;
        if alpha < lo || alpha >= 1.0 {
            return Err(Error::InvalidParams(format!("alpha = {alpha} outside [{lo}, 1) for n = {n}")));
        }
        Ok(Self { n, alpha })
    }

    /// The limit case `α = 2 − n`.
    pub fn limit(n: usize) -> Result<Self> {
        Self::new(n, 2.0 - n as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `n − 2 + α`.
    pub fn eps(&self) -> f64 {
        self.n as f64 - 2.0 + self.alpha
    }

    pub fn is_limit(&self) -> bool {
        self.eps() == 0.0
    }

    /// Boundary exponent `2(n − 1)/eps`, defined when `eps > 0`.
    pub fn p(&self) -> Option<f64> {
        let e = self.eps();
        (e > 0.0).then(|| 2.0 * (self.n as f64 - 1.0) / e)
    }

    /// Interior exponent `2n/eps`, defined when `eps > 0`.
    pub fn q(&self) -> Option<f64> {
        let e = self.eps();
        (e > 0.0).then(|| 2.0 * self.n as f64 / e)
    }
}

pub fn check_dim(n: usize) -> Result<()> {
    if !(MIN_DIM..=MAX_DIM).contains(&n) {
        return Err(Error::InvalidParams(format!("dimension n = {n} outside {MIN_DIM}..={MAX_DIM}")));
    }
    Ok(())
}

const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS_COF: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

fn ln_gamma_lanczos(x: f64) -> f64 {
    let t = x + LANCZOS_G;
    let head = (x + 0.5) * t.ln() - t;
    let mut ser = 0.999_999_999_999_997_092;
    let mut y = x;
    for c in LANCZOS_COF {
        y += 1.0;
        ser += c / y;
    }
    head + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma undefined at x = {x}")));
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    if x < 0.5 {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let s = (PI * x).sin();
        return Ok((PI / s).ln() - ln_gamma_lanczos(1.0 - x));
    }
    Ok(ln_gamma_lanczos(x))
}

/// `Γ(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    ln_gamma(x).map(f64::exp)
}

/// Digamma `ψ(x) = d/dx ln Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma undefined at x = {x}")));
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 8.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let w = 1.0 / (y * y);
    // Bernoulli tail: B_{2k} / (2k y^{2k})
    let tail = w
        * (1.0 / 12.0
            - w * (1.0 / 120.0
                - w * (1.0 / 252.0 - w * (1.0 / 240.0 - w * (1.0 / 132.0 - w * (691.0 / 32_760.0 - w / 12.0))))));
    Ok(acc + y.ln() - 0.5 / y - tail)
}

/// Area of the unit `m`-sphere `Sᵐ ⊂ ℝᵐ⁺¹`; `|S⁰| = 2`.
pub fn sphere_area(m: usize) -> f64 {
    let (mut a, start) = if m.is_multiple_of(2) { (2.0, 0) } else { (2.0 * PI, 1) };
    let mut k = start;
    while k < m {
        k += 2;
        a *= 2.0 * PI / (k as f64 - 1.0);
    }
    a
}

/// Volume `ωₙ` of the unit ball in `ℝⁿ`.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n - 1) / n as f64
}

/// Normalizing constant `c_{n,α}` of the Poisson kernels.
pub fn c_alpha(params: &Params) -> f64 {
    let n = params.n() as f64;
    let a = params.alpha();
    let lg = |x: f64| ln_gamma(x).expect("positive argument");
    let ln_c = LN_2 + lg((n - a) / 2.0) - lg((1.0 - a) / 2.0) - lg((n - 1.0) / 2.0) - sphere_area(params.n() - 2).ln();
    ln_c.exp()
}

/// The ball-kernel prefactor `2^{α−1} c_{n,α}`.
pub fn ball_prefactor(params: &Params) -> f64 {
    (params.alpha() - 1.0).exp2() * c_alpha(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Stirling series with upward shift; independent of the Lanczos route.
    fn ln_gamma_stirling(x: f64) -> f64 {
        let mut shift = 0.0;
        let mut y = x;
        while y < 20.0 {
            shift += y.ln();
            y += 1.0;
        }
        let w = 1.0 / (y * y);
        let series = (1.0 / 12.0 - w * (1.0 / 360.0 - w * (1.0 / 1260.0 - w * (1.0 / 1680.0 - w / 1188.0)))) / y;
        (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + series - shift
    }

    #[test]
    fn ln_gamma_examples() {
        assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
        assert_relative_eq!(ln_gamma(0.5).unwrap(), 0.5 * PI.ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(5.0).unwrap(), 24f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(1.5).unwrap(), (PI.sqrt() / 2.0).ln(), max_relative = 1e-13);
        assert_relative_eq!(gamma(10.0).unwrap(), 362_880.0, max_relative = 1e-13);
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-1.5).is_err());
    }

    #[test]
    fn ln_gamma_matches_stirling_on_range() {
        let mut x = 0.5;
        while x <= 50.0 {
            let a = ln_gamma(x).unwrap();
            let b = ln_gamma_stirling(x);
            let scale = a.abs().max(1.0);
            assert!((a - b).abs() <= 1e-13 * scale, "x = {x}: {a} vs {b}");
            x += 0.37;
        }
    }

    #[test]
    fn reflection_branch_is_consistent() {
        for &x in &[0.1, 0.25, 0.3, 0.45] {
            let lhs = ln_gamma(x).unwrap() + ln_gamma(1.0 - x).unwrap();
            assert_relative_eq!(lhs, (PI / (PI * x).sin()).ln(), max_relative = 1e-13);
            assert_relative_eq!(ln_gamma(x).unwrap(), ln_gamma_stirling(x), max_relative = 1e-12);
        }
    }

    #[test]
    fn digamma_examples() {
        assert_relative_eq!(digamma(1.0).unwrap(), -EULER_GAMMA, max_relative = 1e-14);
        assert_relative_eq!(digamma(2.0).unwrap(), 1.0 - EULER_GAMMA, max_relative = 1e-14);
        assert_relative_eq!(digamma(0.5).unwrap(), -EULER_GAMMA - 2.0 * LN_2, max_relative = 1e-14);
        assert!(digamma(0.0).is_err());
    }

    #[test]
    fn digamma_matches_harmonic_numbers() {
        let mut h = 0.0;
        for k in 1..40 {
            let v = digamma(k as f64).unwrap();
            assert_relative_eq!(v, -EULER_GAMMA + h, max_relative = 1e-13, epsilon = 1e-15);
            h += 1.0 / k as f64;
        }
    }

    proptest! {
        #[test]
        fn digamma_duplication(z in 0.25f64..20.0) {
            let r = digamma(2.0 * z).unwrap()
                - 0.5 * (digamma(z).unwrap() + digamma(z + 0.5).unwrap())
                - LN_2;
            prop_assert!(r.abs() < 1e-11);
        }

        #[test]
        fn digamma_recurrence(x in 0.5f64..50.0) {
            let r = digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x;
            prop_assert!(r.abs() < 1e-11);
        }

        #[test]
        fn ln_gamma_recurrence(x in 0.5f64..40.0) {
            let r = ln_gamma(x + 1.0).unwrap() - ln_gamma(x).unwrap() - x.ln();
            prop_assert!(r.abs() < 1e-12 * (1.0 + ln_gamma(x + 1.0).unwrap().abs()));
        }
    }

    #[test]
    fn sphere_areas() {
        assert_eq!(sphere_area(0), 2.0);
        assert_relative_eq!(sphere_area(1), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(2), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(3), 2.0 * PI * PI, max_relative = 1e-15);
        for m in 0..8 {
            let g = gamma((m as f64 + 1.0) / 2.0).unwrap();
            let direct = 2.0 * PI.powf((m as f64 + 1.0) / 2.0) / g;
            assert_relative_eq!(sphere_area(m), direct, max_relative = 1e-13);
        }
        assert_relative_eq!(ball_volume(3), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(ball_volume(2), PI, max_relative = 1e-15);
    }

    #[test]
    fn c_alpha_examples() {
        assert_relative_eq!(c_alpha(&Params::new(2, 0.0).unwrap()), 1.0 / PI, max_relative = 1e-13);
        assert_relative_eq!(c_alpha(&Params::new(3, -1.0).unwrap()), 1.0 / PI, max_relative = 1e-13);
        assert_relative_eq!(c_alpha(&Params::new(4, 0.0).unwrap()), 1.0 / (PI * PI), max_relative = 1e-13);
    }

    #[test]
    fn limit_case_normalization() {
        for n in 2..=6 {
            let p = Params::limit(n).unwrap();
            let lhs = (1.0 - n as f64).exp2() * c_alpha(&p);
            assert_relative_eq!(lhs, 1.0 / sphere_area(n - 1), max_relative = 1e-12);
        }
    }

    #[test]
    fn harmonic_normalization() {
        // 2^{-1} c_{n,0} = 1/|S^{n-1}|
        for n in 2..=6 {
            let p = Params::new(n, 0.0).unwrap();
            assert_relative_eq!(ball_prefactor(&p), 1.0 / sphere_area(n - 1), max_relative = 1e-12);
        }
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(1, 0.0).is_err());
        assert!(Params::new(7, 0.0).is_err());
        assert!(Params::new(3, 1.0).is_err());
        assert!(Params::new(3, -1.0 - 1e-12).is_err());
        assert!(Params::new(3, f64::NAN).is_err());
        let p = Params::new(3, 0.5).unwrap();
        assert_relative_eq!(p.eps(), 1.5);
        assert_relative_eq!(p.p().unwrap(), 4.0 / 1.5);
        assert_relative_eq!(p.q().unwrap(), 6.0 / 1.5);
        let l = Params::limit(4).unwrap();
        assert!(l.is_limit());
        assert!(l.p().is_none() && l.q().is_none());
    }
}
