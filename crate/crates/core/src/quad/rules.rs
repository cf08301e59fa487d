//! Fixed one-dimensional rules: Gauss–Legendre, Gauss–Jacobi and graded
//! composite Gauss–Legendre.

use crate::quad::sum::neumaier_sum;
use crate::specfun::ln_gamma;
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of a quadrature rule on `[a, b]` for weight 1 (or for
/// the weight stated by the constructor).
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl Rule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ wᵢ f(xᵢ)` with compensated summation in node order.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        neumaier_sum(self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)))
    }

    /// Concatenate rules on adjacent intervals.
    pub fn concat(parts: &[Rule1D]) -> Rule1D {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in parts {
            nodes.extend_from_slice(&p.nodes);
            weights.extend_from_slice(&p.weights);
        }
        Rule1D { nodes, weights, a: parts.first().map_or(0.0, |p| p.a), b: parts.last().map_or(0.0, |p| p.b) }
    }
}

type Reference = Arc<(Vec<f64>, Vec<f64>)>;

fn legendre_cache() -> &'static Mutex<HashMap<usize, Reference>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Reference>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn legendre_eval(m: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    // (P_m, P_m')
    (p1, m as f64 * (z * p1 - p0) / (z * z - 1.0))
}

fn legendre_reference_uncached(m: usize) -> (Vec<f64>, Vec<f64>) {
    if m == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_m.
        let mut z = ((i as f64 + 0.75) / (m as f64 + 0.5) * PI).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_eval(m, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_eval(m, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m % 2 == 1 {
        x[m / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, cached per order.
pub fn legendre_reference(m: usize) -> Reference {
    let mut cache = legendre_cache().lock().expect("rule cache poisoned");
    cache.entry(m).or_insert_with(|| Arc::new(legendre_reference_uncached(m))).clone()
}

/// `m`-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(m: usize, a: f64, b: f64) -> Rule1D {
    assert!(m >= 1, "Gauss–Legendre needs at least one node");
    let r = legendre_reference(m);
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    Rule1D { nodes: r.0.iter().map(|t| c + h * t).collect(), weights: r.1.iter().map(|w| w * h).collect(), a, b }
}

/// Gauss–Jacobi rule on `[−1, 1]` for the weight `(1 − t)^a (1 + t)^b`,
/// by the Golub–Welsch eigenvalue method.
pub fn gauss_jacobi(m: usize, a: f64, b: f64) -> Rule1D {
    assert!(m >= 1 && a > -1.0 && b > -1.0);
    let ab = a + b;
    let mut t = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        let jf = j as f64;
        let s = 2.0 * jf + ab;
        t[(j, j)] = if j == 0 { (b - a) / (ab + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) };
        if j + 1 < m {
            let k = jf + 1.0;
            let s = 2.0 * k + ab;
            let beta = if j == 0 {
                // k = 1 with the (1 + a + b) factor cancelled
                4.0 * (1.0 + a) * (1.0 + b) / (s * s * (s + 1.0))
            } else {
                4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            t[(j, j + 1)] = beta.sqrt();
            t[(j + 1, j)] = beta.sqrt();
        }
    }
    let mu0 = ((ab + 1.0) * 2f64.ln() + ln_gamma(a + 1.0).unwrap() + ln_gamma(b + 1.0).unwrap()
        - ln_gamma(ab + 2.0).unwrap())
    .exp();
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> =
        (0..m).map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    if (a - b).abs() == 0.0 {
        // enforce exact symmetry
        for i in 0..m / 2 {
            let j = m - 1 - i;
            let x = (pairs[j].0 - pairs[i].0) / 2.0;
            let w = (pairs[j].1 + pairs[i].1) / 2.0;
            pairs[i] = (-x, w);
            pairs[j] = (x, w);
        }
        if m % 2 == 1 {
            pairs[m / 2].0 = 0.0;
        }
    }
    Rule1D { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect(), a: -1.0, b: 1.0 }
}

/// Breakpoints on `[a, b]` graded geometrically toward `a`: `a + δ/4, a + δ/2,
/// a + δ, a + 2δ, …`, then split so no panel exceeds `max_len`.
pub fn graded_breakpoints(a: f64, b: f64, delta: f64, max_len: f64) -> Vec<f64> {
    let mut pts = vec![a];
    if delta.is_finite() && delta > 0.0 {
        let mut s = delta / 4.0;
        while a + s < b {
            pts.push(a + s);
            s *= 2.0;
        }
    }
    pts.push(b);
    let mut out = vec![a];
    for w in pts.windows(2) {
        let len = w[1] - w[0];
        let pieces = (len / max_len).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            out.push(if k == pieces { w[1] } else { w[0] + len * k as f64 / pieces as f64 });
        }
    }
    out
}

/// Composite Gauss–Legendre with `m` nodes per panel over the given breakpoints.
pub fn composite_rule(breaks: &[f64], m: usize) -> Rule1D {
    let panels: Vec<Rule1D> = breaks.windows(2).map(|w| gauss_legendre(m, w[0], w[1])).collect();
    Rule1D::concat(&panels)
}

/// Graded composite rule on `[a, b]` refined toward `a` at scale `delta`.
pub fn graded_rule(a: f64, b: f64, delta: f64, m: usize, max_len: f64) -> Rule1D {
    composite_rule(&graded_breakpoints(a, b, delta, max_len), m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_examples() {
        let r = gauss_legendre(2, 0.0, 1.0);
        assert_abs_diff_eq!(r.integrate(|x| x * x), 1.0 / 3.0, epsilon = 2e-16);
        let r = gauss_legendre(1, -1.0, 1.0);
        assert_eq!(r.nodes, vec![0.0]);
        assert_abs_diff_eq!(r.weights[0], 2.0, epsilon = 1e-15);
        let r = gauss_legendre(16, 0.0, PI);
        assert_abs_diff_eq!(r.integrate(f64::sin), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn legendre_exactness() {
        for m in 1..=40 {
            let r = gauss_legendre(m, -1.0, 1.0);
            for d in 0..2 * m {
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert_abs_diff_eq!(r.integrate(|x| x.powi(d as i32)), exact, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn jacobi_matches_weighted_moments() {
        // ∫ (1 − t²)^a t^{2j} dt = B(j + 1/2, a + 1)
        for &a in &[0.0, 0.5, 1.0, 1.5, 2.0] {
            let r = gauss_jacobi(8, a, a);
            for j in 0..8 {
                let jf = j as f64;
                let exact =
                    (ln_gamma(jf + 0.5).unwrap() + ln_gamma(a + 1.0).unwrap() - ln_gamma(jf + a + 1.5).unwrap()).exp();
                assert_abs_diff_eq!(r.integrate(|t| t.powi(2 * j)), exact, epsilon = 1e-13);
            }
        }
        let r = gauss_jacobi(6, 0.0, 0.0);
        let g = gauss_legendre(6, -1.0, 1.0);
        for i in 0..6 {
            assert_abs_diff_eq!(r.nodes[i], g.nodes[i], epsilon = 1e-14);
            assert_abs_diff_eq!(r.weights[i], g.weights[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn asymmetric_jacobi() {
        // ∫ (1 − t)(1 + t)^2 dt on [−1, 1] = 4/3
        let r = gauss_jacobi(4, 1.0, 2.0);
        assert_abs_diff_eq!(r.integrate(|_| 1.0), 4.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn graded_rule_resolves_near_singularity() {
        // ∫₀^π dφ / (δ² + φ²) with δ = 1e-4 equals atan(π/δ)/δ
        let d = 1e-4;
        let r = graded_rule(0.0, PI, d, 16, PI / 4.0);
        let exact = (PI / d).atan() / d;
        assert!((r.integrate(|p| 1.0 / (d * d + p * p)) - exact).abs() < 1e-11 * exact);
        assert_abs_diff_eq!(r.weights.iter().sum::<f64>(), PI, epsilon = 1e-13);
    }

    #[test]
    fn deterministic_construction() {
        assert_eq!(gauss_jacobi(10, 0.5, 0.5), gauss_jacobi(10, 0.5, 0.5));
        assert_eq!(graded_rule(0.0, 1.0, 1e-3, 8, 0.3), graded_rule(0.0, 1.0, 1e-3, 8, 0.3));
    }
}
