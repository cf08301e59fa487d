//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};
use crate::quad::sum::neumaier_sum;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and budget for [`adaptive_1d_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 0.0, max_subdivisions: 60 }
    }
}

impl AdaptiveConfig {
    pub fn abs(tol: f64) -> Self {
        Self { abs_tol: tol, ..Self::default() }
    }

    pub fn with_max_subdivisions(mut self, m: usize) -> Self {
        self.max_subdivisions = m;
        self
    }

    pub fn with_rel(mut self, rel: f64) -> Self {
        self.rel_tol = rel;
        self
    }
}

/// Integral value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// One GK15 panel: (Kronrod value, |Kronrod − Gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        // worst error first; ties broken by position for determinism
        self.error.total_cmp(&o.error).then(o.a.total_cmp(&self.a))
    }
}

/// `∫ₐᵇ f` to absolute tolerance `tol`, default budget.
pub fn adaptive_1d<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    adaptive_1d_with(f, &[a, b], AdaptiveConfig::abs(tol))
}

/// Adaptive GK15 over the intervals between consecutive `breaks`.
///
/// The worst panel is bisected until the summed error estimate meets
/// `max(abs_tol, rel_tol·|value|)`. Exceeding `max_subdivisions` bisections
/// returns [`Error::Quadrature`] with the best estimate.
pub fn adaptive_1d_with<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], cfg: AdaptiveConfig) -> Result<Estimate> {
    assert!(breaks.len() >= 2);
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&mut f, w[0], w[1]);
            heap.push(Panel { a: w[0], b: w[1], value, error });
        }
    }
    let mut splits = 0;
    loop {
        let value = neumaier_sum(sorted(&heap).iter().map(|p| p.value));
        let error = neumaier_sum(sorted(&heap).iter().map(|p| p.error));
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if error <= target {
            return Ok(Estimate { value, error });
        }
        if !value.is_finite() {
            return Err(Error::Quadrature { best: value, error });
        }
        if splits >= cfg.max_subdivisions {
            return Err(Error::Quadrature { best: value, error });
        }
        let worst = heap.pop().expect("non-empty panel set");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // interval exhausted at machine resolution
            return Err(Error::Quadrature { best: value, error });
        }
        let (v1, e1) = gk15(&mut f, worst.a, m);
        let (v2, e2) = gk15(&mut f, m, worst.b);
        heap.push(Panel { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, error: e2 });
        splits += 1;
    }
}

// Sum in interval order so results do not depend on heap layout.
fn sorted(heap: &BinaryHeap<Panel>) -> Vec<Panel> {
    let mut v: Vec<Panel> = heap.iter().copied().collect();
    v.sort_by(|x, y| x.a.total_cmp(&y.a));
    v
}
