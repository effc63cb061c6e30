//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! The outage integrals all live on `[c, ∞)` against a shifted-exponential
//! weight, so besides plain finite intervals this module offers the
//! exponential-tail change of variables `u = exp(-rate (r - start))`, which
//! maps the weighted semi-infinite integral onto `[0, 1]`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error(
    "adaptive quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e} \
     after {intervals} subintervals"
)]
pub struct QuadratureError {
    pub estimate: f64,
    pub error_bound: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// Adaptive integrator settings. Convergence is declared once the summed
/// error estimate drops below `max(abs_tol, rel_tol * |I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 0.0,
            max_intervals: 2000,
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One 21-point Kronrod evaluation with the QUADPACK error heuristic.
#[allow(clippy::needless_range_loop)]
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut result_gauss = 0.0;
    let mut result_kronrod = fc * WGK[10];
    let mut result_abs = result_kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        result_gauss += WG[j] * (f1 + f2);
        result_kronrod += WGK[jtw] * (f1 + f2);
        result_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        result_kronrod += WGK[jtwm1] * (f1 + f2);
        result_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * result_kronrod;
    let mut result_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        result_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let integral = result_kronrod * half;
    let result_abs = result_abs * half.abs();
    let result_asc = result_asc * half.abs();
    let mut err = ((result_kronrod - result_gauss) * half).abs();
    if result_asc != 0.0 && err != 0.0 {
        err = result_asc * (200.0 * err / result_asc).powf(1.5).min(1.0);
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * result_abs);
    }
    (integral, err)
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

impl Integrator {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrates `f` over the finite interval `[a, b]`.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> Result<QuadResult, QuadratureError>
    where
        F: Fn(f64) -> f64,
    {
        if a == b {
            return Ok(QuadResult {
                value: 0.0,
                abs_error: 0.0,
                evaluations: 0,
            });
        }
        let (value, error) = gk21(&f, a, b);
        let mut evaluations = 21;
        let mut heap = BinaryHeap::new();
        heap.push(Segment { a, b, value, error });
        let mut total = value;
        let mut total_err = error;

        loop {
            let tol = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err <= tol {
                break;
            }
            if heap.len() >= self.max_intervals {
                return Err(QuadratureError {
                    estimate: total,
                    error_bound: total_err,
                    intervals: heap.len(),
                });
            }
            let worst = heap.pop().expect("heap holds at least one segment");
            let mid = 0.5 * (worst.a + worst.b);
            // Interval exhausted at machine resolution: accept what we have.
            if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
                heap.push(worst);
                break;
            }
            let (v1, e1) = gk21(&f, worst.a, mid);
            let (v2, e2) = gk21(&f, mid, worst.b);
            evaluations += 42;
            total += v1 + v2 - worst.value;
            total_err += e1 + e2 - worst.error;
            heap.push(Segment {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Segment {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
            });
        }

        // Re-sum to drop the drift of incremental updates.
        let (value, abs_error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if !value.is_finite() {
            return Err(QuadratureError {
                estimate: value,
                error_bound: abs_error,
                intervals: heap.len(),
            });
        }
        Ok(QuadResult {
            value,
            abs_error,
            evaluations,
        })
    }

    /// Integrates `f` over `[a, ∞)` through `x = a + scale * t / (1 - t)`.
    ///
    /// `scale` should be the length over which `f` decays; it only affects
    /// efficiency, not the answer.
    pub fn integrate_semi_infinite<F>(
        &self,
        f: F,
        a: f64,
        scale: f64,
    ) -> Result<QuadResult, QuadratureError>
    where
        F: Fn(f64) -> f64,
    {
        let s = if scale > 0.0 && scale.is_finite() {
            scale
        } else {
            1.0
        };
        self.integrate(
            |t| {
                let one_minus = 1.0 - t;
                if one_minus <= 0.0 {
                    return 0.0;
                }
                let x = a + s * t / one_minus;
                let v = f(x) * s / (one_minus * one_minus);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
        )
    }

    /// Computes `∫_start^∞ h(r) · rate · exp(-rate (r - start)) dr`, the
    /// expectation of `h` under a shifted exponential law, via
    /// `u = exp(-rate (r - start))`.
    pub fn integrate_exp_tail<F>(
        &self,
        h: F,
        start: f64,
        rate: f64,
    ) -> Result<QuadResult, QuadratureError>
    where
        F: Fn(f64) -> f64,
    {
        self.integrate(
            |u| {
                if u <= 0.0 {
                    return 0.0;
                }
                h(start - u.ln() / rate)
            },
            0.0,
            1.0,
        )
    }
}
