//! The Cowan M2 lane model: successive vehicles are separated by a constant
//! hardcore distance `c` plus an exponential gap with rate `μ`, so that the
//! intensity is `λ = μ / (1 + μ c)`.
//!
//! All summary statistics here are closed forms. The contact distribution `F`
//! is not an independent input: it is reconstructed from `G` and `J` through
//! `J (1 - F) = 1 - G`, which makes it the unique CDF consistent with both.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{SummaryCurve, SummaryKind};
use crate::special::{ln_factorial, regularized_upper_gamma};

/// Largest admissible packing `λ c`; closer to 1 the model degenerates into
/// a lattice.
pub const MAX_PACKING: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("intensity must be positive and finite, got {0}")]
    Intensity(f64),
    #[error("gap rate must be positive and finite, got {0}")]
    Rate(f64),
    #[error("hardcore distance must be nonnegative and finite, got {0}")]
    Hardcore(f64),
    #[error("packing λc = {0} exceeds the admissible limit {MAX_PACKING}")]
    Packing(f64),
}

/// Per-lane Cowan M2 parameters. Always satisfies `1/λ = c + 1/μ` and
/// `λ c ≤ MAX_PACKING`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelParams", into = "ModelParams")]
pub struct HardcoreLaneModel {
    lambda: f64,
    c: f64,
    mu: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelParams {
    lambda: f64,
    c: f64,
}

impl TryFrom<ModelParams> for HardcoreLaneModel {
    type Error = ModelError;
    fn try_from(p: ModelParams) -> Result<Self, ModelError> {
        Self::from_intensity(p.lambda, p.c)
    }
}

impl From<HardcoreLaneModel> for ModelParams {
    fn from(m: HardcoreLaneModel) -> Self {
        Self {
            lambda: m.lambda,
            c: m.c,
        }
    }
}

fn check_hardcore(c: f64) -> Result<(), ModelError> {
    if c >= 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Hardcore(c))
    }
}

impl HardcoreLaneModel {
    /// Model with intensity `lambda` (vehicles per meter) and hardcore `c`.
    pub fn from_intensity(lambda: f64, c: f64) -> Result<Self, ModelError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(ModelError::Intensity(lambda));
        }
        check_hardcore(c)?;
        let packing = lambda * c;
        if packing > MAX_PACKING {
            return Err(ModelError::Packing(packing));
        }
        let mu = lambda / (1.0 - packing);
        Ok(Self { lambda, c, mu })
    }

    /// Model with exponential gap rate `mu` and hardcore `c`.
    pub fn from_rate(mu: f64, c: f64) -> Result<Self, ModelError> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(ModelError::Rate(mu));
        }
        check_hardcore(c)?;
        let lambda = mu / (1.0 + mu * c);
        let packing = lambda * c;
        if packing > MAX_PACKING {
            return Err(ModelError::Packing(packing));
        }
        Ok(Self { lambda, c, mu })
    }

    /// The Poisson limit `c = 0`.
    pub fn ppp(lambda: f64) -> Result<Self, ModelError> {
        Self::from_intensity(lambda, 0.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn packing(&self) -> f64 {
        self.lambda * self.c
    }

    pub fn is_poisson(&self) -> bool {
        self.c == 0.0
    }

    /// Mean gap `1/λ = c + 1/μ`.
    pub fn mean_gap(&self) -> f64 {
        self.c + 1.0 / self.mu
    }

    /// Pair correlation `ρ⁽²⁾(r)`: the renewal density of the gap law times
    /// `λ`. Zero for `|r| ≤ c`; tends to `λ²`.
    pub fn pcf(&self, separation: f64) -> f64 {
        let r = separation.abs();
        if self.is_poisson() {
            return if r > 0.0 {
                self.lambda * self.lambda
            } else {
                0.0
            };
        }
        if r <= self.c {
            return 0.0;
        }
        // j-fold gap sums with j c < r contribute; j-fold sum minus j c is Gamma(j, μ)
        let terms = ((r / self.c).ceil() as u64).saturating_sub(1).max(1);
        let (mu, c) = (self.mu, self.c);
        let ln_mu = mu.ln();
        let ln_term = |j: u64| {
            let x = r - j as f64 * c;
            j as f64 * ln_mu + (j - 1) as f64 * x.ln() - mu * x - ln_factorial(j - 1)
        };
        let peak = ((r * self.lambda).round() as u64).clamp(1, terms);
        let mut acc = ln_term(peak).exp();
        for j in (1..peak).rev() {
            let t = ln_term(j).exp();
            acc += t;
            if t <= 1e-18 * acc {
                break;
            }
        }
        for j in peak + 1..=terms {
            let t = ln_term(j).exp();
            acc += t;
            if t <= 1e-18 * acc {
                break;
            }
        }
        self.lambda * acc
    }

    /// Third-order product density at `x`, `y`, `z`. The points are sorted so
    /// that `x > y > z` before evaluating `ρ(x - y) ρ(y - z) / λ`, which is
    /// exact for a renewal process.
    pub fn third_order_correlation(&self, x: f64, y: f64, z: f64) -> f64 {
        let mut p = [x, y, z];
        p.sort_by(|a, b| b.total_cmp(a));
        self.pcf(p[0] - p[1]) * self.pcf(p[1] - p[2]) / self.lambda
    }

    /// `J(r) = (1 - G(r)) / (1 - F(r))`.
    pub fn j_function(&self, r: f64) -> f64 {
        let (lambda, c, mu) = (self.lambda, self.c, self.mu);
        if r <= 0.0 || self.is_poisson() {
            1.0
        } else if r <= 0.5 * c {
            1.0 / (1.0 - 2.0 * lambda * r)
        } else if r <= c {
            (mu * (2.0 * r - c)).exp() / (1.0 - lambda * c)
        } else {
            (mu * c).exp() / (1.0 - lambda * c)
        }
    }

    /// Ripley's `K(r) = (2/λ) Σ_{k=1}^{⌊r/c⌋} [1 - Q(k, μ(r - k c))]`.
    pub fn k_function(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if self.is_poisson() {
            return 2.0 * r;
        }
        let n = (r / self.c).floor() as u64;
        let mut sum = 0.0;
        for k in 1..=n {
            let x = self.mu * (r - k as f64 * self.c);
            let q = regularized_upper_gamma(k.min(u32::MAX as u64) as u32, x.max(0.0))
                .expect("order and argument are in range");
            let term = 1.0 - q;
            sum += term;
            // terms decrease in k; once past the bulk of the neighbor count they vanish
            if term < 1e-17 && k as f64 > self.lambda * r {
                break;
            }
        }
        2.0 * sum / self.lambda
    }

    /// Besag's `L(r) = K(r) / 2` in one dimension.
    pub fn l_function(&self, r: f64) -> f64 {
        0.5 * self.k_function(r)
    }

    /// Nearest-neighbor distance CDF `G(r) = 1 - e^{-2μ(r - c)}` for `r ≥ c`.
    pub fn nearest_neighbor_cdf(&self, r: f64) -> f64 {
        if r <= self.c {
            0.0
        } else {
            -(-2.0 * self.mu * (r - self.c)).exp_m1()
        }
    }

    /// Contact (empty-space) distance CDF: `2λr` up to `c/2`, then
    /// `1 - (1 - λc) e^{-μ(2r - c)}`.
    pub fn contact_cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            0.0
        } else if r <= 0.5 * self.c {
            2.0 * self.lambda * r
        } else {
            1.0 - (1.0 - self.packing()) * (-self.mu * (2.0 * r - self.c)).exp()
        }
    }

    pub fn summary(&self, kind: SummaryKind, r: f64) -> f64 {
        match kind {
            SummaryKind::J => self.j_function(r),
            SummaryKind::K => self.k_function(r),
            SummaryKind::L => self.l_function(r),
            SummaryKind::G => self.nearest_neighbor_cdf(r),
            SummaryKind::F => self.contact_cdf(r),
            SummaryKind::Pcf => self.pcf(r),
        }
    }

    /// Tabulates one closed-form statistic on `r_grid`.
    pub fn summary_curve(
        &self,
        kind: SummaryKind,
        r_grid: &[f64],
    ) -> Result<SummaryCurve, crate::curves::CurveError> {
        let values = r_grid.iter().map(|&r| self.summary(kind, r)).collect();
        SummaryCurve::new(kind, r_grid.to_vec(), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Integrator;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference() -> HardcoreLaneModel {
        HardcoreLaneModel::from_intensity(0.025, 16.0).unwrap()
    }

    #[test]
    fn coupling_of_reference_model() {
        let m = reference();
        assert_relative_eq!(m.mu(), 1.0 / 24.0, max_relative = 1e-15);
        let back = HardcoreLaneModel::from_rate(m.mu(), 16.0).unwrap();
        assert_relative_eq!(back.lambda(), 0.025, max_relative = 1e-15);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            HardcoreLaneModel::from_intensity(0.0, 1.0),
            Err(ModelError::Intensity(_))
        ));
        assert!(matches!(
            HardcoreLaneModel::from_intensity(0.1, -1.0),
            Err(ModelError::Hardcore(_))
        ));
        assert!(matches!(
            HardcoreLaneModel::from_intensity(0.1, 10.0),
            Err(ModelError::Packing(_))
        ));
        assert!(HardcoreLaneModel::from_intensity(0.1, 10.0 * (1.0 - 2e-9)).is_ok());
        assert!(matches!(
            HardcoreLaneModel::from_rate(f64::NAN, 1.0),
            Err(ModelError::Rate(_))
        ));
    }

    #[test]
    fn serde_validates() {
        let m: HardcoreLaneModel = serde_json::from_str(r#"{"lambda":0.025,"c":16}"#).unwrap();
        assert_eq!(m, reference());
        assert!(serde_json::from_str::<HardcoreLaneModel>(r#"{"lambda":0.1,"c":16}"#).is_err());
        assert_eq!(
            serde_json::to_string(&m).unwrap(),
            r#"{"lambda":0.025,"c":16.0}"#
        );
    }

    #[test]
    fn pcf_reference_values() {
        let m = reference();
        let mu = m.mu();
        assert_eq!(m.pcf(8.0), 0.0);
        assert_eq!(m.pcf(16.0), 0.0);
        // first band holds a single term
        assert_relative_eq!(
            m.pcf(24.0),
            0.025 * mu * (-8.0 * mu).exp(),
            max_relative = 1e-14
        );
        assert_eq!(m.pcf(-24.0), m.pcf(24.0));
        // second band: add the Gamma(2, μ) term
        let r = 40.0;
        let two = 0.025
            * (mu * (-mu * (r - 16.0)).exp() + mu * mu * (r - 32.0) * (-mu * (r - 32.0)).exp());
        assert_relative_eq!(m.pcf(r), two, max_relative = 1e-14);
        let far = m.pcf(5000.0);
        assert_relative_eq!(far, 6.25e-4, max_relative = 1e-9);
        assert_relative_eq!(far / (m.lambda() * mu), 0.6, max_relative = 1e-9);
    }

    #[test]
    fn pcf_with_many_bands_stays_finite() {
        let m = HardcoreLaneModel::from_intensity(0.02, 1e-3).unwrap();
        assert_relative_eq!(m.pcf(1e4), 4e-4, max_relative = 1e-9);
    }

    #[test]
    fn third_order_reference_values() {
        let m = reference();
        let mu = m.mu();
        let rho = 0.025 * mu * (-8.0 * mu).exp();
        let expected = rho * rho / 0.025;
        assert_relative_eq!(
            m.third_order_correlation(48.0, 24.0, 0.0),
            expected,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            m.third_order_correlation(0.0, 48.0, 24.0),
            expected,
            max_relative = 1e-14
        );
        assert_eq!(m.third_order_correlation(0.0, 10.0, 100.0), 0.0);
        assert_relative_eq!(
            m.third_order_correlation(2e4, 1e4, 0.0),
            0.025f64.powi(3),
            max_relative = 1e-9
        );
    }

    #[test]
    fn j_reference_values() {
        let m = reference();
        assert_relative_eq!(m.j_function(5.0), 1.0 / 0.75, max_relative = 1e-15);
        assert_relative_eq!(
            m.j_function(100.0),
            (16.0f64 / 24.0).exp() / 0.6,
            max_relative = 1e-15
        );
        assert!((m.j_function(100.0) - 3.246).abs() < 1e-3);
        let ppp = HardcoreLaneModel::ppp(0.025).unwrap();
        assert_eq!(ppp.j_function(37.0), 1.0);
    }

    #[test]
    fn k_and_l_reference_values() {
        let m = reference();
        assert_eq!(m.k_function(16.0), 0.0);
        assert_eq!(m.k_function(10.0), 0.0);
        let k20 = 80.0 * (1.0 - (-4.0f64 / 24.0).exp());
        assert_relative_eq!(m.k_function(20.0), k20, max_relative = 1e-14);
        assert!((m.l_function(20.0) - 6.14).abs() < 0.01);
        assert_eq!(HardcoreLaneModel::ppp(0.1).unwrap().k_function(7.0), 14.0);
    }

    #[test]
    fn l_slope_is_unity_beyond_fifty_meters() {
        let m = HardcoreLaneModel::from_intensity(0.025, 16.0).unwrap();
        assert_relative_eq!(m.packing(), 0.4);
        for r in [60.0, 100.0, 200.0] {
            let slope = (m.l_function(r + 5.0) - m.l_function(r - 5.0)) / 10.0;
            assert!((slope - 1.0).abs() < 0.02, "slope {slope} at {r}");
        }
    }

    #[test]
    fn g_and_f_reference_values() {
        let m = reference();
        assert_eq!(m.nearest_neighbor_cdf(16.0), 0.0);
        assert_relative_eq!(m.contact_cdf(8.0), 0.4, max_relative = 1e-15);
        let right = 1.0 - 0.6 * (-m.mu() * (2.0 * 8.0 - 16.0)).exp();
        assert_relative_eq!(right, 0.4, max_relative = 1e-15);
        let ppp = HardcoreLaneModel::ppp(0.03).unwrap();
        for r in [1.0, 10.0, 50.0] {
            let e = 1.0 - (-0.06f64 * r).exp();
            assert_relative_eq!(ppp.nearest_neighbor_cdf(r), e, max_relative = 1e-14);
            assert_relative_eq!(ppp.contact_cdf(r), e, max_relative = 1e-14);
        }
    }

    /// `K(r) = (2/λ²) ∫_0^r ρ(x) dx`, integrated band by band because the pcf
    /// jumps at `c` and has kinks at every multiple of `c`.
    fn k_by_quadrature(m: &HardcoreLaneModel, r: f64) -> f64 {
        let quad = Integrator::with_tolerances(1e-14, 1e-13);
        let mut edges = vec![0.0];
        let mut e = m.c();
        while e < r {
            edges.push(e);
            e += m.c();
        }
        edges.push(r);
        let integral: f64 = edges
            .windows(2)
            .map(|w| quad.integrate(|x| m.pcf(x), w[0], w[1]).unwrap().value)
            .sum();
        2.0 * integral / (m.lambda() * m.lambda())
    }

    #[test]
    fn k_matches_integrated_pcf() {
        let m = reference();
        for r in [17.0, 20.0, 32.0, 40.0, 80.0, 200.0, 500.0] {
            assert!(
                (m.k_function(r) - k_by_quadrature(&m, r)).abs() < 1e-8,
                "r = {r}"
            );
        }
    }

    prop_compose! {
        fn model()(lambda in 0.002f64..0.2, packing in 0.0f64..0.9) -> HardcoreLaneModel {
            HardcoreLaneModel::from_intensity(lambda, packing / lambda).unwrap()
        }
    }

    proptest! {
        #[test]
        fn coupling_is_exact(m in model()) {
            prop_assert!((m.lambda() * (1.0 + m.mu() * m.c()) - m.mu()).abs() < 1e-12);
        }

        #[test]
        fn pcf_vanishes_inside_hardcore_and_tends_to_lambda_squared(
            lambda in 0.002f64..0.2, packing in 0.01f64..0.6, frac in 0.0f64..=1.0,
        ) {
            let m = HardcoreLaneModel::from_intensity(lambda, packing / lambda).unwrap();
            prop_assert_eq!(m.pcf(frac * m.c()), 0.0);
            let ratio = m.pcf(50.0 * m.c()) / (lambda * lambda);
            prop_assert!((ratio - 1.0).abs() < 1e-6, "ratio {}", ratio);
        }

        #[test]
        fn j_at_least_one_flat_and_continuous(m in model(), r in 0.0f64..500.0) {
            prop_assert!(m.j_function(r) >= 1.0);
            let c = m.c();
            if c > 0.0 {
                prop_assert_eq!(m.j_function(c + 1.0 + r), m.j_function(c + 1.0));
                for b in [0.5 * c, c] {
                    let lo = m.j_function(b * (1.0 - 1e-15));
                    let hi = m.j_function(b * (1.0 + 1e-15));
                    prop_assert!((lo - hi).abs() <= 1e-12 * lo.max(1.0), "{} vs {}", lo, hi);
                }
            }
        }

        #[test]
        fn j_is_nondecreasing(m in model(), r in 0.0f64..500.0, dr in 0.0f64..50.0) {
            prop_assert!(m.j_function(r + dr) >= m.j_function(r));
        }

        #[test]
        fn l_never_exceeds_r(m in model(), r in 0.0f64..1000.0) {
            prop_assert!(m.l_function(r) <= r * (1.0 + 1e-12));
        }

        #[test]
        fn k_nondecreasing(m in model(), r in 0.0f64..500.0, dr in 0.0f64..20.0) {
            prop_assert!(m.k_function(r + dr) >= m.k_function(r) - 1e-12);
        }

        #[test]
        fn cdfs_monotone_bounded_and_consistent_with_j(
            m in model(), r in 0.0f64..400.0, dr in 0.0f64..20.0,
        ) {
            for f in [HardcoreLaneModel::nearest_neighbor_cdf, HardcoreLaneModel::contact_cdf] {
                let (a, b) = (f(&m, r), f(&m, r + dr));
                prop_assert!((0.0..=1.0).contains(&a) && b >= a);
            }
            let (g, f) = (m.nearest_neighbor_cdf(r), m.contact_cdf(r));
            if 1.0 - f > 1e-6 {
                let identity = (1.0 - g) / (1.0 - f);
                prop_assert!((identity - m.j_function(r)).abs() <= 1e-9 * m.j_function(r));
            }
        }

        #[test]
        fn k_matches_quadrature(m in model(), steps in 1.0f64..12.0) {
            prop_assume!(m.c() > 0.5);
            let r = steps * m.c();
            let diff = (m.k_function(r) - k_by_quadrature(&m, r)).abs();
            prop_assert!(diff < 1e-8 * m.k_function(r).max(1.0), "diff {}", diff);
        }
    }
}
