//! Per-lane estimation of `(λ, c)` from observed gaps.
//!
//! Every hardcore estimate is admissible: `ĉ ≥ 0` and `λ̂ ĉ < 1`. Method of
//! moments may produce a negative raw hardcore; it is then clamped to zero,
//! the raw value is kept and the result is flagged.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{HardcoreLaneModel, ModelError, MAX_PACKING};

pub const DEFAULT_BINS: usize = 200;
pub const BIN_QUANTILE: f64 = 0.995;
const MIN_BINS: usize = 5;
const MAX_ITERATIONS: usize = 10_000;
const STEP_TOLERANCE: f64 = 1e-8;
const MAX_DAMPING: f64 = 1e16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least 2 gaps, got {0}")]
    TooFewGaps(usize),
    #[error("gap {index} is {value}; gaps must be positive and finite")]
    BadGap { index: usize, value: f64 },
    #[error("all gaps are equal; the spread of the sample is zero")]
    ZeroVariance,
    #[error("least squares needs at least {MIN_BINS} evaluation points, got {0}")]
    TooFewBins(usize),
    #[error("least squares did not converge in {iterations} iterations (best rss {:e})", best.rss.unwrap_or(f64::NAN))]
    NonConvergence {
        iterations: usize,
        best: Box<FitResult>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Observed gaps (meters) of one lane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSample {
    gaps: Vec<f64>,
    lane_id: u32,
}

impl GapSample {
    pub fn new(gaps: Vec<f64>, lane_id: u32) -> Result<Self, FitError> {
        if gaps.len() < 2 {
            return Err(FitError::TooFewGaps(gaps.len()));
        }
        if let Some((index, &value)) = gaps
            .iter()
            .enumerate()
            .find(|(_, g)| !(**g > 0.0 && g.is_finite()))
        {
            return Err(FitError::BadGap { index, value });
        }
        Ok(Self { gaps, lane_id })
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn lane_id(&self) -> u32 {
        self.lane_id
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.gaps.iter().sum::<f64>() / self.gaps.len() as f64
    }

    /// Sample standard deviation with the `n - 1` denominator.
    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.gaps.iter().map(|g| (g - m) * (g - m)).sum();
        (ss / (self.gaps.len() - 1) as f64).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn sorted(&self) -> Vec<f64> {
        let mut s = self.gaps.clone();
        s.sort_by(f64::total_cmp);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FitMethod {
    PppMle,
    Mom,
    HcMle,
    Lsq2,
    Lsq1FixedIntensity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub lane_id: u32,
    pub method: FitMethod,
    pub lambda_hat: f64,
    /// Absent for the Poisson fit.
    pub c_hat: Option<f64>,
    /// Residual sum of squares against the gap ECDF, for least squares.
    pub rss: Option<f64>,
    pub clamped: bool,
    /// Hardcore estimate before clamping, when clamping happened.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_raw: Option<f64>,
}

impl FitResult {
    /// Rate of the exponential part of the gap, `1 / (1/λ̂ - ĉ)`.
    pub fn mu_hat(&self) -> f64 {
        let c = self.c_hat.unwrap_or(0.0);
        self.lambda_hat / (1.0 - self.lambda_hat * c)
    }

    pub fn to_model(&self) -> Result<HardcoreLaneModel, ModelError> {
        HardcoreLaneModel::from_intensity(self.lambda_hat, self.c_hat.unwrap_or(0.0))
    }
}

/// Fits `sample` with `method` using the default bins for least squares.
pub fn fit(method: FitMethod, sample: &GapSample) -> Result<FitResult, FitError> {
    match method {
        FitMethod::PppMle => Ok(fit_ppp_mle(sample)),
        FitMethod::Mom => fit_mom(sample),
        FitMethod::HcMle => fit_hc_mle(sample),
        FitMethod::Lsq2 => fit_lsq(sample, None, false),
        FitMethod::Lsq1FixedIntensity => fit_lsq(sample, None, true),
    }
}

/// Poisson maximum likelihood: `λ̂ = n / Σ z`.
pub fn fit_ppp_mle(sample: &GapSample) -> FitResult {
    FitResult {
        lane_id: sample.lane_id,
        method: FitMethod::PppMle,
        lambda_hat: 1.0 / sample.mean(),
        c_hat: None,
        rss: None,
        clamped: false,
        c_raw: None,
    }
}

/// Method of moments: `1/μ̂` is the sample standard deviation and `ĉ` the
/// mean minus it. A negative `ĉ` is clamped to zero; `λ̂ = 1/mean` either way.
pub fn fit_mom(sample: &GapSample) -> Result<FitResult, FitError> {
    let mean = sample.mean();
    let sd = sample.std_dev();
    if !(sd > 0.0) {
        return Err(FitError::ZeroVariance);
    }
    let raw = mean - sd;
    let lambda = 1.0 / mean;
    let c = raw.clamp(0.0, MAX_PACKING / lambda);
    let clamped = c != raw;
    Ok(FitResult {
        lane_id: sample.lane_id,
        method: FitMethod::Mom,
        lambda_hat: lambda,
        c_hat: Some(c),
        rss: None,
        clamped,
        c_raw: clamped.then_some(raw),
    })
}

/// Maximum likelihood for the shifted exponential: `ĉ` is the smallest gap
/// and `1/μ̂` the mean excess over it, so `λ̂ = 1/mean`.
pub fn fit_hc_mle(sample: &GapSample) -> Result<FitResult, FitError> {
    let mean = sample.mean();
    let c = sample.min();
    if !(mean - c > 0.0) {
        return Err(FitError::ZeroVariance);
    }
    Ok(FitResult {
        lane_id: sample.lane_id,
        method: FitMethod::HcMle,
        lambda_hat: 1.0 / mean,
        c_hat: Some(c),
        rss: None,
        clamped: false,
        c_raw: None,
    })
}

/// Default evaluation points: right edges of 200 equal-width bins from 0 to
/// the 99.5th percentile of the gaps.
pub fn default_bins(sample: &GapSample) -> Vec<f64> {
    let sorted = sample.sorted();
    let idx = ((BIN_QUANTILE * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    let top = sorted[idx];
    (1..=DEFAULT_BINS)
        .map(|i| top * i as f64 / DEFAULT_BINS as f64)
        .collect()
}

/// Least-squares fit of the shifted-exponential CDF to the gap ECDF at
/// `bins` (default: [`default_bins`]). With `fix_intensity`, `λ̂` is pinned to
/// the Poisson estimate and only `ĉ` is searched, `μ` following from the
/// coupling.
pub fn fit_lsq(
    sample: &GapSample,
    bins: Option<&[f64]>,
    fix_intensity: bool,
) -> Result<FitResult, FitError> {
    let owned;
    let x = match bins {
        Some(b) => b,
        None => {
            owned = default_bins(sample);
            &owned
        }
    };
    if x.len() < MIN_BINS {
        return Err(FitError::TooFewBins(x.len()));
    }
    let sorted = sample.sorted();
    let n = sorted.len() as f64;
    let ecdf: Vec<f64> = x
        .iter()
        .map(|&b| sorted.partition_point(|&g| g <= b) as f64 / n)
        .collect();

    let mom = fit_mom(sample)?;
    let mle = fit_hc_mle(sample).ok();
    let mut starts = vec![(mom.mu_hat(), mom.c_hat.unwrap_or(0.0))];
    if let Some(m) = mle {
        starts.push((m.mu_hat(), m.c_hat.unwrap_or(0.0)));
    }
    let lambda_fixed = fix_intensity.then(|| 1.0 / sample.mean());
    fit_lsq_points(x, &ecdf, lambda_fixed, &starts, sample.lane_id)
}

/// Least-squares fit to an arbitrary tabulated CDF `(x, ecdf)`, starting from
/// a guess read off the curve itself.
pub fn fit_lsq_to_ecdf(
    x: &[f64],
    ecdf: &[f64],
    fix_intensity: Option<f64>,
    lane_id: u32,
) -> Result<FitResult, FitError> {
    if x.len() < MIN_BINS || x.len() != ecdf.len() {
        return Err(FitError::TooFewBins(x.len().min(ecdf.len())));
    }
    let c0 = x
        .iter()
        .zip(ecdf)
        .filter(|(_, &f)| f <= 0.0)
        .map(|(&x, _)| x)
        .fold(0.0, f64::max);
    let median = x
        .iter()
        .zip(ecdf)
        .find(|(_, &f)| f >= 0.5)
        .map_or(x[x.len() - 1], |(&x, _)| x);
    let mu0 = std::f64::consts::LN_2 / (median - c0).max(1e-9);
    fit_lsq_points(x, ecdf, fix_intensity, &[(mu0, c0)], lane_id)
}

fn fit_lsq_points(
    x: &[f64],
    ecdf: &[f64],
    lambda_fixed: Option<f64>,
    starts: &[(f64, f64)],
    lane_id: u32,
) -> Result<FitResult, FitError> {
    let problem = LsqProblem {
        x,
        ecdf,
        lambda_fixed,
    };
    let mut best: Option<LsqOutcome> = None;
    for &(mu, c) in starts {
        let outcome = problem.minimize(problem.start_params(mu, c));
        if best.as_ref().is_none_or(|b| outcome.rss < b.rss) {
            best = Some(outcome);
        }
    }
    let best = best.expect("at least one start");
    let (mu, c) = problem.mu_c(&best.params);
    let model = HardcoreLaneModel::from_rate(mu, c)?;
    let result = FitResult {
        lane_id,
        method: if lambda_fixed.is_some() {
            FitMethod::Lsq1FixedIntensity
        } else {
            FitMethod::Lsq2
        },
        lambda_hat: lambda_fixed.unwrap_or(model.lambda()),
        c_hat: Some(c),
        rss: Some(best.rss),
        clamped: false,
        c_raw: None,
    };
    if best.converged {
        Ok(result)
    } else {
        Err(FitError::NonConvergence {
            iterations: best.iterations,
            best: Box::new(result),
        })
    }
}

struct LsqProblem<'a> {
    x: &'a [f64],
    ecdf: &'a [f64],
    lambda_fixed: Option<f64>,
}

#[derive(Debug, Clone)]
struct LsqOutcome {
    params: Vec<f64>,
    rss: f64,
    iterations: usize,
    converged: bool,
    /// Objective after every accepted step, starting with the initial value.
    #[cfg_attr(not(test), allow(dead_code))]
    history: Vec<f64>,
}

impl LsqProblem<'_> {
    /// Free parameters: `(ln μ, c)`, or `(c)` when the intensity is pinned.
    fn start_params(&self, mu: f64, c: f64) -> Vec<f64> {
        match self.lambda_fixed {
            Some(_) => vec![self.project_c(c)],
            None => vec![mu.ln(), self.project_c(c)],
        }
    }

    fn c_max(&self) -> f64 {
        match self.lambda_fixed {
            // keep λc admissible and μ finite
            Some(lambda) => MAX_PACKING / lambda,
            None => f64::INFINITY,
        }
    }

    fn project_c(&self, c: f64) -> f64 {
        c.clamp(0.0, self.c_max())
    }

    fn mu_c(&self, p: &[f64]) -> (f64, f64) {
        match self.lambda_fixed {
            Some(lambda) => (lambda / (1.0 - lambda * p[0]), p[0]),
            None => (p[0].exp(), p[1]),
        }
    }

    /// Residuals `ECDF - F` and their Jacobian with respect to the free
    /// parameters.
    fn evaluate(&self, p: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let (mu, c) = self.mu_c(p);
        let mut res = Vec::with_capacity(self.x.len());
        let mut jac = Vec::with_capacity(self.x.len());
        for (&x, &e) in self.x.iter().zip(self.ecdf) {
            let t = x - c;
            if t <= 0.0 {
                res.push(e);
                jac.push(vec![0.0; p.len()]);
                continue;
            }
            let tail = (-mu * t).exp();
            res.push(e - (1.0 - tail));
            // residual derivative is minus the CDF derivative
            let row = match self.lambda_fixed {
                Some(_) => vec![-tail * (mu * mu * t - mu)],
                None => vec![-tail * mu * t, tail * mu],
            };
            jac.push(row);
        }
        (res, jac)
    }

    fn rss(&self, p: &[f64]) -> f64 {
        self.evaluate(p).0.iter().map(|r| r * r).sum()
    }

    fn project(&self, p: &mut [f64]) {
        let i = p.len() - 1;
        p[i] = self.project_c(p[i]);
    }

    /// Levenberg–Marquardt with projection onto the admissible box. Only
    /// steps that lower the objective are accepted.
    fn minimize(&self, mut p: Vec<f64>) -> LsqOutcome {
        let dim = p.len();
        let (mut res, mut jac) = self.evaluate(&p);
        let mut rss: f64 = res.iter().map(|r| r * r).sum();
        let mut history = vec![rss];
        let mut damping = 1e-3;
        for iteration in 0..MAX_ITERATIONS {
            if rss == 0.0 {
                return self.done(p, rss, iteration, true, history);
            }
            let mut jtj = vec![vec![0.0; dim]; dim];
            let mut jtr = vec![0.0; dim];
            for (row, r) in jac.iter().zip(&res) {
                for a in 0..dim {
                    jtr[a] += row[a] * r;
                    for b in 0..dim {
                        jtj[a][b] += row[a] * row[b];
                    }
                }
            }
            let mut accepted = false;
            while damping <= MAX_DAMPING {
                let mut m = jtj.clone();
                for (a, row) in m.iter_mut().enumerate() {
                    row[a] += damping * jtj[a][a].max(1e-12);
                }
                let Some(step) = solve(&m, &jtr.iter().map(|v| -v).collect::<Vec<_>>()) else {
                    damping *= 10.0;
                    continue;
                };
                let mut trial: Vec<f64> = p.iter().zip(&step).map(|(a, s)| a + s).collect();
                self.project(&mut trial);
                let trial_rss = self.rss(&trial);
                if trial_rss < rss {
                    let moved = p
                        .iter()
                        .zip(&trial)
                        .all(|(a, b)| (a - b).abs() <= STEP_TOLERANCE * a.abs().max(1.0));
                    p = trial;
                    rss = trial_rss;
                    history.push(rss);
                    (res, jac) = self.evaluate(&p);
                    damping = (damping / 10.0).max(1e-12);
                    accepted = true;
                    if moved {
                        return self.done(p, rss, iteration + 1, true, history);
                    }
                    break;
                }
                damping *= 10.0;
            }
            if !accepted {
                // no descent direction left at any damping: a stationary point
                return self.done(p, rss, iteration + 1, true, history);
            }
        }
        self.done(p, rss, MAX_ITERATIONS, false, history)
    }

    fn done(
        &self,
        params: Vec<f64>,
        rss: f64,
        iterations: usize,
        converged: bool,
        history: Vec<f64>,
    ) -> LsqOutcome {
        LsqOutcome {
            params,
            rss,
            iterations,
            converged,
            history,
        }
    }
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &v)| {
            let mut r = row.clone();
            r.push(v);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if !(m[pivot][col].abs() > 0.0) {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{GapLaw, RngSeed};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn draw(model: &HardcoreLaneModel, n: usize, seed: u64) -> GapSample {
        let mut rng = RngSeed::new(seed, 0).rng();
        GapSample::new((0..n).map(|_| model.draw_gap(&mut rng)).collect(), 1).unwrap()
    }

    #[test]
    fn sample_validation() {
        assert_eq!(GapSample::new(vec![1.0], 0), Err(FitError::TooFewGaps(1)));
        assert!(matches!(
            GapSample::new(vec![1.0, 0.0], 0),
            Err(FitError::BadGap { index: 1, .. })
        ));
    }

    #[test]
    fn ppp_mle_of_constant_gaps() {
        let s = GapSample::new(vec![40.0; 10], 0).unwrap();
        assert_relative_eq!(fit_ppp_mle(&s).lambda_hat, 0.025);
        let tiny = GapSample::new(vec![1e-3; 5], 0).unwrap();
        assert_relative_eq!(fit_ppp_mle(&tiny).lambda_hat, 1000.0, max_relative = 1e-12);
    }

    #[test]
    fn ppp_mle_on_exponential_data() {
        let m = HardcoreLaneModel::ppp(0.025).unwrap();
        let f = fit_ppp_mle(&draw(&m, 10_000, 3));
        assert!((f.lambda_hat / 0.025 - 1.0).abs() < 0.02);
    }

    #[test]
    fn mom_inverts_exact_moments() {
        // mean c + 1/μ = 40, std 1/μ = 24 → (c, μ) = (16, 1/24)
        let s = GapSample::new(
            vec![40.0 - 24.0 / 2f64.sqrt() * 1.0, 40.0 + 24.0 / 2f64.sqrt()],
            0,
        )
        .unwrap();
        let f = fit_mom(&s).unwrap();
        assert_relative_eq!(f.c_hat.unwrap(), 16.0, max_relative = 1e-12);
        assert_relative_eq!(f.mu_hat(), 1.0 / 24.0, max_relative = 1e-12);
        assert!(!f.clamped);
    }

    #[test]
    fn mom_clamps_negative_hardcore() {
        let s = GapSample::new(vec![1.0, 1.0, 1.0, 50.0], 0).unwrap();
        let f = fit_mom(&s).unwrap();
        assert!(f.clamped);
        assert_eq!(f.c_hat, Some(0.0));
        assert!(f.c_raw.unwrap() < 0.0);
        assert_relative_eq!(f.lambda_hat, 1.0 / 13.25);
        assert_eq!(
            fit_mom(&GapSample::new(vec![3.0; 4], 0).unwrap()),
            Err(FitError::ZeroVariance)
        );
    }

    #[test]
    fn hc_mle_uses_the_smallest_gap() {
        let s = GapSample::new(vec![10.0, 3.0, 20.0], 0).unwrap();
        let f = fit_hc_mle(&s).unwrap();
        assert_eq!(f.c_hat, Some(3.0));
        assert_relative_eq!(f.mu_hat(), 1.0 / 8.0, max_relative = 1e-12);
        assert_eq!(
            fit_hc_mle(&GapSample::new(vec![7.0; 3], 0).unwrap()),
            Err(FitError::ZeroVariance)
        );
    }

    #[test]
    fn hc_mle_approaches_c_from_above() {
        let m = HardcoreLaneModel::from_intensity(0.025, 16.0).unwrap();
        let f = fit_hc_mle(&draw(&m, 10_000, 5)).unwrap();
        let c = f.c_hat.unwrap();
        assert!((16.0..16.05).contains(&c), "{c}");
    }

    #[test]
    fn lsq_recovers_noiseless_ecdf() {
        let (mu, c) = (1.0 / 24.0, 16.0);
        let x: Vec<f64> = (1..=400).map(|i| i as f64 * 0.5).collect();
        let f: Vec<f64> = x
            .iter()
            .map(|&x| {
                if x <= c {
                    0.0
                } else {
                    1.0 - (-mu * (x - c)).exp()
                }
            })
            .collect();
        let fit = fit_lsq_to_ecdf(&x, &f, None, 0).unwrap();
        assert!((fit.mu_hat() / mu - 1.0).abs() < 1e-4);
        assert!((fit.c_hat.unwrap() - c).abs() < 1e-4);
        let fixed = fit_lsq_to_ecdf(&x, &f, Some(0.025), 0).unwrap();
        assert!((fixed.c_hat.unwrap() - c).abs() < 1e-4);
        assert_eq!(fixed.method, FitMethod::Lsq1FixedIntensity);
    }

    #[test]
    fn lsq_on_poisson_data_matches_ppp_rate() {
        let m = HardcoreLaneModel::ppp(0.02).unwrap();
        let s = draw(&m, 10_000, 7);
        let f = fit_lsq(&s, None, false).unwrap();
        assert!(f.c_hat.unwrap() < 0.5, "{:?}", f.c_hat);
        assert!((f.lambda_hat / fit_ppp_mle(&s).lambda_hat - 1.0).abs() < 0.03);
    }

    #[test]
    fn lsq_needs_bins() {
        let s = GapSample::new(vec![1.0, 2.0, 3.0], 0).unwrap();
        assert_eq!(
            fit_lsq(&s, Some(&[1.0, 2.0]), false),
            Err(FitError::TooFewBins(2))
        );
    }

    #[test]
    fn lsq_objective_decreases_monotonically() {
        let m = HardcoreLaneModel::from_intensity(0.02, 12.0).unwrap();
        let s = draw(&m, 500, 1);
        let x = default_bins(&s);
        let sorted = s.sorted();
        let ecdf: Vec<f64> = x
            .iter()
            .map(|&b| sorted.partition_point(|&g| g <= b) as f64 / sorted.len() as f64)
            .collect();
        for fixed in [None, Some(0.02)] {
            let p = LsqProblem {
                x: &x,
                ecdf: &ecdf,
                lambda_fixed: fixed,
            };
            let out = p.minimize(p.start_params(0.01, 0.0));
            assert!(out.converged);
            assert!(out.history.len() > 2);
            assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn fit_result_json_shape() {
        let s = GapSample::new(vec![20.0, 30.0, 70.0], 4).unwrap();
        let json = serde_json::to_value(fit_hc_mle(&s).unwrap()).unwrap();
        assert_eq!(json["method"], "HC_MLE");
        assert_eq!(json["lane_id"], 4);
        assert_eq!(json["c_hat"], 20.0);
        assert!(json.get("c_raw").is_none());
        let ppp = serde_json::to_value(fit_ppp_mle(&s)).unwrap();
        assert!(ppp["c_hat"].is_null());
        assert_eq!(
            serde_json::to_value(FitMethod::Lsq1FixedIntensity).unwrap(),
            "LSQ1_FIXED_INTENSITY"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn estimates_are_admissible(
            gaps in prop::collection::vec(0.01f64..500.0, 2..60),
            method in prop::sample::select(vec![FitMethod::Mom, FitMethod::HcMle, FitMethod::Lsq2, FitMethod::Lsq1FixedIntensity]),
        ) {
            let s = GapSample::new(gaps, 0).unwrap();
            match fit(method, &s) {
                Ok(f) => {
                    let c = f.c_hat.unwrap();
                    prop_assert!(c >= 0.0 && f.lambda_hat * c < 1.0);
                    prop_assert!(f.to_model().is_ok());
                }
                Err(FitError::ZeroVariance) | Err(FitError::NonConvergence { .. }) => {}
                Err(e) => prop_assert!(false, "{}", e),
            }
        }
    }
}
