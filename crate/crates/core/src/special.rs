//! Special functions used by the closed-form summary statistics and the
//! outage formulas.
//!
//! Only two kernels are needed:
//!
//! * the regularized upper incomplete gamma `Q(k, x)` for integer `k`, which
//!   is an exact finite sum;
//! * the Gauss hypergeometric family `2F1(1, b; 1 + b; -z)` with
//!   `0 < b < 1`, which covers both `2F1(1, 1 - 1/η; 2 - 1/η; -θ)` and
//!   `2F1(1, 1/η; 1 + 1/η; -z)`.
//!
//! For the hypergeometric family three regimes are used: the Gauss series for
//! `z < 0.9`, the Pfaff transformation `2F1(1, b; 1+b; -z) =
//! (1+z)^{-1} 2F1(1, 1; 1+b; z/(1+z))` up to `z = 2`, and the `1/z`
//! expansion
//!
//! ```text
//! 2F1(1, b; 1+b; -z) = b π / sin(π b) · z^{-b} - b Σ_{n≥0} (-1)^n z^{-n-1} / (n + 1 - b)
//! ```
//!
//! beyond that.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("incomplete gamma order must be at least 1")]
    ZeroOrder,
    #[error("argument must be a nonnegative number, got {0}")]
    NegativeArgument(f64),
    #[error("pathloss exponent must exceed 1, got {0}")]
    PathlossExponent(f64),
}

const SERIES_LIMIT: f64 = 0.9;
const PFAFF_LIMIT: f64 = 2.0;
const MAX_TERMS: usize = 5000;
const DIRECT_ORDER_LIMIT: u32 = 200;

/// Regularized upper incomplete gamma `Q(k, x) = Γ(k, x) / Γ(k)` for integer
/// order, evaluated as `e^{-x} Σ_{j<k} x^j / j!`.
pub fn regularized_upper_gamma(k: u32, x: f64) -> Result<f64, DomainError> {
    if k == 0 {
        return Err(DomainError::ZeroOrder);
    }
    if !(x >= 0.0) {
        return Err(DomainError::NegativeArgument(x));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let lead = (-x).exp();
    let sum = if lead > 0.0 && k <= DIRECT_ORDER_LIMIT {
        let mut term = lead;
        let mut acc = lead;
        for j in 1..k {
            term *= x / j as f64;
            acc += term;
        }
        acc
    } else {
        poisson_window_sum(k, x)
    };
    Ok(sum.clamp(0.0, 1.0))
}

/// `2F1(1, b; 1 + b; -z)` for `0 < b < 1` and `z ≥ 0`.
///
/// Equivalent to `∫_0^1 du / (1 + z u^{1/b})`; strictly decreasing in `z`,
/// equal to 1 at the origin and decaying like `z^{-b}`.
pub fn hyp2f1_unit_shift(b: f64, z: f64) -> f64 {
    debug_assert!(b > 0.0 && b < 1.0, "b = {b} outside (0, 1)");
    debug_assert!(z >= 0.0, "z = {z} negative");
    if z == 0.0 {
        1.0
    } else if z.is_infinite() {
        0.0
    } else if z < SERIES_LIMIT {
        gauss_series(b, z)
    } else if z <= PFAFF_LIMIT {
        pfaff_series(b, z)
    } else {
        reflection_leading(b, z) - b * reflection_remainder(b, z)
    }
}

/// `b π / sin(π b) · z^{-b} - 2F1(1, b; 1 + b; -z)`.
///
/// For large `z` both terms are nearly equal; this evaluates the difference
/// from the remainder series directly so the result keeps full relative
/// precision.
pub fn hyp2f1_unit_shift_deficit(b: f64, z: f64) -> f64 {
    if z.is_infinite() {
        0.0
    } else if z > PFAFF_LIMIT {
        b * reflection_remainder(b, z)
    } else {
        reflection_leading(b, z) - hyp2f1_unit_shift(b, z)
    }
}

/// `2F1(1, 1 - 1/η; 2 - 1/η; -θ)`, the hypergeometric factor of the PPP
/// own-lane outage.
pub fn hyp2f1_outage(eta: f64, theta: f64) -> Result<f64, DomainError> {
    check_eta(eta)?;
    check_arg(theta)?;
    Ok(hyp2f1_unit_shift(1.0 - 1.0 / eta, theta))
}

/// `2F1(1, 1/η; 1 + 1/η; -z)`, the hypergeometric factor of the guard-zone
/// interference term.
pub fn hyp2f1_guardzone(eta: f64, z: f64) -> Result<f64, DomainError> {
    check_eta(eta)?;
    check_arg(z)?;
    Ok(hyp2f1_unit_shift(1.0 / eta, z))
}

/// `(π/η) csc(π/η)`, the constant that keeps appearing next to the
/// hypergeometric terms.
pub fn pi_csc(eta: f64) -> f64 {
    let a = PI / eta;
    a / a.sin()
}

/// `ln(n!)`, exact summation for small `n` and Stirling's series beyond.
pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n < 32 {
        return (2..=n).map(|j| (j as f64).ln()).sum();
    }
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// `Σ_{j<k} e^{-x} x^j / j!` evaluated term by term in log space, starting
/// at the largest term and walking outward until the terms are negligible.
fn poisson_window_sum(k: u32, x: f64) -> f64 {
    let ln_x = x.ln();
    let ln_term = |j: u32| j as f64 * ln_x - x - ln_factorial(j as u64);
    let peak = (x.floor() as u64).min(k as u64 - 1) as u32;
    let mut acc = ln_term(peak).exp();
    let mut term = acc;
    for j in (0..peak).rev() {
        term *= (j + 1) as f64 / x;
        acc += term;
        if term <= 1e-18 * acc {
            break;
        }
    }
    term = ln_term(peak).exp();
    for j in peak + 1..k {
        term *= x / j as f64;
        acc += term;
        if term <= 1e-18 * acc {
            break;
        }
    }
    acc
}

fn check_eta(eta: f64) -> Result<(), DomainError> {
    if eta > 1.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(DomainError::PathlossExponent(eta))
    }
}

fn check_arg(z: f64) -> Result<(), DomainError> {
    if z >= 0.0 {
        Ok(())
    } else {
        Err(DomainError::NegativeArgument(z))
    }
}

fn gauss_series(b: f64, z: f64) -> f64 {
    // Σ b/(b+n) (-z)^n
    let mut power = 1.0;
    let mut sum = 1.0;
    for n in 1..MAX_TERMS {
        power *= -z;
        let term = b / (b + n as f64) * power;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn pfaff_series(b: f64, z: f64) -> f64 {
    // (1+z)^{-1} Σ n!/(1+b)_n w^n, w = z/(1+z)
    let w = z / (1.0 + z);
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_TERMS {
        let n1 = n as f64 + 1.0;
        term *= n1 / (n1 + b) * w;
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum / (1.0 + z)
}

fn reflection_leading(b: f64, z: f64) -> f64 {
    b * PI / (PI * b).sin() * z.powf(-b)
}

fn reflection_remainder(b: f64, z: f64) -> f64 {
    // Σ (-1)^n z^{-n-1} / (n + 1 - b), alternating with ratio ~ 1/z
    let inv = 1.0 / z;
    let mut power = inv;
    let mut sum = 0.0;
    for n in 0..MAX_TERMS {
        let term = power / (n as f64 + 1.0 - b);
        if n % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        if term <= 1e-17 * sum.abs() {
            break;
        }
        power *= inv;
    }
    sum
}
