//! Distribution function of the Mittag-Leffler law,
//! `F_α(x) = 1 - E_α(-x^α)`, with `E_α(z) = Σ_k z^k / Γ(1+αk)`.
//!
//! The alternating series is accurate only while its largest term stays
//! small; beyond that the CDF is obtained by Talbot inversion of
//! `1/(s(1+s^α))`.

use num_complex::Complex64;

use super::talbot::{invert_lt_at, TALBOT_NODES};
use crate::error::{invalid, Result};

const SERIES_MAX_TERMS: usize = 200;
const SERIES_REL_TOL: f64 = 1e-16;
/// Outer limit on `x^α` for the series branch.
pub const SERIES_MAX_ARGUMENT: f64 = 10.0;
/// Largest term magnitude tolerated in the alternating series; the rounding
/// error of the sum is about `1e-16` times this.
const SERIES_MAX_TERM: f64 = 1e4;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("Mittag-Leffler alpha must lie in (0, 1], got {alpha}")))
    }
}

fn check_x(x: f64) -> Result<()> {
    if x >= 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(invalid(format!("Mittag-Leffler CDF needs x >= 0, got {x}")))
    }
}

fn log_term(alpha: f64, z: f64, k: usize) -> f64 {
    k as f64 * z.ln() - libm::lgamma(1.0 + alpha * k as f64)
}

/// Largest `|z^k/Γ(1+αk)|` over the terms the series would use.
fn max_series_term(alpha: f64, z: f64) -> f64 {
    if z <= 1.0 {
        return 1.0;
    }
    (0..=SERIES_MAX_TERMS)
        .map(|k| log_term(alpha, z, k))
        .fold(f64::NEG_INFINITY, f64::max)
        .exp()
}

/// `1 - E_α(-z)` by the power series, summed from `k = 1` so that small
/// arguments keep full relative accuracy.
fn cdf_series_in_z(alpha: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for k in 1..=SERIES_MAX_TERMS {
        let magnitude = log_term(alpha, z, k).exp();
        // -(-z)^k = (-1)^{k+1} z^k
        let term = if k % 2 == 1 { magnitude } else { -magnitude };
        sum += term;
        if magnitude < SERIES_REL_TOL * sum.abs() {
            break;
        }
    }
    sum
}

/// `1 - E_α(-x^α)` from the truncated series only.
pub fn ml_cdf_series(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_x(x)?;
    Ok(cdf_series_in_z(alpha, x.powf(alpha)))
}

/// `1 - E_α(-x^α)` by Talbot inversion of `1/(s(1+s^α))` only.
pub fn ml_cdf_inversion(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_x(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let transform = move |s: Complex64| 1.0 / (s * (1.0 + s.powf(alpha)));
    let v = invert_lt_at(&transform, x, TALBOT_NODES)?;
    Ok(v.clamp(0.0, 1.0))
}

/// CDF of the Mittag-Leffler law with LT `1/(1+s^α)`.
pub fn ml_cdf(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_x(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if alpha == 1.0 {
        return Ok(-(-x).exp_m1());
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let z = x.powf(alpha);
    if z <= SERIES_MAX_ARGUMENT && max_series_term(alpha, z) <= SERIES_MAX_TERM {
        Ok(cdf_series_in_z(alpha, z).clamp(0.0, 1.0))
    } else {
        ml_cdf_inversion(alpha, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// E_{1/2}(-z) = e^{z²} erfc(z), so F_{1/2}(x) = 1 - e^x erfc(√x).
    fn half_oracle(x: f64) -> f64 {
        1.0 - x.exp() * libm::erfc(x.sqrt())
    }

    #[test]
    fn exponential_case() {
        assert!((ml_cdf(1.0, 1.0).unwrap() - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert_eq!(ml_cdf(0.6, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_case_at_one() {
        let v = ml_cdf(0.5, 1.0).unwrap();
        assert!((v - 0.5724).abs() < 5e-5, "{v}");
        assert!((v - half_oracle(1.0)).abs() < 1e-12);
    }

    #[test]
    fn half_case_matches_erfc_oracle_everywhere() {
        for i in 1..=200 {
            let x = i as f64 * 0.25;
            let v = ml_cdf(0.5, x).unwrap();
            assert!((v - half_oracle(x)).abs() < 1e-8, "x = {x}: {v} vs {}", half_oracle(x));
        }
    }

    #[test]
    fn branches_agree_where_series_is_well_conditioned() {
        for alpha in [0.8, 0.9, 1.0] {
            for i in 0..=20 {
                let z = 5.0 + 0.25 * i as f64;
                let x = z.powf(1.0 / alpha);
                let a = ml_cdf_series(alpha, x).unwrap();
                let b = ml_cdf_inversion(alpha, x).unwrap();
                assert!((a - b).abs() < 1e-6, "alpha {alpha}, z {z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn cdf_is_monotone() {
        for alpha in [0.3, 0.7, 0.95] {
            let mut prev = 0.0;
            for i in 1..400 {
                let v = ml_cdf(alpha, i as f64 * 0.05).unwrap();
                assert!(v >= prev - 1e-10, "alpha {alpha} at {}", i as f64 * 0.05);
                prev = v;
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ml_cdf(0.5, -1.0).is_err());
        assert!(ml_cdf(0.0, 1.0).is_err());
        assert!(ml_cdf(1.5, 1.0).is_err());
    }
}
