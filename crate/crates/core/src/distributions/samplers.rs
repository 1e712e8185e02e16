//! Variate generators for the one-sided stable, Mittag-Leffler and Linnik
//! laws.
//!
//! Positive stable variates use Kanter's representation
//! `S = (a(U)/E)^{(1-α)/α}` with
//! `a(u) = sin((1-α)πu) sin(απu)^{α/(1-α)} / sin(πu)^{1/(1-α)}`,
//! which has LT `e^{-s^α}`. Mittag-Leffler and Linnik variates are
//! exponential mixtures of stable ones:
//!
//! - ML: `X = scale · E^{1/α} · S_α`, LT `1/(1+(scale·s)^α)`
//! - Linnik: `X = scale · E^{1/α} · sqrt(2 S_{α/2}) · N`, CF `1/(1+(scale·|t|)^α)`

use std::f64::consts::PI;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Geometric, StandardNormal};

use super::DistributionSpec;
use crate::error::{invalid, Result};

fn check_range(name: &str, v: f64, lo_open: f64, hi: f64, hi_inclusive: bool) -> Result<()> {
    let upper_ok = if hi_inclusive { v <= hi } else { v < hi };
    if v.is_finite() && v > lo_open && upper_ok {
        Ok(())
    } else {
        let bracket = if hi_inclusive { ']' } else { ')' };
        Err(invalid(format!("{name} must lie in ({lo_open}, {hi}{bracket}, got {v}")))
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale.is_finite() && scale > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("scale must be positive, got {scale}")))
    }
}

/// One draw with LT `e^{-s^α}`; `α = 1` is the point mass at 1.
pub(crate) fn draw_positive_stable<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    if alpha == 1.0 {
        return 1.0;
    }
    let u: f64 = rng.sample(Open01);
    let e: f64 = rng.sample(Exp1);
    let one_m = 1.0 - alpha;
    let ln_a = ((one_m * PI * u).sin()).ln() + (alpha / one_m) * ((alpha * PI * u).sin()).ln()
        - ((PI * u).sin()).ln() / one_m;
    ((one_m / alpha) * (ln_a - e.ln())).exp()
}

pub(crate) fn draw_mittag_leffler<R: Rng + ?Sized>(rng: &mut R, alpha: f64, scale: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    if alpha == 1.0 {
        return scale * e;
    }
    scale * e.powf(1.0 / alpha) * draw_positive_stable(rng, alpha)
}

pub(crate) fn draw_linnik<R: Rng + ?Sized>(rng: &mut R, alpha: f64, scale: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    let n: f64 = rng.sample(StandardNormal);
    let mixing = if alpha == 2.0 {
        2.0
    } else {
        2.0 * draw_positive_stable(rng, alpha / 2.0)
    };
    scale * e.powf(1.0 / alpha) * mixing.sqrt() * n
}

pub(crate) fn draw_two_param_ml<R: Rng + ?Sized>(
    rng: &mut R,
    gamma: &Gamma<f64>,
    alpha: f64,
) -> f64 {
    let g = gamma.sample(rng);
    if alpha == 1.0 {
        return g;
    }
    g.powf(1.0 / alpha) * draw_positive_stable(rng, alpha)
}

/// `n` draws with LT `e^{-s^α}`, `0 < α < 1`.
pub fn sample_positive_stable<R: Rng + ?Sized>(rng: &mut R, alpha: f64, n: usize) -> Result<Vec<f64>> {
    check_range("alpha", alpha, 0.0, 1.0, false)?;
    Ok((0..n).map(|_| draw_positive_stable(rng, alpha)).collect())
}

/// `n` Mittag-Leffler draws with LT `1/(1+(scale·s)^α)`, `0 < α <= 1`.
pub fn sample_mittag_leffler<R: Rng + ?Sized>(
    rng: &mut R,
    alpha: f64,
    scale: f64,
    n: usize,
) -> Result<Vec<f64>> {
    check_range("alpha", alpha, 0.0, 1.0, true)?;
    check_scale(scale)?;
    Ok((0..n).map(|_| draw_mittag_leffler(rng, alpha, scale)).collect())
}

/// `n` symmetric Linnik draws with CF `1/(1+(scale·|t|)^α)`, `0 < α <= 2`.
pub fn sample_linnik<R: Rng + ?Sized>(rng: &mut R, alpha: f64, scale: f64, n: usize) -> Result<Vec<f64>> {
    check_range("alpha", alpha, 0.0, 2.0, true)?;
    check_scale(scale)?;
    Ok((0..n).map(|_| draw_linnik(rng, alpha, scale)).collect())
}

/// Sums of `N` i.i.d. draws from `base`, where `P(N = k) = p q^{k-1}` on
/// `k = 1, 2, ...`. `p = 1` gives single draws.
pub fn sample_geometric_sum<R: Rng + ?Sized>(
    rng: &mut R,
    base: &DistributionSpec,
    p: f64,
    n: usize,
) -> Result<Vec<f64>> {
    check_range("p", p, 0.0, 1.0, true)?;
    base.validate()?;
    if p == 1.0 {
        return base.sample_n(rng, n);
    }
    let geometric = Geometric::new(p).map_err(|e| invalid(e.to_string()))?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        // rand_distr counts failures before the first success
        let count = geometric.sample(rng) + 1;
        let mut total = 0.0;
        for _ in 0..count {
            total += base.sample(rng)?;
        }
        out.push(total);
    }
    Ok(out)
}
