//! Empirical transforms and Kolmogorov-Smirnov distances.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Asymptotic 1% critical coefficient of the KS distribution
/// (`D_crit ≈ 1.63/√n`).
pub const KS_COEFF_1PCT: f64 = 1.63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    /// `mean(e^{-s x})`
    Lt,
    /// `mean(cos(t x))`
    CfReal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalTransform {
    pub arguments: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
}

pub fn empirical_transform(
    samples: &[f64],
    arguments: &[f64],
    kind: TransformKind,
) -> Result<EmpiricalTransform> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let n = samples.len() as f64;
    let mut values = Vec::with_capacity(arguments.len());
    let mut std_errors = Vec::with_capacity(arguments.len());
    for &a in arguments {
        let kernel = |x: f64| match kind {
            TransformKind::Lt => (-a * x).exp(),
            TransformKind::CfReal => (a * x).cos(),
        };
        let mean = samples.iter().map(|&x| kernel(x)).sum::<f64>() / n;
        let se = if samples.len() > 1 {
            let var = samples
                .iter()
                .map(|&x| (kernel(x) - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        values.push(mean);
        std_errors.push(se);
    }
    Ok(EmpiricalTransform {
        arguments: arguments.to_vec(),
        values,
        std_errors,
    })
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.iter().any(|x| x.is_nan()) {
        return Err(invalid("samples contain NaN"));
    }
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(v)
}

/// `sup_x |F_n(x) - F(x)|` for the empirical CDF of `samples`.
///
/// Returns 0 for an empty sample; NaN samples are ignored.
pub fn ks_statistic<F>(samples: &[f64], cdf: F) -> f64
where
    F: Fn(f64) -> f64,
{
    match try_ks_statistic(samples, |x| Ok(cdf(x))) {
        Ok(d) => d,
        Err(_) => unreachable!("infallible cdf"),
    }
}

/// [`ks_statistic`] for a CDF that can fail; the first error is returned.
pub fn try_ks_statistic<F>(samples: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut xs: Vec<f64> = samples.iter().copied().filter(|x| !x.is_nan()).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Two-sample statistic `sup_x |F_n(x) - G_m(x)|`, with ties handled.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            got: a.len().min(b.len()),
        });
    }
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// 1% critical value of the one-sample statistic.
pub fn ks_critical_one_sample(n: usize) -> f64 {
    KS_COEFF_1PCT / (n as f64).sqrt()
}

/// 1% critical value of the two-sample statistic.
pub fn ks_critical_two_sample(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_COEFF_1PCT * ((n + m) / (n * m)).sqrt()
}

pub fn median(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let v = sorted(samples)?;
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}
