//! Finite-difference certificate for complete monotonicity.
//!
//! A function `f` on `(0, ∞)` is completely monotone when
//! `(-1)^k f^{(k)} >= 0` for every `k`. On a grid we check the forward
//! differences instead: `(-1)^k Δ_h^k f(s) >= 0` for `k = 0..=K`, with a
//! local step `h = s·rel_step`. Each difference is normalized by
//! `Σ_j C(k,j)|f(s + j h)|`, the magnitude that bounds its rounding error,
//! so the tolerance is relative and independent of the size of `f`.
//!
//! Passing is a finite certificate, not a proof.

use serde::Serialize;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CmVerdict {
    CmPass,
    CmFail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CmViolation {
    pub order: usize,
    pub point: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmReport {
    pub grid: Vec<f64>,
    pub max_order: usize,
    /// Minimum normalized signed difference over grid and orders.
    pub margin: f64,
    pub verdict: CmVerdict,
    pub tol: f64,
    /// Location of the most negative normalized difference, when it is
    /// below `-tol`.
    pub failing: Option<CmViolation>,
    pub diagnostic: Option<String>,
}

impl CmReport {
    pub fn passed(&self) -> bool {
        self.verdict == CmVerdict::CmPass
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmConfig {
    pub grid: Vec<f64>,
    pub max_order: usize,
    pub tol: f64,
    pub rel_step: f64,
}

impl Default for CmConfig {
    /// 200 geometric points on `[1e-3, 10]`, orders up to 8, relative step
    /// `2^-10`, tolerance `1e-7`.
    fn default() -> Self {
        Self {
            grid: geometric_grid(1e-3, 10.0, 200).expect("static grid"),
            max_order: 8,
            tol: 1e-7,
            rel_step: 2f64.powi(-10),
        }
    }
}

impl CmConfig {
    pub fn with_grid(grid: Vec<f64>) -> Self {
        Self {
            grid,
            ..Self::default()
        }
    }
}

/// `n` log-spaced points from `min` to `max` inclusive.
pub fn geometric_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && max.is_finite()) || n < 2 {
        return Err(invalid(format!(
            "geometric grid needs 0 < min < max and n >= 2, got [{min}, {max}] with {n}"
        )));
    }
    let (lo, hi) = (min.ln(), max.ln());
    let mut grid: Vec<f64> = (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect();
    grid[0] = min;
    grid[n - 1] = max;
    Ok(grid)
}

fn binomial_row(k: usize) -> Vec<f64> {
    let mut row = vec![1.0; k + 1];
    for j in 1..k {
        row[j] = row[j - 1] * (k - j + 1) as f64 / j as f64;
    }
    row
}

pub fn check_complete_monotone<F>(f: F, config: &CmConfig) -> Result<CmReport>
where
    F: Fn(f64) -> f64,
{
    let grid = &config.grid;
    if grid.is_empty() || grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("CM grid must be positive and strictly increasing"));
    }
    if config.max_order < 2 {
        return Err(invalid("CM check needs max order >= 2"));
    }
    if !(config.rel_step > 0.0 && config.tol >= 0.0) {
        return Err(invalid("CM check needs a positive step and non-negative tolerance"));
    }

    let k_max = config.max_order;
    let rows: Vec<Vec<f64>> = (0..=k_max).map(binomial_row).collect();
    let mut margin = f64::INFINITY;
    let mut worst = CmViolation {
        order: 0,
        point: grid[0],
    };
    let mut values = vec![0.0; k_max + 1];

    for &s in grid {
        let h = s * config.rel_step;
        for (j, v) in values.iter_mut().enumerate() {
            *v = f(s + j as f64 * h);
            if !v.is_finite() {
                return Ok(CmReport {
                    grid: grid.clone(),
                    max_order: k_max,
                    margin: f64::NEG_INFINITY,
                    verdict: CmVerdict::CmFail,
                    tol: config.tol,
                    failing: Some(CmViolation { order: 0, point: s }),
                    diagnostic: Some(format!(
                        "non-finite evaluation f({}) = {}",
                        s + j as f64 * h,
                        v
                    )),
                });
            }
        }
        for (k, row) in rows.iter().enumerate() {
            // (-1)^k Δ^k f(s) = Σ_j (-1)^j C(k,j) f(s + j h)
            let mut signed = 0.0;
            let mut scale = 0.0;
            for (j, c) in row.iter().enumerate() {
                let term = c * values[j];
                signed += if j % 2 == 0 { term } else { -term };
                scale += term.abs();
            }
            let normalized = if scale > 0.0 { signed / scale } else { 0.0 };
            if normalized < margin {
                margin = normalized;
                worst = CmViolation { order: k, point: s };
            }
        }
    }

    let passed = margin >= -config.tol;
    Ok(CmReport {
        grid: grid.clone(),
        max_order: k_max,
        margin,
        verdict: if passed {
            CmVerdict::CmPass
        } else {
            CmVerdict::CmFail
        },
        tol: config.tol,
        failing: (!passed).then_some(worst),
        diagnostic: None,
    })
}
