//! Renewal processes, the renewal equation `Z = z + Z * F`, and the
//! compound-then-scale fixed-point iteration.

use std::io::{self, Write};

use rand::Rng;
use serde::Serialize;

use crate::distributions::{ks_critical_two_sample, ks_two_sample, DistributionSpec};
use crate::error::{invalid, Error, Result};
use crate::transform_core::{geometric_compound, scale_argument, GeometricParams, TransformFn};

/// Event times of a renewal process started at 0 and observed on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenewalPath {
    event_times: Vec<f64>,
    horizon: f64,
}

impl RenewalPath {
    pub fn new(event_times: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        let mut prev = 0.0;
        for &t in &event_times {
            if t <= prev || t.is_nan() || t > horizon {
                return Err(invalid(format!(
                    "event times must be strictly increasing in (0, {horizon}], got {t} after {prev}"
                )));
            }
            prev = t;
        }
        Ok(Self {
            event_times,
            horizon,
        })
    }

    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.event_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.event_times.is_empty()
    }

    /// First differences of the event times, with `t_0 = 0`.
    pub fn inter_arrivals(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.event_times
            .iter()
            .map(|&t| {
                let d = t - prev;
                prev = t;
                d
            })
            .collect()
    }
}

fn draw_inter_arrival<R: Rng + ?Sized>(rng: &mut R, spec: &DistributionSpec) -> Result<f64> {
    let x = spec.sample(rng)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(format!(
            "{} produced a non-positive inter-arrival time {x}",
            spec.name()
        )))
    }
}

fn check_positive_law(spec: &DistributionSpec) -> Result<()> {
    spec.validate()?;
    if spec.is_nonnegative() {
        Ok(())
    } else {
        Err(invalid(format!("{} is not a law on (0, ∞)", spec.name())))
    }
}

fn push_event(times: &mut Vec<f64>, t: f64) -> Result<()> {
    if times.last().is_some_and(|&last| t <= last) {
        return Err(invalid(format!("inter-arrival vanished in floating point at t = {t}")));
    }
    times.push(t);
    Ok(())
}

/// All renewal epochs in `(0, horizon]`.
pub fn simulate_renewal<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &DistributionSpec,
    horizon: f64,
) -> Result<RenewalPath> {
    check_positive_law(spec)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        t += draw_inter_arrival(rng, spec)?;
        if t > horizon {
            break;
        }
        push_event(&mut times, t)?;
    }
    RenewalPath::new(times, horizon)
}

/// The first `n_events` renewal epochs; the horizon is the last epoch.
///
/// Fixing the count rather than the horizon keeps the inter-arrival times
/// i.i.d.; a fixed horizon conditions them on summing below it, which biases
/// heavy-tailed laws.
pub fn simulate_renewal_events<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &DistributionSpec,
    n_events: usize,
) -> Result<RenewalPath> {
    check_positive_law(spec)?;
    if n_events == 0 {
        return Err(invalid("need at least one event"));
    }
    let mut times = Vec::with_capacity(n_events);
    let mut t = 0.0;
    for _ in 0..n_events {
        t += draw_inter_arrival(rng, spec)?;
        push_event(&mut times, t)?;
    }
    RenewalPath::new(times, t)
}

/// Values on the nodes `0, h, 2h, ..., T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    step: f64,
    horizon: f64,
    values: Vec<f64>,
}

fn node_count(step: f64, horizon: f64) -> Result<usize> {
    if !(step > 0.0 && horizon > 0.0 && step.is_finite() && horizon.is_finite()) {
        return Err(invalid(format!(
            "grid needs positive step and horizon, got h = {step}, T = {horizon}"
        )));
    }
    // tolerate T/h landing a hair below an integer
    Ok(((horizon / step) * (1.0 + 1e-12)).floor() as usize + 1)
}

impl GridFunction {
    pub fn new(step: f64, horizon: f64, values: Vec<f64>) -> Result<Self> {
        let n = node_count(step, horizon)?;
        if values.len() != n {
            return Err(invalid(format!(
                "grid with h = {step}, T = {horizon} has {n} nodes, got {} values",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("grid values must be finite, got {bad}")));
        }
        Ok(Self {
            step,
            horizon,
            values,
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(step: f64, horizon: f64, f: F) -> Result<Self> {
        let n = node_count(step, horizon)?;
        Self::new(step, horizon, (0..n).map(|i| f(i as f64 * step)).collect())
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| i as f64 * self.step)
    }

    /// `max_i |self_i - f(x_i)|`.
    pub fn max_abs_error<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes()
            .zip(&self.values)
            .map(|(x, v)| (v - f(x)).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `x,value` rows under a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,value")?;
        for (x, v) in self.nodes().zip(&self.values) {
            writeln!(out, "{x},{v}")?;
        }
        out.flush()
    }
}

/// Solves `Z(x) = z(x) + ∫_0^x Z(x-u) dF(u)` on the grid of `z` by forward
/// substitution with left-endpoint Stieltjes increments:
///
/// `Z_i = z_i + Σ_{j=1}^{i} Z_{i-j} (F(u_j) - F(u_{j-1}))`.
///
/// The scheme is explicit because `F(0) = 0`; its global error is `O(h)`.
pub fn solve_renewal_volterra<F>(z: &GridFunction, f_cdf: F) -> Result<GridFunction>
where
    F: Fn(f64) -> f64,
{
    let n = z.values.len();
    let h = z.step;
    let cdf: Vec<f64> = (0..n).map(|j| f_cdf(j as f64 * h)).collect();
    if cdf[0] != 0.0 {
        return Err(invalid(format!("F(0) must be 0, got {}", cdf[0])));
    }
    if let Some(j) = cdf.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            at: j as f64 * h,
            value: cdf[j],
        });
    }
    let increments: Vec<f64> = cdf.windows(2).map(|w| w[1] - w[0]).collect();
    if let Some(j) = increments.iter().position(|d| *d < 0.0) {
        return Err(invalid(format!(
            "F must be nondecreasing, decreases at x = {}",
            (j + 1) as f64 * h
        )));
    }

    let mut solution = Vec::with_capacity(n);
    for i in 0..n {
        let convolution: f64 = increments[..i]
            .iter()
            .zip(solution.iter().rev())
            .map(|(df, zv)| df * zv)
            .sum();
        solution.push(z.values[i] + convolution);
    }
    GridFunction::new(h, z.horizon, solution)
}

/// Sup-residuals `|φ_{n+1} - φ_n|` at or below this count as converged.
pub const CONVERGED_RESIDUAL: f64 = 1e-15;
/// Consecutive residual increases tolerated before declaring divergence.
pub const DIVERGENCE_STRIKES: usize = 3;
/// Relative growth below which a residual counts as flat, not increasing.
pub const DIVERGENCE_REL_SLACK: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct FixedPointOutcome {
    pub transform: TransformFn,
    /// `sup_grid |φ_{n+1} - φ_n|` for each completed iteration.
    pub residuals: Vec<f64>,
}

/// One application of `T(φ)(s) = pφ(bs)/(1 - qφ(bs))`.
pub fn compound_then_scale(phi: &TransformFn, g: GeometricParams, b: f64) -> Result<TransformFn> {
    geometric_compound(&scale_argument(phi, b)?, g.p())
}

/// Iterates [`compound_then_scale`] from `phi0`, recording the sup-residual
/// over `grid` after every step. Stops early once the residual falls to
/// [`CONVERGED_RESIDUAL`]; fails with [`Error::Divergence`] after
/// [`DIVERGENCE_STRIKES`] consecutive increases.
///
/// Iterates are composed as functions, so `φ(bs)` is evaluated exactly and
/// `b` need not line up with the grid.
pub fn eq1_fixed_point_iterate(
    phi0: &TransformFn,
    p: f64,
    b: f64,
    grid: &[f64],
    iters: usize,
) -> Result<FixedPointOutcome> {
    let g = GeometricParams::new(p)?;
    if !(b > 0.0 && b < 1.0) {
        return Err(invalid(format!("b must lie in (0, 1), got {b}")));
    }
    if grid.is_empty() {
        return Err(invalid("fixed-point grid is empty"));
    }

    let mut current = phi0.clone();
    let mut values: Vec<f64> = grid.iter().map(|&s| current.eval(s)).collect();
    let mut residuals = Vec::with_capacity(iters);
    let mut strikes = 0;
    for iteration in 1..=iters {
        let next = compound_then_scale(&current, g, b)?;
        let next_values: Vec<f64> = grid.iter().map(|&s| next.eval(s)).collect();
        let residual = values
            .iter()
            .zip(&next_values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !residual.is_finite() {
            return Err(Error::NonFinite {
                at: iteration as f64,
                value: residual,
            });
        }
        if residuals
            .last()
            .is_some_and(|&last| residual > last * (1.0 + DIVERGENCE_REL_SLACK))
        {
            strikes += 1;
            if strikes >= DIVERGENCE_STRIKES {
                return Err(Error::Divergence {
                    iteration,
                    residual,
                });
            }
        } else {
            strikes = 0;
        }
        residuals.push(residual);
        current = next;
        values = next_values;
        if residual <= CONVERGED_RESIDUAL {
            break;
        }
    }
    Ok(FixedPointOutcome {
        transform: current,
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eq1KsReport {
    pub n: usize,
    pub ks: f64,
    pub critical: f64,
    pub pass: bool,
}

pub const EQ1_MIN_SAMPLES: usize = 1000;

/// Two-sample KS check of `X =_d Y`, where `Y = bX₁` with probability `p`
/// and `Y = X₂ + bX₁` otherwise, `X₁, X₂` independent copies of `X`.
pub fn verify_eq1_distributional<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &DistributionSpec,
    p: f64,
    b: f64,
    n: usize,
) -> Result<Eq1KsReport> {
    if n < EQ1_MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: EQ1_MIN_SAMPLES,
            got: n,
        });
    }
    let g = GeometricParams::new(p)?;
    if !(b > 0.0 && b < 1.0) {
        return Err(invalid(format!("b must lie in (0, 1), got {b}")));
    }
    let direct = spec.sample_n(rng, n)?;
    let mut mixture = Vec::with_capacity(n);
    for _ in 0..n {
        let keep_only_scaled = rng.random::<f64>() < g.p();
        let x1 = spec.sample(rng)?;
        let y = if keep_only_scaled {
            b * x1
        } else {
            spec.sample(rng)? + b * x1
        };
        mixture.push(y);
    }
    let ks = ks_two_sample(&direct, &mixture)?;
    let critical = ks_critical_two_sample(n, n);
    Ok(Eq1KsReport {
        n,
        ks,
        critical,
        pass: ks < critical,
    })
}
