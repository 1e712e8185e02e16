//! Discrete renewal sequences and GID witnesses built from simple random
//! walks.
//!
//! Sequence transforms use the unit lattice, `Φ_a(s) = Σ a_n e^{-sn}`, so
//! `s = 0` corresponds to generating-function argument 1. For a walk with
//! up-probability `p` and `q = 1 - p`, write `x = e^{-2s}` and
//! `D(s) = 1 - 4pq x`; then
//!
//! - `U(s) = Σ u_{2n} x^n = 1/√D` (returns to the origin),
//! - `Ū(s) = 2/(1 + √D)` (Catalan generating function in `pq x`).

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::transform_core::{check_gid, CmConfig, GidReport, PsiFunction};

/// Sums of `f` above `1 + F_TOTAL_SLACK` are rejected.
pub const F_TOTAL_SLACK: f64 = 1e-12;
/// Smallest transform argument at which truncated sums are checked.
pub const CHECK_MIN_S: f64 = 0.05;
pub const DEFAULT_TRUNCATION: usize = 2000;

/// `γ_n = n ε / (1 - n ε)`, the relative error bound of an `n`-term
/// floating-point sum.
fn gamma(n: usize) -> f64 {
    let ne = n as f64 * f64::EPSILON;
    ne / (1.0 - ne)
}

/// First-occurrence probabilities `f_1..f_N` and occurrence probabilities
/// `u_0..u_N` linked by `u_n = Σ_{k=1}^{n} f_k u_{n-k}`, `u_0 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteRenewalSequence {
    f: Vec<f64>,
    u: Vec<f64>,
    f_total: f64,
    transient: bool,
}

/// Builds `u` from `f` by the renewal recursion, truncating or zero-padding
/// `f` (given as `f_1, f_2, ...`) to length `n`.
pub fn u_from_f(f: &[f64], n: usize) -> Result<DiscreteRenewalSequence> {
    let mut f: Vec<f64> = f.iter().copied().take(n).collect();
    if let Some((i, bad)) = f
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0 && **v <= 1.0))
    {
        return Err(invalid(format!("f_{} = {bad} is not a probability", i + 1)));
    }
    f.resize(n, 0.0);
    let f_total: f64 = f.iter().sum();
    if f_total > 1.0 + F_TOTAL_SLACK {
        return Err(invalid(format!("f sums to {f_total} > 1")));
    }
    let mut u = Vec::with_capacity(n + 1);
    u.push(1.0);
    for m in 1..=n {
        let v: f64 = (1..=m).map(|k| f[k - 1] * u[m - k]).sum();
        u.push(v);
    }
    Ok(DiscreteRenewalSequence {
        f,
        u,
        f_total,
        transient: f_total < 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationReport {
    pub max_residual: f64,
    /// Largest `residual / bound` over the grid; the check passes below 1.
    pub worst_bound_ratio: f64,
    pub pass: bool,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("check grid is empty"));
    }
    match grid.iter().find(|s| !(**s >= CHECK_MIN_S && s.is_finite())) {
        Some(s) => Err(invalid(format!(
            "check arguments must be finite and at least {CHECK_MIN_S}, got {s}"
        ))),
        None => Ok(()),
    }
}

fn truncation_report(residual_and_bound: impl Iterator<Item = (f64, f64)>) -> TruncationReport {
    let (mut max_residual, mut worst_bound_ratio): (f64, f64) = (0.0, 0.0);
    for (r, b) in residual_and_bound {
        max_residual = max_residual.max(r);
        worst_bound_ratio = worst_bound_ratio.max(r / b);
    }
    TruncationReport {
        max_residual,
        worst_bound_ratio,
        pass: worst_bound_ratio < 1.0,
    }
}

impl DiscreteRenewalSequence {
    /// `f_1..f_N`.
    pub fn f(&self) -> &[f64] {
        &self.f
    }

    /// `u_0..u_N`.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn f_total(&self) -> f64 {
        self.f_total
    }

    pub fn transient(&self) -> bool {
        self.transient
    }

    pub fn truncation(&self) -> usize {
        self.f.len()
    }

    /// `Σ_{n=0}^{N} u_n e^{-sn}`.
    pub fn u_transform(&self, s: f64) -> f64 {
        self.u
            .iter()
            .enumerate()
            .map(|(n, u)| u * (-s * n as f64).exp())
            .sum()
    }

    /// `Σ_{n=1}^{N} f_n e^{-sn}`.
    pub fn f_transform(&self, s: f64) -> f64 {
        self.f
            .iter()
            .enumerate()
            .map(|(i, f)| f * (-s * (i + 1) as f64).exp())
            .sum()
    }

    /// `|Φ_u(s)(1 - Φ_f(s)) - 1|`.
    pub fn renewal_identity_residual(&self, s: f64) -> f64 {
        (self.u_transform(s) * (1.0 - self.f_transform(s)) - 1.0).abs()
    }

    /// Bound on [`Self::renewal_identity_residual`]. The truncated product
    /// differs from 1 only in degrees `N+1..2N`, whose coefficients are at
    /// most 1, giving `e^{-s(N+1)}/(1 - e^{-s})`; rounding in the recursion
    /// and in both sums adds at most `2γ_{N+1} Φ_u (1 + Φ_f)`.
    pub fn renewal_identity_bound(&self, s: f64) -> f64 {
        let n = self.truncation();
        let tail = (-s * (n + 1) as f64).exp() / -(-s).exp_m1();
        tail + 2.0 * gamma(n + 1) * self.u_transform(s) * (1.0 + self.f_transform(s))
    }

    pub fn check_renewal_identity(&self, grid: &[f64]) -> Result<TruncationReport> {
        check_grid(grid)?;
        Ok(truncation_report(grid.iter().map(|&s| {
            (self.renewal_identity_residual(s), self.renewal_identity_bound(s))
        })))
    }

    /// Writes `n,f_n,u_n` rows for `n = 0..N`, with `f_0 = 0`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n,f_n,u_n")?;
        for (n, u) in self.u.iter().enumerate() {
            let f = if n == 0 { 0.0 } else { self.f[n - 1] };
            writeln!(out, "{n},{f},{u}")?;
        }
        out.flush()
    }
}

fn check_walk_p(p_walk: f64) -> Result<()> {
    if p_walk > 0.0 && p_walk < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("walk probability must lie in (0, 1), got {p_walk}")))
    }
}

/// `ln C(2n, n)`.
fn ln_central_binomial(n: usize) -> f64 {
    let n = n as f64;
    libm::lgamma(2.0 * n + 1.0) - 2.0 * libm::lgamma(n + 1.0)
}

/// `P(S_{2n} = 0) = C(2n, n) (pq)^n`.
pub fn walk_return_probability(p_walk: f64, n: usize) -> f64 {
    let pq = p_walk * (1.0 - p_walk);
    (ln_central_binomial(n) + n as f64 * pq.ln()).exp()
}

/// First-return probabilities `f_1..f_N` of the walk:
/// `f_{2n} = C(2n, n) (pq)^n / (2n - 1)`, odd entries 0.
pub fn walk_first_return(p_walk: f64, n: usize) -> Result<Vec<f64>> {
    check_walk_p(p_walk)?;
    Ok((1..=n)
        .map(|k| {
            if k % 2 == 1 {
                0.0
            } else {
                walk_return_probability(p_walk, k / 2) / (k - 1) as f64
            }
        })
        .collect())
}

fn d_of(p_walk: f64, s: f64) -> f64 {
    let q = 1.0 - p_walk;
    // 1 - 4pq e^{-2s}, exact at s = 0 because 1 - 4pq = (p - q)²
    (p_walk - q).powi(2) - 4.0 * p_walk * q * (-2.0 * s).exp_m1()
}

/// `U(s) = 1/√(1 - 4pq e^{-2s})`.
pub fn walk_u_transform(p_walk: f64, s: f64) -> f64 {
    1.0 / d_of(p_walk, s).sqrt()
}

/// `Ū(s) = (1 - √D)/(2pq e^{-2s}) = 2/(1 + √D)`; the second form has no
/// cancellation.
pub fn walk_ubar_transform(p_walk: f64, s: f64) -> f64 {
    2.0 / (1.0 + d_of(p_walk, s).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkSequences {
    pub p_walk: f64,
    pub sequence: DiscreteRenewalSequence,
    /// `max_n |u_n - C(2n, n)(pq)^n|` between the recursion and the
    /// closed form.
    pub closed_form_deviation: f64,
    /// `Σ_{2n ≤ N} u_{2n} e^{-2ns}` against `U(s)`.
    pub generating_function: TruncationReport,
}

/// Return and first-return sequences of the walk truncated at `n`, with the
/// generating-function check on `grid`. The tail after `M = ⌊N/2⌋` terms is
/// at most `x^{M+1}/(1 - x)` with `x = 4pq e^{-2s}`.
pub fn walk_sequences(p_walk: f64, n: usize, grid: &[f64]) -> Result<WalkSequences> {
    check_walk_p(p_walk)?;
    check_grid(grid)?;
    let sequence = u_from_f(&walk_first_return(p_walk, n)?, n)?;
    let closed_form_deviation = sequence
        .u()
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let exact = if k % 2 == 1 {
                0.0
            } else {
                walk_return_probability(p_walk, k / 2)
            };
            (u - exact).abs()
        })
        .fold(0.0, f64::max);

    let m = n / 2;
    let pq4 = 4.0 * p_walk * (1.0 - p_walk);
    let generating_function = truncation_report(grid.iter().map(|&s| {
        let partial: f64 = (0..=m)
            .map(|k| sequence.u()[2 * k] * (-2.0 * s * k as f64).exp())
            .sum();
        let exact = walk_u_transform(p_walk, s);
        let x = pq4 * (-2.0 * s).exp();
        let bound = x.powi(m as i32 + 1) / (1.0 - x) + 2.0 * gamma(n + 1) * (partial + exact);
        ((partial - exact).abs(), bound)
    }));
    Ok(WalkSequences {
        p_walk,
        sequence,
        closed_form_deviation,
        generating_function,
    })
}

/// `ψ(s) = (q/p)(1 - ω(s))` with `ω(s) = Σ f_n e^{-sn}/q`, `q = Σ f_n` and
/// `p = 1 - q`, checked for GID.
pub fn gid_witness_transient(f: &[f64], config: &CmConfig) -> Result<GidReport> {
    let seq = u_from_f(f, f.len())?;
    if !seq.transient() {
        return Err(invalid(format!(
            "f sums to {}, a recurrent sequence has no GID witness",
            seq.f_total()
        )));
    }
    let psi = PsiFunction::discrete_sequence(seq.f(), 1.0 - seq.f_total())?;
    check_gid(&psi, config)
}

/// `ψ(s) = √D(s)/|p - q| - 1`, the exponent of `|p - q| U(s)`.
pub fn ex42_psi(p_walk: f64) -> Result<PsiFunction> {
    check_walk_p(p_walk)?;
    let q = 1.0 - p_walk;
    let gap = (p_walk - q).abs();
    if gap == 0.0 {
        return Err(Error::Degenerate(
            "p = q = 1/2: |p - q| U(s) vanishes identically".into(),
        ));
    }
    let pq = p_walk * q;
    Ok(PsiFunction::from_fn(
        move |s| (d_of(p_walk, s).sqrt() - gap) / gap,
        Some(std::sync::Arc::new(move |s: f64| {
            4.0 * pq * (-2.0 * s).exp() / (gap * d_of(p_walk, s).sqrt())
        })),
    ))
}

pub fn gid_witness_ex42(p_walk: f64, config: &CmConfig) -> Result<GidReport> {
    check_gid(&ex42_psi(p_walk)?, config)
}

/// `ψ(s) = 1/(p Ū(s)) - 1 = (√D(s) - (p - q))/(2p)`. `ψ(0) = 0` exactly
/// when `p ≥ q`; for `p < q` it is `(q - p)/p` and the witness fails.
pub fn ex43_psi(p_walk: f64) -> Result<PsiFunction> {
    check_walk_p(p_walk)?;
    let q = 1.0 - p_walk;
    Ok(PsiFunction::from_fn(
        move |s| (d_of(p_walk, s).sqrt() - (p_walk - q)) / (2.0 * p_walk),
        Some(std::sync::Arc::new(move |s: f64| {
            2.0 * q * (-2.0 * s).exp() / d_of(p_walk, s).sqrt()
        })),
    ))
}

pub fn gid_witness_ex43(p_walk: f64, config: &CmConfig) -> Result<GidReport> {
    check_gid(&ex43_psi(p_walk)?, config)
}
