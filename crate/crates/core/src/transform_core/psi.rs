use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Result};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative step of the central difference used when no analytic derivative
/// is known.
const CENTRAL_DIFF_REL_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiFamily {
    Power,
    LogPeriodic,
    GammaExponent,
    TwoParam,
    DiscreteSequence,
    Scaled,
    Composite,
}

/// The exponent ψ of a transform `1/(1+ψ)`.
///
/// Every constructor in this module returns a function with `ψ(0) == 0.0`
/// exactly. Closures supplied through [`PsiFunction::from_fn`] are checked
/// when they are turned into transforms.
#[derive(Clone)]
pub struct PsiFunction {
    eval: RealFn,
    derivative: Option<RealFn>,
    family: PsiFamily,
    params: Vec<f64>,
}

impl fmt::Debug for PsiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsiFunction")
            .field("family", &self.family)
            .field("params", &self.params)
            .field("derivative_available", &self.derivative.is_some())
            .finish()
    }
}

fn check_alpha(alpha: f64, max: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= max {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0, {max}], got {alpha}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl PsiFunction {
    /// `ψ(s) = (scale·s)^α`, the Mittag-Leffler / Linnik exponent.
    pub fn power(alpha: f64, scale: f64) -> Result<Self> {
        check_alpha(alpha, 2.0)?;
        check_positive("scale", scale)?;
        let c = scale.powf(alpha);
        Ok(Self {
            eval: Arc::new(move |s| c * s.powf(alpha)),
            derivative: Some(Arc::new(move |s| alpha * c * s.powf(alpha - 1.0))),
            family: PsiFamily::Power,
            params: vec![alpha, scale],
        })
    }

    /// Log-periodic perturbation of a power law,
    /// `ψ(s) = s^α (1 + ε sin(2π ln s / ln(1/b)))`.
    ///
    /// It satisfies `ψ(s) = b^{-α} ψ(b s)` identically. Whether it has a
    /// completely monotone derivative depends on `(α, ε, b)`.
    pub fn log_periodic(alpha: f64, eps: f64, b: f64) -> Result<Self> {
        check_alpha(alpha, 2.0)?;
        if !(0.0..1.0).contains(&eps) {
            return Err(invalid(format!("epsilon must lie in [0, 1), got {eps}")));
        }
        if !(b > 0.0 && b < 1.0) {
            return Err(invalid(format!("b must lie in (0, 1), got {b}")));
        }
        let omega = 2.0 * std::f64::consts::PI / (1.0 / b).ln();
        Ok(Self {
            eval: Arc::new(move |s| {
                if s == 0.0 {
                    0.0
                } else {
                    s.powf(alpha) * (1.0 + eps * (omega * s.ln()).sin())
                }
            }),
            derivative: None,
            family: PsiFamily::LogPeriodic,
            params: vec![alpha, eps, b],
        })
    }

    /// `ψ(s) = (1+s)^α - 1`, the exponent of a gamma law with LT `(1+s)^{-α}`.
    pub fn gamma_exponent(alpha: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        Ok(Self {
            eval: Arc::new(move |s| (alpha * s.ln_1p()).exp_m1()),
            derivative: Some(Arc::new(move |s| alpha * ((alpha - 1.0) * s.ln_1p()).exp())),
            family: PsiFamily::GammaExponent,
            params: vec![alpha],
        })
    }

    /// `ψ(s) = (1+s^α)^β - 1`, the exponent of the LT `(1+s^α)^{-β}`.
    pub fn two_param(alpha: f64, beta: f64) -> Result<Self> {
        check_alpha(alpha, 2.0)?;
        check_positive("beta", beta)?;
        Ok(Self {
            eval: Arc::new(move |s| (beta * s.powf(alpha).ln_1p()).exp_m1()),
            derivative: Some(Arc::new(move |s| {
                let sa = s.powf(alpha);
                alpha * beta * s.powf(alpha - 1.0) * ((beta - 1.0) * sa.ln_1p()).exp()
            })),
            family: PsiFamily::TwoParam,
            params: vec![alpha, beta],
        })
    }

    /// `ψ(s) = (1/p) Σ_n w_n (1 - e^{-s n})` for weights `w_1, w_2, ...`
    /// (`weights[0]` is `w_1`).
    pub fn discrete_sequence(weights: &[f64], p: f64) -> Result<Self> {
        check_positive("p", p)?;
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("sequence weights must be finite and non-negative"));
        }
        let w: Arc<[f64]> = weights.into();
        let wd = Arc::clone(&w);
        Ok(Self {
            eval: Arc::new(move |s| {
                let total: f64 = w
                    .iter()
                    .enumerate()
                    .filter(|(_, wn)| **wn > 0.0)
                    .map(|(i, wn)| -wn * (-s * (i + 1) as f64).exp_m1())
                    .sum();
                total / p
            }),
            derivative: Some(Arc::new(move |s| {
                let total: f64 = wd
                    .iter()
                    .enumerate()
                    .filter(|(_, wn)| **wn > 0.0)
                    .map(|(i, wn)| {
                        let n = (i + 1) as f64;
                        wn * n * (-s * n).exp()
                    })
                    .sum();
                total / p
            })),
            family: PsiFamily::DiscreteSequence,
            params: vec![p],
        })
    }

    /// Wraps an arbitrary evaluator. `ψ(0) = 0` is checked by consumers.
    pub fn from_fn<F>(f: F, derivative: Option<RealFn>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            derivative,
            family: PsiFamily::Composite,
            params: Vec::new(),
        }
    }

    /// `ψ(s)/c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        check_positive("c", c)?;
        let inner = Arc::clone(&self.eval);
        let derivative = self.derivative.as_ref().map(|d| {
            let d = Arc::clone(d);
            Arc::new(move |s: f64| d(s) / c) as RealFn
        });
        let mut params = self.params.clone();
        params.push(c);
        Ok(Self {
            eval: Arc::new(move |s| inner(s) / c),
            derivative,
            family: PsiFamily::Scaled,
            params,
        })
    }

    /// `ψ(c·s)`.
    pub fn argument_scaled(&self, c: f64) -> Result<Self> {
        check_positive("c", c)?;
        let inner = Arc::clone(&self.eval);
        let derivative = self.derivative.as_ref().map(|d| {
            let d = Arc::clone(d);
            Arc::new(move |s: f64| c * d(c * s)) as RealFn
        });
        let mut params = self.params.clone();
        params.push(c);
        Ok(Self {
            eval: Arc::new(move |s| inner(c * s)),
            derivative,
            family: PsiFamily::Composite,
            params,
        })
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.eval)(s)
    }

    /// ψ'(s): analytic when available, otherwise a central difference.
    pub fn derivative(&self, s: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(s),
            None => {
                if s > 0.0 {
                    let h = s * CENTRAL_DIFF_REL_STEP;
                    (self.eval(s + h) - self.eval(s - h)) / (2.0 * h)
                } else {
                    let h = CENTRAL_DIFF_REL_STEP;
                    (self.eval(h) - self.eval(0.0)) / h
                }
            }
        }
    }

    pub fn derivative_available(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn family(&self) -> PsiFamily {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// True when `ψ(s_{i+1}) >= ψ(s_i) - tol` along `grid`.
    pub fn is_nondecreasing_on(&self, grid: &[f64], tol: f64) -> bool {
        grid.windows(2)
            .all(|w| self.eval(w[1]) >= self.eval(w[0]) - tol)
    }
}
