//! Distribution families with samplers and closed-form transforms.
//!
//! | family | transform |
//! |---|---|
//! | `Exponential(rate)` | `1/(1+s/rate)` |
//! | `GammaExponent(α)` | `(1+s)^{-α}` |
//! | `PositiveStable(α)` | `e^{-s^α}` |
//! | `MittagLeffler(α, scale)` | `1/(1+(scale·s)^α)` |
//! | `Linnik(α, scale)` | CF `1/(1+(scale·|t|)^α)` |
//! | `TwoParamMl(α, β)` | `(1+s^α)^{-β}` |
//! | `SemiMlCandidate(α, ε, b)` | `1/(1+s^α(1+ε sin(2π ln s/ln(1/b))))`, no sampler |

mod mittag_leffler;
mod rng;
mod samplers;
mod stats;
mod talbot;

use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::transform_core::{cf_from_psi, lt_from_psi, PsiFunction, TransformDomain, TransformFn};

pub use mittag_leffler::{ml_cdf, ml_cdf_inversion, ml_cdf_series, SERIES_MAX_ARGUMENT};
pub use rng::RngState;
pub use samplers::{
    sample_geometric_sum, sample_linnik, sample_mittag_leffler, sample_positive_stable,
};
pub use stats::{
    empirical_transform, ks_critical_one_sample, ks_critical_two_sample, ks_statistic,
    ks_two_sample, median, try_ks_statistic, EmpiricalTransform, TransformKind, KS_COEFF_1PCT,
};
pub use talbot::{invert_lt, invert_lt_at, TALBOT_NODES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Exponential { rate: f64 },
    GammaExponent { alpha: f64 },
    PositiveStable { alpha: f64 },
    MittagLeffler { alpha: f64, scale: f64 },
    Linnik { alpha: f64, scale: f64 },
    TwoParamMl { alpha: f64, beta: f64 },
    SemiMlCandidate { alpha: f64, eps: f64, b: f64 },
}

fn in_unit_alpha(alpha: f64) -> bool {
    alpha.is_finite() && alpha > 0.0 && alpha <= 1.0
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl DistributionSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        let s = Self::Exponential { rate };
        s.validate().map(|_| s)
    }

    pub fn gamma_exponent(alpha: f64) -> Result<Self> {
        let s = Self::GammaExponent { alpha };
        s.validate().map(|_| s)
    }

    pub fn positive_stable(alpha: f64) -> Result<Self> {
        let s = Self::PositiveStable { alpha };
        s.validate().map(|_| s)
    }

    pub fn mittag_leffler(alpha: f64, scale: f64) -> Result<Self> {
        let s = Self::MittagLeffler { alpha, scale };
        s.validate().map(|_| s)
    }

    pub fn linnik(alpha: f64, scale: f64) -> Result<Self> {
        let s = Self::Linnik { alpha, scale };
        s.validate().map(|_| s)
    }

    pub fn two_param_ml(alpha: f64, beta: f64) -> Result<Self> {
        let s = Self::TwoParamMl { alpha, beta };
        s.validate().map(|_| s)
    }

    pub fn semi_ml_candidate(alpha: f64, eps: f64, b: f64) -> Result<Self> {
        let s = Self::SemiMlCandidate { alpha, eps, b };
        s.validate().map(|_| s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Exponential { rate } => positive(rate),
            // gamma shapes above 1 are legitimate laws, just not GID
            Self::GammaExponent { alpha } => positive(alpha),
            Self::PositiveStable { alpha } => in_unit_alpha(alpha),
            Self::MittagLeffler { alpha, scale } => in_unit_alpha(alpha) && positive(scale),
            Self::Linnik { alpha, scale } => {
                alpha.is_finite() && alpha > 0.0 && alpha <= 2.0 && positive(scale)
            }
            Self::TwoParamMl { alpha, beta } => in_unit_alpha(alpha) && positive(beta),
            Self::SemiMlCandidate { alpha, eps, b } => {
                in_unit_alpha(alpha) && (0.0..1.0).contains(&eps) && b > 0.0 && b < 1.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("parameters out of range: {self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::GammaExponent { .. } => "gamma_exponent",
            Self::PositiveStable { .. } => "positive_stable",
            Self::MittagLeffler { .. } => "mittag_leffler",
            Self::Linnik { .. } => "linnik",
            Self::TwoParamMl { .. } => "two_param_ml",
            Self::SemiMlCandidate { .. } => "semi_ml_candidate",
        }
    }

    /// True for laws supported on `[0, ∞)`.
    pub fn is_nonnegative(&self) -> bool {
        !matches!(self, Self::Linnik { .. })
    }

    /// The exponent ψ with transform `1/(1+ψ)`, when the family has that form.
    pub fn psi(&self) -> Result<Option<PsiFunction>> {
        self.validate()?;
        Ok(match *self {
            Self::Exponential { rate } => Some(PsiFunction::power(1.0, 1.0 / rate)?),
            Self::GammaExponent { alpha } => Some(PsiFunction::gamma_exponent(alpha)?),
            Self::PositiveStable { .. } => None,
            Self::MittagLeffler { alpha, scale } | Self::Linnik { alpha, scale } => {
                Some(PsiFunction::power(alpha, scale)?)
            }
            Self::TwoParamMl { alpha, beta } => Some(PsiFunction::two_param(alpha, beta)?),
            Self::SemiMlCandidate { alpha, eps, b } => {
                Some(PsiFunction::log_periodic(alpha, eps, b)?)
            }
        })
    }

    /// Exact transform: LT for one-sided laws, CF profile for Linnik.
    pub fn closed_form_transform(&self) -> Result<TransformFn> {
        match (*self, self.psi()?) {
            (Self::PositiveStable { alpha }, _) => Ok(TransformFn::from_fn(
                move |s: f64| (-s.powf(alpha)).exp(),
                TransformDomain::Laplace,
            )),
            (Self::Linnik { .. }, Some(psi)) => cf_from_psi(&psi),
            (_, Some(psi)) => lt_from_psi(&psi),
            (_, None) => unreachable!("every family except positive stable has a psi"),
        }
    }

    /// Kind of empirical transform comparable with [`Self::closed_form_transform`].
    pub fn transform_kind(&self) -> TransformKind {
        if self.is_nonnegative() {
            TransformKind::Lt
        } else {
            TransformKind::CfReal
        }
    }

    /// Distribution function where one is implemented: exponential and
    /// Mittag-Leffler.
    pub fn cdf(&self, x: f64) -> Option<Result<f64>> {
        match *self {
            Self::Exponential { rate } => Some(Ok(if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() })),
            Self::MittagLeffler { alpha, scale } => {
                Some(if x <= 0.0 { Ok(0.0) } else { ml_cdf(alpha, x / scale) })
            }
            _ => None,
        }
    }

    /// One draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            Self::Exponential { rate } => {
                let e: f64 = rng.sample(Exp1);
                e / rate
            }
            Self::GammaExponent { alpha } => Gamma::new(alpha, 1.0)
                .map_err(|e| invalid(e.to_string()))?
                .sample(rng),
            Self::PositiveStable { alpha } => samplers::draw_positive_stable(rng, alpha),
            Self::MittagLeffler { alpha, scale } => samplers::draw_mittag_leffler(rng, alpha, scale),
            Self::Linnik { alpha, scale } => samplers::draw_linnik(rng, alpha, scale),
            Self::TwoParamMl { alpha, beta } => {
                let gamma = Gamma::new(beta, 1.0).map_err(|e| invalid(e.to_string()))?;
                samplers::draw_two_param_ml(rng, &gamma, alpha)
            }
            Self::SemiMlCandidate { .. } => return Err(Error::NoSampler(self.name().into())),
        })
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        match *self {
            Self::GammaExponent { alpha } => {
                let gamma = Gamma::new(alpha, 1.0).map_err(|e| invalid(e.to_string()))?;
                Ok((0..n).map(|_| gamma.sample(rng)).collect())
            }
            Self::TwoParamMl { alpha, beta } => {
                let gamma = Gamma::new(beta, 1.0).map_err(|e| invalid(e.to_string()))?;
                Ok((0..n)
                    .map(|_| samplers::draw_two_param_ml(rng, &gamma, alpha))
                    .collect())
            }
            _ => (0..n).map(|_| self.sample(rng)).collect(),
        }
    }
}

/// Writes one value per line under a `value` header.
pub fn write_values_csv<W: Write>(mut out: W, values: &[f64]) -> io::Result<()> {
    writeln!(out, "value")?;
    for v in values {
        writeln!(out, "{v}")?;
    }
    out.flush()
}
