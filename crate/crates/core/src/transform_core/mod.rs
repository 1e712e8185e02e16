//! ψ-exponents, transforms and the geometric-compounding algebra.
//!
//! A transform `φ = 1/(1+ψ)` is geometrically compounded by
//! `φ ↦ pφ/(1-qφ)`, which on the exponent is simply `ψ ↦ ψ/p`. A law is GID
//! when `ψ(0) = 0` and `ψ'` is completely monotone; [`check_gid`] certifies
//! the latter numerically.

mod monotone;
mod psi;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

pub use monotone::{check_complete_monotone, geometric_grid, CmConfig, CmReport, CmVerdict, CmViolation};
pub use psi::{PsiFamily, PsiFunction, RealFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformDomain {
    /// Laplace transform, argument `s >= 0`.
    Laplace,
    /// Real characteristic-function profile, evaluated at `|t|`.
    CfProfile,
}

/// An evaluable Laplace transform or real CF profile with values in `(0, 1]`.
///
/// When `source` is present the evaluator is exactly `1/(1+ψ(|x|))` for that
/// ψ, and the compounding and scaling operations act on ψ directly.
#[derive(Clone)]
pub struct TransformFn {
    eval: RealFn,
    domain: TransformDomain,
    source: Option<PsiFunction>,
}

impl fmt::Debug for TransformFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformFn")
            .field("domain", &self.domain)
            .field("source", &self.source)
            .finish()
    }
}

impl TransformFn {
    /// Wraps a bare evaluator with no ψ attached.
    pub fn from_fn<F>(f: F, domain: TransformDomain) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            domain,
            source: None,
        }
    }

    fn from_psi(psi: PsiFunction, domain: TransformDomain) -> Result<Self> {
        let at_zero = psi.eval(0.0);
        if at_zero != 0.0 {
            return Err(Error::PsiNotZeroAtOrigin(at_zero));
        }
        let inner = psi.clone();
        Ok(Self {
            eval: Arc::new(move |x: f64| 1.0 / (1.0 + inner.eval(x))),
            domain,
            source: Some(psi),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.domain {
            TransformDomain::Laplace => (self.eval)(x),
            TransformDomain::CfProfile => (self.eval)(x.abs()),
        }
    }

    pub fn domain(&self) -> TransformDomain {
        self.domain
    }

    pub fn source(&self) -> Option<&PsiFunction> {
        self.source.as_ref()
    }
}

/// Parameter of a geometric law on `{1, 2, ...}`: `P(N = k) = p q^{k-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricParams {
    p: f64,
    q: f64,
}

impl GeometricParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("geometric p must lie in (0, 1), got {p}")));
        }
        Ok(Self { p, q: 1.0 - p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// `s ↦ 1/(1+ψ(s))`.
pub fn lt_from_psi(psi: &PsiFunction) -> Result<TransformFn> {
    TransformFn::from_psi(psi.clone(), TransformDomain::Laplace)
}

/// `t ↦ 1/(1+ψ(|t|))`.
pub fn cf_from_psi(psi: &PsiFunction) -> Result<TransformFn> {
    TransformFn::from_psi(psi.clone(), TransformDomain::CfProfile)
}

/// Transform of a geometric sum, `pφ/(1-qφ)`, as a plain number.
#[inline]
pub fn compound_value(phi: f64, p: f64) -> f64 {
    p * phi / (1.0 - (1.0 - p) * phi)
}

/// Transform of a geometric(p) sum of i.i.d. copies: `pφ/(1-qφ)`.
///
/// `p = 1` returns `φ` unchanged. When `φ` carries its ψ the result is built
/// as `1/(1+ψ/p)`, which equals the pointwise formula and stays well
/// conditioned under repeated compounding.
pub fn geometric_compound(phi: &TransformFn, p: f64) -> Result<TransformFn> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("compounding p must lie in (0, 1], got {p}")));
    }
    if p == 1.0 {
        return Ok(phi.clone());
    }
    match &phi.source {
        Some(psi) => TransformFn::from_psi(psi.scaled(p)?, phi.domain),
        None => {
            let inner = Arc::clone(&phi.eval);
            Ok(TransformFn {
                eval: Arc::new(move |x| compound_value(inner(x), p)),
                domain: phi.domain,
                source: None,
            })
        }
    }
}

/// `s ↦ φ(c·s)`.
pub fn scale_argument(phi: &TransformFn, c: f64) -> Result<TransformFn> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("scale must be positive, got {c}")));
    }
    match &phi.source {
        Some(psi) => TransformFn::from_psi(psi.argument_scaled(c)?, phi.domain),
        None => {
            let inner = Arc::clone(&phi.eval);
            Ok(TransformFn {
                eval: Arc::new(move |x| inner(c * x)),
                domain: phi.domain,
                source: None,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GidVerdict {
    GidPass,
    GidFail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GidReport {
    pub verdict: GidVerdict,
    pub psi_at_zero: f64,
    /// Complete-monotonicity report for ψ'.
    pub cm: CmReport,
}

impl GidReport {
    pub fn passed(&self) -> bool {
        self.verdict == GidVerdict::GidPass
    }
}

/// Largest `|ψ(0)|` accepted as zero by [`check_gid`].
pub const PSI_ORIGIN_TOL: f64 = 1e-12;

/// Numerical GID certificate: `ψ(0) = 0` and ψ' completely monotone on the
/// configured grid.
pub fn check_gid(psi: &PsiFunction, config: &CmConfig) -> Result<GidReport> {
    let psi_at_zero = psi.eval(0.0);
    let cm = check_complete_monotone(|s| psi.derivative(s), config)?;
    let verdict = if psi_at_zero.abs() <= PSI_ORIGIN_TOL && cm.passed() {
        GidVerdict::GidPass
    } else {
        GidVerdict::GidFail
    };
    Ok(GidReport {
        verdict,
        psi_at_zero,
        cm,
    })
}

/// `max_s |ψ(s) - aψ(bs)| / (1+|ψ(s)|)` over `grid`.
pub fn semi_scaling_residual(psi: &PsiFunction, a: f64, b: f64, grid: &[f64]) -> Result<f64> {
    if !(b > 0.0 && b < 1.0 && a > 1.0 && a.is_finite()) {
        return Err(invalid(format!("need 0 < b < 1 < a, got a = {a}, b = {b}")));
    }
    Ok(grid
        .iter()
        .map(|&s| {
            let v = psi.eval(s);
            (v - a * psi.eval(b * s)).abs() / (1.0 + v.abs())
        })
        .fold(0.0, f64::max))
}

/// `max_s |φ(s) - pφ(bs)/(1-qφ(bs))|` over `grid`: how far `φ` is from being
/// a fixed point of "compound geometrically, then scale by b".
pub fn compound_then_scale_fixed_point_residual(
    phi: &TransformFn,
    p: f64,
    b: f64,
    grid: &[f64],
) -> Result<f64> {
    let g = GeometricParams::new(p)?;
    if !(b > 0.0 && b < 1.0) {
        return Err(invalid(format!("b must lie in (0, 1), got {b}")));
    }
    let mut worst: f64 = 0.0;
    for &s in grid {
        let scaled = phi.eval(b * s);
        if g.q() * scaled >= 1.0 || !scaled.is_finite() {
            return Err(Error::MalformedTransform(format!(
                "q·φ(bs) = {} at s = {s}",
                g.q() * scaled
            )));
        }
        let image = g.p() * scaled / (1.0 - g.q() * scaled);
        worst = worst.max((phi.eval(s) - image).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ml(alpha: f64) -> TransformFn {
        lt_from_psi(&PsiFunction::power(alpha, 1.0).unwrap()).unwrap()
    }

    fn bare_ml(alpha: f64) -> TransformFn {
        TransformFn::from_fn(move |s: f64| 1.0 / (1.0 + s.powf(alpha)), TransformDomain::Laplace)
    }

    fn grid() -> Vec<f64> {
        geometric_grid(1e-3, 10.0, 200).unwrap()
    }

    #[test]
    fn lt_from_psi_examples() {
        assert!((ml(0.5).eval(4.0) - 1.0 / 3.0).abs() < 1e-15);
        let zero = lt_from_psi(&PsiFunction::from_fn(|_| 0.0, None)).unwrap();
        assert_eq!(zero.eval(0.0), 1.0);
        assert_eq!(zero.eval(123.0), 1.0);
        let expo = lt_from_psi(&PsiFunction::gamma_exponent(1.0).unwrap()).unwrap();
        assert!((expo.eval(1.0) - 0.5).abs() < 1e-15);
        assert_eq!(ml(0.7).eval(0.0), 1.0);
    }

    #[test]
    fn lt_from_psi_rejects_nonzero_origin() {
        let bad = PsiFunction::from_fn(|s| s + 0.1, None);
        assert_eq!(lt_from_psi(&bad).unwrap_err(), Error::PsiNotZeroAtOrigin(0.1));
    }

    #[test]
    fn geometric_compound_examples() {
        let c = geometric_compound(&bare_ml(1.0), 0.5).unwrap();
        assert!((c.eval(1.0) - 1.0 / 3.0).abs() < 1e-15);

        // p·φ/(1-qφ) with φ(1) = 1/2, p = 1/4: (1/8)/(1 - 3/8) = 1/5.
        let c = geometric_compound(&bare_ml(0.5), 0.25).unwrap();
        assert!((c.eval(1.0) - 0.2).abs() < 1e-15);

        let same = geometric_compound(&bare_ml(0.7), 1.0).unwrap();
        for s in grid() {
            assert_eq!(same.eval(s), bare_ml(0.7).eval(s));
        }
    }

    #[test]
    fn geometric_compound_rejects_bad_p() {
        assert!(geometric_compound(&ml(0.5), 0.0).is_err());
        assert!(geometric_compound(&ml(0.5), 1.5).is_err());
        assert!(geometric_compound(&ml(0.5), f64::NAN).is_err());
    }

    #[test]
    fn psi_route_and_pointwise_route_agree() {
        for alpha in [0.3, 0.7, 1.0] {
            for p in [0.1, 0.5, 0.9] {
                let a = geometric_compound(&ml(alpha), p).unwrap();
                let b = geometric_compound(&bare_ml(alpha), p).unwrap();
                for s in grid() {
                    assert!((a.eval(s) - b.eval(s)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn scale_argument_examples() {
        let e = bare_ml(1.0);
        assert!((scale_argument(&e, 2.0).unwrap().eval(1.0) - 1.0 / 3.0).abs() < 1e-15);
        let id = scale_argument(&e, 1.0).unwrap();
        assert_eq!(id.eval(0.37), e.eval(0.37));
        let (alpha, p) = (0.6_f64, 0.3_f64);
        let scaled = scale_argument(&ml(alpha), p.powf(1.0 / alpha)).unwrap();
        for s in grid() {
            assert!((scaled.eval(s) - 1.0 / (1.0 + p * s.powf(alpha))).abs() < 1e-14);
        }
        assert!(scale_argument(&e, 0.0).is_err());
    }

    #[test]
    fn cf_profile_is_even() {
        let cf = cf_from_psi(&PsiFunction::power(1.2, 0.5).unwrap()).unwrap();
        assert_eq!(cf.eval(0.0), 1.0);
        assert_eq!(cf.eval(-2.0), cf.eval(2.0));
    }

    #[test]
    fn check_gid_examples() {
        let cfg = CmConfig::default();
        let ml = PsiFunction::power(0.7, 1.0).unwrap();
        assert!(check_gid(&ml, &cfg).unwrap().passed());

        let p = 0.5;
        let gamma2 = PsiFunction::gamma_exponent(2.0).unwrap().scaled(p).unwrap();
        let r = check_gid(&gamma2, &cfg).unwrap();
        assert_eq!(r.verdict, GidVerdict::GidFail);
        assert_eq!(r.psi_at_zero, 0.0);

        let tp = PsiFunction::two_param(0.5, 0.5).unwrap().scaled(p).unwrap();
        assert!(check_gid(&tp, &cfg).unwrap().passed());
    }

    #[test]
    fn check_gid_fails_on_nonzero_origin() {
        let shifted = PsiFunction::from_fn(|s| s + 1.0, Some(Arc::new(|_| 1.0)));
        let r = check_gid(&shifted, &CmConfig::default()).unwrap();
        assert!(r.cm.passed());
        assert_eq!(r.verdict, GidVerdict::GidFail);
    }

    #[test]
    fn semi_scaling_residual_examples() {
        let g = grid();
        let root = PsiFunction::power(0.5, 1.0).unwrap();
        assert!(semi_scaling_residual(&root, 2.0, 0.25, &g).unwrap() < 1e-15);
        assert!(semi_scaling_residual(&root, 2.0, 0.5, &g).unwrap() > 0.1);
        let (alpha, b) = (0.7_f64, 0.4_f64);
        let lp = PsiFunction::log_periodic(alpha, 0.1, b).unwrap();
        let a = b.powf(-alpha);
        assert!(semi_scaling_residual(&lp, a, b, &g).unwrap() < 1e-13);
        assert!(semi_scaling_residual(&root, 0.5, 0.25, &g).is_err());
    }

    #[test]
    fn fixed_point_residual_examples() {
        let g = grid();
        let r = compound_then_scale_fixed_point_residual(&bare_ml(1.0), 0.5, 0.5, &g).unwrap();
        assert!(r < 1e-12);
        let (alpha, p) = (0.7_f64, 0.3_f64);
        let r = compound_then_scale_fixed_point_residual(&bare_ml(alpha), p, p.powf(1.0 / alpha), &g)
            .unwrap();
        assert!(r < 1e-12);
        let gamma2 =
            TransformFn::from_fn(|s: f64| (1.0 + s).powi(-2), TransformDomain::Laplace);
        let r = compound_then_scale_fixed_point_residual(&gamma2, 0.5, 0.5, &g).unwrap();
        assert!(r > 0.01);
    }

    #[test]
    fn fixed_point_residual_guards_malformed_transforms() {
        let bad = TransformFn::from_fn(|_| 3.0, TransformDomain::Laplace);
        let err = compound_then_scale_fixed_point_residual(&bad, 0.5, 0.5, &grid()).unwrap_err();
        assert!(matches!(err, Error::MalformedTransform(_)));
    }
}
