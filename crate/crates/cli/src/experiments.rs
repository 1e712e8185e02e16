use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use gidlab::distributions::{
    empirical_transform, median, ml_cdf, write_values_csv, DistributionSpec, RngState,
    KS_COEFF_1PCT,
};
use gidlab::feller::{
    gid_witness_ex42, gid_witness_ex43, gid_witness_transient, u_from_f, walk_first_return,
    walk_sequences, CHECK_MIN_S,
};
use gidlab::pointproc::{
    check_renewal_independence, check_same_type, check_thm31, superpose as merge, thin as mark,
    thinned_interarrival_samples, Mark, MarkedPath,
};
use gidlab::renewal::{
    eq1_fixed_point_iterate, simulate_renewal, simulate_renewal_events, solve_renewal_volterra,
    verify_eq1_distributional, GridFunction, RenewalPath,
};
use gidlab::transform_core::{
    check_gid, compound_then_scale_fixed_point_residual, geometric_compound, geometric_grid,
    CmConfig, GidReport, PsiFunction,
};
use serde_json::Value;

use crate::{
    build_spec, CliError, CliResult, Example, FellerArgs, GridArgs, SampleArgs, SolveRenewalArgs,
    ThinArgs, ThinningArgs, VerifyEq1Args, VerifyGidArgs,
};

/// Sup-residual below which a transform counts as a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-12;
/// Max error of the renewal-equation solution against the exact one.
pub const VOLTERRA_TOL: f64 = 0.02;
/// Transform arguments for empirical-versus-closed-form comparisons.
pub const TRANSFORM_ARGS: [f64; 3] = [0.5, 1.0, 2.0];
/// Two-sided normal quantile of the central 99.9% interval.
pub const COUNT_Z_999: f64 = 3.2905;
/// Multiple of the standard error plus absolute slack allowed between an
/// empirical transform of thinned inter-arrivals and the compounded one.
const THINNED_SE_MULT: f64 = 3.0;
const THINNED_SLACK: f64 = 0.01;
const FELLER_CHECK_POINTS: usize = 60;

pub struct Outcome {
    pub name: &'static str,
    pub parameters: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, Value>,
    pub pass: bool,
    pub artifacts: Vec<PathBuf>,
}

impl Outcome {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            parameters: BTreeMap::new(),
            metrics: BTreeMap::new(),
            pass: true,
            artifacts: Vec::new(),
        }
    }

    fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.parameters.insert(key.to_string(), v.into());
    }

    fn metric(&mut self, key: &str, v: impl Into<Value>) {
        self.metrics.insert(key.to_string(), v.into());
    }

    fn artifact<F>(&mut self, path: &Option<PathBuf>, write: F) -> CliResult<()>
    where
        F: FnOnce(BufWriter<File>) -> io::Result<()>,
    {
        if let Some(path) = path {
            write_csv(path, write)?;
            self.artifacts.push(path.clone());
        }
        Ok(())
    }
}

fn write_csv<F>(path: &Path, write: F) -> CliResult<()>
where
    F: FnOnce(BufWriter<File>) -> io::Result<()>,
{
    let file = File::create(path)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
    write(BufWriter::new(file))?;
    Ok(())
}

fn cm_config(grid: &GridArgs, order: usize) -> CliResult<CmConfig> {
    let points = geometric_grid(grid.grid_min, grid.grid_max, grid.grid_points)?;
    Ok(CmConfig {
        max_order: order,
        ..CmConfig::with_grid(points)
    })
}

fn grid_params(out: &mut Outcome, grid: &GridArgs) {
    out.param("grid_min", grid.grid_min);
    out.param("grid_max", grid.grid_max);
    out.param("grid_points", grid.grid_points as u64);
}

fn spec_json(spec: &DistributionSpec) -> Value {
    serde_json::to_value(spec).expect("specs serialize")
}

fn gid_metrics(out: &mut Outcome, prefix: &str, r: &GidReport) {
    out.metric(&format!("{prefix}psi_at_zero"), r.psi_at_zero);
    out.metric(&format!("{prefix}cm_margin"), r.cm.margin);
    out.metric(&format!("{prefix}gid_pass"), r.passed());
    if let Some(v) = &r.cm.failing {
        out.metric(&format!("{prefix}failing_order"), v.order as u64);
        out.metric(&format!("{prefix}failing_point"), v.point);
    }
    if let Some(d) = &r.cm.diagnostic {
        out.metric(&format!("{prefix}diagnostic"), d.clone());
    }
}

pub fn sample(a: &SampleArgs, seed: u64) -> CliResult<Outcome> {
    let spec = build_spec(a.dist, &a.params, None)?;
    if a.n == 0 {
        return Err(CliError::Input("--n must be positive".into()));
    }
    let mut out = Outcome::new("sample");
    out.param("distribution", spec_json(&spec));
    out.param("n", a.n as u64);

    let samples = spec.sample_n(&mut RngState::new(seed, 0), a.n)?;
    out.artifact(&a.common.out, |w| write_values_csv(w, &samples))?;

    let closed = spec.closed_form_transform()?;
    let et = empirical_transform(&samples, &TRANSFORM_ARGS, spec.transform_kind())?;
    out.metric("n", samples.len() as u64);
    out.metric("median", median(&samples)?);
    out.metric("transform_arguments", TRANSFORM_ARGS.to_vec());
    out.metric("empirical_transform", et.values.clone());
    out.metric("empirical_std_error", et.std_errors.clone());
    out.metric(
        "closed_form_transform",
        TRANSFORM_ARGS.iter().map(|&s| closed.eval(s)).collect::<Vec<_>>(),
    );
    Ok(out)
}

pub fn verify_gid(a: &VerifyGidArgs) -> CliResult<Outcome> {
    let spec = build_spec(a.family, &a.params, a.b)?;
    let cfg = cm_config(&a.grid, a.order)?;
    let mut out = Outcome::new("verify-gid");
    out.param("distribution", spec_json(&spec));
    out.param("max_order", a.order as u64);
    out.param("tolerance", cfg.tol);
    grid_params(&mut out, &a.grid);

    let psi = match spec.psi()? {
        Some(psi) => psi,
        // the stable LT e^{-s^α} is 1/(1+ψ) with ψ = e^{s^α} - 1
        None => {
            let alpha = a.params.alpha.unwrap_or(1.0);
            PsiFunction::from_fn(move |s: f64| s.powf(alpha).exp_m1(), None)
        }
    };
    let base = check_gid(&psi, &cfg)?;
    gid_metrics(&mut out, "", &base);
    out.pass = base.passed();

    if let Some(p) = a.p {
        out.param("p", p);
        let compounded = check_gid(&psi.scaled(p)?, &cfg)?;
        gid_metrics(&mut out, "compounded_", &compounded);
        out.pass &= compounded.passed();
    }
    Ok(out)
}

pub fn verify_eq1(a: &VerifyEq1Args, seed: u64) -> CliResult<Outcome> {
    let spec = build_spec(a.dist, &a.params, a.b)?;
    let b = match (a.b, a.params.alpha) {
        (Some(b), _) => b,
        (None, Some(alpha)) => a.p.powf(1.0 / alpha),
        (None, None) => a.p,
    };
    let grid = geometric_grid(a.grid.grid_min, a.grid.grid_max, a.grid.grid_points)?;
    let mut out = Outcome::new("verify-eq1");
    out.param("distribution", spec_json(&spec));
    out.param("p", a.p);
    out.param("b", b);
    out.param("iterations", a.iters as u64);
    out.param("fixed_point_tol", FIXED_POINT_TOL);
    grid_params(&mut out, &a.grid);

    let phi = spec.closed_form_transform()?;
    let residual = compound_then_scale_fixed_point_residual(&phi, a.p, b, &grid)?;
    out.metric("transform_residual", residual);
    out.pass = residual < FIXED_POINT_TOL;

    match eq1_fixed_point_iterate(&phi, a.p, b, &grid, a.iters) {
        Ok(it) => out.metric("iteration_residuals", it.residuals),
        Err(gidlab::Error::Divergence { iteration, residual }) => {
            out.metric("iteration_diverged_at", iteration as u64);
            out.metric("iteration_last_residual", residual);
        }
        Err(e) => return Err(e.into()),
    }

    if !matches!(spec, DistributionSpec::SemiMlCandidate { .. }) {
        out.param("n", a.n as u64);
        let ks = verify_eq1_distributional(&mut RngState::new(seed, 0), &spec, a.p, b, a.n)?;
        out.metric("ks", ks.ks);
        out.metric("ks_critical", ks.critical);
        out.metric("ks_pass", ks.pass);
        out.pass &= ks.pass;
    }
    Ok(out)
}

pub fn solve_renewal(a: &SolveRenewalArgs) -> CliResult<Outcome> {
    let (alpha, p) = (a.alpha, a.p);
    if !(alpha > 0.0 && alpha <= 1.0) || !(p > 0.0 && p < 1.0) {
        return Err(CliError::Input(format!(
            "need 0 < alpha <= 1 and 0 < p < 1, got alpha = {alpha}, p = {p}"
        )));
    }
    let mut out = Outcome::new("solve-renewal");
    out.param("alpha", alpha);
    out.param("p", p);
    out.param("h", a.h);
    out.param("horizon", a.horizon);
    out.param("max_error_tol", VOLTERRA_TOL);

    // Z = z + Z*F with z = pF_α(·/c), F = qF_α(·/c), c = p^{1/α} has solution F_α
    let c = p.powf(1.0 / alpha);
    let cdf = |x: f64| ml_cdf(alpha, x);
    let z = GridFunction::from_fn(a.h, a.horizon, |x| p * cdf(x / c).unwrap_or(f64::NAN))?;
    let solution = solve_renewal_volterra(&z, |x| (1.0 - p) * cdf(x / c).unwrap_or(f64::NAN))?;
    let exact = GridFunction::from_fn(a.h, a.horizon, |x| cdf(x).unwrap_or(f64::NAN))?;
    let max_error = solution
        .values()
        .iter()
        .zip(exact.values())
        .map(|(s, e)| (s - e).abs())
        .fold(0.0, f64::max);
    out.artifact(&a.common.out, |w| solution.write_csv(w))?;
    out.metric("nodes", solution.values().len() as u64);
    out.metric("max_abs_error", max_error);
    out.metric("solution_at_horizon", *solution.values().last().unwrap());
    out.pass = max_error < VOLTERRA_TOL;
    Ok(out)
}

fn thinning_setup(a: &ThinArgs, seed: u64, out: &mut Outcome) -> CliResult<(DistributionSpec, RenewalPath, MarkedPath)> {
    let spec = build_spec(a.dist, &a.params, None)?;
    out.param("distribution", spec_json(&spec));
    out.param("p", a.p);
    let path = match a.horizon {
        Some(h) => {
            out.param("horizon", h);
            simulate_renewal(&mut RngState::new(seed, 0), &spec, h)?
        }
        None => {
            out.param("n_events", a.n as u64);
            simulate_renewal_events(&mut RngState::new(seed, 0), &spec, a.n)?
        }
    };
    let marked = mark(&path, a.p, &mut RngState::new(seed, 1))?;
    out.metric("n_events", path.len() as u64);
    out.metric("n1", marked.count(Mark::One) as u64);
    out.metric("n2", marked.count(Mark::Two) as u64);
    Ok((spec, path, marked))
}

pub fn thin(a: &ThinArgs, seed: u64) -> CliResult<Outcome> {
    let mut out = Outcome::new("thin");
    let (spec, path, marked) = thinning_setup(a, seed, &mut out)?;
    out.artifact(&a.common.out, |w| marked.write_csv(w))?;

    let (n, p) = (path.len() as f64, a.p);
    let n1 = marked.count(Mark::One) as f64;
    let sd = (n * p * (1.0 - p)).sqrt();
    let z = if sd > 0.0 { (n1 - n * p) / sd } else { 0.0 };
    out.metric("mark1_fraction", if n > 0.0 { n1 / n } else { 0.0 });
    out.metric("count_z", z);
    out.pass = z.abs() < COUNT_Z_999;

    // inter-arrivals of N1 have transform pφ/(1 - qφ)
    let samples = thinned_interarrival_samples(&marked, Mark::One)?;
    let expected = geometric_compound(&spec.closed_form_transform()?, p)?;
    let et = empirical_transform(&samples, &TRANSFORM_ARGS, spec.transform_kind())?;
    let mut worst_excess = f64::NEG_INFINITY;
    for (i, &s) in TRANSFORM_ARGS.iter().enumerate() {
        let allowed = THINNED_SE_MULT * et.std_errors[i] + THINNED_SLACK;
        worst_excess = worst_excess.max((et.values[i] - expected.eval(s)).abs() - allowed);
    }
    out.metric("transform_arguments", TRANSFORM_ARGS.to_vec());
    out.metric("thinned_empirical_transform", et.values.clone());
    out.metric(
        "compounded_transform",
        TRANSFORM_ARGS.iter().map(|&s| expected.eval(s)).collect::<Vec<_>>(),
    );
    out.metric("transform_worst_excess", worst_excess);
    out.pass &= worst_excess <= 0.0;
    Ok(out)
}

pub fn superpose(a: &ThinArgs, seed: u64) -> CliResult<Outcome> {
    let mut out = Outcome::new("superpose");
    let (_, path, marked) = thinning_setup(a, seed, &mut out)?;
    let merged = merge(&marked.projection(Mark::One), &marked.projection(Mark::Two))?;
    out.artifact(&a.common.out, |w| merged.write_csv(w))?;
    let round_trip = merged == marked && merged.event_times() == path.event_times();
    out.metric("n_merged", merged.len() as u64);
    out.metric("round_trip", round_trip);
    out.pass = round_trip;
    Ok(out)
}

fn thinning_params(out: &mut Outcome, a: &ThinningArgs) {
    out.param("alpha", a.alpha);
    out.param("p", a.p);
    out.param("n_events", a.n as u64);
}

pub fn thm31(a: &ThinningArgs, seed: u64) -> CliResult<Outcome> {
    let mut out = Outcome::new("thm31");
    thinning_params(&mut out, a);
    let r = check_thm31(&mut RngState::new(seed, 0), a.alpha, a.p, a.n)?;
    out.metric("n1", r.n1 as u64);
    out.metric("n2", r.n2 as u64);
    out.metric("ks_n1", r.ks_n1);
    out.metric("ks_n2", r.ks_n2);
    out.metric("critical", KS_COEFF_1PCT);
    out.metric("critical_n1", r.critical_n1);
    out.metric("critical_n2", r.critical_n2);
    out.pass = r.pass;
    Ok(out)
}

fn thinned_ml(a: &ThinningArgs, seed: u64, n_events: usize) -> CliResult<Vec<f64>> {
    let spec = DistributionSpec::mittag_leffler(a.alpha, 1.0)?;
    let path = simulate_renewal_events(&mut RngState::new(seed, 1), &spec, n_events)?;
    let marked = mark(&path, a.p, &mut RngState::new(seed, 2))?;
    Ok(thinned_interarrival_samples(&marked, Mark::One)?)
}

pub fn thm32(a: &ThinningArgs, seed: u64) -> CliResult<Outcome> {
    let mut out = Outcome::new("thm32");
    thinning_params(&mut out, a);
    let spec = DistributionSpec::mittag_leffler(a.alpha, 1.0)?;
    if !(a.p > 0.0 && a.p < 1.0) {
        return Err(CliError::Input(format!("p must lie in (0, 1), got {}", a.p)));
    }
    let original = simulate_renewal_events(&mut RngState::new(seed, 0), &spec, a.n)?.inter_arrivals();
    // enough events that the thinned sample is about as large as the original
    let thinned = thinned_ml(a, seed, (a.n as f64 / a.p).ceil() as usize)?;
    let r = check_same_type(&original, &thinned)?;
    out.metric("n_original", original.len() as u64);
    out.metric("n_thinned", thinned.len() as u64);
    out.metric("scale_estimate", r.scale_estimate);
    out.metric("expected_scale", a.p.powf(-1.0 / a.alpha));
    out.metric("ks_after_rescale", r.ks_after_rescale);
    out.metric("critical", r.critical);
    out.pass = r.pass;
    Ok(out)
}

pub fn thm33(a: &ThinningArgs, seed: u64) -> CliResult<Outcome> {
    let mut out = Outcome::new("thm33");
    thinning_params(&mut out, a);
    if !(a.p > 0.0 && a.p < 1.0) {
        return Err(CliError::Input(format!("p must lie in (0, 1), got {}", a.p)));
    }
    let thinned = thinned_ml(a, seed, a.n)?;
    let r = check_renewal_independence(&mut RngState::new(seed, 3), &thinned)?;
    out.metric("n_samples", thinned.len() as u64);
    out.metric("lag1_stat", r.lag1_stat);
    out.metric("p_value", r.p_value);
    out.metric("permutations", r.permutations as u64);
    out.pass = r.pass;
    Ok(out)
}

pub fn feller(a: &FellerArgs) -> CliResult<Outcome> {
    let cfg = cm_config(&a.grid, a.order)?;
    let check_grid = geometric_grid(CHECK_MIN_S, a.grid.grid_max.max(1.0), FELLER_CHECK_POINTS)?;
    let mut out = Outcome::new("feller");
    let example = match a.example {
        Example::FirstReturn => "4.1",
        Example::ReturnTransform => "4.2",
        Example::ExcursionTransform => "4.3",
    };
    out.param("example", example);
    out.param("p_walk", a.p);
    out.param("truncation", a.n as u64);
    out.param("max_order", a.order as u64);
    grid_params(&mut out, &a.grid);

    match a.example {
        Example::FirstReturn => {
            if a.p == 0.5 {
                return Err(CliError::Input(
                    "the symmetric walk is recurrent; the first-return witness needs p != 0.5".into(),
                ));
            }
            let f = walk_first_return(a.p, a.n)?;
            let seq = u_from_f(&f, a.n)?;
            let identity = seq.check_renewal_identity(&check_grid)?;
            let witness = gid_witness_transient(&f, &cfg)?;
            out.artifact(&a.common.out, |w| seq.write_csv(w))?;
            out.metric("f_total", seq.f_total());
            out.metric("identity_max_residual", identity.max_residual);
            out.metric("identity_bound_ratio", identity.worst_bound_ratio);
            gid_metrics(&mut out, "", &witness);
            out.pass = identity.pass && witness.passed();
        }
        Example::ReturnTransform => {
            let witness = gid_witness_ex42(a.p, &cfg)?;
            let walk = walk_sequences(a.p, a.n, &check_grid)?;
            let identity = walk.sequence.check_renewal_identity(&check_grid)?;
            out.artifact(&a.common.out, |w| walk.sequence.write_csv(w))?;
            out.metric("closed_form_deviation", walk.closed_form_deviation);
            out.metric("generating_function_bound_ratio", walk.generating_function.worst_bound_ratio);
            out.metric("identity_bound_ratio", identity.worst_bound_ratio);
            gid_metrics(&mut out, "", &witness);
            out.pass = walk.generating_function.pass && identity.pass && witness.passed();
        }
        Example::ExcursionTransform => {
            let witness = gid_witness_ex43(a.p, &cfg)?;
            let walk = walk_sequences(a.p, a.n, &check_grid)?;
            out.artifact(&a.common.out, |w| walk.sequence.write_csv(w))?;
            gid_metrics(&mut out, "", &witness);
            out.pass = witness.passed();
        }
    }
    Ok(out)
}
