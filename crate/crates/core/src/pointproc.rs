//! p-thinning and superposition of point processes with {1, 2} indicator
//! marks, and Monte Carlo checks of the thinning theorems for renewal
//! processes.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::distributions::{
    ks_critical_one_sample, ks_critical_two_sample, ks_two_sample, median, ml_cdf,
    try_ks_statistic, DistributionSpec,
};
use crate::error::{invalid, Error, Result};
use crate::renewal::{simulate_renewal_events, RenewalPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mark {
    One,
    Two,
}

impl Mark {
    pub fn label(self) -> u8 {
        match self {
            Mark::One => 1,
            Mark::Two => 2,
        }
    }
}

/// Event times with the mark of the sub-process each event belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPath {
    event_times: Vec<f64>,
    marks: Vec<Mark>,
}

impl Serialize for MarkedPath {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let labels: Vec<u8> = self.marks.iter().map(|m| m.label()).collect();
        let mut st = ser.serialize_struct("MarkedPath", 2)?;
        st.serialize_field("event_times", &self.event_times)?;
        st.serialize_field("marks", &labels)?;
        st.end()
    }
}

fn check_strictly_increasing(times: &[f64]) -> Result<()> {
    if let Some(bad) = times.iter().find(|t| !t.is_finite()) {
        return Err(invalid(format!("event times must be finite, got {bad}")));
    }
    match times.windows(2).find(|w| w[1] <= w[0]) {
        Some(w) if w[1] == w[0] => Err(Error::Multiplicity(w[0])),
        Some(w) => Err(invalid(format!(
            "event times must be increasing, got {} after {}",
            w[1], w[0]
        ))),
        None => Ok(()),
    }
}

impl MarkedPath {
    pub fn new(event_times: Vec<f64>, marks: Vec<Mark>) -> Result<Self> {
        if event_times.len() != marks.len() {
            return Err(invalid(format!(
                "{} event times but {} marks",
                event_times.len(),
                marks.len()
            )));
        }
        check_strictly_increasing(&event_times)?;
        Ok(Self { event_times, marks })
    }

    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    pub fn marks(&self) -> &[Mark] {
        &self.marks
    }

    pub fn len(&self) -> usize {
        self.event_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.event_times.is_empty()
    }

    pub fn count(&self, which: Mark) -> usize {
        self.marks.iter().filter(|&&m| m == which).count()
    }

    /// Event times carrying mark `which`, in order.
    pub fn projection(&self, which: Mark) -> Vec<f64> {
        self.event_times
            .iter()
            .zip(&self.marks)
            .filter(|(_, &m)| m == which)
            .map(|(&t, _)| t)
            .collect()
    }

    /// Writes `time,mark` rows under a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "time,mark")?;
        for (t, m) in self.event_times.iter().zip(&self.marks) {
            writeln!(out, "{t},{}", m.label())?;
        }
        out.flush()
    }
}

/// Marks each event of `path` independently: 1 with probability `p`, else 2.
pub fn thin<R: Rng + ?Sized>(path: &RenewalPath, p: f64, rng: &mut R) -> Result<MarkedPath> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("p must lie in (0, 1], got {p}")));
    }
    let marks = path
        .event_times()
        .iter()
        .map(|_| {
            if rng.random::<f64>() < p {
                Mark::One
            } else {
                Mark::Two
            }
        })
        .collect();
    MarkedPath::new(path.event_times().to_vec(), marks)
}

/// Merges two event sets, marking each event by its origin. Equal times in
/// either input or across inputs are a [`Error::Multiplicity`].
pub fn superpose(first: &[f64], second: &[f64]) -> Result<MarkedPath> {
    check_strictly_increasing(first)?;
    check_strictly_increasing(second)?;
    let mut times = Vec::with_capacity(first.len() + second.len());
    let mut marks = Vec::with_capacity(first.len() + second.len());
    let (mut i, mut j) = (0, 0);
    while i < first.len() || j < second.len() {
        let take_first = match (first.get(i), second.get(j)) {
            (Some(a), Some(b)) if a == b => return Err(Error::Multiplicity(*a)),
            (Some(a), Some(b)) => a < b,
            (Some(_), None) => true,
            _ => false,
        };
        if take_first {
            times.push(first[i]);
            marks.push(Mark::One);
            i += 1;
        } else {
            times.push(second[j]);
            marks.push(Mark::Two);
            j += 1;
        }
    }
    MarkedPath::new(times, marks)
}

/// First differences of the event times carrying mark `which`.
pub fn thinned_interarrival_samples(marked: &MarkedPath, which: Mark) -> Result<Vec<f64>> {
    let times = marked.projection(which);
    if times.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: times.len(),
        });
    }
    Ok(times.windows(2).map(|w| w[1] - w[0]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thm31Report {
    pub alpha: f64,
    pub reference_alpha: f64,
    pub p: f64,
    pub n_events: usize,
    pub n1: usize,
    pub n2: usize,
    pub ks_n1: f64,
    pub ks_n2: f64,
    pub critical_n1: f64,
    pub critical_n2: f64,
    pub pass: bool,
}

/// Simulates `n_events` epochs of an ML(α) renewal process, thins at `p`,
/// rescales the mark-1 inter-arrivals by `p^{1/α}` and the mark-2 ones by
/// `q^{1/α}`, and KS-tests both against the ML(α) distribution function.
pub fn check_thm31<R: Rng + ?Sized>(
    rng: &mut R,
    alpha: f64,
    p: f64,
    n_events: usize,
) -> Result<Thm31Report> {
    check_thm31_against(rng, alpha, p, n_events, alpha)
}

/// [`check_thm31`] with the KS reference law ML(`reference_alpha`) in place
/// of ML(α).
pub fn check_thm31_against<R: Rng + ?Sized>(
    rng: &mut R,
    alpha: f64,
    p: f64,
    n_events: usize,
    reference_alpha: f64,
) -> Result<Thm31Report> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("p must lie in (0, 1), got {p}")));
    }
    if !(reference_alpha > 0.0 && reference_alpha <= 1.0) {
        return Err(invalid(format!(
            "reference alpha must lie in (0, 1], got {reference_alpha}"
        )));
    }
    let spec = DistributionSpec::mittag_leffler(alpha, 1.0)?;
    let path = simulate_renewal_events(rng, &spec, n_events)?;
    let marked = thin(&path, p, rng)?;

    let rescaled_ks = |which: Mark, fraction: f64| -> Result<(usize, f64)> {
        let c = fraction.powf(1.0 / alpha);
        let samples: Vec<f64> = thinned_interarrival_samples(&marked, which)?
            .into_iter()
            .map(|x| c * x)
            .collect();
        let ks = try_ks_statistic(&samples, |x| ml_cdf(reference_alpha, x))?;
        Ok((samples.len(), ks))
    };
    let (n1, ks_n1) = rescaled_ks(Mark::One, p)?;
    let (n2, ks_n2) = rescaled_ks(Mark::Two, 1.0 - p)?;
    let (critical_n1, critical_n2) = (ks_critical_one_sample(n1), ks_critical_one_sample(n2));
    Ok(Thm31Report {
        alpha,
        reference_alpha,
        p,
        n_events,
        n1,
        n2,
        ks_n1,
        ks_n2,
        critical_n1,
        critical_n2,
        pass: ks_n1 < critical_n1 && ks_n2 < critical_n2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SameTypeReport {
    /// `median(samples2) / median(samples1)`.
    pub scale_estimate: f64,
    pub ks_after_rescale: f64,
    pub critical: f64,
    pub pass: bool,
}

/// Tests whether `samples2` is a scale multiple of `samples1` in law: the
/// scale is the ratio of medians, and the rescaled second sample is compared
/// with the first by a two-sample KS test at 1%.
pub fn check_same_type(samples1: &[f64], samples2: &[f64]) -> Result<SameTypeReport> {
    let (m1, m2) = (median(samples1)?, median(samples2)?);
    if m1 == 0.0 || m2 == 0.0 {
        return Err(Error::Degenerate("zero median, scale is undefined".into()));
    }
    let scale_estimate = m2 / m1;
    let rescaled: Vec<f64> = samples2.iter().map(|x| x / scale_estimate).collect();
    let ks_after_rescale = ks_two_sample(samples1, &rescaled)?;
    let critical = ks_critical_two_sample(samples1.len(), samples2.len());
    Ok(SameTypeReport {
        scale_estimate,
        ks_after_rescale,
        critical,
        pass: ks_after_rescale < critical,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    /// Lag-1 Spearman rank correlation.
    pub lag1_stat: f64,
    /// Two-sided permutation p-value, `(1 + #{|r*| ≥ |r|}) / (1 + permutations)`.
    pub p_value: f64,
    pub permutations: usize,
    pub pass: bool,
}

pub const INDEPENDENCE_MIN_SAMPLES: usize = 100;
pub const INDEPENDENCE_PERMUTATIONS: usize = 1000;
pub const INDEPENDENCE_LEVEL: f64 = 0.01;

/// Ranks starting at 1, ties sharing their average rank.
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

fn lag1_correlation(r: &[f64]) -> f64 {
    let (x, y) = (&r[..r.len() - 1], &r[1..]);
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Permutation test of lag-1 rank correlation in a sequence of
/// inter-arrival times; passes when the p-value exceeds 1%.
pub fn check_renewal_independence<R: Rng + ?Sized>(
    rng: &mut R,
    samples: &[f64],
) -> Result<IndependenceReport> {
    if samples.len() < INDEPENDENCE_MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: INDEPENDENCE_MIN_SAMPLES,
            got: samples.len(),
        });
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(invalid("samples contain NaN"));
    }
    let mut ranks = average_ranks(samples);
    let observed = lag1_correlation(&ranks);
    if !observed.is_finite() {
        return Err(Error::Degenerate(
            "rank correlation undefined for a constant sequence".into(),
        ));
    }
    let mut extreme = 0;
    for _ in 0..INDEPENDENCE_PERMUTATIONS {
        ranks.shuffle(rng);
        if lag1_correlation(&ranks).abs() >= observed.abs() {
            extreme += 1;
        }
    }
    let p_value = (1 + extreme) as f64 / (1 + INDEPENDENCE_PERMUTATIONS) as f64;
    Ok(IndependenceReport {
        lag1_stat: observed,
        p_value,
        permutations: INDEPENDENCE_PERMUTATIONS,
        pass: p_value > INDEPENDENCE_LEVEL,
    })
}
