//! Convergence measurements against synthetic ground truth: per-symbol
//! log-ratio trajectories, Cesàro-averaged functional prediction errors and
//! the total-variation bound.

use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mixture::MixtureEstimator;
use crate::numeric::{median, nats_to_bits, CompensatedSum};
use crate::reference::BoundedFunction;
use crate::sources::SourceModel;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub n: u64,
    /// `(1/n) log2 (d mu^n / d nu^n)` at the sampled prefix.
    pub kl_bits: f64,
    pub posterior_weights: Vec<f64>,
    /// `(1/n) sum_j (true conditional mean - prediction)^2`.
    pub sq_error: Option<f64>,
    pub abs_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub seed: u64,
    pub digest: String,
    pub checkpoints: Vec<Checkpoint>,
}

/// Function whose conditional mean is tracked during a run.
#[derive(Clone, Copy)]
pub struct Functional<'a> {
    pub r: &'a dyn BoundedFunction,
    pub bound: f64,
}

/// Something that forecasts `E[r(X_j) | past]` before each observation.
/// `history` holds the previous observation, if any: every built-in source
/// is at most first-order.
pub trait Forecaster {
    fn forecast(&mut self, history: &[f64]) -> Result<f64>;
    fn consume(&mut self, x: f64) -> Result<()>;
}

/// The source's own conditional law, used as a zero-error forecaster.
pub struct OracleForecaster<'a> {
    pub source: &'a SourceModel,
    pub functional: Functional<'a>,
}

impl Forecaster for OracleForecaster<'_> {
    fn forecast(&mut self, history: &[f64]) -> Result<f64> {
        self.source.true_conditional_mean(self.functional.r, self.functional.bound, history)
    }

    fn consume(&mut self, _x: f64) -> Result<()> {
        Ok(())
    }
}

fn check_checkpoints(checkpoints: &[u64]) -> Result<u64> {
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("checkpoints must be positive and strictly increasing"));
    }
    Ok(*checkpoints.last().expect("non-empty"))
}

fn check_eta(source: &SourceModel, estimator: &MixtureEstimator) -> Result<()> {
    if *estimator.eta() != source.matched_reference() {
        return Err(Error::config(format!(
            "estimator reference measure differs from the {} source's",
            source.kind()
        )));
    }
    Ok(())
}

/// Memoized true conditional means, keyed by the part of the past the law depends on.
struct TruthCache<'a> {
    source: &'a SourceModel,
    functional: Functional<'a>,
    values: [Option<f64>; 3],
}

impl TruthCache<'_> {
    fn mean(&mut self, history: &[f64]) -> Result<f64> {
        let key = self.source.history_state(history);
        if let Some(v) = self.values[key] {
            return Ok(v);
        }
        let v = self.source.true_conditional_mean(self.functional.r, self.functional.bound, history)?;
        self.values[key] = Some(v);
        Ok(v)
    }
}

/// Stream one seed's sample through a fresh copy of `prototype`.
pub fn run_seed(
    source: &SourceModel,
    prototype: &MixtureEstimator,
    functional: Option<Functional<'_>>,
    seed: u64,
    checkpoints: &[u64],
    digest: &str,
) -> Result<RunMetrics> {
    check_eta(source, prototype)?;
    let n_max = check_checkpoints(checkpoints)?;
    let mut est = prototype.clone();
    let averages = functional.map(|f| est.cell_averages(f.r, f.bound)).transpose()?;
    let mut truth = functional.map(|f| TruthCache { source, functional: f, values: [None; 3] });
    let mut true_log = CompensatedSum::new();
    let mut sq = CompensatedSum::new();
    let mut abs = CompensatedSum::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    // Every source's conditional law depends on at most the previous value.
    let mut prev: Option<f64> = None;
    for (j, x) in source.transformed_sampler(seed).take(n_max as usize).enumerate() {
        let history = prev.as_slice();
        if let (Some(avg), Some(cache)) = (&averages, truth.as_mut()) {
            let err = cache.mean(history)? - est.predict_with(avg);
            sq.add(err * err);
            abs.add(err.abs());
        }
        true_log.add(source.true_log_density(x, history)?);
        est.observe(x)?;
        prev = Some(x);
        let n = j as u64 + 1;
        if next.peek() == Some(&&n) {
            next.next();
            let nf = n as f64;
            out.push(Checkpoint {
                n,
                kl_bits: nats_to_bits((true_log.value() - est.joint_log_density()) / nf),
                posterior_weights: est.posterior_weights(),
                sq_error: functional.map(|_| sq.value() / nf),
                abs_error: functional.map(|_| abs.value() / nf),
            });
        }
    }
    Ok(RunMetrics { seed, digest: digest.to_string(), checkpoints: out })
}

/// Per-seed trajectories of `(1/n) log2 (d mu^n / d nu^n)`.
pub fn kl_trajectory(
    source: &SourceModel,
    prototype: &MixtureEstimator,
    seeds: &[u64],
    checkpoints: &[u64],
    digest: &str,
) -> Result<Vec<RunMetrics>> {
    seeds
        .par_iter()
        .map(|&seed| run_seed(source, prototype, None, seed, checkpoints, digest))
        .collect()
}

/// Per-seed trajectories including Cesàro-averaged prediction errors of `r`.
pub fn prediction_error_trajectory(
    source: &SourceModel,
    prototype: &MixtureEstimator,
    functional: Functional<'_>,
    seeds: &[u64],
    checkpoints: &[u64],
    digest: &str,
) -> Result<Vec<RunMetrics>> {
    seeds
        .par_iter()
        .map(|&seed| run_seed(source, prototype, Some(functional), seed, checkpoints, digest))
        .collect()
}

/// Cesàro averages of squared and absolute forecast error at each checkpoint
/// for an arbitrary forecaster.
pub fn forecaster_errors(
    source: &SourceModel,
    forecaster: &mut dyn Forecaster,
    functional: Functional<'_>,
    seed: u64,
    checkpoints: &[u64],
) -> Result<Vec<(u64, f64, f64)>> {
    let n_max = check_checkpoints(checkpoints)?;
    let mut truth = TruthCache { source, functional, values: [None; 3] };
    let (mut sq, mut abs) = (CompensatedSum::new(), CompensatedSum::new());
    let mut out = Vec::new();
    let mut prev: Option<f64> = None;
    for (j, x) in source.transformed_sampler(seed).take(n_max as usize).enumerate() {
        let history = prev.as_slice();
        let err = truth.mean(history)? - forecaster.forecast(history)?;
        sq.add(err * err);
        abs.add(err.abs());
        forecaster.consume(x)?;
        prev = Some(x);
        let n = j as u64 + 1;
        if checkpoints.contains(&n) {
            out.push((n, sq.value() / n as f64, abs.value() / n as f64));
        }
    }
    Ok(out)
}

/// Cross-seed summary of one metric at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub metric: &'static str,
    pub n: u64,
    pub median: f64,
    pub mean: f64,
}

/// Medians and means over seeds, per metric and checkpoint.
pub fn aggregate(runs: &[RunMetrics]) -> Vec<Aggregate> {
    let Some(first) = runs.first() else { return Vec::new() };
    type Getter = fn(&Checkpoint) -> Option<f64>;
    let metrics: [(&'static str, Getter); 3] = [
        ("kl_bits", |c| Some(c.kl_bits)),
        ("sq_error", |c| c.sq_error),
        ("abs_error", |c| c.abs_error),
    ];
    let mut out = Vec::new();
    for (name, get) in metrics {
        for (idx, cp) in first.checkpoints.iter().enumerate() {
            let values: Vec<f64> = runs.iter().filter_map(|r| r.checkpoints.get(idx).and_then(get)).collect();
            if values.is_empty() {
                continue;
            }
            out.push(Aggregate {
                metric: name,
                n: cp.n,
                median: median(&values),
                mean: values.iter().sum::<f64>() / values.len() as f64,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinskerReport {
    /// `sup_A |p(A) - q(A)|`.
    pub tv: f64,
    pub kl_bits: f64,
    /// `sqrt(2 ln 2 * kl_bits)`.
    pub bound: f64,
    pub holds: bool,
}

/// Total variation against the KL bound for two finite (sub-)distributions.
pub fn pinsker_check(p: &[f64], q: &[f64]) -> Result<PinskerReport> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::Unsupported("distributions must have equal, non-zero length".into()));
    }
    for d in [p, q] {
        if d.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::Unsupported("probabilities must be finite and non-negative".into()));
        }
        if d.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::Unsupported("total mass exceeds 1".into()));
        }
    }
    // The best subset collects either every positive or every negative difference.
    let (mut plus, mut minus) = (0.0, 0.0);
    let mut kl_nats = 0.0;
    let mut absolutely_continuous = true;
    for (&a, &b) in p.iter().zip(q) {
        let d = a - b;
        if d > 0.0 {
            plus += d;
        } else {
            minus -= d;
        }
        if a > 0.0 {
            if b == 0.0 {
                absolutely_continuous = false;
            } else {
                kl_nats += a * (a / b).ln();
            }
        }
    }
    let tv = f64::max(plus, minus);
    if !absolutely_continuous {
        return Ok(PinskerReport { tv, kl_bits: f64::INFINITY, bound: f64::INFINITY, holds: true });
    }
    let kl_bits = (kl_nats / LN_2).max(0.0);
    let bound = (2.0 * LN_2 * kl_bits).sqrt();
    Ok(PinskerReport { tv, kl_bits, bound, holds: tv <= bound + 1e-12 })
}
