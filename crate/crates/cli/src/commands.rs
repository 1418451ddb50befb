use std::io::{BufRead, Write};
use std::path::Path;

use histmix::evaluation::{aggregate, prediction_error_trajectory, Functional};
use histmix::ingest::{parse_observations, RSpec, RunConfig};
use histmix::numeric::{nats_to_bits, CompensatedSum};
use histmix::sources::SourceModel;
use histmix::{Error, MixtureEstimator};

use crate::failure::Failure;
use crate::records::{num, nums, write_failed, Output, Record};

/// Read, override and normalize a config file.
pub fn load_config(path: &Path, seed: Option<u64>, r: Option<&str>) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text).map_err(|e| Failure::Config(e.to_string()))?;
    if seed.is_some() {
        cfg.seed = seed;
    }
    if let Some(r) = r {
        cfg.r = Some(RSpec::parse(r).map_err(|e| Failure::Usage(format!("--r: {e}")))?);
    }
    cfg.normalize().map_err(|e| Failure::Config(e.to_string()))
}

fn require_source<'a>(cfg: &'a RunConfig, what: &str) -> Result<&'a SourceModel, Failure> {
    cfg.source.as_ref().ok_or_else(|| Failure::Config(format!("{what} needs a source in the config")))
}

fn at_line(line: usize, raw: f64, e: Error) -> Failure {
    match e {
        Error::OutOfSupport(_) => Failure::Data(format!("line {line}: observation {raw} lies outside the support")),
        Error::Parse { .. } => e.into(),
        other => match Failure::from(other) {
            Failure::Data(m) => Failure::Data(format!("line {line}: {m}")),
            f => f,
        },
    }
}

fn note(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        eprintln!("histmix: {}", msg.as_ref());
    }
}

fn finish(mut out: Output) -> Result<(), Failure> {
    out.flush().map_err(write_failed)
}

pub fn synth(cfg: &RunConfig, mut out: Output, quiet: bool) -> Result<(), Failure> {
    let source = require_source(cfg, "synth")?;
    let n = cfg.n.unwrap_or(0);
    let seed = cfg.seed.unwrap_or(0);
    let digest = cfg.digest();
    writeln!(out, "# histmix synth source={} seed={seed} n={n} digest={digest}", source.kind()).map_err(write_failed)?;
    for x in source.sampler(seed).take(n) {
        writeln!(out, "{x}").map_err(write_failed)?;
    }
    finish(out)?;
    note(quiet, format!("wrote {n} observations from {} (seed {seed})", source.kind()));
    Ok(())
}

/// Transformed observations with their line numbers.
fn observations<'a>(
    cfg: &RunConfig,
    input: Box<dyn BufRead + 'a>,
) -> impl Iterator<Item = Result<(usize, f64, f64), Failure>> + 'a {
    let transform = cfg.transform();
    let atoms = cfg.transform_atoms();
    parse_observations(input).map(move |rec| {
        let rec = rec.map_err(Failure::from)?;
        Ok((rec.line, rec.value, transform.apply(rec.value, &atoms)))
    })
}

pub fn estimate(cfg: &RunConfig, input: Box<dyn BufRead>, mut out: Output, quiet: bool) -> Result<(), Failure> {
    let mut est: MixtureEstimator = cfg.build_estimator()?;
    let source = cfg.source.as_ref();
    let checkpoints = cfg.checkpoints.clone().unwrap_or_default();
    let digest = cfg.digest();
    writeln!(out, "# histmix estimate metric={} digest={digest}", if source.is_some() { "kl_bits" } else { "logloss_bits" })
        .map_err(write_failed)?;

    let mut true_log = CompensatedSum::new();
    let mut prev: Option<f64> = None;
    let mut last_emitted = 0;
    let emit = |est: &MixtureEstimator, true_log: f64, out: &mut Output| {
        let n = est.n();
        let nf = n as f64;
        let rec = Record::new("estimate").field("n", n);
        let rec = match source {
            Some(_) => rec.field("kl_bits", num(nats_to_bits((true_log - est.joint_log_density()) / nf))),
            None => rec.field("logloss_bits", num(nats_to_bits(-est.joint_log_density() / nf))),
        };
        rec.field("weights", nums(&est.posterior_weights())).field("digest", &digest).write(out)
    };
    for item in observations(cfg, input) {
        let (line, raw, x) = item?;
        est.observe(x).map_err(|e| at_line(line, raw, e))?;
        if let Some(s) = source {
            true_log.add(s.true_log_density(x, prev.as_slice()).map_err(|e| at_line(line, raw, e))?);
        }
        prev = Some(x);
        if checkpoints.binary_search(&est.n()).is_ok() {
            emit(&est, true_log.value(), &mut out)?;
            last_emitted = est.n();
        }
    }
    if est.n() > last_emitted {
        emit(&est, true_log.value(), &mut out)?;
    }
    finish(out)?;
    note(quiet, format!("estimated from {} observations", est.n()));
    Ok(())
}

pub fn predict(cfg: &RunConfig, input: Box<dyn BufRead>, mut out: Output, quiet: bool) -> Result<(), Failure> {
    let mut est = cfg.build_estimator()?;
    let spec = cfg.r.ok_or_else(|| Failure::Config("no function r configured".into()))?;
    let (r, bound) = spec.build(est.family())?;
    let averages = est.cell_averages(r.as_ref(), bound)?;
    let digest = cfg.digest();
    writeln!(out, "# histmix predict r={} digest={digest}", spec.to_text()).map_err(write_failed)?;
    for item in observations(cfg, input) {
        let (line, raw, x) = item?;
        // Forecast from the past only, then consume x_j.
        let prediction = est.predict_with(&averages);
        est.observe(x).map_err(|e| at_line(line, raw, e))?;
        Record::default()
            .field("j", est.n())
            .field("prediction", num(prediction))
            .field("realized", num(r.eval(x)))
            .field("digest", &digest)
            .write(&mut out)?;
    }
    finish(out)?;
    note(quiet, format!("{} predictions of {}", est.n(), spec.to_text()));
    Ok(())
}

pub fn evaluate(cfg: &RunConfig, mut out: Output, jobs: Option<usize>, quiet: bool) -> Result<(), Failure> {
    let source = require_source(cfg, "evaluate")?;
    let est = cfg.build_estimator()?;
    let spec = cfg.r.ok_or_else(|| Failure::Config("no function r configured".into()))?;
    let (r, bound) = spec.build(est.family())?;
    let seeds = cfg.seed_list();
    let checkpoints = cfg.checkpoints.clone().unwrap_or_default();
    let digest = cfg.digest();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start worker pool: {e}")))?;
    note(quiet, format!("evaluating {} seeds of {}", seeds.len(), source.kind()));
    let functional = Functional { r: r.as_ref(), bound };
    let runs = pool.install(|| prediction_error_trajectory(source, &est, functional, &seeds, &checkpoints, &digest))?;

    writeln!(out, "# histmix evaluate source={} r={} seeds={} digest={digest}", source.kind(), spec.to_text(), seeds.len())
        .map_err(write_failed)?;
    for run in &runs {
        for cp in &run.checkpoints {
            let mut rec = Record::new("seed").field("seed", run.seed).field("n", cp.n).field("kl_bits", num(cp.kl_bits));
            if let (Some(sq), Some(abs)) = (cp.sq_error, cp.abs_error) {
                rec = rec.field("sq_error", num(sq)).field("abs_error", num(abs));
            }
            rec.field("weights", nums(&cp.posterior_weights)).field("digest", &run.digest).write(&mut out)?;
        }
    }
    for agg in aggregate(&runs) {
        Record::new("aggregate")
            .field("metric", agg.metric)
            .field("n", agg.n)
            .field("median", num(agg.median))
            .field("mean", num(agg.mean))
            .field("seeds", runs.len())
            .field("digest", &digest)
            .write(&mut out)?;
    }
    finish(out)
}
