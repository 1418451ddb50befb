//! The histogram-weighting estimator: a fixed-weight mixture of per-level
//! measures, each spreading its level coder's cell probabilities over the
//! cells in proportion to the reference measure.
//!
//! All densities are taken with respect to the reference measure `eta`
//! (product form over time), in natural logs.

use crate::coder::LevelCoder;
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, CompensatedSum};
use crate::partition::PartitionFamily;
use crate::reference::{BoundedFunction, ReferenceMeasure};

/// Positive level weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::InvalidWeights("need at least one weight".into()));
        }
        if let Some(w) = omega.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidWeights(format!("weight {w} is not positive")));
        }
        let total: f64 = omega.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
        }
        Ok(Self(omega))
    }

    /// `omega_i` proportional to `2^-(i+1)`, renormalized over `levels` entries.
    pub fn geometric(levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidWeights("level count must be at least 1".into()));
        }
        let raw: Vec<f64> = (0..levels).map(|i| 0.5f64.powi(i as i32 + 1)).collect();
        let total: f64 = raw.iter().sum();
        Ok(Self(raw.into_iter().map(|w| w / total).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Shorthand for [`WeightVector::geometric`].
pub fn default_weights(levels: usize) -> Result<WeightVector> {
    WeightVector::geometric(levels)
}

/// One step's per-level quantities for a candidate observation.
struct Step {
    cells: Vec<usize>,
    /// `ln Q_i(a_i | past) - ln eta(a_i)` per level.
    increments: Vec<f64>,
    log_q: Vec<f64>,
    new_joint: f64,
}

/// Per-cell averages of a fixed bounded function, reusable across steps.
#[derive(Debug, Clone)]
pub struct CellAverages {
    per_level: Vec<Vec<f64>>,
}

impl CellAverages {
    pub fn level(&self, i: usize) -> &[f64] {
        &self.per_level[i]
    }
}

#[derive(Debug, Clone)]
pub struct MixtureEstimator {
    family: PartitionFamily,
    eta: ReferenceMeasure,
    weights: WeightVector,
    log_weights: Vec<f64>,
    coders: Vec<LevelCoder>,
    /// `ln eta(cell)` per level and cell.
    log_masses: Vec<Vec<f64>>,
    level_log_density: Vec<CompensatedSum>,
    joint: f64,
    n: u64,
}

impl MixtureEstimator {
    pub fn new(family: PartitionFamily, eta: ReferenceMeasure, weights: WeightVector, max_order: usize) -> Result<Self> {
        if weights.len() != family.num_levels() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} levels",
                weights.len(),
                family.num_levels()
            )));
        }
        let masses = eta.level_masses(&family)?;
        let log_masses = masses.iter().map(|l| l.iter().map(|m| m.ln()).collect()).collect();
        let coders = family
            .level_sizes()
            .into_iter()
            .map(|k| LevelCoder::new(k, max_order))
            .collect::<Result<Vec<_>>>()?;
        let levels = family.num_levels();
        Ok(Self {
            log_weights: weights.as_slice().iter().map(|w| w.ln()).collect(),
            family,
            eta,
            weights,
            coders,
            log_masses,
            level_log_density: vec![CompensatedSum::new(); levels],
            joint: 0.0,
            n: 0,
        })
    }

    pub fn family(&self) -> &PartitionFamily {
        &self.family
    }

    pub fn eta(&self) -> &ReferenceMeasure {
        &self.eta
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn coders(&self) -> &[LevelCoder] {
        &self.coders
    }

    pub fn num_levels(&self) -> usize {
        self.coders.len()
    }

    /// Number of observations consumed.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Cumulative `ln d(nu_i^n)/d(eta^n)` at the observed prefix.
    pub fn level_log_density(&self) -> Vec<f64> {
        self.level_log_density.iter().map(CompensatedSum::value).collect()
    }

    /// `ln d(nu^n)/d(eta^n)` at the observed prefix; zero before any data.
    pub fn joint_log_density(&self) -> f64 {
        self.joint
    }

    fn mixture_log_density(&self, level_densities: impl Iterator<Item = f64>) -> f64 {
        let terms: Vec<f64> = self.log_weights.iter().zip(level_densities).map(|(w, d)| w + d).collect();
        log_sum_exp(&terms)
    }

    fn step(&self, x: f64) -> Result<Step> {
        let levels = self.num_levels();
        let mut cells = Vec::with_capacity(levels);
        let mut increments = Vec::with_capacity(levels);
        let mut log_q = Vec::with_capacity(levels);
        for (i, coder) in self.coders.iter().enumerate() {
            let a = self.family.project(i, x)?;
            let lq = coder.conditional(a)?.ln();
            cells.push(a);
            log_q.push(lq);
            increments.push(lq - self.log_masses[i][a]);
        }
        let new_joint = self.mixture_log_density(
            self.level_log_density.iter().zip(&increments).map(|(d, &inc)| {
                let mut d = *d;
                d.add(inc);
                d.value()
            }),
        );
        Ok(Step { cells, increments, log_q, new_joint })
    }

    /// One-step conditional log-density at `x` given the past, without updating.
    ///
    /// Equal to the log-sum-exp over levels of posterior log weight plus
    /// `ln Q_i(a_i | past) - ln eta(a_i)`; evaluated as the difference of
    /// consecutive joint log densities so the chain rule telescopes exactly.
    pub fn log_density_at(&self, x: f64) -> Result<f64> {
        Ok(self.step(x)?.new_joint - self.joint)
    }

    /// Consume `x`; returns its one-step conditional log-density.
    pub fn observe(&mut self, x: f64) -> Result<f64> {
        let step = self.step(x)?;
        for (i, coder) in self.coders.iter_mut().enumerate() {
            let lq = coder.update(step.cells[i])?;
            debug_assert!((lq - step.log_q[i]).abs() <= 1e-12 * lq.abs().max(1.0));
            self.level_log_density[i].add(step.increments[i]);
        }
        let out = step.new_joint - self.joint;
        self.joint = step.new_joint;
        self.n += 1;
        Ok(out)
    }

    /// Posterior level weights `omega_i * exp(level density) / exp(joint)`.
    pub fn posterior_weights(&self) -> Vec<f64> {
        let logs: Vec<f64> = self
            .log_weights
            .iter()
            .zip(&self.level_log_density)
            .map(|(w, d)| w + d.value())
            .collect();
        let norm = log_sum_exp(&logs);
        let mut post: Vec<f64> = logs.iter().map(|l| (l - norm).exp()).collect();
        let total: f64 = post.iter().sum();
        post.iter_mut().for_each(|p| *p /= total);
        post
    }

    /// Level `i`'s one-step conditional log density at `x` (w.r.t. `eta`).
    pub fn level_conditional_log_density(&self, level: usize, x: f64) -> Result<f64> {
        let coder = self
            .coders
            .get(level)
            .ok_or(Error::LevelOutOfRange { level, levels: self.num_levels() })?;
        let a = self.family.project(level, x)?;
        Ok(coder.conditional(a)?.ln() - self.log_masses[level][a])
    }

    /// Within-cell `eta`-averages of `r` for every cell of every level.
    pub fn cell_averages(&self, r: &dyn BoundedFunction, bound: f64) -> Result<CellAverages> {
        let per_level = (0..self.num_levels())
            .map(|i| {
                self.family
                    .cells(i)?
                    .iter()
                    .map(|cell| self.eta.average_over_cell(cell, r, bound))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CellAverages { per_level })
    }

    /// Conditional expectation of the function tabulated in `averages`
    /// under the estimator's one-step predictive measure.
    pub fn predict_with(&self, averages: &CellAverages) -> f64 {
        // Centred on one cell's average so a constant function is reproduced
        // exactly rather than up to the rounding of the probability sums.
        let centre = averages.level(0).first().copied().unwrap_or(0.0);
        let post = self.posterior_weights();
        let mut total = 0.0;
        let mut dist = Vec::new();
        for (i, coder) in self.coders.iter().enumerate() {
            dist.resize(coder.alphabet_size(), 0.0);
            coder.distribution_into(&mut dist);
            let level: f64 = dist.iter().zip(averages.level(i)).map(|(q, r)| q * (r - centre)).sum();
            total += post[i] * level;
        }
        centre + total
    }

    /// One-step prediction of `r`: the conditional mean under the mixture.
    pub fn predict_functional(&self, r: &dyn BoundedFunction, bound: f64) -> Result<f64> {
        let averages = self.cell_averages(r, bound)?;
        Ok(self.predict_with(&averages).clamp(-bound, bound))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{Constant, Identity, Piece};
    use approx::assert_relative_eq;

    fn uniform_estimator(levels: usize, max_order: usize) -> MixtureEstimator {
        MixtureEstimator::new(
            PartitionFamily::dyadic(0.0, 1.0, levels).unwrap(),
            ReferenceMeasure::uniform(0.0, 1.0).unwrap(),
            WeightVector::geometric(levels).unwrap(),
            max_order,
        )
        .unwrap()
    }

    #[test]
    fn default_weight_examples() {
        assert_eq!(default_weights(1).unwrap().as_slice(), &[1.0]);
        let w = default_weights(3).unwrap();
        for (a, b) in w.as_slice().iter().zip([4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }
        for l in 1..30 {
            let total: f64 = default_weights(l).unwrap().as_slice().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert!(default_weights(0).is_err());
    }

    #[test]
    fn weight_validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![1.0, 0.0]).is_err());
        assert!(WeightVector::new(vec![0.6, 0.6]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
    }

    #[test]
    fn single_level_equals_level_conditional() {
        let mut est = uniform_estimator(1, 2);
        let mut coder = LevelCoder::new(2, 2).unwrap();
        for &x in &[0.1, 0.7, 0.2, 0.3, 0.9, 0.4] {
            let expected = coder.conditional(usize::from(x >= 0.5)).unwrap().ln() - 0.5f64.ln();
            let got = est.observe(x).unwrap();
            assert_relative_eq!(got, expected, epsilon = 1e-12);
            coder.update(usize::from(x >= 0.5)).unwrap();
            assert_relative_eq!(est.joint_log_density(), est.level_log_density()[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn first_observation_has_unit_density() {
        for levels in 1..8 {
            let est = uniform_estimator(levels, 2);
            for x in [0.0, 0.123, 0.5, 0.999] {
                assert!(est.log_density_at(x).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chain_rule_and_purity() {
        let mut est = uniform_estimator(4, 2);
        let mut sum = CompensatedSum::new();
        assert_eq!(est.joint_log_density(), 0.0);
        for j in 0..300 {
            let x = ((j as f64) * 0.618_033_988_7).fract() * 0.5;
            let q = est.log_density_at(x).unwrap();
            let o = est.observe(x).unwrap();
            assert_eq!(q, o);
            sum.add(o);
            assert!((sum.value() - est.joint_log_density()).abs() < 1e-9);
        }
    }

    #[test]
    fn posterior_weights_start_at_prior_and_sum_to_one() {
        let mut est = uniform_estimator(3, 1);
        assert_eq!(est.posterior_weights(), default_weights(3).unwrap().as_slice());
        for j in 0..100 {
            est.observe((j as f64 * 0.37).fract()).unwrap();
            let total: f64 = est.posterior_weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dominance_holds_every_step() {
        let mut est = uniform_estimator(5, 2);
        let log_w: Vec<f64> = est.weights().as_slice().iter().map(|w| w.ln()).collect();
        for j in 0..500 {
            est.observe((j as f64 * 0.7548776662).fract().powi(2)).unwrap();
            let joint = est.joint_log_density();
            for (w, d) in log_w.iter().zip(est.level_log_density()) {
                assert!(joint >= w + d - 1e-12);
            }
        }
    }

    #[test]
    fn mixture_dominates_each_posterior_term() {
        let mut est = uniform_estimator(4, 1);
        for j in 0..200 {
            let x = (j as f64 * 0.41).fract();
            let total = est.log_density_at(x).unwrap().exp();
            let post = est.posterior_weights();
            for i in 0..4 {
                let term = post[i] * est.level_conditional_log_density(i, x).unwrap().exp();
                assert!(total >= term * (1.0 - 1e-12));
            }
            est.observe(x).unwrap();
        }
    }

    #[test]
    fn level_density_matches_coder_minus_eta() {
        let fam = PartitionFamily::mixed(&[-1.0], 0.0, 1.0, 4).unwrap();
        let eta = ReferenceMeasure::new(vec![(-1.0, 0.5)], vec![Piece { lower: 0.0, upper: 1.0, mass: 0.5 }], None).unwrap();
        let mut est = MixtureEstimator::new(fam.clone(), eta.clone(), WeightVector::geometric(4).unwrap(), 2).unwrap();
        let xs: Vec<f64> = (0..400).map(|j| if j % 3 == 0 { -1.0 } else { (j as f64 * 0.3819).fract() }).collect();
        for &x in &xs {
            est.observe(x).unwrap();
        }
        for i in 0..4 {
            let eta_sum: f64 = xs
                .iter()
                .map(|&x| eta.cell_mass(&fam.cell(i, fam.project(i, x).unwrap()).unwrap()).ln())
                .sum();
            let expected = est.coders()[i].cum_log_prob() - eta_sum;
            assert!((est.level_log_density()[i] - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn predict_functional_examples() {
        let est = uniform_estimator(1, 2);
        assert_relative_eq!(est.predict_functional(&Identity, 1.0).unwrap(), 0.5, max_relative = 1e-15);

        let mut est = uniform_estimator(4, 2);
        for j in 0..50 {
            for c in [1.0, -0.25] {
                assert_eq!(est.predict_functional(&Constant(c), 1.0).unwrap(), c);
            }
            est.observe((j as f64 * 0.77).fract()).unwrap();
        }
        assert!(matches!(est.predict_functional(&Identity, 0.5), Err(Error::BoundViolation { .. })));
    }

    #[test]
    fn out_of_support_is_rejected_without_mutation() {
        let mut est = uniform_estimator(3, 1);
        est.observe(0.2).unwrap();
        let before = est.joint_log_density();
        assert!(matches!(est.observe(1.5), Err(Error::OutOfSupport(_))));
        assert!(est.log_density_at(-0.1).is_err());
        assert_eq!(est.joint_log_density(), before);
        assert_eq!(est.n(), 1);
    }

    #[test]
    fn weight_count_must_match_levels() {
        let r = MixtureEstimator::new(
            PartitionFamily::dyadic(0.0, 1.0, 3).unwrap(),
            ReferenceMeasure::uniform(0.0, 1.0).unwrap(),
            WeightVector::geometric(2).unwrap(),
            1,
        );
        assert!(r.is_err());
    }

    #[test]
    fn no_underflow_on_long_streams() {
        let mut est = uniform_estimator(12, 2);
        for j in 0..20_000u64 {
            // Concentrated data drives fine-level densities far apart.
            let x = 0.3 + 1e-4 * ((j * 2_654_435_761) % 1000) as f64 / 1000.0;
            let v = est.observe(x).unwrap();
            assert!(v.is_finite());
        }
        assert!(est.joint_log_density().is_finite());
        assert!(est.posterior_weights().iter().all(|w| w.is_finite()));
    }
}
