//! Synthetic ground-truth sources with exact densities against their
//! matched reference measure.
//!
//! Densities and conditional laws are stated in the space the estimator
//! sees, i.e. after the source's ingestion transform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::Transform;
use crate::partition::{is_positive_integer, Cell, PartitionFamily};
use crate::reference::{adaptive_midpoint, BoundedFunction, Piece, ReferenceMeasure, QUADRATURE_MAX_INTERVALS};

/// Point carrying the atom of the mixed source.
pub const MIXED_ATOM: f64 = -1.0;
const ORACLE_REL_TOL: f64 = 1e-10;

/// Continuous component of the mixed source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuousPart {
    /// Uniform on `[0, 1)`.
    Uniform,
    /// Exponential with the given rate on `[0, inf)`, observed through the
    /// logistic squash, which maps it onto `[1/2, 1)`.
    Exponential { rate: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceModel {
    /// I.i.d. uniform on `[0, 1)`.
    UniformIid,
    /// I.i.d. with piecewise-constant density on `[0, 1)`.
    PiecewiseIid { pieces: Vec<Piece> },
    /// Atom at -1 with mass `atom_mass`, the rest continuous.
    MixedAtom { atom_mass: f64, continuous: ContinuousPart },
    /// `mu(k) = (1 - ratio) ratio^(k-1)` on the positive integers.
    CountableGeometric { ratio: f64 },
    /// Two-state Markov chain on the halves of `[0, 1)`; each value is
    /// uniform within the current state's half. `stay[s]` is the
    /// probability of remaining in state `s`.
    BinaryMarkov { stay: [f64; 2] },
}

impl SourceModel {
    pub fn kind(&self) -> &'static str {
        match self {
            SourceModel::UniformIid => "uniform-iid",
            SourceModel::PiecewiseIid { .. } => "piecewise-density-iid",
            SourceModel::MixedAtom { .. } => "mixed-atom",
            SourceModel::CountableGeometric { .. } => "countable-geometric",
            SourceModel::BinaryMarkov { .. } => "binary-markov",
        }
    }

    /// Default pieces of the piecewise source: breakpoints off the dyadic grid.
    pub fn default_pieces() -> Vec<Piece> {
        vec![
            Piece { lower: 0.0, upper: 0.3, mass: 0.15 },
            Piece { lower: 0.3, upper: 0.55, mass: 0.5 },
            Piece { lower: 0.55, upper: 1.0, mass: 0.35 },
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::config(m));
        match self {
            SourceModel::UniformIid => Ok(()),
            SourceModel::PiecewiseIid { pieces } => {
                ReferenceMeasure::new(Vec::new(), pieces.clone(), None)?;
                let total: f64 = pieces.iter().map(|p| p.mass).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad(format!("source pieces carry mass {total}, not 1"));
                }
                if pieces.iter().any(|p| p.lower < 0.0 || p.upper > 1.0) {
                    return bad("source pieces must lie in [0, 1)".into());
                }
                Ok(())
            }
            SourceModel::MixedAtom { atom_mass, continuous } => {
                if !(0.0..=1.0).contains(atom_mass) {
                    return bad(format!("atom mass {atom_mass} not in [0, 1]"));
                }
                if let ContinuousPart::Exponential { rate } = continuous {
                    // Squashed density is bounded only for rate >= 1.
                    if !(*rate >= 1.0 && rate.is_finite()) {
                        return bad(format!("exponential rate {rate} must be at least 1"));
                    }
                }
                Ok(())
            }
            SourceModel::CountableGeometric { ratio } => {
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return bad(format!("geometric ratio {ratio} not in (0, 1)"));
                }
                Ok(())
            }
            SourceModel::BinaryMarkov { stay } => {
                if stay.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
                    return bad("markov stay probabilities must lie in (0, 1)".into());
                }
                Ok(())
            }
        }
    }

    /// The reference measure this source's densities are stated against.
    pub fn matched_reference(&self) -> ReferenceMeasure {
        match self {
            SourceModel::MixedAtom { .. } => ReferenceMeasure::new(
                vec![(MIXED_ATOM, 0.5)],
                vec![Piece { lower: 0.0, upper: 1.0, mass: 0.5 }],
                None,
            )
            .expect("static measure"),
            SourceModel::CountableGeometric { .. } => ReferenceMeasure::harmonic(),
            _ => ReferenceMeasure::uniform(0.0, 1.0).expect("static measure"),
        }
    }

    /// A partition family that fits this source's support.
    pub fn default_family(&self, levels: usize) -> Result<PartitionFamily> {
        match self {
            SourceModel::MixedAtom { .. } => PartitionFamily::mixed(&[MIXED_ATOM], 0.0, 1.0, levels),
            SourceModel::CountableGeometric { .. } => PartitionFamily::countable_tail(levels),
            _ => PartitionFamily::dyadic(0.0, 1.0, levels),
        }
    }

    /// Transform applied to raw samples before they reach the estimator.
    pub fn transform(&self) -> Transform {
        match self {
            SourceModel::MixedAtom { continuous: ContinuousPart::Exponential { .. }, .. } => Transform::Logistic,
            _ => Transform::Identity,
        }
    }

    /// Atoms the ingestion transform leaves untouched.
    pub fn atoms(&self) -> Vec<f64> {
        match self {
            SourceModel::MixedAtom { .. } => vec![MIXED_ATOM],
            _ => Vec::new(),
        }
    }

    /// Endless stream of raw draws (before any ingestion transform),
    /// deterministic in `seed`.
    pub fn sampler(&self, seed: u64) -> Sampler<'_> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = match self {
            SourceModel::BinaryMarkov { stay } => usize::from(rng.random::<f64>() >= stationary_zero(stay)),
            _ => 0,
        };
        Sampler { source: self, rng, state, started: false }
    }

    /// `n` raw draws, deterministic in `seed`.
    pub fn sample(&self, seed: u64, n: usize) -> Vec<f64> {
        self.sampler(seed).take(n).collect()
    }

    /// Samples passed through the ingestion transform.
    pub fn sample_transformed(&self, seed: u64, n: usize) -> Vec<f64> {
        self.transformed_sampler(seed).take(n).collect()
    }

    pub fn transformed_sampler(&self, seed: u64) -> impl Iterator<Item = f64> + '_ {
        let t = self.transform();
        let atoms = self.atoms();
        self.sampler(seed).map(move |x| t.apply(x, &atoms))
    }

    /// Exact `ln d(mu_cond)/d(eta)` at `x`, conditional on the transformed past.
    pub fn true_log_density(&self, x: f64, history: &[f64]) -> Result<f64> {
        let out = || Err(Error::OutOfSupport(x));
        match self {
            SourceModel::UniformIid => {
                if (0.0..1.0).contains(&x) {
                    Ok(0.0)
                } else {
                    out()
                }
            }
            SourceModel::PiecewiseIid { pieces } => match pieces.iter().find(|p| p.lower <= x && x < p.upper) {
                Some(p) => Ok((p.mass / (p.upper - p.lower)).ln()),
                None => out(),
            },
            SourceModel::MixedAtom { atom_mass, continuous } => {
                if x == MIXED_ATOM {
                    return if *atom_mass > 0.0 { Ok((atom_mass / 0.5).ln()) } else { out() };
                }
                if !(0.0..1.0).contains(&x) || *atom_mass >= 1.0 {
                    return out();
                }
                let density = match continuous {
                    ContinuousPart::Uniform => 1.0,
                    ContinuousPart::Exponential { rate } => squashed_exponential_density(*rate, x),
                };
                if density > 0.0 {
                    Ok(((1.0 - atom_mass) * density / 0.5).ln())
                } else {
                    out()
                }
            }
            SourceModel::CountableGeometric { ratio } => {
                if !is_positive_integer(x) {
                    return out();
                }
                let k = x;
                let log_mu = (1.0 - ratio).ln() + (k - 1.0) * ratio.ln();
                let log_eta = -(k.ln() + (k + 1.0).ln());
                Ok(log_mu - log_eta)
            }
            SourceModel::BinaryMarkov { stay } => {
                if !(0.0..1.0).contains(&x) {
                    return out();
                }
                let probs = self.markov_next(stay, history)?;
                Ok((2.0 * probs[usize::from(x >= 0.5)]).ln())
            }
        }
    }

    fn markov_next(&self, stay: &[f64; 2], history: &[f64]) -> Result<[f64; 2]> {
        match history.last() {
            None => {
                let pi0 = stationary_zero(stay);
                Ok([pi0, 1.0 - pi0])
            }
            Some(&prev) => {
                if !(0.0..1.0).contains(&prev) {
                    return Err(Error::OutOfSupport(prev));
                }
                let s = usize::from(prev >= 0.5);
                let mut p = [0.0; 2];
                p[s] = stay[s];
                p[1 - s] = 1.0 - stay[s];
                Ok(p)
            }
        }
    }

    /// Exact `E[r(X_next) | past]` under the source.
    pub fn true_conditional_mean(&self, r: &dyn BoundedFunction, bound: f64, history: &[f64]) -> Result<f64> {
        let checked = |x: f64| -> Result<f64> {
            let v = r.eval(x);
            if v.abs() <= bound {
                Ok(v)
            } else {
                Err(Error::BoundViolation { x, value: v, bound })
            }
        };
        let mean_on = |lo: f64, hi: f64| -> Result<f64> { Ok(integrate(r, lo, hi, &checked)? / (hi - lo)) };
        match self {
            SourceModel::UniformIid => mean_on(0.0, 1.0),
            SourceModel::PiecewiseIid { pieces } => {
                pieces.iter().map(|p| Ok(p.mass * mean_on(p.lower, p.upper)?)).sum()
            }
            SourceModel::MixedAtom { atom_mass, continuous } => {
                let mut total = 0.0;
                if *atom_mass > 0.0 {
                    total += atom_mass * checked(MIXED_ATOM)?;
                }
                if *atom_mass < 1.0 {
                    let cont = match continuous {
                        ContinuousPart::Uniform => mean_on(0.0, 1.0)?,
                        ContinuousPart::Exponential { rate } => {
                            let f = |y: f64| Ok(checked(y)? * squashed_exponential_density(*rate, y));
                            adaptive_midpoint(f, 0.5, 1.0, ORACLE_REL_TOL, QUADRATURE_MAX_INTERVALS)?
                        }
                    };
                    total += (1.0 - atom_mass) * cont;
                }
                Ok(total)
            }
            SourceModel::CountableGeometric { ratio } => {
                let mut total = 0.0;
                let mut pmf = 1.0 - ratio;
                let mut k = 1u64;
                while pmf > 1e-18 {
                    total += pmf * checked(k as f64)?;
                    pmf *= ratio;
                    k += 1;
                }
                Ok(total)
            }
            SourceModel::BinaryMarkov { stay } => {
                let p = self.markov_next(stay, history)?;
                Ok(p[0] * mean_on(0.0, 0.5)? + p[1] * mean_on(0.5, 1.0)?)
            }
        }
    }

    /// Index of the part of `history` the conditional law depends on:
    /// always 0 for i.i.d. kinds; for the Markov chain 0 (no past) or
    /// 1 + the previous state.
    pub fn history_state(&self, history: &[f64]) -> usize {
        match (self, history.last()) {
            (SourceModel::BinaryMarkov { .. }, Some(&prev)) => 1 + usize::from(prev >= 0.5),
            _ => 0,
        }
    }

    /// `mu(cell)` under the (stationary) marginal law.
    pub fn cell_probability(&self, cell: &Cell) -> f64 {
        let uniform_overlap = |lo: f64, hi: f64, a: f64, b: f64| ((hi.min(b) - lo.max(a)).max(0.0)) / (b - a);
        match (self, *cell) {
            (SourceModel::UniformIid, Cell::Interval { lower, upper }) => uniform_overlap(lower, upper, 0.0, 1.0),
            (SourceModel::PiecewiseIid { pieces }, Cell::Interval { lower, upper }) => pieces
                .iter()
                .map(|p| p.mass * uniform_overlap(lower, upper, p.lower, p.upper))
                .sum(),
            (SourceModel::MixedAtom { atom_mass, .. }, Cell::Atom(p)) if p == MIXED_ATOM => *atom_mass,
            (SourceModel::MixedAtom { atom_mass, continuous }, Cell::Interval { lower, upper }) => {
                let part = match continuous {
                    ContinuousPart::Uniform => uniform_overlap(lower, upper, 0.0, 1.0),
                    ContinuousPart::Exponential { rate } => {
                        squashed_exponential_cdf(*rate, upper) - squashed_exponential_cdf(*rate, lower)
                    }
                };
                (1.0 - atom_mass) * part
            }
            (SourceModel::CountableGeometric { ratio }, Cell::Atom(k)) if is_positive_integer(k) => {
                (1.0 - ratio) * ratio.powf(k - 1.0)
            }
            (SourceModel::CountableGeometric { ratio }, Cell::Tail { start }) => ratio.powf(start as f64 - 1.0),
            (SourceModel::BinaryMarkov { stay }, Cell::Interval { lower, upper }) => {
                let pi0 = stationary_zero(stay);
                pi0 * uniform_overlap(lower, upper, 0.0, 0.5) + (1.0 - pi0) * uniform_overlap(lower, upper, 0.5, 1.0)
            }
            _ => 0.0,
        }
    }

    /// Entropy (i.i.d.) or entropy rate (Markov) of the level-`level` cell
    /// process, in bits per symbol.
    pub fn quantized_entropy_rate(&self, family: &PartitionFamily, level: usize) -> Result<f64> {
        let cells = family.cells(level)?;
        match self {
            SourceModel::BinaryMarkov { stay } => {
                // Cells must not straddle the state boundary, else the cell
                // process is hidden Markov.
                let mut within = [Vec::new(), Vec::new()];
                for cell in cells {
                    let Cell::Interval { lower, upper } = *cell else {
                        return Err(Error::Unsupported("markov source needs interval cells".into()));
                    };
                    if lower < 0.5 && upper > 0.5 {
                        return Err(Error::Unsupported(format!("cell {cell} straddles the state boundary")));
                    }
                    let half = usize::from(lower >= 0.5);
                    let (a, b) = if half == 0 { (0.0, 0.5) } else { (0.5, 1.0) };
                    within[half].push(((upper.min(b) - lower.max(a)).max(0.0)) / 0.5);
                }
                let pi0 = stationary_zero(stay);
                let pi = [pi0, 1.0 - pi0];
                let transition: f64 = (0..2).map(|s| pi[s] * binary_entropy(stay[s])).sum();
                let emission: f64 = (0..2).map(|s| pi[s] * entropy_bits(&within[s])).sum();
                Ok(transition + emission)
            }
            _ => {
                let probs: Vec<f64> = cells.iter().map(|c| self.cell_probability(c)).collect();
                Ok(entropy_bits(&probs))
            }
        }
    }
}

/// Draw stream of a [`SourceModel`].
pub struct Sampler<'a> {
    source: &'a SourceModel,
    rng: ChaCha8Rng,
    state: usize,
    started: bool,
}

impl Iterator for Sampler<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let rng = &mut self.rng;
        let x = match self.source {
            SourceModel::UniformIid => rng.random::<f64>(),
            SourceModel::PiecewiseIid { pieces } => {
                let u: f64 = rng.random();
                let v: f64 = rng.random();
                let mut acc = 0.0;
                let last = pieces.len() - 1;
                let chosen = pieces
                    .iter()
                    .position(|p| {
                        acc += p.mass;
                        u < acc
                    })
                    .unwrap_or(last);
                let p = pieces[chosen];
                p.lower + v * (p.upper - p.lower)
            }
            SourceModel::MixedAtom { atom_mass, continuous } => {
                let u: f64 = rng.random();
                let v: f64 = rng.random();
                if u < *atom_mass {
                    MIXED_ATOM
                } else {
                    match continuous {
                        ContinuousPart::Uniform => v,
                        // Inverse CDF; 1 - v lies in (0, 1].
                        ContinuousPart::Exponential { rate } => -(1.0 - v).ln() / rate,
                    }
                }
            }
            SourceModel::CountableGeometric { ratio } => {
                let u: f64 = rng.random();
                // P(K > k) = ratio^k.
                (((1.0 - u).ln() / ratio.ln()).floor() + 1.0).max(1.0)
            }
            SourceModel::BinaryMarkov { stay } => {
                if self.started && rng.random::<f64>() >= stay[self.state] {
                    self.state = 1 - self.state;
                }
                0.5 * self.state as f64 + 0.5 * rng.random::<f64>()
            }
        };
        self.started = true;
        Some(x)
    }
}

fn stationary_zero(stay: &[f64; 2]) -> f64 {
    let leave0 = 1.0 - stay[0];
    let leave1 = 1.0 - stay[1];
    leave1 / (leave0 + leave1)
}

fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// Lebesgue density on `[1/2, 1)` of `1 / (1 + exp(-X))` for `X ~ Exp(rate)`.
fn squashed_exponential_density(rate: f64, y: f64) -> f64 {
    if !(0.5..1.0).contains(&y) {
        return 0.0;
    }
    rate * ((1.0 - y) / y).powf(rate) / (y * (1.0 - y))
}

fn squashed_exponential_cdf(rate: f64, y: f64) -> f64 {
    if y <= 0.5 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        1.0 - ((1.0 - y) / y).powf(rate)
    }
}

fn integrate(r: &dyn BoundedFunction, lo: f64, hi: f64, checked: &dyn Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut edges: Vec<f64> = r.breakpoints().into_iter().filter(|&p| lo < p && p < hi).collect();
    edges.push(lo);
    edges.push(hi);
    edges.sort_by(|a, b| a.total_cmp(b));
    edges
        .windows(2)
        .map(|w| adaptive_midpoint(checked, w[0], w[1], ORACLE_REL_TOL, QUADRATURE_MAX_INTERVALS))
        .sum()
}
