//! Observation files and run configurations.
//!
//! Observation files are UTF-8 text with one numeral per line; blank lines
//! and lines starting with `#` are skipped.
//!
//! Config files are `key = value` lines (`#` comments allowed), with list
//! values separated by commas and compound items by colons:
//!
//! ```text
//! family = mixed            # dyadic | countable | mixed
//! interval = 0, 1
//! atoms = -1
//! levels = 6
//! max_order = 2
//! weights = 0.5, 0.25, ...   # default: geometric
//! eta.atoms = -1:0.5         # point:mass
//! eta.pieces = 0:1:0.5       # lower:upper:mass
//! eta.countable = example3
//! transform = identity       # identity | logistic
//! source = mixed-atom
//! source.atom_mass = 0.5
//! source.continuous = uniform  # uniform | exponential
//! source.rate = 1
//! source.ratio = 0.5
//! source.stay = 0.9, 0.9
//! source.pieces = 0:0.3:0.15, 0.3:0.55:0.5, 0.55:1:0.35
//! n = 16384
//! seed = 0
//! seeds = 20
//! checkpoints = 256, 512, 1024
//! r = identity               # one | identity | cell:IDX | const:C
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mixture::{MixtureEstimator, WeightVector};
use crate::partition::PartitionFamily;
use crate::reference::{BoundedFunction, Constant, CountableRule, Identity, Indicator, Piece, ReferenceMeasure};
use crate::sources::{ContinuousPart, SourceModel};

pub const DEFAULT_LEVELS: usize = 6;
pub const DEFAULT_MAX_ORDER: usize = 2;
pub const DEFAULT_SEEDS: usize = 20;
pub const DEFAULT_N: usize = 1 << 14;

/// Default checkpoints: powers of two from 2^8 to 2^14.
pub fn default_checkpoints() -> Vec<u64> {
    (8..=14).map(|e| 1u64 << e).collect()
}

/// Monotone map applied to raw observations before estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    /// `1 / (1 + exp(-x))`, squashing the real line onto `(0, 1)`.
    Logistic,
}

impl Transform {
    pub fn name(&self) -> &'static str {
        match self {
            Transform::Identity => "identity",
            Transform::Logistic => "logistic",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(Transform::Identity),
            "logistic" => Some(Transform::Logistic),
            _ => None,
        }
    }

    /// Transform `x`; configured atoms pass through unchanged.
    pub fn apply(&self, x: f64, atoms: &[f64]) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Logistic if atoms.contains(&x) => x,
            Transform::Logistic => {
                let y = 1.0 / (1.0 + (-x).exp());
                // Keep the image inside the open unit interval.
                y.clamp(f64::MIN_POSITIVE, 1.0f64.next_down())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationRecord {
    pub value: f64,
    pub line: usize,
}

/// Streaming parser over an observation file.
pub fn parse_observations<R: BufRead>(reader: R) -> impl Iterator<Item = Result<ObservationRecord>> {
    reader.lines().enumerate().filter_map(|(idx, line)| {
        let line_no = idx + 1;
        let text = match line {
            Ok(t) => t,
            Err(e) => return Some(Err(Error::Io(e))),
        };
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return None;
        }
        Some(parse_numeral(trimmed).map(|value| ObservationRecord { value, line: line_no }).ok_or_else(|| {
            Error::Parse { line: line_no, message: format!("malformed numeral {trimmed:?}") }
        }))
    })
}

fn parse_numeral(s: &str) -> Option<f64> {
    // Reject the non-numeric spellings f64::from_str accepts.
    if !s.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E')) {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Dyadic { lower: f64, upper: f64 },
    Countable,
    Mixed { atoms: Vec<f64>, lower: f64, upper: f64 },
}

impl FamilySpec {
    pub fn build(&self, levels: usize) -> Result<PartitionFamily> {
        match self {
            FamilySpec::Dyadic { lower, upper } => PartitionFamily::dyadic(*lower, *upper, levels),
            FamilySpec::Countable => PartitionFamily::countable_tail(levels),
            FamilySpec::Mixed { atoms, lower, upper } => PartitionFamily::mixed(atoms, *lower, *upper, levels),
        }
    }

    fn atoms(&self) -> &[f64] {
        match self {
            FamilySpec::Mixed { atoms, .. } => atoms,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaSpec {
    pub atoms: Vec<(f64, f64)>,
    pub pieces: Vec<Piece>,
    pub countable: Option<CountableRule>,
}

impl EtaSpec {
    pub fn build(&self) -> Result<ReferenceMeasure> {
        ReferenceMeasure::new(self.atoms.clone(), self.pieces.clone(), self.countable)
    }

    fn from_measure(eta: &ReferenceMeasure) -> Self {
        Self { atoms: eta.atoms().to_vec(), pieces: eta.pieces().to_vec(), countable: eta.countable() }
    }
}

/// Function whose conditional mean is predicted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RSpec {
    One,
    Identity,
    /// Indicator of a level-0 cell.
    Cell(usize),
    Constant(f64),
}

impl RSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "one" => return Ok(RSpec::One),
            "identity" => return Ok(RSpec::Identity),
            _ => {}
        }
        if let Some(idx) = s.strip_prefix("cell:") {
            return idx.trim().parse().map(RSpec::Cell).map_err(|_| Error::config(format!("bad cell index in r = {s}")));
        }
        if let Some(c) = s.strip_prefix("const:") {
            return parse_numeral(c.trim()).map(RSpec::Constant).ok_or_else(|| Error::config(format!("bad constant in r = {s}")));
        }
        Err(Error::config(format!("unknown function {s:?} (one | identity | cell:IDX | const:C)")))
    }

    pub fn to_text(&self) -> String {
        match self {
            RSpec::One => "one".into(),
            RSpec::Identity => "identity".into(),
            RSpec::Cell(i) => format!("cell:{i}"),
            RSpec::Constant(c) => format!("const:{c}"),
        }
    }

    /// The function and its bound over the family's support.
    pub fn build(&self, family: &PartitionFamily) -> Result<(Box<dyn BoundedFunction>, f64)> {
        Ok(match *self {
            RSpec::One => (Box::new(Constant(1.0)), 1.0),
            RSpec::Constant(c) => (Box::new(Constant(c)), c.abs()),
            RSpec::Identity => {
                let b = family
                    .support()
                    .abs_bound()
                    .ok_or_else(|| Error::config("identity is unbounded on a countable support"))?;
                (Box::new(Identity), b)
            }
            RSpec::Cell(idx) => {
                let cell = family.cell(0, idx).map_err(|_| Error::config(format!("no level-0 cell {idx}")))?;
                (Box::new(Indicator(cell)), 1.0)
            }
        })
    }
}

/// A run configuration. After [`RunConfig::normalize`] every field except
/// `source` is populated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub family: Option<FamilySpec>,
    pub levels: Option<usize>,
    pub max_order: Option<usize>,
    pub weights: Option<Vec<f64>>,
    pub eta: Option<EtaSpec>,
    pub transform: Option<Transform>,
    pub source: Option<SourceModel>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub seeds: Option<usize>,
    pub checkpoints: Option<Vec<u64>>,
    pub r: Option<RSpec>,
}

fn list(value: &str) -> Vec<&str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn num(key: &str, s: &str) -> std::result::Result<f64, String> {
    parse_numeral(s.trim()).ok_or_else(|| format!("{key}: malformed number {s:?}"))
}

fn nums(key: &str, value: &str) -> std::result::Result<Vec<f64>, String> {
    list(value).into_iter().map(|s| num(key, s)).collect()
}

fn tuples(key: &str, value: &str, arity: usize) -> std::result::Result<Vec<Vec<f64>>, String> {
    list(value)
        .into_iter()
        .map(|item| {
            let parts: Vec<f64> = item.split(':').map(|p| num(key, p)).collect::<std::result::Result<_, _>>()?;
            if parts.len() == arity {
                Ok(parts)
            } else {
                Err(format!("{key}: expected {arity} colon-separated fields in {item:?}"))
            }
        })
        .collect()
}

fn pieces(key: &str, value: &str) -> std::result::Result<Vec<Piece>, String> {
    Ok(tuples(key, value, 3)?
        .into_iter()
        .map(|t| Piece { lower: t[0], upper: t[1], mass: t[2] })
        .collect())
}

fn int<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value.trim().parse().map_err(|_| format!("{key}: expected a non-negative integer, got {value:?}"))
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Parse `key = value` text. Unknown keys and malformed values are all
    /// reported together.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut errors = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    let key = k.trim().to_string();
                    if entries.insert(key.clone(), (idx + 1, v.trim().to_string())).is_some() {
                        errors.push(format!("line {}: duplicate key {key}", idx + 1));
                    }
                }
                None => errors.push(format!("line {}: expected key = value", idx + 1)),
            }
        }
        let get = |k: &str| entries.get(k).map(|(_, v)| v.as_str());
        let mut cfg = RunConfig::default();
        let mut take = |res: std::result::Result<(), String>| {
            if let Err(e) = res {
                errors.push(e);
            }
        };

        let interval = get("interval").map(|v| nums("interval", v));
        let atoms = get("atoms").map(|v| nums("atoms", v));
        take((|| {
            let Some(kind) = get("family") else { return Ok(()) };
            let bounds = |iv: &Option<std::result::Result<Vec<f64>, String>>| -> std::result::Result<(f64, f64), String> {
                match iv {
                    Some(Ok(v)) if v.len() == 2 => Ok((v[0], v[1])),
                    Some(Ok(_)) => Err("interval: expected two numbers".into()),
                    Some(Err(e)) => Err(e.clone()),
                    None => Ok((0.0, 1.0)),
                }
            };
            cfg.family = Some(match kind {
                "dyadic" => {
                    let (lower, upper) = bounds(&interval)?;
                    FamilySpec::Dyadic { lower, upper }
                }
                "countable" => FamilySpec::Countable,
                "mixed" => {
                    let (lower, upper) = bounds(&interval)?;
                    let atoms = atoms.clone().unwrap_or(Ok(Vec::new()))?;
                    FamilySpec::Mixed { atoms, lower, upper }
                }
                other => return Err(format!("family: unknown kind {other:?}")),
            });
            Ok(())
        })());
        take((|| {
            if let Some(v) = get("levels") {
                cfg.levels = Some(int("levels", v)?);
            }
            if let Some(v) = get("max_order") {
                cfg.max_order = Some(int("max_order", v)?);
            }
            if let Some(v) = get("weights") {
                cfg.weights = Some(nums("weights", v)?);
            }
            if let Some(v) = get("n") {
                cfg.n = Some(int("n", v)?);
            }
            if let Some(v) = get("seed") {
                cfg.seed = Some(int("seed", v)?);
            }
            if let Some(v) = get("seeds") {
                cfg.seeds = Some(int("seeds", v)?);
            }
            if let Some(v) = get("checkpoints") {
                cfg.checkpoints = Some(list(v).into_iter().map(|s| int("checkpoints", s)).collect::<std::result::Result<_, _>>()?);
            }
            if let Some(v) = get("transform") {
                cfg.transform = Some(Transform::from_name(v).ok_or_else(|| format!("transform: unknown {v:?}"))?);
            }
            if let Some(v) = get("r") {
                cfg.r = Some(RSpec::parse(v).map_err(|e| e.to_string())?);
            }
            Ok(())
        })());
        take((|| {
            let keys = ["eta.atoms", "eta.pieces", "eta.countable"];
            if keys.iter().all(|k| get(k).is_none()) {
                return Ok(());
            }
            let atoms = match get("eta.atoms") {
                Some(v) => tuples("eta.atoms", v, 2)?.into_iter().map(|t| (t[0], t[1])).collect(),
                None => Vec::new(),
            };
            let pieces = match get("eta.pieces") {
                Some(v) => pieces("eta.pieces", v)?,
                None => Vec::new(),
            };
            let countable = match get("eta.countable") {
                Some("none") | None => None,
                Some(v) => Some(CountableRule::from_name(v).ok_or_else(|| format!("eta.countable: unknown rule {v:?}"))?),
            };
            cfg.eta = Some(EtaSpec { atoms, pieces, countable });
            Ok(())
        })());
        take((|| {
            let Some(kind) = get("source") else { return Ok(()) };
            let f = |k: &str, default: f64| -> std::result::Result<f64, String> {
                get(k).map_or(Ok(default), |v| num(k, v))
            };
            cfg.source = Some(match kind {
                "uniform-iid" => SourceModel::UniformIid,
                "piecewise-density-iid" => SourceModel::PiecewiseIid {
                    pieces: match get("source.pieces") {
                        Some(v) => pieces("source.pieces", v)?,
                        None => SourceModel::default_pieces(),
                    },
                },
                "mixed-atom" => SourceModel::MixedAtom {
                    atom_mass: f("source.atom_mass", 0.5)?,
                    continuous: match get("source.continuous").unwrap_or("uniform") {
                        "uniform" => ContinuousPart::Uniform,
                        "exponential" => ContinuousPart::Exponential { rate: f("source.rate", 1.0)? },
                        other => return Err(format!("source.continuous: unknown {other:?}")),
                    },
                },
                "countable-geometric" => SourceModel::CountableGeometric { ratio: f("source.ratio", 0.5)? },
                "binary-markov" | "binary-markov-embedded" => {
                    let stay = match get("source.stay") {
                        Some(v) => nums("source.stay", v)?,
                        None => vec![0.9],
                    };
                    match stay.as_slice() {
                        [s] => SourceModel::BinaryMarkov { stay: [*s, *s] },
                        [a, b] => SourceModel::BinaryMarkov { stay: [*a, *b] },
                        _ => return Err("source.stay: expected one or two probabilities".into()),
                    }
                }
                other => return Err(format!("source: unknown kind {other:?}")),
            });
            Ok(())
        })());

        const KNOWN: &[&str] = &[
            "family", "interval", "atoms", "levels", "max_order", "weights", "eta.atoms", "eta.pieces",
            "eta.countable", "transform", "source", "source.atom_mass", "source.continuous", "source.rate",
            "source.ratio", "source.stay", "source.pieces", "n", "seed", "seeds", "checkpoints", "r",
        ];
        for (k, (line, _)) in &entries {
            if !KNOWN.contains(&k.as_str()) {
                errors.push(format!("line {line}: unknown key {k}"));
            }
        }
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(errors))
        }
    }

    /// Fill defaults and check every invariant. Each violation is reported.
    pub fn normalize(&self) -> Result<RunConfig> {
        let mut errors: Vec<String> = Vec::new();
        let mut cfg = self.clone();

        if let Some(source) = &cfg.source {
            if let Err(e) = source.validate() {
                errors.push(e.to_string());
            }
        }
        let levels = *cfg.levels.get_or_insert(DEFAULT_LEVELS);
        if levels == 0 {
            errors.push("levels must be at least 1".into());
        }
        cfg.max_order.get_or_insert(DEFAULT_MAX_ORDER);

        if cfg.family.is_none() {
            cfg.family = Some(match &cfg.source {
                Some(SourceModel::MixedAtom { .. }) => {
                    FamilySpec::Mixed { atoms: vec![crate::sources::MIXED_ATOM], lower: 0.0, upper: 1.0 }
                }
                Some(SourceModel::CountableGeometric { .. }) => FamilySpec::Countable,
                _ => FamilySpec::Dyadic { lower: 0.0, upper: 1.0 },
            });
        }
        let family_spec = cfg.family.clone().expect("filled above");
        let family = match family_spec.build(levels.max(1)) {
            Ok(f) => Some(f),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        };

        if cfg.eta.is_none() {
            let default = match (&cfg.source, &family_spec) {
                (Some(source), _) => Some(source.matched_reference()),
                (None, FamilySpec::Dyadic { lower, upper }) => ReferenceMeasure::uniform(*lower, *upper).ok(),
                (None, FamilySpec::Countable) => Some(ReferenceMeasure::harmonic()),
                (None, FamilySpec::Mixed { .. }) => None,
            };
            match default {
                Some(eta) => cfg.eta = Some(EtaSpec::from_measure(&eta)),
                None => errors.push("a mixed family needs an explicit reference measure (eta.*)".into()),
            }
        }
        let eta = match cfg.eta.as_ref().map(EtaSpec::build) {
            Some(Ok(eta)) => Some(eta),
            Some(Err(e)) => {
                errors.push(e.to_string());
                None
            }
            None => None,
        };
        if let (Some(eta), Some(family)) = (&eta, &family) {
            if let Err(e) = eta.level_masses(family) {
                errors.push(e.to_string());
            }
        }
        if let (Some(eta), Some(source)) = (&eta, &cfg.source) {
            if *eta != source.matched_reference() {
                errors.push(format!("reference measure does not match the {} source's", source.kind()));
            }
        }

        match cfg.weights.as_mut() {
            None => {
                if let Ok(w) = WeightVector::geometric(levels.max(1)) {
                    cfg.weights = Some(w.as_slice().to_vec());
                }
            }
            Some(w) => {
                let total: f64 = w.iter().sum();
                if w.len() != levels {
                    errors.push(format!("{} weights given for {levels} levels", w.len()));
                } else if w.iter().any(|x| !(*x > 0.0)) {
                    errors.push("weights must all be positive".into());
                } else if (total - 1.0).abs() > 1e-9 {
                    errors.push(format!("weights sum to {total}, not 1"));
                } else if (total - 1.0).abs() > 1e-12 {
                    w.iter_mut().for_each(|x| *x /= total);
                }
            }
        }

        if let Some(family) = &family {
            let d = cfg.max_order.expect("filled above");
            for k in family.level_sizes() {
                if let Err(e) = crate::coder::LevelCoder::new(k, d) {
                    errors.push(e.to_string());
                    break;
                }
            }
        }

        let required = cfg.source.as_ref().map_or(Transform::Identity, SourceModel::transform);
        let transform = *cfg.transform.get_or_insert(required);
        if transform != required {
            errors.push(format!(
                "the {} source needs transform = {}",
                cfg.source.as_ref().map_or("", |s| s.kind()),
                required.name()
            ));
        }

        cfg.n.get_or_insert(DEFAULT_N);
        cfg.seed.get_or_insert(0);
        if *cfg.seeds.get_or_insert(DEFAULT_SEEDS) == 0 {
            errors.push("seeds must be at least 1".into());
        }
        let checkpoints = cfg.checkpoints.get_or_insert_with(default_checkpoints);
        if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            errors.push("checkpoints must be positive and strictly increasing".into());
        }
        if cfg.r.is_none() {
            let bounded = family.as_ref().is_some_and(|f| f.support().abs_bound().is_some());
            cfg.r = Some(if bounded { RSpec::Identity } else { RSpec::Cell(0) });
        }
        if let (Some(r), Some(family)) = (&cfg.r, &family) {
            if let Err(e) = r.build(family) {
                errors.push(e.to_string());
            }
        }

        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(errors))
        }
    }

    /// Canonical text form; parsing it back yields the same config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match &self.family {
            Some(FamilySpec::Dyadic { lower, upper }) => {
                line("family", "dyadic".into());
                line("interval", join([lower, upper]));
            }
            Some(FamilySpec::Countable) => line("family", "countable".into()),
            Some(FamilySpec::Mixed { atoms, lower, upper }) => {
                line("family", "mixed".into());
                line("interval", join([lower, upper]));
                line("atoms", join(atoms));
            }
            None => {}
        }
        if let Some(v) = self.levels {
            line("levels", v.to_string());
        }
        if let Some(v) = self.max_order {
            line("max_order", v.to_string());
        }
        if let Some(w) = &self.weights {
            line("weights", join(w));
        }
        if let Some(eta) = &self.eta {
            line("eta.atoms", join(eta.atoms.iter().map(|(p, m)| format!("{p}:{m}"))));
            line("eta.pieces", join(eta.pieces.iter().map(|p| format!("{}:{}:{}", p.lower, p.upper, p.mass))));
            line("eta.countable", eta.countable.map_or("none", |r| r.name()).into());
        }
        if let Some(t) = self.transform {
            line("transform", t.name().into());
        }
        if let Some(source) = &self.source {
            line("source", source.kind().into());
            match source {
                SourceModel::UniformIid => {}
                SourceModel::PiecewiseIid { pieces } => {
                    line("source.pieces", join(pieces.iter().map(|p| format!("{}:{}:{}", p.lower, p.upper, p.mass))))
                }
                SourceModel::MixedAtom { atom_mass, continuous } => {
                    line("source.atom_mass", atom_mass.to_string());
                    match continuous {
                        ContinuousPart::Uniform => line("source.continuous", "uniform".into()),
                        ContinuousPart::Exponential { rate } => {
                            line("source.continuous", "exponential".into());
                            line("source.rate", rate.to_string());
                        }
                    }
                }
                SourceModel::CountableGeometric { ratio } => line("source.ratio", ratio.to_string()),
                SourceModel::BinaryMarkov { stay } => line("source.stay", join(stay)),
            }
        }
        if let Some(v) = self.n {
            line("n", v.to_string());
        }
        if let Some(v) = self.seed {
            line("seed", v.to_string());
        }
        if let Some(v) = self.seeds {
            line("seeds", v.to_string());
        }
        if let Some(c) = &self.checkpoints {
            line("checkpoints", join(c));
        }
        if let Some(r) = &self.r {
            line("r", r.to_text());
        }
        out
    }

    /// Short hex digest of the canonical text.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_text().as_bytes());
        hex::encode(&hash[..8])
    }

    fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T> {
        field.as_ref().ok_or_else(|| Error::config(format!("{name} missing; normalize the config first")))
    }

    pub fn levels(&self) -> Result<usize> {
        Self::require(&self.levels, "levels").copied()
    }

    pub fn build_family(&self) -> Result<PartitionFamily> {
        Self::require(&self.family, "family")?.build(self.levels()?)
    }

    pub fn build_eta(&self) -> Result<ReferenceMeasure> {
        Self::require(&self.eta, "eta")?.build()
    }

    pub fn transform(&self) -> Transform {
        self.transform.unwrap_or(Transform::Identity)
    }

    /// Atoms the ingestion transform must leave alone.
    pub fn transform_atoms(&self) -> Vec<f64> {
        self.family.as_ref().map(|f| f.atoms().to_vec()).unwrap_or_default()
    }

    pub fn build_estimator(&self) -> Result<MixtureEstimator> {
        let weights = WeightVector::new(Self::require(&self.weights, "weights")?.clone())?;
        MixtureEstimator::new(
            self.build_family()?,
            self.build_eta()?,
            weights,
            *Self::require(&self.max_order, "max_order")?,
        )
    }

    pub fn seed_list(&self) -> Vec<u64> {
        let base = self.seed.unwrap_or(0);
        (0..self.seeds.unwrap_or(DEFAULT_SEEDS) as u64).map(|s| base + s).collect()
    }
}
