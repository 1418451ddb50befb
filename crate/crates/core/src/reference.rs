//! The dominating per-coordinate measure: atoms, uniformly spread
//! continuous pieces and an optional countable mass rule.

use crate::error::{Error, Result};
use crate::partition::{is_positive_integer, Cell, PartitionFamily};

const MASS_TOL: f64 = 1e-12;
pub const QUADRATURE_REL_TOL: f64 = 1e-9;
pub const QUADRATURE_MAX_INTERVALS: usize = 1 << 20;
/// Terms summed explicitly when averaging over a countable tail.
const TAIL_TERMS: u64 = 1 << 20;

/// Mass rule on the positive integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountableRule {
    /// `eta(k) = 1/k - 1/(k+1)`, so `eta(k >= m) = 1/m`.
    Harmonic,
}

impl CountableRule {
    pub fn name(&self) -> &'static str {
        match self {
            CountableRule::Harmonic => "example3",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "example3" | "harmonic" => Some(CountableRule::Harmonic),
            _ => None,
        }
    }

    pub fn mass(&self, k: u64) -> f64 {
        match self {
            CountableRule::Harmonic => 1.0 / (k as f64 * (k as f64 + 1.0)),
        }
    }

    /// Mass of `{k >= start}`.
    pub fn tail_mass(&self, start: u64) -> f64 {
        match self {
            CountableRule::Harmonic => 1.0 / start as f64,
        }
    }

    /// Mass of the integers in `[lo, hi)`.
    fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        let first = lo.ceil().max(1.0);
        let end = hi.ceil().max(1.0);
        if end <= first {
            return 0.0;
        }
        self.tail_mass(first as u64) - if end.is_finite() { self.tail_mass(end as u64) } else { 0.0 }
    }
}

/// Uniform spread of `mass` over `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lower: f64,
    pub upper: f64,
    pub mass: f64,
}

impl Piece {
    fn density(&self) -> f64 {
        self.mass / (self.upper - self.lower)
    }

    fn overlap(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let u = self.lower.max(lo);
        let v = self.upper.min(hi);
        (u < v).then_some((u, v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMeasure {
    atoms: Vec<(f64, f64)>,
    pieces: Vec<Piece>,
    countable: Option<CountableRule>,
}

/// A bounded real function that knows where it is piecewise affine.
pub trait BoundedFunction: Sync {
    fn eval(&self, x: f64) -> f64;

    /// Points at which the function may change form.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `(slope, intercept)` if the function is affine on `[lo, hi)`.
    fn affine_on(&self, _lo: f64, _hi: f64) -> Option<(f64, f64)> {
        None
    }
}

impl<F: Fn(f64) -> f64 + Sync> BoundedFunction for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// `r(x) = c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl BoundedFunction for Constant {
    fn eval(&self, _x: f64) -> f64 {
        self.0
    }
    fn affine_on(&self, _lo: f64, _hi: f64) -> Option<(f64, f64)> {
        Some((0.0, self.0))
    }
}

/// `r(x) = x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Identity;

impl BoundedFunction for Identity {
    fn eval(&self, x: f64) -> f64 {
        x
    }
    fn affine_on(&self, _lo: f64, _hi: f64) -> Option<(f64, f64)> {
        Some((1.0, 0.0))
    }
}

/// Indicator of a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indicator(pub Cell);

impl BoundedFunction for Indicator {
    fn eval(&self, x: f64) -> f64 {
        if self.0.contains(x) {
            1.0
        } else {
            0.0
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self.0 {
            Cell::Interval { lower, upper } => vec![lower, upper],
            Cell::Atom(p) => vec![p],
            Cell::Tail { start } => vec![start as f64],
        }
    }

    fn affine_on(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        match self.0 {
            Cell::Interval { lower, upper } => {
                if lower <= lo && hi <= upper {
                    Some((0.0, 1.0))
                } else if hi <= lower || upper <= lo {
                    Some((0.0, 0.0))
                } else {
                    None
                }
            }
            // Atoms and integer sets are null for the continuous pieces.
            Cell::Atom(_) | Cell::Tail { .. } => Some((0.0, 0.0)),
        }
    }
}

impl ReferenceMeasure {
    pub fn new(atoms: Vec<(f64, f64)>, pieces: Vec<Piece>, countable: Option<CountableRule>) -> Result<Self> {
        for &(p, m) in &atoms {
            if !p.is_finite() || !(m > 0.0) || !m.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom ({p}, {m}) needs a finite point and positive mass")));
            }
        }
        let mut sorted: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        sorted.sort_by(|a, b| a.total_cmp(b));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMeasure("duplicate atom".into()));
        }
        for p in &pieces {
            if !(p.lower.is_finite() && p.upper.is_finite() && p.lower < p.upper) {
                return Err(Error::InvalidMeasure(format!("piece [{}, {}) is empty", p.lower, p.upper)));
            }
            if !(p.mass > 0.0) || !p.mass.is_finite() {
                return Err(Error::InvalidMeasure(format!("piece [{}, {}) needs positive mass", p.lower, p.upper)));
            }
        }
        let mut by_lower = pieces.clone();
        by_lower.sort_by(|a, b| a.lower.total_cmp(&b.lower));
        if by_lower.windows(2).any(|w| w[1].lower < w[0].upper) {
            return Err(Error::InvalidMeasure("continuous pieces overlap".into()));
        }
        if countable.is_some() && atoms.iter().any(|a| is_positive_integer(a.0)) {
            return Err(Error::InvalidMeasure("atoms on positive integers clash with the countable rule".into()));
        }
        let eta = Self { atoms, pieces: by_lower, countable };
        let total = eta.total_mass();
        if total > 1.0 + MASS_TOL {
            return Err(Error::InvalidMeasure(format!("total mass {total} exceeds 1")));
        }
        Ok(eta)
    }

    /// Uniform probability on `[a, b)`.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![Piece { lower: a, upper: b, mass: 1.0 }], None)
    }

    /// `eta(k) = 1/k - 1/(k+1)` on the positive integers.
    pub fn harmonic() -> Self {
        Self { atoms: Vec::new(), pieces: Vec::new(), countable: Some(CountableRule::Harmonic) }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn countable(&self) -> Option<CountableRule> {
        self.countable
    }

    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.1).sum();
        let pieces: f64 = self.pieces.iter().map(|p| p.mass).sum();
        atoms + pieces + self.countable.map_or(0.0, |r| r.tail_mass(1))
    }

    fn point_mass(&self, x: f64) -> f64 {
        let atom = self.atoms.iter().find(|a| a.0 == x).map_or(0.0, |a| a.1);
        let countable = match self.countable {
            Some(rule) if is_positive_integer(x) => rule.mass(x as u64),
            _ => 0.0,
        };
        atom + countable
    }

    /// Exact `eta(cell)`.
    pub fn cell_mass(&self, cell: &Cell) -> f64 {
        match *cell {
            Cell::Atom(p) => self.point_mass(p),
            Cell::Interval { lower, upper } => {
                let atoms: f64 = self.atoms.iter().filter(|a| cell.contains(a.0)).map(|a| a.1).sum();
                let pieces: f64 = self
                    .pieces
                    .iter()
                    .filter_map(|p| p.overlap(lower, upper).map(|(u, v)| p.density() * (v - u)))
                    .sum();
                let countable = self.countable.map_or(0.0, |r| r.interval_mass(lower, upper));
                atoms + pieces + countable
            }
            Cell::Tail { start } => {
                let atoms: f64 = self.atoms.iter().filter(|a| cell.contains(a.0)).map(|a| a.1).sum();
                atoms + self.countable.map_or(0.0, |r| r.tail_mass(start))
            }
        }
    }

    /// Per-level cell masses; errors on any zero-mass cell.
    pub fn level_masses(&self, family: &PartitionFamily) -> Result<Vec<Vec<f64>>> {
        (0..family.num_levels())
            .map(|level| {
                family
                    .cells(level)?
                    .iter()
                    .map(|cell| {
                        let m = self.cell_mass(cell);
                        if m > 0.0 {
                            Ok(m)
                        } else {
                            Err(Error::ZeroMassCell { level, cell: cell.to_string() })
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Log-density at `x` of `eta` restricted to `cell` and renormalized,
    /// taken with respect to `eta` itself: `-ln eta(cell)` for every `x` in
    /// the cell. Level densities then read `Q_i(a) / eta(a)` exactly.
    pub fn log_density_at(&self, cell: &Cell, x: f64) -> Result<f64> {
        if !cell.contains(x) {
            return Err(Error::NotInCell { x, cell: cell.to_string() });
        }
        let m = self.cell_mass(cell);
        if m > 0.0 {
            Ok(-m.ln())
        } else {
            Err(Error::ZeroMassCell { level: 0, cell: cell.to_string() })
        }
    }

    /// `(1 / eta(cell)) * integral over the cell of r d(eta)`.
    ///
    /// Exact on atoms and wherever `r` reports itself affine; elsewhere
    /// falls back to adaptive midpoint quadrature.
    pub fn average_over_cell(&self, cell: &Cell, r: &dyn BoundedFunction, bound: f64) -> Result<f64> {
        let mass = self.cell_mass(cell);
        if !(mass > 0.0) {
            return Err(Error::ZeroMassCell { level: 0, cell: cell.to_string() });
        }
        let checked = |x: f64| -> Result<f64> {
            let v = r.eval(x);
            if v.abs() <= bound {
                Ok(v)
            } else {
                Err(Error::BoundViolation { x, value: v, bound })
            }
        };
        let mut total = 0.0;
        for &(p, m) in &self.atoms {
            if cell.contains(p) {
                total += m * checked(p)?;
            }
        }
        match *cell {
            Cell::Atom(p) => {
                if let (Some(rule), true) = (self.countable, is_positive_integer(p)) {
                    total += rule.mass(p as u64) * checked(p)?;
                }
            }
            Cell::Interval { lower, upper } => {
                for piece in &self.pieces {
                    if let Some((u, v)) = piece.overlap(lower, upper) {
                        total += piece.density() * integrate_split(r, u, v, &checked, bound)?;
                    }
                }
                if let Some(rule) = self.countable {
                    let first = lower.ceil().max(1.0) as u64;
                    let mut k = first;
                    while (k as f64) < upper && k < first + TAIL_TERMS {
                        total += rule.mass(k) * checked(k as f64)?;
                        k += 1;
                    }
                    if (k as f64) < upper {
                        return Err(Error::Unsupported(format!("averaging over {cell} needs too many integer terms")));
                    }
                }
            }
            Cell::Tail { start } => {
                if let Some(rule) = self.countable {
                    total += tail_sum(rule, start, r, &checked)?;
                }
            }
        }
        Ok(total / mass)
    }
}

/// `sum_{k >= start} rule(k) r(k)`. Closed form once `r` is constant past
/// its last breakpoint; otherwise summed to `start + TAIL_TERMS` with the
/// remainder evaluated at the cut.
fn tail_sum(
    rule: CountableRule,
    start: u64,
    r: &dyn BoundedFunction,
    checked: &dyn Fn(f64) -> Result<f64>,
) -> Result<f64> {
    let last_break = r.breakpoints().into_iter().fold(start as f64, f64::max);
    let flat_from = (last_break.ceil() as u64).max(start) + 1;
    let constant_tail = match r.affine_on(flat_from as f64, f64::INFINITY) {
        Some((slope, c)) if slope == 0.0 => Some(c),
        _ => None,
    };
    let cut = match constant_tail {
        Some(_) => flat_from,
        None => start + TAIL_TERMS,
    };
    let mut total = 0.0;
    for k in start..cut {
        total += rule.mass(k) * checked(k as f64)?;
    }
    let remainder = match constant_tail {
        Some(c) => c,
        None => checked(cut as f64)?,
    };
    Ok(total + rule.tail_mass(cut) * remainder)
}

/// Lebesgue integral of `r` over `[u, v)`, split at breakpoints.
fn integrate_split(
    r: &dyn BoundedFunction,
    u: f64,
    v: f64,
    checked: &dyn Fn(f64) -> Result<f64>,
    bound: f64,
) -> Result<f64> {
    let mut edges = vec![u];
    let mut cuts: Vec<f64> = r.breakpoints().into_iter().filter(|&p| u < p && p < v).collect();
    cuts.sort_by(|a, b| a.total_cmp(b));
    edges.extend(cuts);
    edges.push(v);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if lo >= hi {
            continue;
        }
        total += match r.affine_on(lo, hi) {
            Some((slope, intercept)) => {
                let ends = [slope * lo + intercept, slope * hi + intercept];
                if ends.iter().any(|e| e.abs() > bound * (1.0 + 1e-12)) {
                    let x = if ends[0].abs() > bound { lo } else { hi };
                    return Err(Error::BoundViolation { x, value: slope * x + intercept, bound });
                }
                (hi - lo) * (slope * 0.5 * (lo + hi) + intercept)
            }
            None => adaptive_midpoint(|x| checked(x), lo, hi, QUADRATURE_REL_TOL, QUADRATURE_MAX_INTERVALS)?,
        };
    }
    Ok(total)
}

/// Composite midpoint rule on `[lo, hi)`, doubling the subinterval count
/// until successive estimates agree to `rel_tol`.
pub fn adaptive_midpoint<F>(f: F, lo: f64, hi: f64, rel_tol: f64, max_intervals: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let estimate = |n: usize| -> Result<f64> {
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for j in 0..n {
            acc += f(lo + (j as f64 + 0.5) * h)?;
        }
        Ok(acc * h)
    };
    let mut n = 1;
    let mut prev = estimate(n)?;
    while n < max_intervals {
        n *= 2;
        let next = estimate(n)?;
        // Require agreement over two consecutive doublings' worth of
        // resolution to avoid a lucky early match.
        if n >= 8 && (next - prev).abs() <= rel_tol * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}
