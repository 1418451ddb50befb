//! Finite refining partition families over bounded intervals, atom sets and
//! the positive integers.
//!
//! Every level is an explicit ordered list of [`Cell`]s. Level `i + 1`
//! refines level `i`, and each coarse cell owns a contiguous range of fine
//! cells, so parent lookup is a table read.
//!
//! Cell order within a level: atoms (ascending), then interval bins
//! (ascending); countable families list singletons `{1}, {2}, ...` then the
//! tail.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// Deepest dyadic level allowed (level `i` has `2^(i+1)` bins).
pub const MAX_DYADIC_LEVELS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    /// A single point.
    Atom(f64),
    /// Half-open `[lower, upper)`.
    Interval { lower: f64, upper: f64 },
    /// Integers `k >= start`.
    Tail { start: u64 },
}

impl Cell {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Cell::Atom(p) => x == p,
            Cell::Interval { lower, upper } => lower <= x && x < upper,
            Cell::Tail { start } => is_positive_integer(x) && x >= start as f64,
        }
    }

    /// Whether `self` lies entirely inside `other`.
    pub fn is_subset_of(&self, other: &Cell) -> bool {
        match (*self, *other) {
            (Cell::Atom(p), o) => o.contains(p),
            (Cell::Interval { lower, upper }, Cell::Interval { lower: l, upper: u }) => {
                l <= lower && upper <= u
            }
            (Cell::Tail { start }, Cell::Tail { start: s }) => start >= s,
            _ => false,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Cell::Atom(p) => write!(f, "{{{p}}}"),
            Cell::Interval { lower, upper } => write!(f, "[{lower}, {upper})"),
            Cell::Tail { start } => write!(f, "{{k >= {start}}}"),
        }
    }
}

pub(crate) fn is_positive_integer(x: f64) -> bool {
    x >= 1.0 && x.fract() == 0.0 && x < 9.007_199_254_740_992e15
}

/// What the family covers.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub atoms: Vec<f64>,
    pub interval: Option<(f64, f64)>,
    pub countable: bool,
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        if self.countable {
            return is_positive_integer(x);
        }
        self.atoms.contains(&x) || self.interval.is_some_and(|(a, b)| a <= x && x < b)
    }

    /// Supremum of `|x|` over the support, `None` when unbounded.
    pub fn abs_bound(&self) -> Option<f64> {
        if self.countable {
            return None;
        }
        let atoms = self.atoms.iter().map(|a| a.abs());
        let ends = self.interval.into_iter().flat_map(|(a, b)| [a.abs(), b.abs()]);
        atoms.chain(ends).reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    /// Atoms followed by `2^(i+1)` equal bins of the interval.
    Dyadic,
    /// `{1}, ..., {i+1}` followed by the tail `k >= i+2`.
    Countable,
}

/// An immutable refining sequence of finite partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionFamily {
    support: Support,
    layout: Layout,
    levels: Vec<Vec<Cell>>,
    /// `children[i][c]` is the range of level `i + 1` cells inside cell `c` of level `i`.
    children: Vec<Vec<Range<usize>>>,
    /// `parents[i][c]` is the level `i - 1` cell containing cell `c` of level `i` (`parents[0]` empty).
    parents: Vec<Vec<usize>>,
}

impl PartitionFamily {
    /// Equal-width dyadic bins of `[a, b)`: level `i` has `2^(i+1)` bins.
    pub fn dyadic(a: f64, b: f64, levels: usize) -> Result<Self> {
        Self::mixed(&[], a, b, levels)
    }

    /// Partitions `{1}, ..., {i+1}, {k >= i+2}` of the positive integers.
    pub fn countable_tail(levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidPartition("level count must be at least 1".into()));
        }
        let levels_cells: Vec<Vec<Cell>> = (0..levels)
            .map(|i| {
                let mut cells: Vec<Cell> = (1..=i as u64 + 1).map(|k| Cell::Atom(k as f64)).collect();
                cells.push(Cell::Tail { start: i as u64 + 2 });
                cells
            })
            .collect();
        let support = Support { atoms: Vec::new(), interval: None, countable: true };
        Ok(Self::assemble(support, Layout::Countable, levels_cells))
    }

    /// Each atom as its own cell at every level, plus a dyadic split of `[a, b)`.
    pub fn mixed(atoms: &[f64], a: f64, b: f64, levels: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidPartition(format!("interval [{a}, {b}) is empty or not finite")));
        }
        if levels == 0 {
            return Err(Error::InvalidPartition("level count must be at least 1".into()));
        }
        if levels > MAX_DYADIC_LEVELS {
            return Err(Error::InvalidPartition(format!(
                "at most {MAX_DYADIC_LEVELS} dyadic levels are supported, got {levels}"
            )));
        }
        let mut atoms = atoms.to_vec();
        if let Some(bad) = atoms.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidPartition(format!("atom {bad} is not finite")));
        }
        atoms.sort_by(|x, y| x.total_cmp(y));
        atoms.dedup();
        if let Some(bad) = atoms.iter().find(|&&p| a <= p && p < b) {
            return Err(Error::InvalidPartition(format!("atom {bad} lies inside [{a}, {b})")));
        }
        let levels_cells = (0..levels)
            .map(|i| {
                let bins = 1usize << (i + 1);
                let edge = |k: usize| dyadic_edge(a, b, k, bins);
                atoms
                    .iter()
                    .map(|&p| Cell::Atom(p))
                    .chain((0..bins).map(|k| Cell::Interval { lower: edge(k), upper: edge(k + 1) }))
                    .collect()
            })
            .collect::<Vec<Vec<Cell>>>();
        for cells in &levels_cells {
            for c in cells {
                if let Cell::Interval { lower, upper } = c {
                    if !(lower < upper) {
                        return Err(Error::InvalidPartition(format!(
                            "interval [{a}, {b}) too narrow for {levels} dyadic levels"
                        )));
                    }
                }
            }
        }
        let support = Support { atoms, interval: Some((a, b)), countable: false };
        Ok(Self::assemble(support, Layout::Dyadic, levels_cells))
    }

    fn assemble(support: Support, layout: Layout, levels: Vec<Vec<Cell>>) -> Self {
        let n_atoms = support.atoms.len();
        let mut children = Vec::with_capacity(levels.len().saturating_sub(1));
        let mut parents = vec![Vec::new()];
        for i in 1..levels.len() {
            let coarse = levels[i - 1].len();
            let fine = levels[i].len();
            let ranges: Vec<Range<usize>> = match layout {
                Layout::Dyadic => (0..coarse)
                    .map(|c| {
                        if c < n_atoms {
                            c..c + 1
                        } else {
                            let k = c - n_atoms;
                            n_atoms + 2 * k..n_atoms + 2 * k + 2
                        }
                    })
                    .collect(),
                // Singletons map to themselves; the coarse tail splits into
                // the new singleton and the new tail.
                Layout::Countable => (0..coarse)
                    .map(|c| if c + 1 < coarse { c..c + 1 } else { c..c + 2 })
                    .collect(),
            };
            let mut parent = vec![0; fine];
            for (c, r) in ranges.iter().enumerate() {
                for f in r.clone() {
                    parent[f] = c;
                }
            }
            children.push(ranges);
            parents.push(parent);
        }
        Self { support, layout, levels, children, parents }
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn is_countable(&self) -> bool {
        self.layout == Layout::Countable
    }

    pub fn cells(&self, level: usize) -> Result<&[Cell]> {
        self.levels
            .get(level)
            .map(Vec::as_slice)
            .ok_or(Error::LevelOutOfRange { level, levels: self.levels.len() })
    }

    pub fn cell(&self, level: usize, index: usize) -> Result<Cell> {
        self.cells(level)?
            .get(index)
            .copied()
            .ok_or(Error::CellOutOfRange { level, cell: index })
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Index of the unique cell of level `level` containing `x`.
    pub fn project(&self, level: usize, x: f64) -> Result<usize> {
        let cells = self.cells(level)?;
        match self.layout {
            Layout::Countable => {
                if !is_positive_integer(x) {
                    return Err(Error::OutOfSupport(x));
                }
                let tail = cells.len() - 1;
                Ok(((x as u64 - 1) as usize).min(tail))
            }
            Layout::Dyadic => {
                let n_atoms = self.support.atoms.len();
                if let Some(j) = self.support.atoms.iter().position(|&p| p == x) {
                    return Ok(j);
                }
                let (a, b) = self.support.interval.expect("dyadic layout has an interval");
                if !(a <= x && x < b) {
                    return Err(Error::OutOfSupport(x));
                }
                let bins = cells.len() - n_atoms;
                let guess = (((x - a) / (b - a)) * bins as f64).floor();
                let mut k = (guess.max(0.0) as usize).min(bins - 1);
                // Floating-point guess may be off by one near bin edges.
                while k > 0 && x < dyadic_edge(a, b, k, bins) {
                    k -= 1;
                }
                while k + 1 < bins && x >= dyadic_edge(a, b, k + 1, bins) {
                    k += 1;
                }
                Ok(n_atoms + k)
            }
        }
    }

    /// The level `level - 1` cell containing cell `index` of `level`.
    pub fn parent(&self, level: usize, index: usize) -> Result<usize> {
        if level == 0 {
            return Err(Error::NoParent);
        }
        let table = self
            .parents
            .get(level)
            .ok_or(Error::LevelOutOfRange { level, levels: self.levels.len() })?;
        table.get(index).copied().ok_or(Error::CellOutOfRange { level, cell: index })
    }

    /// Range of level `level + 1` cells contained in cell `index` of `level`.
    pub fn children(&self, level: usize, index: usize) -> Result<Range<usize>> {
        let table = self
            .children
            .get(level)
            .ok_or(Error::LevelOutOfRange { level, levels: self.levels.len() })?;
        table.get(index).cloned().ok_or(Error::CellOutOfRange { level, cell: index })
    }
}

/// Edge `k` of `bins` equal bins of `[a, b)`. Depends only on the exact
/// dyadic fraction `k / bins`, so coarse and fine levels share edges bit for bit.
fn dyadic_edge(a: f64, b: f64, k: usize, bins: usize) -> f64 {
    if k == 0 {
        a
    } else if k == bins {
        b
    } else {
        a + (b - a) * (k as f64 / bins as f64)
    }
}
