//! Sequential universal probability assignment over a finite alphabet.
//!
//! A [`LevelCoder`] mixes add-1/2 (Krichevsky–Trofimov) estimators over
//! Markov orders `0..=D`, each order weighted by its sequential posterior
//! under a uniform prior. Each order model is itself an exactly normalized
//! sequential predictor, so the mixture's sequence probabilities sum to one
//! over every block length.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, CompensatedSum};

/// Alphabets up to this size keep dense per-context count vectors.
const DENSE_LIMIT: usize = 256;

/// Add-1/2 conditional probability of `symbol` given per-symbol counts.
pub fn kt_conditional(counts: &[u64], symbol: usize) -> Result<f64> {
    let k = counts.len();
    if symbol >= k {
        return Err(Error::SymbolOutOfRange { symbol, alphabet_size: k });
    }
    if k == 1 {
        return Ok(1.0);
    }
    let n: u64 = counts.iter().sum();
    Ok((counts[symbol] as f64 + 0.5) / (n as f64 + 0.5 * k as f64))
}

#[derive(Debug, Clone)]
enum Counts {
    Dense(Vec<u32>),
    Sparse(HashMap<u32, u32>),
}

#[derive(Debug, Clone)]
struct ContextStats {
    total: u64,
    counts: Counts,
}

impl ContextStats {
    fn new(k: usize) -> Self {
        let counts = if k <= DENSE_LIMIT { Counts::Dense(vec![0; k]) } else { Counts::Sparse(HashMap::new()) };
        Self { total: 0, counts }
    }

    fn count(&self, symbol: usize) -> u32 {
        match &self.counts {
            Counts::Dense(v) => v[symbol],
            Counts::Sparse(m) => m.get(&(symbol as u32)).copied().unwrap_or(0),
        }
    }

    fn increment(&mut self, symbol: usize) {
        self.total += 1;
        match &mut self.counts {
            Counts::Dense(v) => v[symbol] += 1,
            Counts::Sparse(m) => *m.entry(symbol as u32).or_insert(0) += 1,
        }
    }

    /// Adds `scale * P_kt(. | context)` into `out`.
    fn accumulate(&self, scale: f64, out: &mut [f64]) {
        let k = out.len();
        let denom = self.total as f64 + 0.5 * k as f64;
        let base = scale * 0.5 / denom;
        out.iter_mut().for_each(|p| *p += base);
        let per_count = scale / denom;
        match &self.counts {
            Counts::Dense(v) => {
                for (p, &c) in out.iter_mut().zip(v) {
                    *p += per_count * c as f64;
                }
            }
            Counts::Sparse(m) => {
                for (&s, &c) in m {
                    out[s as usize] += per_count * c as f64;
                }
            }
        }
    }
}

/// Markov-order mixture of add-1/2 estimators over one partition level.
#[derive(Debug, Clone)]
pub struct LevelCoder {
    alphabet_size: usize,
    max_order: usize,
    /// One table per order, keyed by the packed context.
    contexts: Vec<HashMap<u64, ContextStats>>,
    order_log_weights: Vec<f64>,
    cum_log_prob: CompensatedSum,
    /// Most recent symbol last; at most `max_order` entries.
    history: Vec<usize>,
    steps: u64,
}

impl LevelCoder {
    pub fn new(alphabet_size: usize, max_order: usize) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::InvalidCoder("alphabet must be non-empty".into()));
        }
        // Contexts are packed base (k+1) so every prefix length gets a distinct key.
        let base = alphabet_size as u64 + 1;
        if base.checked_pow(max_order as u32).is_none_or(|v| v > (1u64 << 62)) {
            return Err(Error::InvalidCoder(format!(
                "order {max_order} contexts over {alphabet_size} symbols do not fit in 64 bits"
            )));
        }
        let prior = -((max_order + 1) as f64).ln();
        Ok(Self {
            alphabet_size,
            max_order,
            contexts: vec![HashMap::new(); max_order + 1],
            order_log_weights: vec![prior; max_order + 1],
            cum_log_prob: CompensatedSum::new(),
            history: Vec::with_capacity(max_order),
            steps: 0,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Natural-log probability of all symbols seen so far.
    pub fn cum_log_prob(&self) -> f64 {
        self.cum_log_prob.value()
    }

    pub fn order_log_weights(&self) -> &[f64] {
        &self.order_log_weights
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Context key for order `d`: the `min(d, history)` most recent symbols.
    fn context_key(&self, order: usize) -> u64 {
        let base = self.alphabet_size as u64 + 1;
        let len = order.min(self.history.len());
        self.history[self.history.len() - len..]
            .iter()
            .fold(0u64, |key, &s| key * base + s as u64 + 1)
    }

    fn order_conditional(&self, order: usize, symbol: usize) -> f64 {
        if self.alphabet_size == 1 {
            return 1.0;
        }
        let k = self.alphabet_size as f64;
        match self.contexts[order].get(&self.context_key(order)) {
            Some(stats) => (stats.count(symbol) as f64 + 0.5) / (stats.total as f64 + 0.5 * k),
            None => 1.0 / k,
        }
    }

    fn check(&self, symbol: usize) -> Result<()> {
        if symbol < self.alphabet_size {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange { symbol, alphabet_size: self.alphabet_size })
        }
    }

    /// Mixture probability of `symbol` as the next symbol.
    pub fn conditional(&self, symbol: usize) -> Result<f64> {
        self.check(symbol)?;
        Ok(self
            .order_log_weights
            .iter()
            .enumerate()
            .map(|(d, lw)| lw.exp() * self.order_conditional(d, symbol))
            .sum())
    }

    /// Full next-symbol distribution, written into `out` (length `alphabet_size`).
    pub fn distribution_into(&self, out: &mut [f64]) {
        assert_eq!(out.len(), self.alphabet_size);
        out.iter_mut().for_each(|p| *p = 0.0);
        if self.alphabet_size == 1 {
            out[0] = 1.0;
            return;
        }
        let uniform = 1.0 / self.alphabet_size as f64;
        for (d, lw) in self.order_log_weights.iter().enumerate() {
            let w = lw.exp();
            match self.contexts[d].get(&self.context_key(d)) {
                Some(stats) => stats.accumulate(w, out),
                None => out.iter_mut().for_each(|p| *p += w * uniform),
            }
        }
    }

    pub fn distribution(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.alphabet_size];
        self.distribution_into(&mut out);
        out
    }

    /// Consume `symbol`; returns the natural-log conditional probability it was assigned.
    pub fn update(&mut self, symbol: usize) -> Result<f64> {
        self.check(symbol)?;
        let per_order: Vec<f64> = (0..=self.max_order).map(|d| self.order_conditional(d, symbol).ln()).collect();
        let joint: Vec<f64> = self.order_log_weights.iter().zip(&per_order).map(|(w, p)| w + p).collect();
        let log_p = log_sum_exp(&joint);
        let norm = log_p;
        for (w, j) in self.order_log_weights.iter_mut().zip(&joint) {
            *w = j - norm;
        }
        // Renormalize to absorb rounding drift.
        let drift = log_sum_exp(&self.order_log_weights);
        self.order_log_weights.iter_mut().for_each(|w| *w -= drift);

        let k = self.alphabet_size;
        for d in 0..=self.max_order {
            let key = self.context_key(d);
            self.contexts[d].entry(key).or_insert_with(|| ContextStats::new(k)).increment(symbol);
        }
        if self.max_order > 0 {
            if self.history.len() == self.max_order {
                self.history.remove(0);
            }
            self.history.push(symbol);
        }
        self.cum_log_prob.add(log_p);
        self.steps += 1;
        Ok(log_p)
    }
}
