#![allow(dead_code)]

use std::collections::HashMap;

/// Probability of `seq` under a uniform mixture over context orders `0..=depth`
/// of KT estimators, recomputed from scratch by counting.
/// Before `d` symbols exist, order `d` conditions on the whole (shorter) past.
pub fn seq_prob_oracle(seq: &[usize], k: usize, depth: usize) -> f64 {
    let per_order: f64 = (0..=depth).map(|d| order_prob(seq, k, d)).sum();
    per_order / (depth + 1) as f64
}

fn order_prob(seq: &[usize], k: usize, d: usize) -> f64 {
    let mut counts: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    let mut p = 1.0;
    for j in 0..seq.len() {
        let ctx = seq[j.saturating_sub(d)..j].to_vec();
        let c = counts.entry(ctx).or_insert_with(|| vec![0.0; k]);
        let total: f64 = c.iter().sum();
        p *= (c[seq[j]] + 0.5) / (total + 0.5 * k as f64);
        c[seq[j]] += 1.0;
    }
    p
}

/// Every sequence of length `n` over `0..k`.
pub fn all_sequences(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..k).map(move |a| {
                    let mut t = s.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

/// Equal-width bin index of `x` in `[0, 1)` with `bins` bins.
pub fn bin(x: f64, bins: usize) -> usize {
    ((x * bins as f64) as usize).min(bins - 1)
}
