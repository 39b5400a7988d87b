//! External clustering agreement measures.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{KscError, Result};

struct Contingency {
    /// Σ over cells of C(n_ij, 2).
    same_both: f64,
    /// Σ over rows of C(a_i, 2): pairs together in the first labelling.
    same_a: f64,
    same_b: f64,
    pairs: f64,
}

fn choose2(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

fn contingency<A: Eq + Hash, B: Eq + Hash>(a: &[A], b: &[B]) -> Result<Contingency> {
    if a.len() != b.len() {
        return Err(KscError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let mut cells: HashMap<(&A, &B), usize> = HashMap::new();
    let mut rows: HashMap<&A, usize> = HashMap::new();
    let mut cols: HashMap<&B, usize> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    Ok(Contingency {
        same_both: cells.values().map(|&n| choose2(n)).sum(),
        same_a: rows.values().map(|&n| choose2(n)).sum(),
        same_b: cols.values().map(|&n| choose2(n)).sum(),
        pairs: choose2(a.len()),
    })
}

/// Adjusted Rand index. Labels are compared up to renaming. Two identical
/// partitions score 1 even in the degenerate cases (fewer than two points,
/// or both labellings trivial) where the chance correction is 0/0.
pub fn adjusted_rand_index<A: Eq + Hash, B: Eq + Hash>(a: &[A], b: &[B]) -> Result<f64> {
    let c = contingency(a, b)?;
    if c.pairs == 0.0 {
        return Ok(1.0);
    }
    let expected = c.same_a * c.same_b / c.pairs;
    let max = 0.5 * (c.same_a + c.same_b);
    if max == expected {
        return Ok(if c.same_both == max { 1.0 } else { 0.0 });
    }
    Ok((c.same_both - expected) / (max - expected))
}

/// Pairwise F-measure of `predicted` against `truth`: the harmonic mean of
/// the precision and recall of the "same cluster" relation over point pairs.
pub fn pairwise_f_measure<A: Eq + Hash, B: Eq + Hash>(truth: &[A], predicted: &[B]) -> Result<f64> {
    let c = contingency(truth, predicted)?;
    if c.same_a == 0.0 && c.same_b == 0.0 {
        return Ok(1.0);
    }
    if c.same_both == 0.0 {
        return Ok(0.0);
    }
    let precision = c.same_both / c.same_b;
    let recall = c.same_both / c.same_a;
    Ok(2.0 * precision * recall / (precision + recall))
}
