//! Kendall-τ distance and rank correlation between two permutations.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Number of item pairs ordered differently by `p1` and `p2`.
pub fn kendall_distance<T: Eq + Hash>(p1: &[T], p2: &[T]) -> Result<u64> {
    if p1.len() != p2.len() {
        return Err(Error::Structure(format!(
            "permutations have lengths {} and {}",
            p1.len(),
            p2.len()
        )));
    }
    let mut position = HashMap::with_capacity(p2.len());
    for (i, item) in p2.iter().enumerate() {
        if position.insert(item, i).is_some() {
            return Err(Error::Structure("repeated item in permutation".into()));
        }
    }
    let mut seq = Vec::with_capacity(p1.len());
    let mut seen = vec![false; p1.len()];
    for item in p1 {
        let &i = position
            .get(item)
            .ok_or_else(|| Error::Structure("permutations hold different items".into()))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Structure("repeated item in permutation".into()));
        }
        seq.push(i);
    }
    Ok(count_inversions(&mut seq))
}

/// τ = 1 − 2·d / (n(n−1)/2).
pub fn kendall_correlation<T: Eq + Hash>(p1: &[T], p2: &[T]) -> Result<f64> {
    let d = kendall_distance(p1, p2)?;
    let n = p1.len() as u64;
    if n < 2 {
        return Err(Error::Degenerate("correlation needs at least two items".into()));
    }
    let pairs = n * (n - 1) / 2;
    Ok(1.0 - 2.0 * d as f64 / pairs as f64)
}

// Merge sort inversion count, O(n log n).
fn count_inversions(seq: &mut [usize]) -> u64 {
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = count_inversions(&mut seq[..mid]) + count_inversions(&mut seq[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if seq[i] <= seq[j] {
            merged.push(seq[i]);
            i += 1;
        } else {
            merged.push(seq[j]);
            count += (mid - i) as u64;
            j += 1;
        }
    }
    merged.extend_from_slice(&seq[i..mid]);
    merged.extend_from_slice(&seq[j..]);
    seq.copy_from_slice(&merged);
    count
}
