//! The Concordance coefficient.
//!
//! The disorder of an arrangement is the smallest number of pairwise
//! disagreements separating it from an arrangement in which every group is
//! listed consecutively. It equals the number of cross-group pairs minus the
//! optimum of the Linear Ordering Problem on the preference matrix. The
//! coefficient τ rescales it by the largest disorder attainable for the group
//! sizes: τ = 1 − disorder / max_disorder.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{enumerate_distribution, EnumerationConfig, Statistic};
use crate::half::Half;
use crate::lop::{lop_exact_dp, next_permutation, PreferenceMatrix, BRUTE_MAX_GROUPS};
use crate::ranking::{Arrangement, GroupSizes};

/// Largest multinomial accepted by [`max_disorder_bruteforce`].
pub const BRUTEFORCE_MAX_ARRANGEMENTS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisorderResult {
    pub disorder: Half,
    pub max_disorder: u64,
    pub tau: f64,
    /// Group order of the closest arrangement with consecutive groups.
    pub closest_order: Vec<usize>,
    pub total_pairs: u64,
    pub lop_value: Half,
    /// Set when `max_disorder` is 0: τ is reported as 1 and carries no information.
    pub degenerate: bool,
}

impl DisorderResult {
    /// τ as an exact ratio `(numerator, denominator)` in halves.
    pub fn tau_ratio(&self) -> Option<(i64, i64)> {
        if self.degenerate {
            return None;
        }
        let den = 2 * self.max_disorder as i64;
        Some((den - self.disorder.halves(), den))
    }
}

/// `m[r][s]` counts observations of group r preceding observations of group s.
/// A cross-group pair inside one tie block credits ½ to both directions.
pub fn preference_matrix(arr: &Arrangement, sizes: &GroupSizes) -> Result<PreferenceMatrix> {
    arr.validate(sizes)?;
    let k = sizes.k();
    let mut m = PreferenceMatrix::zeros(k);
    let mut placed = vec![0i64; k];
    for block in arr.blocks() {
        for &g in block {
            for (h, &count) in placed.iter().enumerate() {
                if h != g && count > 0 {
                    m.add(h, g, Half::from_int(count));
                }
            }
        }
        for (i, &g) in block.iter().enumerate() {
            for &h in &block[i + 1..] {
                if g != h {
                    m.add(g, h, Half::from_halves(1));
                    m.add(h, g, Half::from_halves(1));
                }
            }
        }
        for &g in block {
            placed[g] += 1;
        }
    }
    Ok(m)
}

/// Generalized pentagonal number: ℓ(3ℓ−1)/2 for b = 2ℓ, ℓ(3ℓ+1)/2 for b = 2ℓ+1.
pub fn pentagonal(b: u64) -> u64 {
    let l = b / 2;
    if b.is_multiple_of(2) {
        l * (3 * l).saturating_sub(1) / 2
    } else {
        l * (3 * l + 1) / 2
    }
}

/// Σ_{r<s} n_r·n_s − (GP_b + Σ_{r<s} ⌊n_r·n_s/2⌋), b = number of odd-sized groups.
///
/// A zero result is legal (e.g. sizes (1,1)); callers treat it as degenerate.
pub fn max_disorder(sizes: &GroupSizes) -> Result<u64> {
    if sizes.k() < 2 {
        return Err(Error::Degenerate(
            "the concordance statistic needs at least two groups".into(),
        ));
    }
    let n = sizes.sizes();
    let mut pairs = 0u64;
    let mut halved = 0u64;
    for r in 0..n.len() {
        for s in r + 1..n.len() {
            let prod = n[r] as u64 * n[s] as u64;
            pairs += prod;
            halved += prod / 2;
        }
    }
    let odd = n.iter().filter(|&&x| x % 2 == 1).count() as u64;
    pairs
        .checked_sub(pentagonal(odd) + halved)
        .ok_or_else(|| Error::Degenerate(format!("negative maximum disorder for sizes {sizes}")))
}

/// Maximum disorder found by enumerating every distinct arrangement.
pub fn max_disorder_bruteforce(sizes: &GroupSizes) -> Result<u64> {
    if sizes.k() < 2 {
        return Err(Error::Degenerate(
            "the concordance statistic needs at least two groups".into(),
        ));
    }
    let config = EnumerationConfig {
        budget: BRUTEFORCE_MAX_ARRANGEMENTS,
        ..EnumerationConfig::default()
    };
    let dist = enumerate_distribution(sizes, Statistic::Disorder, &config)?;
    let top = dist.atoms().last().expect("nonempty support");
    Ok(top.disorder().halves() as u64 / 2)
}

/// Disorder, τ and the closest consecutive group order.
pub fn disorder(arr: &Arrangement, sizes: &GroupSizes) -> Result<DisorderResult> {
    let max = max_disorder(sizes)?;
    let m = preference_matrix(arr, sizes)?;
    let lop = lop_exact_dp(&m)?;
    let total_pairs = sizes.total_cross_pairs();
    let d = Half::from_int(total_pairs as i64) - lop.value;
    // Untied data cannot be disordered here; a tie block can still add ½ pairs.
    let (tau, degenerate) = if max == 0 {
        (1.0, true)
    } else {
        (1.0 - d.to_f64() / max as f64, false)
    };
    Ok(DisorderResult {
        disorder: d,
        max_disorder: max,
        tau,
        closest_order: lop.order,
        total_pairs,
        lop_value: lop.value,
        degenerate,
    })
}

/// Independent route to the disorder: for every group order, count the
/// observation pairs it reverses (½ for cross-group pairs tied in one block)
/// directly on the arrangement, and take the minimum.
pub fn disorder_oracle(arr: &Arrangement, sizes: &GroupSizes) -> Result<Half> {
    arr.validate(sizes)?;
    let k = sizes.k();
    if k > BRUTE_MAX_GROUPS {
        return Err(Error::Capacity(format!(
            "disorder oracle supports at most {BRUTE_MAX_GROUPS} groups, got {k}"
        )));
    }
    let obs: Vec<(usize, usize)> = arr
        .blocks()
        .iter()
        .enumerate()
        .flat_map(|(b, block)| block.iter().map(move |&g| (b, g)))
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    let mut rank = vec![0usize; k];
    let mut best: Option<i64> = None;
    loop {
        for (pos, &g) in order.iter().enumerate() {
            rank[g] = pos;
        }
        let mut reversed = 0i64;
        for (i, &(bi, gi)) in obs.iter().enumerate() {
            for &(bj, gj) in &obs[i + 1..] {
                if gi == gj {
                    continue;
                }
                if bi == bj {
                    reversed += 1;
                } else if rank[gi] > rank[gj] {
                    reversed += 2;
                }
            }
        }
        best = Some(best.map_or(reversed, |b| b.min(reversed)));
        if !next_permutation(&mut order) {
            break;
        }
    }
    Ok(Half::from_halves(best.expect("k >= 1")))
}
