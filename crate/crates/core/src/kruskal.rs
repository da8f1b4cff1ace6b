//! Kruskal-Wallis statistic with midranks and the tie adjustment.
//!
//! KW = 12/(n(n+1)) · Σ R_i²/n_i − 3(n+1), with n the total number of observations.
//!
//! For exact comparisons the rank sums are condensed into an integer
//! signature Σ (2R_i)² · (L/n_i), L = lcm(n_1..n_k). KW is a strictly
//! increasing function of the signature for fixed group sizes.

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::half::Half;
use crate::ranking::{rank_sums, Arrangement, GroupSizes};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KwResult {
    pub kw: f64,
    pub kw_tie_corrected: Option<f64>,
    pub rank_sums: Vec<Half>,
    pub mean_ranks: Vec<f64>,
    /// Sizes of tie blocks holding more than one observation.
    pub tie_counts: Vec<usize>,
    #[serde(skip)]
    pub signature: u128,
}

/// lcm of the group sizes; the scale of KW signatures.
pub fn signature_scale(sizes: &GroupSizes) -> Result<u128> {
    sizes.sizes().iter().try_fold(1u128, |acc, &s| {
        let s = s as u128;
        (acc / acc.gcd(&s))
            .checked_mul(s)
            .ok_or_else(|| Error::Capacity(format!("lcm of sizes {sizes} overflows")))
    })
}

/// Σ (2R_i)² · (L/n_i) from rank sums given in halves.
pub fn kw_signature(rank_sum_halves: &[i64], sizes: &GroupSizes, scale: u128) -> Result<u128> {
    let overflow = || Error::Capacity(format!("KW signature overflows for sizes {sizes}"));
    let mut total = 0u128;
    for (&r, &n) in rank_sum_halves.iter().zip(sizes.sizes()) {
        let r = r.unsigned_abs() as u128;
        let term = r
            .checked_mul(r)
            .and_then(|sq| sq.checked_mul(scale / n as u128))
            .ok_or_else(overflow)?;
        total = total.checked_add(term).ok_or_else(overflow)?;
    }
    Ok(total)
}

/// KW value of a signature.
pub fn kw_from_signature(signature: u128, sizes: &GroupSizes, scale: u128) -> f64 {
    let n = sizes.n() as f64;
    // Σ R_i²/n_i = signature / (4L)
    let sum = signature as f64 / (4.0 * scale as f64);
    12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)
}

/// Largest KW attainable for the sizes: the best order of fully separated groups.
///
/// Subset DP over which groups come first; a group starting after `offset`
/// observations has rank sum n_g·offset + n_g(n_g+1)/2.
pub fn kw_max(sizes: &GroupSizes) -> Result<f64> {
    let k = sizes.k();
    if k < 2 {
        return Err(Error::Degenerate("Kruskal-Wallis needs at least two groups".into()));
    }
    if k > 20 {
        return Err(Error::Capacity(format!("kw_max supports at most 20 groups, got {k}")));
    }
    let scale = signature_scale(sizes)?;
    let n = sizes.sizes();
    let full = (1usize << k) - 1;
    let mut best = vec![0u128; full + 1];
    let mut offset = vec![0u64; full + 1];
    for set in 1..=full {
        let low = set.trailing_zeros() as usize;
        offset[set] = offset[set & (set - 1)] + n[low] as u64;
        let mut top = 0u128;
        let mut rest = set;
        while rest != 0 {
            let g = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let before = set & !(1 << g);
            let ng = n[g] as u64;
            let doubled = (ng * (2 * offset[before] + ng + 1)) as i64;
            let term = kw_signature(&[doubled], &GroupSizes::new(vec![n[g]])?, scale)?;
            top = top.max(best[before] + term);
        }
        best[set] = top;
    }
    Ok(kw_from_signature(best[full], sizes, scale))
}

/// Kruskal-Wallis statistic on midranks; the tie-corrected value is present iff ties exist.
pub fn kruskal_wallis(arr: &Arrangement, sizes: &GroupSizes) -> Result<KwResult> {
    if sizes.k() < 2 {
        return Err(Error::Degenerate(
            "Kruskal-Wallis needs at least two groups".into(),
        ));
    }
    arr.validate(sizes)?;
    let sums = rank_sums(arr, sizes.k());
    let halves: Vec<i64> = sums.iter().map(|r| r.halves()).collect();
    let scale = signature_scale(sizes)?;
    let signature = kw_signature(&halves, sizes, scale)?;
    // Rounding noise can leave a tiny negative value when all rank means coincide.
    let kw = kw_from_signature(signature, sizes, scale).max(0.0);
    let tie_counts = arr.tie_block_sizes();
    let kw_tie_corrected = if tie_counts.is_empty() {
        None
    } else {
        Some(tie_correction(kw, &tie_counts, sizes.n())?)
    };
    let mean_ranks = sums
        .iter()
        .zip(sizes.sizes())
        .map(|(r, &n)| r.to_f64() / n as f64)
        .collect();
    Ok(KwResult {
        kw,
        kw_tie_corrected,
        rank_sums: sums,
        mean_ranks,
        tie_counts,
        signature,
    })
}

/// K / (1 − Σ(t³ − t) / (n³ − n)).
pub fn tie_correction(kw: f64, tie_counts: &[usize], n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Config(format!("tie correction needs n >= 2, got {n}")));
    }
    let ties: f64 = tie_counts
        .iter()
        .filter(|&&t| t > 1)
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    if ties == 0.0 {
        return Ok(kw);
    }
    let n = n as f64;
    let denominator = 1.0 - ties / (n * n * n - n);
    if denominator <= 0.0 {
        return Err(Error::Degenerate(
            "all observations are tied; the tie correction is undefined".into(),
        ));
    }
    Ok(kw / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::parse_pre_ranked;

    fn kw_of(text: &str) -> KwResult {
        let data = parse_pre_ranked(text).unwrap();
        kruskal_wallis(&data.arrangement, &data.sizes).unwrap()
    }

    #[test]
    fn small_example() {
        let r = kw_of("a b a c c b");
        assert!((r.kw - 2.0).abs() < 1e-12);
        assert_eq!(r.kw_tie_corrected, None);
        assert_eq!(r.mean_ranks, vec![2.0, 4.0, 4.5]);
    }

    #[test]
    fn separated_groups() {
        let r = kw_of("a a b b c c");
        assert_eq!(format!("{:.2}", r.kw), "4.57");
    }

    #[test]
    fn untied_hours() {
        let r = kw_of("a a a a a c c a b a b a a c a b b b");
        assert_eq!(r.rank_sums, vec![Half::from_int(73), Half::from_int(71), Half::from_int(27)]);
        assert!((r.kw - 5.6).abs() < 1e-9);
    }

    #[test]
    fn tied_hours() {
        let r = kw_of("a a a a (a c) c (a b) a b a a c (a b) b b");
        assert!((r.kw - 5.074).abs() < 1e-3);
        assert_eq!(r.tie_counts, vec![2, 2, 2]);
        let corrected = r.kw_tie_corrected.unwrap();
        assert!((corrected - r.kw / (1.0 - 18.0 / 5814.0)).abs() < 1e-12);
        assert!((corrected - 5.0897).abs() < 1e-3);
    }

    #[test]
    fn tie_correction_edges() {
        assert_eq!(tie_correction(5.6, &[], 18).unwrap(), 5.6);
        assert_eq!(tie_correction(0.0, &[2, 3], 18).unwrap(), 0.0);
        assert!(matches!(tie_correction(1.0, &[4], 4), Err(Error::Degenerate(_))));
        assert!(tie_correction(1.0, &[2], 1).is_err());
        assert!(tie_correction(3.0, &[2], 10).unwrap() > 3.0);
    }

    #[test]
    fn single_group_rejected() {
        let data = parse_pre_ranked("a a a").unwrap();
        assert!(matches!(
            kruskal_wallis(&data.arrangement, &data.sizes),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn kw_max_small() {
        let m = kw_max(&GroupSizes::new(vec![2, 2, 2]).unwrap()).unwrap();
        assert!((m - 32.0 / 7.0).abs() < 1e-12);
        assert!(kw_max(&GroupSizes::new(vec![3]).unwrap()).is_err());
    }

    #[test]
    fn signature_orders_like_kw() {
        let sizes = GroupSizes::new(vec![2, 2, 2]).unwrap();
        let scale = signature_scale(&sizes).unwrap();
        assert_eq!(scale, 2);
        let a = kw_signature(&[6, 14, 22], &sizes, scale).unwrap();
        let b = kw_signature(&[8, 16, 18], &sizes, scale).unwrap();
        assert!(a > b);
        assert!(kw_from_signature(a, &sizes, scale) > kw_from_signature(b, &sizes, scale));
    }
}
