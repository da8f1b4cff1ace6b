//! Exact Linear Ordering Problem solvers for small preference matrices.
//!
//! Given a k×k matrix `m`, find the order of the k groups maximizing
//! Σ m[earlier][later]. Two independent routes are provided: a subset dynamic
//! program ([`lop_exact_dp`]) and full enumeration of the k! orders
//! ([`lop_bruteforce`]).

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::half::Half;
use crate::ranking::GroupSizes;

/// Largest k accepted by the subset DP (2^k table).
pub const DP_MAX_GROUPS: usize = 24;
/// Largest k accepted by k! enumeration.
pub const BRUTE_MAX_GROUPS: usize = 9;

/// Pairwise precedence counts between groups, in exact halves. The diagonal is unused.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PreferenceMatrix {
    k: usize,
    cells: Vec<Half>,
}

impl PreferenceMatrix {
    pub fn zeros(k: usize) -> Self {
        PreferenceMatrix {
            k,
            cells: vec![Half::ZERO; k * k],
        }
    }

    /// Builds from rows of decimal values; each entry must be a multiple of ½.
    /// Diagonal entries are ignored.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let mut m = PreferenceMatrix::zeros(k);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Structure(format!(
                    "row {r} has {} entries, expected {k}",
                    row.len()
                )));
            }
            for (s, &v) in row.iter().enumerate() {
                if r == s {
                    continue;
                }
                let halves = v * 2.0;
                if !halves.is_finite() || halves.fract() != 0.0 || halves < 0.0 {
                    return Err(Error::Structure(format!(
                        "entry ({r},{s}) = {v} is not a nonnegative multiple of 0.5"
                    )));
                }
                m.set(r, s, Half::from_halves(halves as i64));
            }
        }
        Ok(m)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, r: usize, s: usize) -> Half {
        self.cells[r * self.k + s]
    }

    pub fn set(&mut self, r: usize, s: usize, value: Half) {
        self.cells[r * self.k + s] = value;
    }

    pub fn add(&mut self, r: usize, s: usize, value: Half) {
        self.cells[r * self.k + s] += value;
    }

    /// Σ_{r≠s} m[r][s].
    pub fn off_diagonal_sum(&self) -> Half {
        (0..self.k)
            .flat_map(|r| (0..self.k).filter(move |&s| s != r).map(move |s| (r, s)))
            .map(|(r, s)| self.get(r, s))
            .sum()
    }

    /// Σ_{r<s} max(m[r][s], m[s][r]), an upper bound on any order's value.
    pub fn upper_bound(&self) -> Half {
        let mut total = Half::ZERO;
        for r in 0..self.k {
            for s in r + 1..self.k {
                total += self.get(r, s).max(self.get(s, r));
            }
        }
        total
    }

    pub fn transpose(&self) -> PreferenceMatrix {
        let mut t = PreferenceMatrix::zeros(self.k);
        for r in 0..self.k {
            for s in 0..self.k {
                t.set(s, r, self.get(r, s));
            }
        }
        t
    }

    /// Relabels rows and columns: group `g` becomes `mapping[g]`.
    pub fn permuted(&self, mapping: &[usize]) -> PreferenceMatrix {
        let mut p = PreferenceMatrix::zeros(self.k);
        for r in 0..self.k {
            for s in 0..self.k {
                p.set(mapping[r], mapping[s], self.get(r, s));
            }
        }
        p
    }

    /// Checks m[r][s] + m[s][r] = n_r·n_s for every pair.
    pub fn check_pair_totals(&self, sizes: &GroupSizes) -> Result<()> {
        if sizes.k() != self.k {
            return Err(Error::Structure(format!(
                "matrix has {} groups, sizes have {}",
                self.k,
                sizes.k()
            )));
        }
        for r in 0..self.k {
            for s in r + 1..self.k {
                let expected = Half::from_int(sizes.size(r) as i64 * sizes.size(s) as i64);
                if self.get(r, s) + self.get(s, r) != expected {
                    return Err(Error::Structure(format!(
                        "pair ({r},{s}) sums to {}, expected {expected}",
                        self.get(r, s) + self.get(s, r)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.k)
            .map(|r| (0..self.k).map(|s| self.get(r, s).to_f64()).collect())
            .collect()
    }
}

impl fmt::Display for PreferenceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.k {
            let row: Vec<String> = (0..self.k)
                .map(|s| {
                    if r == s {
                        "-".to_string()
                    } else {
                        self.get(r, s).to_string()
                    }
                })
                .collect();
            writeln!(f, "{}", row.join("\t"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LopSolution {
    pub order: Vec<usize>,
    pub value: Half,
    pub optimal: bool,
}

/// Objective of one order: Σ over ordered pairs of m[earlier][later].
pub fn order_value(m: &PreferenceMatrix, order: &[usize]) -> Half {
    let mut total = Half::ZERO;
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            total += m.get(a, b);
        }
    }
    total
}

/// Subset dynamic program, O(2^k·k) time after O(k·2^(k/2)) table setup.
///
/// `best[S]` is the best value of ordering the groups in `S` among themselves;
/// placing `j` first among `S` gains Σ_{i∈S∖{j}} m[j][i]. Reconstruction picks
/// the smallest feasible `j` at every step, which yields the lexicographically
/// smallest optimal order.
pub fn lop_exact_dp(m: &PreferenceMatrix) -> Result<LopSolution> {
    let k = m.k();
    if k == 0 {
        return Err(Error::Structure("empty preference matrix".into()));
    }
    if k > DP_MAX_GROUPS {
        return Err(Error::Capacity(format!(
            "subset DP supports at most {DP_MAX_GROUPS} groups, got {k}"
        )));
    }
    let rows = RowSums::new(m);
    let full = (1usize << k) - 1;
    let mut best = vec![0i64; full + 1];
    for set in 1..=full {
        let mut top = i64::MIN;
        let mut rest = set;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let without = set & !(1 << j);
            let v = best[without] + rows.sum(j, without);
            if v > top {
                top = v;
            }
        }
        best[set] = top;
    }

    let mut order = Vec::with_capacity(k);
    let mut set = full;
    while set != 0 {
        let j = (0..k)
            .filter(|&j| set & (1 << j) != 0)
            .find(|&j| {
                let without = set & !(1 << j);
                best[without] + rows.sum(j, without) == best[set]
            })
            .expect("some element attains the subset optimum");
        order.push(j);
        set &= !(1 << j);
    }
    Ok(LopSolution {
        order,
        value: Half::from_halves(best[full]),
        optimal: true,
    })
}

/// Row sums m[j][·] over arbitrary subsets via two half-width lookup tables.
struct RowSums {
    split: usize,
    low: Vec<Vec<i64>>,
    high: Vec<Vec<i64>>,
}

impl RowSums {
    fn new(m: &PreferenceMatrix) -> Self {
        let k = m.k();
        let split = k.div_ceil(2);
        let table = |j: usize, offset: usize, width: usize| -> Vec<i64> {
            let mut t = vec![0i64; 1 << width];
            for x in 1..t.len() {
                let bit = x.trailing_zeros() as usize;
                let col = offset + bit;
                let cell = if col == j { 0 } else { m.get(j, col).halves() };
                t[x] = t[x & (x - 1)] + cell;
            }
            t
        };
        RowSums {
            split,
            low: (0..k).map(|j| table(j, 0, split)).collect(),
            high: (0..k).map(|j| table(j, split, k - split)).collect(),
        }
    }

    fn sum(&self, j: usize, set: usize) -> i64 {
        let mask = (1usize << self.split) - 1;
        self.low[j][set & mask] + self.high[j][set >> self.split]
    }
}

/// Enumerates all k! orders; the first maximum in lexicographic order wins.
pub fn lop_bruteforce(m: &PreferenceMatrix) -> Result<LopSolution> {
    let mut best: Option<(Vec<usize>, Half)> = None;
    for_each_order(m.k(), |order| {
        let v = order_value(m, order);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((order.to_vec(), v));
        }
    })?;
    let (order, value) = best.expect("at least one order");
    Ok(LopSolution {
        order,
        value,
        optimal: true,
    })
}

/// Objective of every order, in lexicographic order of the permutations.
pub fn all_order_values(m: &PreferenceMatrix) -> Result<Vec<(Vec<usize>, Half)>> {
    let mut out = Vec::new();
    for_each_order(m.k(), |order| out.push((order.to_vec(), order_value(m, order))))?;
    Ok(out)
}

fn for_each_order(k: usize, mut visit: impl FnMut(&[usize])) -> Result<()> {
    if k == 0 {
        return Err(Error::Structure("empty preference matrix".into()));
    }
    if k > BRUTE_MAX_GROUPS {
        return Err(Error::Capacity(format!(
            "brute-force LOP supports at most {BRUTE_MAX_GROUPS} groups, got {k}"
        )));
    }
    let mut order: Vec<usize> = (0..k).collect();
    loop {
        visit(&order);
        if !next_permutation(&mut order) {
            return Ok(());
        }
    }
}

/// Advances to the next lexicographic permutation; false after the last one.
pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Reusable scratch space for value-only LOP solves over integer matrices
/// (row-major k×k, any consistent unit). Used on the enumeration hot path.
#[derive(Debug, Clone)]
pub(crate) struct LopScratch {
    best: Vec<i64>,
}

impl LopScratch {
    pub(crate) fn new(k: usize) -> Self {
        let len = if k > 3 { 1usize << k } else { 0 };
        LopScratch { best: vec![0; len] }
    }

    pub(crate) fn max_value(&mut self, m: &[i64], k: usize) -> i64 {
        match k {
            1 => 0,
            2 => m[1].max(m[2]),
            3 => {
                let (ab, ac, ba, bc, ca, cb) = (m[1], m[2], m[3], m[5], m[6], m[7]);
                (ab + ac + bc)
                    .max(ac + ab + cb)
                    .max(ba + bc + ac)
                    .max(bc + ba + ca)
                    .max(ca + cb + ab)
                    .max(cb + ca + ba)
            }
            _ => {
                let full = (1usize << k) - 1;
                let best = &mut self.best;
                best[0] = 0;
                for set in 1..=full {
                    let mut top = i64::MIN;
                    let mut rest = set;
                    while rest != 0 {
                        let j = rest.trailing_zeros() as usize;
                        rest &= rest - 1;
                        let without = set & !(1 << j);
                        let mut gain = 0;
                        let mut others = without;
                        while others != 0 {
                            let i = others.trailing_zeros() as usize;
                            others &= others - 1;
                            gain += m[j * k + i];
                        }
                        top = top.max(best[without] + gain);
                    }
                    best[set] = top;
                }
                best[full]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> PreferenceMatrix {
        PreferenceMatrix::from_rows(&[
            vec![0., 3., 4.],
            vec![1., 0., 2.],
            vec![0., 2., 0.],
        ])
        .unwrap()
    }

    fn hours() -> PreferenceMatrix {
        PreferenceMatrix::from_rows(&[
            vec![0., 43., 19.],
            vec![7., 0., 2.],
            vec![11., 13., 0.],
        ])
        .unwrap()
    }

    fn tied_hours() -> PreferenceMatrix {
        PreferenceMatrix::from_rows(&[
            vec![0., 42., 18.5],
            vec![8., 0., 2.],
            vec![11.5, 13., 0.],
        ])
        .unwrap()
    }

    #[test]
    fn dp_small_breaks_tie_lexicographically() {
        let sol = lop_exact_dp(&small()).unwrap();
        assert_eq!(sol.value, Half::from_int(9));
        assert_eq!(sol.order, vec![0, 1, 2]);
        assert_eq!(order_value(&small(), &[0, 2, 1]), Half::from_int(9));
    }

    #[test]
    fn dp_hours() {
        let sol = lop_exact_dp(&hours()).unwrap();
        assert_eq!(sol.value, Half::from_int(75));
        assert_eq!(sol.order, vec![0, 2, 1]);
    }

    #[test]
    fn single_group() {
        let m = PreferenceMatrix::zeros(1);
        let sol = lop_exact_dp(&m).unwrap();
        assert_eq!(sol.value, Half::ZERO);
        assert_eq!(sol.order, vec![0]);
        assert_eq!(lop_bruteforce(&m).unwrap(), sol);
    }

    #[test]
    fn bruteforce_hours_all_orders() {
        let values: Vec<i64> = all_order_values(&hours())
            .unwrap()
            .into_iter()
            .map(|(_, v)| v.halves() / 2)
            .collect();
        // ABC, ACB, BAC, BCA, CAB, CBA
        assert_eq!(values, vec![64, 75, 28, 20, 67, 31]);
    }

    #[test]
    fn bruteforce_tied_example() {
        let sol = lop_bruteforce(&tied_hours()).unwrap();
        assert_eq!(sol.value, Half::from_halves(147));
        assert_eq!(sol.order, vec![0, 2, 1]);
        assert_eq!(lop_exact_dp(&tied_hours()).unwrap(), sol);
    }

    #[test]
    fn two_groups() {
        for (x, y) in [(3., 5.), (5., 3.), (4.5, 4.5)] {
            let m = PreferenceMatrix::from_rows(&[vec![0., x], vec![y, 0.]]).unwrap();
            let expected = Half::from_halves((x.max(y) * 2.0) as i64);
            assert_eq!(lop_bruteforce(&m).unwrap().value, expected);
            assert_eq!(lop_exact_dp(&m).unwrap().value, expected);
        }
    }

    #[test]
    fn capacity_errors() {
        let big = PreferenceMatrix::zeros(BRUTE_MAX_GROUPS + 1);
        assert!(matches!(lop_bruteforce(&big), Err(Error::Capacity(_))));
        let huge = PreferenceMatrix::zeros(DP_MAX_GROUPS + 1);
        assert!(matches!(lop_exact_dp(&huge), Err(Error::Capacity(_))));
        assert!(lop_exact_dp(&PreferenceMatrix::zeros(0)).is_err());
    }

    #[test]
    fn from_rows_rejects_quarters() {
        assert!(PreferenceMatrix::from_rows(&[vec![0., 0.25], vec![1., 0.]]).is_err());
        assert!(PreferenceMatrix::from_rows(&[vec![0., 1.]]).is_err());
    }

    #[test]
    fn scratch_matches_dp() {
        for m in [small(), hours()] {
            let raw: Vec<i64> = (0..3)
                .flat_map(|r| (0..3).map(move |s| (r, s)))
                .map(|(r, s)| if r == s { 0 } else { m.get(r, s).halves() })
                .collect();
            let mut scratch = LopScratch::new(3);
            assert_eq!(
                scratch.max_value(&raw, 3),
                lop_exact_dp(&m).unwrap().value.halves()
            );
        }
    }

    #[test]
    fn next_permutation_counts() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(p, vec![3, 2, 1, 0]);
    }
}
