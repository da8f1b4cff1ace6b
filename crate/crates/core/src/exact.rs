//! Exact null distributions by enumeration of every distinct arrangement.
//!
//! Under the null hypothesis all n!/Π n_i! label sequences are equally
//! likely. The enumerator descends over the remaining group counts, placing
//! one label per level, and keeps the preference matrix and rank sums up to
//! date incrementally so that a leaf only costs one LOP solve. Work is split
//! into disjoint label prefixes, each task filling a private histogram; the
//! merge is integer addition, so results do not depend on the worker count.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::half::Half;
use crate::kruskal::{kw_from_signature, signature_scale};
use crate::lop::LopScratch;
use crate::ranking::GroupSizes;

/// Default cap on the number of enumerated arrangements.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Disorder,
    Kw,
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Disorder => "disorder",
            Statistic::Kw => "kw",
        })
    }
}

#[derive(Debug, Clone)]
pub struct EnumerationConfig {
    /// Maximum number of arrangements to visit.
    pub budget: u64,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig {
            budget: DEFAULT_BUDGET,
            workers: None,
        }
    }
}

/// One support point: the statistic's exact key and its number of arrangements.
///
/// For the disorder the key is the disorder in halves; for KW it is the
/// rank-sum signature (see [`crate::kruskal`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub key: u128,
    pub count: BigUint,
}

impl Atom {
    pub fn disorder(&self) -> Half {
        Half::from_halves(self.key as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDistribution {
    sizes: GroupSizes,
    statistic: Statistic,
    scale: u128,
    atoms: Vec<Atom>,
    total: BigUint,
}

impl ExactDistribution {
    /// Assembles a distribution from stored parts, checking Σ counts = n!/Π n_i!.
    pub fn from_parts(
        sizes: GroupSizes,
        statistic: Statistic,
        mut atoms: Vec<Atom>,
    ) -> Result<Self> {
        let total = sizes.multinomial();
        let sum: BigUint = atoms.iter().map(|a| &a.count).sum();
        if sum != total {
            return Err(Error::Structure(format!(
                "atom counts sum to {sum}, expected {total}"
            )));
        }
        atoms.sort_by_key(|a| a.key);
        if atoms.windows(2).any(|w| w[0].key == w[1].key) {
            return Err(Error::Structure("duplicate support point".into()));
        }
        let scale = match statistic {
            Statistic::Disorder => 1,
            Statistic::Kw => signature_scale(&sizes)?,
        };
        Ok(ExactDistribution {
            sizes,
            statistic,
            scale,
            atoms,
            total,
        })
    }

    pub fn sizes(&self) -> &GroupSizes {
        &self.sizes
    }

    pub fn statistic(&self) -> Statistic {
        self.statistic
    }

    /// Support points in increasing order of the statistic.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// n!/Π n_i!.
    pub fn total(&self) -> &BigUint {
        &self.total
    }

    /// Relabels the distribution to another ordering of the same multiset of sizes.
    pub fn with_sizes(mut self, sizes: GroupSizes) -> Result<Self> {
        if sizes.canonical() != self.sizes.canonical() {
            return Err(Error::Structure(format!(
                "sizes {sizes} are not a reordering of {}",
                self.sizes
            )));
        }
        self.sizes = sizes;
        Ok(self)
    }

    /// The statistic's value at an atom (disorder, or KW).
    pub fn value(&self, atom: &Atom) -> f64 {
        match self.statistic {
            Statistic::Disorder => atom.disorder().to_f64(),
            Statistic::Kw => kw_from_signature(atom.key, &self.sizes, self.scale).max(0.0),
        }
    }

    pub fn probability(&self, atom: &Atom) -> f64 {
        ratio_to_f64(&atom.count, &self.total)
    }

    /// Number of arrangements with key ≤ `key`.
    pub fn count_le(&self, key: u128) -> BigUint {
        self.atoms
            .iter()
            .take_while(|a| a.key <= key)
            .map(|a| &a.count)
            .sum()
    }

    /// Number of arrangements with key ≥ `key`.
    pub fn count_ge(&self, key: u128) -> BigUint {
        self.atoms
            .iter()
            .filter(|a| a.key >= key)
            .map(|a| &a.count)
            .sum()
    }

    /// Signature scale L used to decode KW keys.
    pub fn scale(&self) -> u128 {
        self.scale
    }
}

pub(crate) fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
        .to_f64()
        .unwrap_or(f64::NAN)
}

fn serialize_biguint<S: Serializer>(value: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&value.to_str_radix(10))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// P(disorder ≤ observed): small disorder is evidence against the null.
    DisorderAtMost,
    /// P(KW ≥ observed).
    KwAtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// A p-value kept as an exact ratio `numerator / denominator`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PValueResult {
    pub statistic_value: f64,
    pub p_value: f64,
    #[serde(serialize_with = "serialize_biguint")]
    pub numerator: BigUint,
    #[serde(serialize_with = "serialize_biguint")]
    pub denominator: BigUint,
    pub direction: Direction,
    pub method: Method,
    /// Arrangements enumerated (exact) or samples drawn (Monte Carlo).
    #[serde(serialize_with = "serialize_biguint")]
    pub total_enumerated: BigUint,
}

/// Enumerates the exact null distribution of `statistic` for `sizes`.
pub fn enumerate_distribution(
    sizes: &GroupSizes,
    statistic: Statistic,
    config: &EnumerationConfig,
) -> Result<ExactDistribution> {
    if sizes.k() < 2 {
        return Err(Error::Degenerate(format!(
            "sizes {sizes} have fewer than two groups"
        )));
    }
    check_budget(sizes, config.budget)?;
    if statistic == Statistic::Kw {
        // Surface overflow before any work is done.
        let scale = signature_scale(sizes)?;
        let max_rank_halves = (sizes.n() * (sizes.n() + 1)) as i64;
        let extreme: Vec<i64> = vec![max_rank_halves; sizes.k()];
        crate::kruskal::kw_signature(&extreme, sizes, scale)?;
    }
    let workers = config.workers.unwrap_or_else(rayon::current_num_threads).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let prefixes = prefixes(sizes, workers);
    let atoms = pool.install(|| match statistic {
        Statistic::Disorder => {
            let merged = prefixes
                .par_iter()
                .map(|prefix| disorder_histogram(sizes, prefix))
                .reduce(
                    || vec![0u64; sizes.total_cross_pairs() as usize + 1],
                    |mut a, b| {
                        for (x, y) in a.iter_mut().zip(b) {
                            *x += y;
                        }
                        a
                    },
                );
            merged
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c > 0)
                .map(|(d, c)| Atom {
                    key: 2 * d as u128,
                    count: BigUint::from(c),
                })
                .collect::<Vec<_>>()
        }
        Statistic::Kw => {
            let merged = prefixes
                .par_iter()
                .map(|prefix| kw_histogram(sizes, prefix).into_iter().collect::<BTreeMap<_, _>>())
                .reduce(BTreeMap::new, |mut a, b| {
                    for (key, c) in b {
                        *a.entry(key).or_insert(0u64) += c;
                    }
                    a
                });
            merged
                .into_iter()
                .map(|(key, c)| Atom {
                    key,
                    count: BigUint::from(c),
                })
                .collect::<Vec<_>>()
        }
    });
    ExactDistribution::from_parts(sizes.clone(), statistic, atoms)
}

fn check_budget(sizes: &GroupSizes, budget: u64) -> Result<()> {
    let count = sizes.multinomial();
    if count > BigUint::from(budget) {
        return Err(Error::Capacity(format!(
            "sizes {sizes} have {count} arrangements, exceeding the enumeration budget of {budget}; \
             use the Monte Carlo method"
        )));
    }
    Ok(())
}

/// Exact P(disorder ≤ observed). Tied observations give half-integer values,
/// which are compared against the tie-free null.
pub fn exact_pvalue(
    sizes: &GroupSizes,
    observed: Half,
    config: &EnumerationConfig,
) -> Result<PValueResult> {
    let dist = enumerate_distribution(sizes, Statistic::Disorder, config)?;
    disorder_pvalue(&dist, observed)
}

/// P(disorder ≤ observed) read off an enumerated disorder distribution.
pub fn disorder_pvalue(dist: &ExactDistribution, observed: Half) -> Result<PValueResult> {
    if dist.statistic() != Statistic::Disorder {
        return Err(Error::Structure("expected a disorder distribution".into()));
    }
    let key = observed.halves().max(0) as u128;
    let count = if observed.halves() < 0 {
        BigUint::zero()
    } else {
        dist.count_le(key)
    };
    Ok(PValueResult {
        statistic_value: observed.to_f64(),
        p_value: ratio_to_f64(&count, dist.total()),
        numerator: count,
        denominator: dist.total().clone(),
        direction: Direction::DisorderAtMost,
        method: Method::Exact,
        total_enumerated: dist.total().clone(),
    })
}

/// Exact P(KW ≥ observed) for tie-free data. The observed value is matched
/// to support points within 1e-9, so rounded inputs such as 4.57 still need
/// to be at or below the atom they denote.
pub fn exact_kw_pvalue(
    sizes: &GroupSizes,
    observed: f64,
    config: &EnumerationConfig,
) -> Result<PValueResult> {
    let dist = enumerate_distribution(sizes, Statistic::Kw, config)?;
    kw_pvalue_at_least(&dist, observed)
}

/// P(KW ≥ observed) on an enumerated KW distribution (float observed value).
pub fn kw_pvalue_at_least(dist: &ExactDistribution, observed: f64) -> Result<PValueResult> {
    if dist.statistic() != Statistic::Kw {
        return Err(Error::Structure("expected a KW distribution".into()));
    }
    let count: BigUint = dist
        .atoms()
        .iter()
        .filter(|a| dist.value(a) >= observed - 1e-9)
        .map(|a| &a.count)
        .sum();
    Ok(PValueResult {
        statistic_value: observed,
        p_value: ratio_to_f64(&count, dist.total()),
        numerator: count,
        denominator: dist.total().clone(),
        direction: Direction::KwAtLeast,
        method: Method::Exact,
        total_enumerated: dist.total().clone(),
    })
}

/// P(KW ≥ observed) with the observation given by its exact rank-sum signature.
pub fn kw_pvalue_for_signature(dist: &ExactDistribution, signature: u128) -> Result<PValueResult> {
    if dist.statistic() != Statistic::Kw {
        return Err(Error::Structure("expected a KW distribution".into()));
    }
    let count = dist.count_ge(signature);
    Ok(PValueResult {
        statistic_value: kw_from_signature(signature, dist.sizes(), dist.scale()).max(0.0),
        p_value: ratio_to_f64(&count, dist.total()),
        numerator: count,
        denominator: dist.total().clone(),
        direction: Direction::KwAtLeast,
        method: Method::Exact,
        total_enumerated: dist.total().clone(),
    })
}

/// Critical disorder for one significance level: the largest d with P(D ≤ d) ≤ α.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalValue {
    pub alpha: f64,
    /// `None` when even the smallest atom exceeds α.
    pub critical: Option<Half>,
    pub attained_p: Option<f64>,
    #[serde(skip)]
    pub attained_count: Option<BigUint>,
}

/// Conservative critical values of the disorder test (attained p ≤ α).
pub fn critical_values(dist: &ExactDistribution, alphas: &[f64]) -> Result<Vec<CriticalValue>> {
    if dist.statistic() != Statistic::Disorder {
        return Err(Error::Structure("expected a disorder distribution".into()));
    }
    alphas
        .iter()
        .map(|&alpha| {
            let bound = BigRational::from_float(alpha)
                .filter(|_| (0.0..=1.0).contains(&alpha))
                .ok_or_else(|| Error::Config(format!("significance level {alpha} not in [0, 1]")))?;
            let total = BigInt::from(dist.total().clone());
            let mut cumulative = BigUint::zero();
            let mut best: Option<(Half, BigUint)> = None;
            for atom in dist.atoms() {
                cumulative += &atom.count;
                let p = BigRational::new(BigInt::from(cumulative.clone()), total.clone());
                if p <= bound {
                    best = Some((atom.disorder(), cumulative.clone()));
                } else {
                    break;
                }
            }
            Ok(match best {
                Some((d, count)) => CriticalValue {
                    alpha,
                    critical: Some(d),
                    attained_p: Some(ratio_to_f64(&count, dist.total())),
                    attained_count: Some(count),
                },
                None => CriticalValue {
                    alpha,
                    critical: None,
                    attained_p: None,
                    attained_count: None,
                },
            })
        })
        .collect()
}

/// All label prefixes of a fixed depth, in lexicographic order. The depth
/// starts at two and grows until there are enough tasks to balance the workers.
fn prefixes(sizes: &GroupSizes, workers: usize) -> Vec<Vec<usize>> {
    let n = sizes.n();
    let target = 16 * workers;
    let mut depth = 2.min(n);
    loop {
        let found = prefixes_of_depth(sizes, depth);
        if found.len() >= target || depth + 2 > n || depth >= 12 {
            return found;
        }
        depth += 1;
    }
}

fn prefixes_of_depth(sizes: &GroupSizes, depth: usize) -> Vec<Vec<usize>> {
    fn extend(remaining: &mut [u32], current: &mut Vec<usize>, depth: usize, out: &mut Vec<Vec<usize>>) {
        if current.len() == depth {
            out.push(current.clone());
            return;
        }
        for g in 0..remaining.len() {
            if remaining[g] > 0 {
                remaining[g] -= 1;
                current.push(g);
                extend(remaining, current, depth, out);
                current.pop();
                remaining[g] += 1;
            }
        }
    }
    let mut out = Vec::new();
    let mut remaining = sizes.sizes().to_vec();
    extend(&mut remaining, &mut Vec::new(), depth, &mut out);
    out
}

/// Incremental state of a partial arrangement.
struct Walker {
    k: usize,
    n: usize,
    remaining: Vec<u32>,
    placed: Vec<i64>,
    /// m[h*k + g]: integer count of h-before-g pairs so far.
    matrix: Vec<i64>,
    /// Integer rank sums (no ties during enumeration).
    rank_sums: Vec<i64>,
    labels: Vec<usize>,
}

impl Walker {
    fn new(sizes: &GroupSizes) -> Self {
        let k = sizes.k();
        Walker {
            k,
            n: sizes.n(),
            remaining: sizes.sizes().to_vec(),
            placed: vec![0; k],
            matrix: vec![0; k * k],
            rank_sums: vec![0; k],
            labels: Vec::with_capacity(sizes.n()),
        }
    }

    #[inline]
    fn place(&mut self, g: usize) {
        let k = self.k;
        for h in 0..k {
            if h != g {
                self.matrix[h * k + g] += self.placed[h];
            }
        }
        self.placed[g] += 1;
        self.remaining[g] -= 1;
        self.labels.push(g);
        self.rank_sums[g] += self.labels.len() as i64;
    }

    #[inline]
    fn unplace(&mut self, g: usize) {
        let k = self.k;
        self.rank_sums[g] -= self.labels.len() as i64;
        self.labels.pop();
        self.remaining[g] += 1;
        self.placed[g] -= 1;
        for h in 0..k {
            if h != g {
                self.matrix[h * k + g] -= self.placed[h];
            }
        }
    }

    /// Appends `count` copies of `g` in O(k).
    fn place_run(&mut self, g: usize, count: u32) {
        let k = self.k;
        let c = count as i64;
        for h in 0..k {
            if h != g {
                self.matrix[h * k + g] += self.placed[h] * c;
            }
        }
        let before = self.labels.len() as i64;
        self.rank_sums[g] += c * before + c * (c + 1) / 2;
        self.placed[g] += c;
        self.remaining[g] -= count;
        self.labels.resize(self.labels.len() + count as usize, g);
    }

    fn unplace_run(&mut self, g: usize, count: u32) {
        let k = self.k;
        let c = count as i64;
        self.labels.truncate(self.labels.len() - count as usize);
        let before = self.labels.len() as i64;
        self.rank_sums[g] -= c * before + c * (c + 1) / 2;
        self.placed[g] -= c;
        self.remaining[g] += count;
        for h in 0..k {
            if h != g {
                self.matrix[h * k + g] -= self.placed[h] * c;
            }
        }
    }

    fn walk<F: FnMut(&Walker)>(&mut self, visit: &mut F) {
        if self.labels.len() == self.n {
            visit(self);
            return;
        }
        // With a single group left the rest of the sequence is forced.
        let mut open = (0..self.k).filter(|&g| self.remaining[g] > 0);
        let first = open.next().expect("labels remain");
        if open.next().is_none() {
            let count = self.remaining[first];
            self.place_run(first, count);
            visit(self);
            self.unplace_run(first, count);
            return;
        }
        for g in 0..self.k {
            if self.remaining[g] > 0 {
                self.place(g);
                self.walk(visit);
                self.unplace(g);
            }
        }
    }
}

fn run_prefix<F: FnMut(&Walker)>(sizes: &GroupSizes, prefix: &[usize], mut visit: F) {
    let mut walker = Walker::new(sizes);
    for &g in prefix {
        walker.place(g);
    }
    walker.walk(&mut visit);
}

fn disorder_histogram(sizes: &GroupSizes, prefix: &[usize]) -> Vec<u64> {
    let total_pairs = sizes.total_cross_pairs() as i64;
    let mut hist = vec![0u64; total_pairs as usize + 1];
    let mut scratch = LopScratch::new(sizes.k());
    #[cfg(debug_assertions)]
    let mut leaves = 0u64;
    run_prefix(sizes, prefix, |w| {
        let d = total_pairs - scratch.max_value(&w.matrix, w.k);
        hist[d as usize] += 1;
        #[cfg(debug_assertions)]
        {
            leaves += 1;
            if leaves % 97 == 1 {
                spot_check_disorder(sizes, w, d);
            }
        }
    });
    hist
}

fn kw_histogram(sizes: &GroupSizes, prefix: &[usize]) -> HashMap<u128, u64> {
    let scale = signature_scale(sizes).expect("checked before enumeration");
    let weights: Vec<u128> = sizes.sizes().iter().map(|&n| scale / n as u128).collect();
    let mut hist: HashMap<u128, u64> = HashMap::new();
    run_prefix(sizes, prefix, |w| {
        let signature: u128 = w
            .rank_sums
            .iter()
            .zip(&weights)
            .map(|(&r, &wt)| {
                let doubled = 2 * r as u128;
                doubled * doubled * wt
            })
            .sum();
        *hist.entry(signature).or_insert(0) += 1;
    });
    hist
}

/// Recomputes a sampled leaf from scratch through the public statistic path.
#[cfg(debug_assertions)]
fn spot_check_disorder(sizes: &GroupSizes, w: &Walker, d: i64) {
    use crate::concordance::{disorder, preference_matrix};
    use crate::ranking::Arrangement;
    let arr = Arrangement::from_labels(&w.labels);
    let m = preference_matrix(&arr, sizes).expect("valid leaf");
    for r in 0..w.k {
        for s in 0..w.k {
            if r != s {
                debug_assert_eq!(m.get(r, s), Half::from_int(w.matrix[r * w.k + s]));
            }
        }
    }
    let full = disorder(&arr, sizes).expect("valid leaf");
    debug_assert_eq!(full.disorder, Half::from_int(d));
    debug_assert_eq!(
        full.disorder + full.lop_value,
        Half::from_int(sizes.total_cross_pairs() as i64)
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(s: &[u32]) -> GroupSizes {
        GroupSizes::new(s.to_vec()).unwrap()
    }

    fn counts(dist: &ExactDistribution) -> Vec<(u128, u64)> {
        dist.atoms()
            .iter()
            .map(|a| (a.key, a.count.to_u64().unwrap()))
            .collect()
    }

    #[test]
    fn disorder_222() {
        let dist =
            enumerate_distribution(&sizes(&[2, 2, 2]), Statistic::Disorder, &Default::default())
                .unwrap();
        let c: Vec<u64> = counts(&dist).into_iter().map(|(_, c)| c).collect();
        assert_eq!(c, vec![6, 12, 18, 18, 18, 12, 6]);
        let keys: Vec<u128> = counts(&dist).into_iter().map(|(k, _)| k).collect();
        assert_eq!(keys, (0..=6).map(|d| 2 * d).collect::<Vec<_>>());
        assert_eq!(dist.total(), &BigUint::from(90u32));
    }

    #[test]
    fn disorder_21() {
        let dist =
            enumerate_distribution(&sizes(&[2, 1]), Statistic::Disorder, &Default::default())
                .unwrap();
        assert_eq!(counts(&dist), vec![(0, 2), (2, 1)]);
    }

    #[test]
    fn kw_222_matches_table() {
        let dist =
            enumerate_distribution(&sizes(&[2, 2, 2]), Statistic::Kw, &Default::default()).unwrap();
        let rows: Vec<(String, u64)> = dist
            .atoms()
            .iter()
            .map(|a| (format!("{:.2}", dist.value(a)), a.count.to_u64().unwrap()))
            .collect();
        let expected = [
            ("0.00", 6),
            ("0.29", 12),
            ("0.86", 12),
            ("1.14", 12),
            ("2.00", 12),
            ("2.57", 6),
            ("3.43", 12),
            ("3.71", 12),
            ("4.57", 6),
        ];
        let expected: Vec<(String, u64)> =
            expected.iter().map(|(v, c)| (v.to_string(), *c)).collect();
        assert_eq!(rows, expected);
    }

    #[test]
    fn pvalues_222() {
        let s = sizes(&[2, 2, 2]);
        let cfg = EnumerationConfig::default();
        let p6 = exact_pvalue(&s, Half::from_int(6), &cfg).unwrap();
        assert_eq!(p6.p_value, 1.0);
        let p0 = exact_pvalue(&s, Half::ZERO, &cfg).unwrap();
        assert_eq!(p0.numerator, BigUint::from(6u32));
        assert!((p0.p_value - 0.06667).abs() < 1e-5);
        // A half-integer observation uses the same threshold on the integer support.
        let p_half = exact_pvalue(&s, Half::from_halves(3), &cfg).unwrap();
        assert_eq!(p_half.numerator, BigUint::from(18u32));

        let kw_top = exact_kw_pvalue(&s, 4.57, &cfg).unwrap();
        assert_eq!(kw_top.numerator, BigUint::from(6u32));
        let kw_zero = exact_kw_pvalue(&s, 0.0, &cfg).unwrap();
        assert_eq!(kw_zero.p_value, 1.0);
    }

    #[test]
    fn critical_values_222() {
        let dist = enumerate_distribution(
            &sizes(&[2, 2, 2]),
            Statistic::Disorder,
            &Default::default(),
        )
        .unwrap();
        let rows = critical_values(&dist, &[0.10, 0.05, 0.01, 0.2]).unwrap();
        assert_eq!(rows[0].critical, Some(Half::ZERO));
        assert!((rows[0].attained_p.unwrap() - 6.0 / 90.0).abs() < 1e-15);
        assert_eq!(rows[1].critical, None);
        assert_eq!(rows[2].critical, None);
        // P(D ≤ 1) = 18/90 = 0.2 exactly, so the bound is attained.
        assert_eq!(rows[3].critical, Some(Half::from_int(1)));
        assert!(critical_values(&dist, &[1.5]).is_err());
    }

    #[test]
    fn budget_and_degenerate_errors() {
        let cfg = EnumerationConfig {
            budget: 89,
            workers: Some(1),
        };
        assert!(matches!(
            enumerate_distribution(&sizes(&[2, 2, 2]), Statistic::Disorder, &cfg),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            enumerate_distribution(&sizes(&[6, 6, 6, 6]), Statistic::Disorder, &Default::default()),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            enumerate_distribution(&sizes(&[5]), Statistic::Disorder, &Default::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let s = sizes(&[3, 3, 2, 2]);
        for stat in [Statistic::Disorder, Statistic::Kw] {
            let one = enumerate_distribution(&s, stat, &EnumerationConfig { workers: Some(1), ..Default::default() }).unwrap();
            let two = enumerate_distribution(&s, stat, &EnumerationConfig { workers: Some(2), ..Default::default() }).unwrap();
            let many = enumerate_distribution(&s, stat, &EnumerationConfig { workers: Some(7), ..Default::default() }).unwrap();
            assert_eq!(one, two);
            assert_eq!(one, many);
        }
    }

    #[test]
    fn prefixes_cover_everything_once() {
        let s = sizes(&[3, 2, 1]);
        for workers in [1, 4, 32] {
            let ps = prefixes(&s, workers);
            let mut leaves = 0u64;
            for p in &ps {
                run_prefix(&s, p, |_| leaves += 1);
            }
            assert_eq!(BigUint::from(leaves), s.multinomial());
        }
    }

    #[test]
    fn from_parts_rejects_bad_totals() {
        let s = sizes(&[2, 1]);
        let atoms = vec![Atom { key: 0, count: BigUint::from(2u32) }];
        assert!(ExactDistribution::from_parts(s, Statistic::Disorder, atoms).is_err());
    }
}
