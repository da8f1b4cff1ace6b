//! Group structures, arrangements of group labels, and midranks.
//!
//! An [`Arrangement`] is the sequence of group labels obtained by sorting all
//! observations by value. Observations with equal values form one tie block.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::half::Half;

/// Sample sizes `(n_1, ..., n_k)` of the groups being compared.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct GroupSizes {
    sizes: Vec<u32>,
}

impl GroupSizes {
    pub fn new(sizes: Vec<u32>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::EmptyInput("at least one group is required".into()));
        }
        if let Some(i) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Structure(format!("group {i} has size 0")));
        }
        Ok(GroupSizes { sizes })
    }

    /// Parses a comma separated list such as `10,5,3`.
    pub fn parse(text: &str) -> Result<Self> {
        let sizes = text
            .split(',')
            .map(|t| t.trim())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("invalid group size {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        GroupSizes::new(sizes)
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().map(|&s| s as usize).sum()
    }

    pub fn size(&self, group: usize) -> u32 {
        self.sizes[group]
    }

    /// Σ_{r<s} n_r·n_s, the number of cross-group pairs.
    pub fn total_cross_pairs(&self) -> u64 {
        let mut seen = 0u64;
        let mut total = 0u64;
        for &s in &self.sizes {
            total += seen * s as u64;
            seen += s as u64;
        }
        total
    }

    /// Number of distinct label sequences, n! / Π n_i!.
    pub fn multinomial(&self) -> BigUint {
        let mut result = BigUint::one();
        let mut placed = 0u64;
        // Product of binomials C(placed + s, s), each step exact.
        for &s in &self.sizes {
            for j in 1..=s as u64 {
                result *= placed + j;
                result /= j;
            }
            placed += s as u64;
        }
        result
    }

    /// Sizes sorted in descending order; the null distributions only depend on this.
    pub fn canonical(&self) -> GroupSizes {
        let mut sizes = self.sizes.clone();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        GroupSizes { sizes }
    }
}

impl TryFrom<Vec<u32>> for GroupSizes {
    type Error = Error;
    fn try_from(sizes: Vec<u32>) -> Result<Self> {
        GroupSizes::new(sizes)
    }
}

impl From<GroupSizes> for Vec<u32> {
    fn from(sizes: GroupSizes) -> Self {
        sizes.sizes
    }
}

impl fmt::Display for GroupSizes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Ordered tie blocks of group indices. A block of length one is an untied observation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arrangement {
    blocks: Vec<Vec<usize>>,
}

impl Arrangement {
    /// Builds an arrangement from tie blocks. Each block is stored sorted.
    pub fn from_blocks(blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.iter().any(|b| b.is_empty()) {
            return Err(Error::Structure("empty tie block".into()));
        }
        let blocks = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        Ok(Arrangement { blocks })
    }

    /// An arrangement without ties.
    pub fn from_labels(labels: &[usize]) -> Self {
        Arrangement {
            blocks: labels.iter().map(|&g| vec![g]).collect(),
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn has_ties(&self) -> bool {
        self.blocks.iter().any(|b| b.len() > 1)
    }

    /// Sizes t of tie blocks with t > 1.
    pub fn tie_block_sizes(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .map(Vec::len)
            .filter(|&t| t > 1)
            .collect()
    }

    /// Group labels in position order (tie blocks flattened).
    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().flatten().copied()
    }

    /// Reconstructs the group sizes, assuming labels `0..=max`.
    pub fn group_sizes(&self) -> Result<GroupSizes> {
        let k = self
            .labels()
            .max()
            .map(|m| m + 1)
            .ok_or_else(|| Error::EmptyInput("empty arrangement".into()))?;
        let mut sizes = vec![0u32; k];
        for g in self.labels() {
            sizes[g] += 1;
        }
        GroupSizes::new(sizes)
    }

    /// Checks the arrangement holds exactly `n_i` observations of group `i`.
    pub fn validate(&self, sizes: &GroupSizes) -> Result<()> {
        let mut counts = vec![0u32; sizes.k()];
        for g in self.labels() {
            if g >= sizes.k() {
                return Err(Error::Structure(format!(
                    "group index {g} out of range for {} groups",
                    sizes.k()
                )));
            }
            counts[g] += 1;
        }
        if counts != sizes.sizes() {
            return Err(Error::Structure(format!(
                "arrangement counts {counts:?} do not match group sizes {:?}",
                sizes.sizes()
            )));
        }
        Ok(())
    }

    pub fn reversed(&self) -> Arrangement {
        Arrangement {
            blocks: self.blocks.iter().rev().cloned().collect(),
        }
    }

    /// Renames group `g` to `mapping[g]`.
    pub fn relabeled(&self, mapping: &[usize]) -> Arrangement {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mut b: Vec<usize> = b.iter().map(|&g| mapping[g]).collect();
                b.sort_unstable();
                b
            })
            .collect();
        Arrangement { blocks }
    }

    /// Renders with letters `a, b, c, ...` (numbers past `z`), ties in parentheses.
    pub fn notation(&self) -> String {
        let name = |g: usize| -> String {
            if g < 26 {
                ((b'a' + g as u8) as char).to_string()
            } else {
                format!("g{g}")
            }
        };
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                if b.len() == 1 {
                    name(b[0])
                } else {
                    let inner: Vec<String> = b.iter().map(|&g| name(g)).collect();
                    format!("({})", inner.join(" "))
                }
            })
            .collect();
        parts.join(" ")
    }
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.notation())
    }
}

/// Per-observation ranks in arrangement order; tied observations share their midrank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankAssignment {
    pub ranks: Vec<Half>,
}

impl RankAssignment {
    pub fn total(&self) -> Half {
        self.ranks.iter().copied().sum()
    }
}

/// Positions `i..=j` (1-based) of one tie block all receive `(i + j) / 2`.
pub fn midranks(arr: &Arrangement) -> RankAssignment {
    let mut ranks = Vec::with_capacity(arr.len());
    let mut next = 1i64;
    for block in arr.blocks() {
        let first = next;
        let last = next + block.len() as i64 - 1;
        let mid = Half::from_halves(first + last);
        ranks.extend(std::iter::repeat_n(mid, block.len()));
        next = last + 1;
    }
    RankAssignment { ranks }
}

/// Per-group sums of midranks.
pub fn rank_sums(arr: &Arrangement, k: usize) -> Vec<Half> {
    let ranks = midranks(arr);
    let mut sums = vec![Half::ZERO; k];
    for (g, r) in arr.labels().zip(ranks.ranks) {
        sums[g] += r;
    }
    sums
}

/// A labelled observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub group: String,
    pub value: f64,
}

impl Record {
    pub fn new(group: impl Into<String>, value: f64) -> Self {
        Record {
            group: group.into(),
            value,
        }
    }

    /// Parses the value from text; rejects non-numeric and non-finite values.
    pub fn parse(group: &str, value: &str) -> Result<Self> {
        let parsed: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("non-numeric value {value:?}")))?;
        if !parsed.is_finite() {
            return Err(Error::Parse(format!("non-finite value {value:?}")));
        }
        Ok(Record::new(group.trim(), parsed))
    }
}

/// Group labels together with the arrangement they produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupedData {
    /// Label of group `i`, in first-appearance order.
    pub labels: Vec<String>,
    pub sizes: GroupSizes,
    pub arrangement: Arrangement,
}

impl GroupedData {
    /// Blocks spelled with label names, each block sorted by name.
    pub fn named_blocks(&self) -> Vec<Vec<&str>> {
        self.arrangement
            .blocks()
            .iter()
            .map(|b| {
                let mut names: Vec<&str> = b.iter().map(|&g| self.labels[g].as_str()).collect();
                names.sort_unstable();
                names
            })
            .collect()
    }
}

#[derive(Default)]
struct LabelTable {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelTable {
    fn intern(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        i
    }
}

/// Sorts observations by value; exactly equal values form one tie block.
pub fn arrangement_from_data(records: &[Record]) -> Result<GroupedData> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no observations".into()));
    }
    let mut table = LabelTable::default();
    let mut obs: Vec<(f64, usize)> = Vec::with_capacity(records.len());
    for r in records {
        if !r.value.is_finite() {
            return Err(Error::Parse(format!("non-finite value for group {:?}", r.group)));
        }
        obs.push((r.value, table.intern(&r.group)));
    }
    obs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut last: Option<f64> = None;
    for (value, g) in obs {
        // -0.0 and 0.0 compare equal and tie.
        match (last, blocks.last_mut()) {
            (Some(prev), Some(block)) if prev == value => block.push(g),
            _ => blocks.push(vec![g]),
        }
        last = Some(value);
    }
    let mut sorted = table.labels.clone();
    sorted.sort();
    let mapping: Vec<usize> = table
        .labels
        .iter()
        .map(|l| sorted.binary_search(l).expect("label present"))
        .collect();
    let arrangement = Arrangement::from_blocks(blocks)?.relabeled(&mapping);
    let sizes = arrangement.group_sizes()?;
    Ok(GroupedData {
        labels: sorted,
        sizes,
        arrangement,
    })
}

/// Parses a label sequence such as `a a (a c) c b`.
///
/// Labels are whitespace separated, parentheses enclose a tie block and `|`
/// acts as a separator. Group indices follow the sorted label names, so
/// `a`, `b`, `c` are groups 0, 1, 2 whatever comes first in the sequence.
pub fn parse_pre_ranked(text: &str) -> Result<GroupedData> {
    let mut table = LabelTable::default();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut open: Option<Vec<usize>> = None;
    let spaced = text.replace('(', " ( ").replace(')', " ) ").replace('|', " ");
    for token in spaced.split_whitespace() {
        match token {
            "(" => {
                if open.is_some() {
                    return Err(Error::Parse("nested tie group".into()));
                }
                open = Some(Vec::new());
            }
            ")" => match open.take() {
                Some(block) if !block.is_empty() => blocks.push(block),
                Some(_) => return Err(Error::Parse("empty tie group".into())),
                None => return Err(Error::Parse("unbalanced ')'".into())),
            },
            label => {
                let g = table.intern(label);
                match open.as_mut() {
                    Some(block) => block.push(g),
                    None => blocks.push(vec![g]),
                }
            }
        }
    }
    if open.is_some() {
        return Err(Error::Parse("unclosed '('".into()));
    }
    if blocks.is_empty() {
        return Err(Error::EmptyInput("no labels".into()));
    }
    let mut sorted = table.labels.clone();
    sorted.sort();
    let mapping: Vec<usize> = table
        .labels
        .iter()
        .map(|l| sorted.binary_search(l).expect("label present"))
        .collect();
    let arrangement = Arrangement::from_blocks(blocks)?.relabeled(&mapping);
    let sizes = arrangement.group_sizes()?;
    Ok(GroupedData {
        labels: sorted,
        sizes,
        arrangement,
    })
}
