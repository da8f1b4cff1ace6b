//! Sequential generation of distinct multiset permutations.

use crate::error::{Error, Result};
use crate::lop::next_permutation;
use crate::ranking::GroupSizes;

/// Every distinct label sequence for `sizes`, in lexicographic order.
///
/// Intended for small designs and cross-checks; the parallel enumerator in
/// [`crate::exact`] is the production path.
pub fn multiset_permutations(sizes: &GroupSizes, limit: u64) -> Result<Vec<Vec<usize>>> {
    let count = sizes.multinomial();
    if count > limit.into() {
        return Err(Error::Capacity(format!(
            "sizes {sizes} have {count} arrangements, more than the limit {limit}"
        )));
    }
    let mut current: Vec<usize> = sizes
        .sizes()
        .iter()
        .enumerate()
        .flat_map(|(g, &n)| std::iter::repeat_n(g, n as usize))
        .collect();
    let mut out = vec![current.clone()];
    while next_permutation(&mut current) {
        out.push(current.clone());
    }
    Ok(out)
}
