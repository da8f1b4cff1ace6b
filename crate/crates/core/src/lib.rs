//! Concordance coefficient test for k unrelated samples.
//!
//! The statistic is the Kendall-τ disorder of the observed arrangement of
//! group labels: the fewest pairwise swaps needed to list every group
//! consecutively, found by solving a Linear Ordering Problem on the group
//! preference matrix. The crate computes the statistic (with ties), its exact
//! null distribution by parallel enumeration, Monte Carlo approximations for
//! larger designs, and the Kruskal-Wallis statistic for comparison.
//!
//! ```
//! use concordance::{disorder, parse_pre_ranked, Half};
//!
//! let data = parse_pre_ranked("a b a c c b").unwrap();
//! let result = disorder(&data.arrangement, &data.sizes).unwrap();
//! assert_eq!(result.disorder, Half::from_int(3));
//! assert_eq!(result.tau, 0.5);
//! ```

pub mod concordance;
pub mod error;
pub mod exact;
pub mod half;
pub mod kendall;
pub mod kruskal;
pub mod lop;
pub mod montecarlo;
pub mod multiset;
pub mod ranking;

pub use concordance::{
    disorder, disorder_oracle, max_disorder, max_disorder_bruteforce, pentagonal,
    preference_matrix, DisorderResult,
};
pub use error::{Error, Result};
pub use exact::{
    critical_values, disorder_pvalue, enumerate_distribution, exact_kw_pvalue, exact_pvalue,
    kw_pvalue_at_least, kw_pvalue_for_signature, Atom, CriticalValue, Direction,
    EnumerationConfig, ExactDistribution, Method, PValueResult, Statistic,
};
pub use half::Half;
pub use kendall::{kendall_correlation, kendall_distance};
pub use kruskal::{kruskal_wallis, kw_max, tie_correction, KwResult};
pub use lop::{lop_bruteforce, lop_exact_dp, LopSolution, PreferenceMatrix};
pub use montecarlo::{
    clopper_pearson, mc_distribution, mc_pvalue, mc_test, McConfig, McEstimate, McHistogram,
    McTest,
};
pub use ranking::{
    arrangement_from_data, midranks, parse_pre_ranked, Arrangement, GroupSizes, GroupedData,
    RankAssignment, Record,
};
