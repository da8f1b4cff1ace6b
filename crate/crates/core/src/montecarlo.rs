//! Sampling-based p-values and null distributions.
//!
//! Every sample draws from its own ChaCha8 stream: the key comes from the
//! master seed and the stream number is the sample index. A sample is
//! therefore the same whichever worker evaluates it, and results do not
//! depend on the number of workers.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::exact::{Direction, Method, PValueResult, Statistic};
use crate::half::Half;
use crate::kruskal::{kw_from_signature, kw_signature, signature_scale};
use crate::lop::LopScratch;
use crate::ranking::{midranks, Arrangement, GroupSizes};

pub const MIN_PVALUE_SAMPLES: u64 = 100;
pub const MIN_DISTRIBUTION_SAMPLES: u64 = 1_000;

const CHUNK: u64 = 2_048;

#[derive(Debug, Clone)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub workers: Option<usize>,
}

/// Add-one Monte Carlo p-value with a 95% Clopper-Pearson interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
    pub seed: u64,
    /// Samples at least as extreme as the observation.
    pub exceed_count: u64,
}

impl McEstimate {
    fn new(exceed_count: u64, samples: u64, seed: u64) -> Self {
        let (ci_low, ci_high) = clopper_pearson(exceed_count + 1, samples + 1, 0.95);
        McEstimate {
            p_hat: (exceed_count + 1) as f64 / (samples + 1) as f64,
            ci_low,
            ci_high,
            samples,
            seed,
            exceed_count,
        }
    }

    pub fn to_pvalue(&self, statistic_value: f64, direction: Direction) -> PValueResult {
        PValueResult {
            statistic_value,
            p_value: self.p_hat,
            numerator: BigUint::from(self.exceed_count + 1),
            denominator: BigUint::from(self.samples + 1),
            direction,
            method: Method::MonteCarlo,
            total_enumerated: BigUint::from(self.samples),
        }
    }
}

/// Both Monte Carlo p-values from one pass over the samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McTest {
    pub disorder: McEstimate,
    pub kw: McEstimate,
}

/// Exact Clopper-Pearson interval for `successes` out of `trials`.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(successes <= trials && trials > 0);
    let tail = (1.0 - confidence) / 2.0;
    let x = successes as f64;
    let n = trials as f64;
    let low = if successes == 0 {
        0.0
    } else {
        Beta::new(x, n - x + 1.0)
            .expect("positive shape parameters")
            .inverse_cdf(tail)
    };
    let high = if successes == trials {
        1.0
    } else {
        Beta::new(x + 1.0, n - x)
            .expect("positive shape parameters")
            .inverse_cdf(1.0 - tail)
    };
    (low, high)
}

/// Generator for one sample index.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Label multiset permuted over a fixed tie-block structure, with the
/// statistics evaluated on each draw.
struct Sampler {
    k: usize,
    labels: Vec<usize>,
    /// Lengths of the tie blocks, in order.
    block_lens: Vec<usize>,
    rank_halves: Vec<i64>,
    total_pairs_halves: i64,
    sizes: GroupSizes,
    scale: u128,
}

impl Sampler {
    fn new(arr: &Arrangement, sizes: &GroupSizes) -> Result<Self> {
        arr.validate(sizes)?;
        Ok(Sampler {
            k: sizes.k(),
            labels: arr.labels().collect(),
            block_lens: arr.blocks().iter().map(Vec::len).collect(),
            rank_halves: midranks(arr).ranks.iter().map(|r| r.halves()).collect(),
            total_pairs_halves: 2 * sizes.total_cross_pairs() as i64,
            sizes: sizes.clone(),
            scale: signature_scale(sizes)?,
        })
    }

    fn untied(sizes: &GroupSizes) -> Result<Self> {
        let labels: Vec<usize> = sizes
            .sizes()
            .iter()
            .enumerate()
            .flat_map(|(g, &n)| std::iter::repeat_n(g, n as usize))
            .collect();
        Sampler::new(&Arrangement::from_labels(&labels), sizes)
    }

    /// Disorder in halves for a label sequence laid over the block structure.
    fn disorder_halves(&self, labels: &[usize], matrix: &mut [i64], placed: &mut [i64], scratch: &mut LopScratch) -> i64 {
        let k = self.k;
        matrix.fill(0);
        placed.fill(0);
        let mut start = 0;
        for &len in &self.block_lens {
            let block = &labels[start..start + len];
            for &g in block {
                for h in 0..k {
                    if h != g {
                        matrix[h * k + g] += 2 * placed[h];
                    }
                }
            }
            if len > 1 {
                for (i, &g) in block.iter().enumerate() {
                    for &h in &block[i + 1..] {
                        if g != h {
                            matrix[g * k + h] += 1;
                            matrix[h * k + g] += 1;
                        }
                    }
                }
            }
            for &g in block {
                placed[g] += 1;
            }
            start += len;
        }
        self.total_pairs_halves - scratch.max_value(matrix, k)
    }

    fn signature(&self, labels: &[usize], sums: &mut [i64]) -> u128 {
        sums.fill(0);
        for (&g, &r) in labels.iter().zip(&self.rank_halves) {
            sums[g] += r;
        }
        kw_signature(sums, &self.sizes, self.scale).expect("checked at construction")
    }

    /// Runs `samples` draws; `visit` sees (disorder halves, KW signature).
    fn run<A, F, M>(&self, config: &McConfig, init: impl Fn() -> A + Sync + Send, visit: F, merge: M) -> Result<A>
    where
        A: Send,
        F: Fn(&mut A, i64, u128) + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        // Fail early on signature overflow.
        let max_halves = (self.sizes.n() * (self.sizes.n() + 1)) as i64;
        kw_signature(&vec![max_halves; self.k], &self.sizes, self.scale)?;

        let workers = config.workers.unwrap_or_else(rayon::current_num_threads).max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        let chunks = config.samples.div_ceil(CHUNK);
        Ok(pool.install(|| {
            (0..chunks)
                .into_par_iter()
                .map(|chunk| {
                    let mut acc = init();
                    let mut labels = self.labels.clone();
                    let mut matrix = vec![0i64; self.k * self.k];
                    let mut placed = vec![0i64; self.k];
                    let mut sums = vec![0i64; self.k];
                    let mut scratch = LopScratch::new(self.k);
                    let end = ((chunk + 1) * CHUNK).min(config.samples);
                    for index in chunk * CHUNK..end {
                        let mut rng = sample_rng(config.seed, index);
                        labels.copy_from_slice(&self.labels);
                        labels.shuffle(&mut rng);
                        let d = self.disorder_halves(&labels, &mut matrix, &mut placed, &mut scratch);
                        let sig = self.signature(&labels, &mut sums);
                        visit(&mut acc, d, sig);
                    }
                    acc
                })
                .reduce(&init, &merge)
        }))
    }
}

/// Monte Carlo p-values for the disorder (≤ observed) and KW (≥ observed).
///
/// Labels are permuted over the observed positions while the tie-block
/// structure is kept, which conditions the null on the observed ties.
pub fn mc_test(arr: &Arrangement, sizes: &GroupSizes, config: &McConfig) -> Result<McTest> {
    if config.samples < MIN_PVALUE_SAMPLES {
        return Err(Error::Config(format!(
            "Monte Carlo p-values need at least {MIN_PVALUE_SAMPLES} samples, got {}",
            config.samples
        )));
    }
    if sizes.k() < 2 {
        return Err(Error::Degenerate("at least two groups are required".into()));
    }
    let sampler = Sampler::new(arr, sizes)?;
    let mut matrix = vec![0i64; sizes.k() * sizes.k()];
    let mut placed = vec![0i64; sizes.k()];
    let mut scratch = LopScratch::new(sizes.k());
    let observed_d = sampler.disorder_halves(&sampler.labels, &mut matrix, &mut placed, &mut scratch);
    let observed_sig = sampler.signature(&sampler.labels, &mut vec![0i64; sizes.k()]);
    let (d_count, kw_count) = sampler.run(
        config,
        || (0u64, 0u64),
        |acc, d, sig| {
            if d <= observed_d {
                acc.0 += 1;
            }
            if sig >= observed_sig {
                acc.1 += 1;
            }
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    Ok(McTest {
        disorder: McEstimate::new(d_count, config.samples, config.seed),
        kw: McEstimate::new(kw_count, config.samples, config.seed),
    })
}

/// Monte Carlo estimate of P(disorder ≤ observed disorder of `arr`).
pub fn mc_pvalue(arr: &Arrangement, sizes: &GroupSizes, config: &McConfig) -> Result<McEstimate> {
    Ok(mc_test(arr, sizes, config)?.disorder)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McAtom {
    /// Disorder halves or KW signature.
    #[serde(skip)]
    pub key: u128,
    pub value: f64,
    pub count: u64,
}

/// Empirical pmf of a statistic under the tie-free null.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McHistogram {
    pub statistic: Statistic,
    pub samples: u64,
    pub seed: u64,
    pub normalized: bool,
    pub atoms: Vec<McAtom>,
}

impl McHistogram {
    pub fn probability(&self, atom: &McAtom) -> f64 {
        atom.count as f64 / self.samples as f64
    }
}

/// Samples the null distribution of `statistic`. With `normalize_kw`, KW values
/// are divided by the largest attainable KW for the sizes.
pub fn mc_distribution(
    sizes: &GroupSizes,
    statistic: Statistic,
    config: &McConfig,
    normalize_kw: bool,
) -> Result<McHistogram> {
    if config.samples < MIN_DISTRIBUTION_SAMPLES {
        return Err(Error::Config(format!(
            "Monte Carlo distributions need at least {MIN_DISTRIBUTION_SAMPLES} samples, got {}",
            config.samples
        )));
    }
    if sizes.k() < 2 {
        return Err(Error::Degenerate("at least two groups are required".into()));
    }
    let sampler = Sampler::untied(sizes)?;
    let hist = sampler.run(
        config,
        BTreeMap::<u128, u64>::new,
        |acc, d, sig| {
            let key = match statistic {
                Statistic::Disorder => d as u128,
                Statistic::Kw => sig,
            };
            *acc.entry(key).or_insert(0) += 1;
        },
        |mut a, b| {
            for (key, c) in b {
                *a.entry(key).or_insert(0) += c;
            }
            a
        },
    )?;
    let scale = sampler.scale;
    let kw_max = match statistic {
        Statistic::Kw if normalize_kw => Some(crate::kruskal::kw_max(sizes)?),
        _ => None,
    };
    let atoms = hist
        .into_iter()
        .map(|(key, count)| {
            let value = match statistic {
                Statistic::Disorder => Half::from_halves(key as i64).to_f64(),
                Statistic::Kw => {
                    let kw = kw_from_signature(key, sizes, scale).max(0.0);
                    match kw_max {
                        Some(max) if max > 0.0 => kw / max,
                        _ => kw,
                    }
                }
            };
            McAtom { key, value, count }
        })
        .collect();
    Ok(McHistogram {
        statistic,
        samples: config.samples,
        seed: config.seed,
        normalized: kw_max.is_some(),
        atoms,
    })
}
