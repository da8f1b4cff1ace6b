use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use concordance::{
    critical_values, disorder, disorder_pvalue, kruskal_wallis, kw_max, kw_pvalue_for_signature,
    max_disorder, mc_distribution, mc_test, Direction, EnumerationConfig, Error, ExactDistribution,
    GroupSizes, GroupedData, Half, McConfig, Statistic,
};
use serde::Serialize;

use crate::cache;
use crate::error::{CliError, Result};
use crate::input;
use crate::report::{
    ConcordanceSection, InputSummary, KwSection, NullModel, PValue, Ratio, TestReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StatisticArg {
    Disorder,
    Tau,
    Kw,
}

impl StatisticArg {
    fn engine(self) -> Statistic {
        match self {
            StatisticArg::Disorder | StatisticArg::Tau => Statistic::Disorder,
            StatisticArg::Kw => Statistic::Kw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PValueMethod {
    Exact,
    Montecarlo,
    None,
}

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct Engine {
    pub budget: u64,
    pub workers: Option<usize>,
    pub samples: u64,
    pub seed: u64,
    pub cache_dir: Option<PathBuf>,
}

impl Engine {
    fn enumeration(&self) -> EnumerationConfig {
        EnumerationConfig {
            budget: self.budget,
            workers: self.workers,
        }
    }

    fn monte_carlo(&self) -> McConfig {
        McConfig {
            samples: self.samples,
            seed: self.seed,
            workers: self.workers,
        }
    }

    fn exact(&self, sizes: &GroupSizes, statistic: Statistic) -> Result<ExactDistribution> {
        cache::distribution(sizes, statistic, &self.enumeration(), self.cache_dir.as_deref())
    }
}

fn fmt_half(h: Half) -> String {
    h.to_string()
}

pub struct TestArgs<'a> {
    pub input: &'a Path,
    pub pre_ranked: bool,
    pub statistic: Option<StatisticArg>,
    pub pvalue: PValueMethod,
}

pub fn run_test(args: &TestArgs, engine: &Engine, format: Format) -> Result<String> {
    let start = Instant::now();
    let data = input::load(args.input, args.pre_ranked)?;
    let report = test_report(&data, args, engine)?;
    match format {
        Format::Text => Ok(report.to_text()),
        Format::Csv => report.to_csv(),
        Format::Json => {
            let timed = TestReport {
                timing_ms: Some(start.elapsed().as_secs_f64() * 1e3),
                ..report
            };
            timed.to_json()
        }
    }
}

pub fn test_report(data: &GroupedData, args: &TestArgs, engine: &Engine) -> Result<TestReport> {
    let sizes = &data.sizes;
    if sizes.k() < 2 {
        return Err(Error::Degenerate(format!(
            "the input holds a single group ({}); at least two are required",
            data.labels.join(", ")
        ))
        .into());
    }
    let arr = &data.arrangement;
    let d = disorder(arr, sizes)?;
    let kw = kruskal_wallis(arr, sizes)?;
    let tie_counts = arr.tie_block_sizes();
    let tied = !tie_counts.is_empty();
    let mut warnings = Vec::new();
    if tied {
        warnings.push(format!(
            "{} tie blocks; exact p-values compare against the untied null distribution, \
             Monte Carlo p-values keep the observed tie structure",
            tie_counts.len()
        ));
        warnings.push(
            "tie-corrected KW uses the standard adjustment 1 - sum(t^3 - t)/(n^3 - n)".into(),
        );
    }
    if d.degenerate {
        warnings.push(format!(
            "maximum disorder is 0 for sizes {sizes}; tau is reported as 1 and no p-value is computed"
        ));
    }
    if sizes.sizes().iter().all(|&s| s == 1) {
        warnings.push(
            "every group holds one observation, so untied data have no disorder; \
             tau uses the closed-form maximum anyway"
                .into(),
        );
    }

    let want_kw_p = args.statistic == Some(StatisticArg::Kw);
    let mut disorder_p = Vec::new();
    let mut kw_p = Vec::new();
    if !d.degenerate {
        match args.pvalue {
            PValueMethod::None => {}
            PValueMethod::Exact => {
                let dist = engine.exact(sizes, Statistic::Disorder).map_err(suggest_mc)?;
                disorder_p.push(PValue::exact(&disorder_pvalue(&dist, d.disorder)?));
                if want_kw_p {
                    let dist = engine.exact(sizes, Statistic::Kw).map_err(suggest_mc)?;
                    kw_p.push(PValue::exact(&kw_pvalue_for_signature(&dist, kw.signature)?));
                }
                if tied {
                    let mc = mc_test(arr, sizes, &engine.monte_carlo())?;
                    disorder_p.push(PValue::monte_carlo(
                        &mc.disorder,
                        Direction::DisorderAtMost,
                        NullModel::TieConditioned,
                    ));
                    if want_kw_p {
                        kw_p.push(PValue::monte_carlo(
                            &mc.kw,
                            Direction::KwAtLeast,
                            NullModel::TieConditioned,
                        ));
                    }
                }
            }
            PValueMethod::Montecarlo => {
                let mc = mc_test(arr, sizes, &engine.monte_carlo())?;
                let null = if tied {
                    NullModel::TieConditioned
                } else {
                    NullModel::TieFree
                };
                disorder_p.push(PValue::monte_carlo(&mc.disorder, Direction::DisorderAtMost, null));
                kw_p.push(PValue::monte_carlo(&mc.kw, Direction::KwAtLeast, null));
            }
        }
    }

    let name = |g: usize| data.labels[g].clone();
    Ok(TestReport {
        input: InputSummary {
            groups: data.labels.clone(),
            sizes: sizes.sizes().to_vec(),
            n: sizes.n(),
            tie_blocks: tie_counts.len(),
            tied_observations: tie_counts.iter().sum(),
            arrangement: arr.notation(),
        },
        concordance: ConcordanceSection {
            disorder: d.disorder.to_f64(),
            max_disorder: d.max_disorder,
            tau: d.tau,
            tau_ratio: d.tau_ratio().map(|(num, den)| Ratio {
                numerator: num.to_string(),
                denominator: den.to_string(),
                decimal: d.tau,
            }),
            closest_order: d.closest_order.iter().map(|&g| name(g)).collect(),
            total_pairs: d.total_pairs,
            lop_value: d.lop_value.to_f64(),
            degenerate: d.degenerate,
            p_values: disorder_p,
        },
        kruskal_wallis: KwSection {
            kw: kw.kw,
            kw_tie_corrected: kw.kw_tie_corrected,
            rank_sums: kw.rank_sums.iter().map(|r| r.to_f64()).collect(),
            mean_ranks: kw.mean_ranks.clone(),
            p_values: kw_p,
        },
        warnings,
        timing_ms: None,
    })
}

fn suggest_mc(e: CliError) -> CliError {
    match e {
        CliError::Core(Error::Capacity(msg)) => CliError::Core(Error::Capacity(format!(
            "{msg} (rerun with --pvalue montecarlo)"
        ))),
        other => other,
    }
}

#[derive(Debug, Serialize)]
struct DistRow {
    value: f64,
    count: String,
    probability: f64,
}

#[derive(Debug, Serialize)]
struct DistOutput {
    sizes: Vec<u32>,
    statistic: &'static str,
    method: &'static str,
    total: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    normalized: bool,
    rows: Vec<DistRow>,
}

struct DistTable {
    out: DistOutput,
    /// Text renderings of each value.
    labels: Vec<String>,
}

fn stat_name(s: StatisticArg) -> &'static str {
    match s {
        StatisticArg::Disorder => "disorder",
        StatisticArg::Tau => "tau",
        StatisticArg::Kw => "kw",
    }
}

fn exact_table(
    sizes: &GroupSizes,
    statistic: StatisticArg,
    normalize_kw: bool,
    engine: &Engine,
) -> Result<DistTable> {
    let dist = engine.exact(sizes, statistic.engine())?;
    let mut rows: Vec<(f64, String, String, f64)> = Vec::new();
    match statistic {
        StatisticArg::Disorder => {
            for a in dist.atoms() {
                let p = dist.probability(a);
                rows.push((dist.value(a), fmt_half(a.disorder()), a.count.to_string(), p));
            }
        }
        StatisticArg::Tau => {
            let max = max_disorder(sizes)? as f64;
            if max == 0.0 {
                return Err(Error::Degenerate(format!("maximum disorder is 0 for sizes {sizes}")).into());
            }
            for a in dist.atoms().iter().rev() {
                let tau = 1.0 - a.disorder().to_f64() / max;
                rows.push((tau, format!("{tau:.4}"), a.count.to_string(), dist.probability(a)));
            }
        }
        StatisticArg::Kw => {
            let scale = if normalize_kw { kw_max(sizes)? } else { 1.0 };
            for a in dist.atoms() {
                let v = dist.value(a) / scale;
                let label = if normalize_kw { format!("{v:.4}") } else { format!("{v:.2}") };
                rows.push((v, label, a.count.to_string(), dist.probability(a)));
            }
        }
    }
    Ok(DistTable {
        labels: rows.iter().map(|r| r.1.clone()).collect(),
        out: DistOutput {
            sizes: sizes.sizes().to_vec(),
            statistic: stat_name(statistic),
            method: "exact",
            total: dist.total().to_string(),
            seed: None,
            normalized: normalize_kw && statistic == StatisticArg::Kw,
            rows: rows
                .into_iter()
                .map(|(value, _, count, probability)| DistRow {
                    value,
                    count,
                    probability,
                })
                .collect(),
        },
    })
}

fn mc_table(
    sizes: &GroupSizes,
    statistic: StatisticArg,
    normalize_kw: bool,
    engine: &Engine,
) -> Result<DistTable> {
    let config = engine.monte_carlo();
    let hist = mc_distribution(sizes, statistic.engine(), &config, normalize_kw)?;
    let mut rows: Vec<(f64, String, u64)> = Vec::new();
    match statistic {
        StatisticArg::Disorder => {
            for a in &hist.atoms {
                rows.push((a.value, fmt_half(Half::from_halves(a.key as i64)), a.count));
            }
        }
        StatisticArg::Tau => {
            let max = max_disorder(sizes)? as f64;
            if max == 0.0 {
                return Err(Error::Degenerate(format!("maximum disorder is 0 for sizes {sizes}")).into());
            }
            for a in hist.atoms.iter().rev() {
                let tau = 1.0 - a.value / max;
                rows.push((tau, format!("{tau:.4}"), a.count));
            }
        }
        StatisticArg::Kw => {
            for a in &hist.atoms {
                let label = if normalize_kw {
                    format!("{:.4}", a.value)
                } else {
                    format!("{:.2}", a.value)
                };
                rows.push((a.value, label, a.count));
            }
        }
    }
    Ok(DistTable {
        labels: rows.iter().map(|r| r.1.clone()).collect(),
        out: DistOutput {
            sizes: sizes.sizes().to_vec(),
            statistic: stat_name(statistic),
            method: "montecarlo",
            total: hist.samples.to_string(),
            seed: Some(hist.seed),
            normalized: hist.normalized,
            rows: rows
                .into_iter()
                .map(|(value, _, count)| DistRow {
                    value,
                    count: count.to_string(),
                    probability: count as f64 / hist.samples as f64,
                })
                .collect(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DistMethod {
    Exact,
    Montecarlo,
}

pub fn run_dist(
    sizes: &GroupSizes,
    statistic: StatisticArg,
    method: DistMethod,
    normalize_kw: bool,
    engine: &Engine,
    format: Format,
) -> Result<String> {
    let table = match method {
        DistMethod::Exact => exact_table(sizes, statistic, normalize_kw, engine)?,
        DistMethod::Montecarlo => mc_table(sizes, statistic, normalize_kw, engine)?,
    };
    match format {
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{} distribution for sizes {sizes} ({}, {} {})",
                table.out.statistic,
                table.out.method,
                table.out.total,
                if method == DistMethod::Exact { "arrangements" } else { "samples" }
            );
            let _ = writeln!(out, "{:>10}  {:>12}  {:>11}", "value", "count", "probability");
            for (label, row) in table.labels.iter().zip(&table.out.rows) {
                let _ = writeln!(out, "{label:>10}  {:>12}  {:>11.5}", row.count, row.probability);
            }
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["value", "count", "probability"])?;
            for row in &table.out.rows {
                w.write_record([row.value.to_string(), row.count.clone(), row.probability.to_string()])?;
            }
            finish_csv(w)
        }
        Format::Json => Ok(serde_json::to_string_pretty(&table.out)? + "\n"),
    }
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub const DEFAULT_ALPHAS: [f64; 3] = [0.10, 0.05, 0.01];

#[derive(Debug, Serialize)]
struct CriticalRow {
    alpha: f64,
    critical_disorder: Option<f64>,
    critical_tau: Option<f64>,
    p_value: Option<f64>,
    count: Option<String>,
}

#[derive(Debug, Serialize)]
struct CriticalTable {
    sizes: Vec<u32>,
    total: String,
    max_disorder: u64,
    rows: Vec<CriticalRow>,
}

pub fn run_tables(
    size_list: &[GroupSizes],
    alphas: &[f64],
    engine: &Engine,
    format: Format,
) -> Result<String> {
    let alphas = if alphas.is_empty() { &DEFAULT_ALPHAS[..] } else { alphas };
    let mut tables = Vec::new();
    for sizes in size_list {
        let dist = engine.exact(sizes, Statistic::Disorder)?;
        let max = max_disorder(sizes)?;
        let rows = critical_values(&dist, alphas)?
            .into_iter()
            .map(|cv| CriticalRow {
                alpha: cv.alpha,
                critical_disorder: cv.critical.map(Half::to_f64),
                critical_tau: cv
                    .critical
                    .filter(|_| max > 0)
                    .map(|d| 1.0 - d.to_f64() / max as f64),
                p_value: cv.attained_p,
                count: cv.attained_count.map(|c| c.to_string()),
            })
            .collect();
        tables.push(CriticalTable {
            sizes: sizes.sizes().to_vec(),
            total: dist.total().to_string(),
            max_disorder: max,
            rows,
        });
    }
    match format {
        Format::Text => {
            let mut out = String::new();
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                let sizes: Vec<String> = t.sizes.iter().map(u32::to_string).collect();
                let _ = writeln!(
                    out,
                    "sizes ({})  arrangements {}  max disorder {}",
                    sizes.join(","),
                    t.total,
                    t.max_disorder
                );
                let _ = writeln!(out, "{:>6}  {:>8}  {:>6}  {:>9}  {:>10}", "alpha", "disorder", "tau", "P(D<=d)", "count");
                for r in &t.rows {
                    match (r.critical_disorder, r.p_value, &r.count) {
                        (Some(d), Some(p), Some(c)) => {
                            let tau = r.critical_tau.map_or("-".into(), |t| format!("{t:.4}"));
                            let _ = writeln!(
                                out,
                                "{:>6}  {:>8}  {tau:>6}  {p:>9.7}  {c:>10}",
                                r.alpha,
                                fmt_half(Half::from_halves((2.0 * d) as i64))
                            );
                        }
                        _ => {
                            let _ = writeln!(out, "{:>6}  {:>8}  {:>6}  {:>9}  {:>10}", r.alpha, "-", "-", "-", "-");
                        }
                    }
                }
            }
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["sizes", "alpha", "critical_disorder", "critical_tau", "p_value", "count"])?;
            for t in &tables {
                let sizes: Vec<String> = t.sizes.iter().map(u32::to_string).collect();
                for r in &t.rows {
                    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
                    w.write_record([
                        sizes.join(" "),
                        r.alpha.to_string(),
                        opt(r.critical_disorder),
                        opt(r.critical_tau),
                        opt(r.p_value),
                        r.count.clone().unwrap_or_default(),
                    ])?;
                }
            }
            finish_csv(w)
        }
        Format::Json => Ok(serde_json::to_string_pretty(&tables)? + "\n"),
    }
}

#[derive(Debug, Serialize)]
struct CompareRow {
    statistic_value_normalized: f64,
    concordance_density: f64,
    kw_density: f64,
}

#[derive(Debug, Serialize)]
struct CompareOutput {
    sizes: Vec<u32>,
    method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    rows: Vec<CompareRow>,
}

/// Both statistics scaled to [0, 1]: τ for the concordance test and KW / max KW.
pub fn run_compare(sizes: &GroupSizes, engine: &Engine, format: Format) -> Result<String> {
    let tau = exact_table(sizes, StatisticArg::Tau, false, engine);
    let kw = exact_table(sizes, StatisticArg::Kw, true, engine);
    let (tau, kw, method) = match (tau, kw) {
        (Ok(t), Ok(k)) => (t, k, "exact"),
        (Err(CliError::Core(Error::Capacity(_))), _) | (_, Err(CliError::Core(Error::Capacity(_)))) => (
            mc_table(sizes, StatisticArg::Tau, false, engine)?,
            mc_table(sizes, StatisticArg::Kw, true, engine)?,
            "montecarlo",
        ),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    // Merge on values rounded to 1e-9 so equal τ and KW/max points share a row.
    let mut merged: BTreeMap<i64, (f64, f64, f64)> = BTreeMap::new();
    for r in &tau.out.rows {
        merged.entry((r.value * 1e9).round() as i64).or_insert((r.value, 0.0, 0.0)).1 += r.probability;
    }
    for r in &kw.out.rows {
        merged.entry((r.value * 1e9).round() as i64).or_insert((r.value, 0.0, 0.0)).2 += r.probability;
    }
    let out = CompareOutput {
        sizes: sizes.sizes().to_vec(),
        method,
        samples: tau.out.seed.map(|_| engine.samples),
        seed: tau.out.seed,
        rows: merged
            .into_values()
            .map(|(v, c, k)| CompareRow {
                statistic_value_normalized: v,
                concordance_density: c,
                kw_density: k,
            })
            .collect(),
    };
    match format {
        Format::Text => {
            let mut s = String::new();
            let _ = write!(s, "sizes {sizes}  method {method}");
            if let Some(seed) = out.seed {
                let _ = write!(s, "  samples {}  seed {seed}", engine.samples);
            }
            let _ = writeln!(s);
            let _ = writeln!(s, "{:>10}  {:>11}  {:>11}", "value", "concordance", "kw");
            for r in &out.rows {
                let _ = writeln!(
                    s,
                    "{:>10.6}  {:>11.5}  {:>11.5}",
                    r.statistic_value_normalized, r.concordance_density, r.kw_density
                );
            }
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &out.rows {
                w.serialize(r)?;
            }
            finish_csv(w)
        }
        Format::Json => Ok(serde_json::to_string_pretty(&out)? + "\n"),
    }
}
