//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ::concordance::lop::all_order_values;
use ::concordance::*;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, DiscreteCDF};

const TABLE_222: &str = include_str!("data/table_222.txt");
const EXPECTED_P_10_5_3: f64 = 0.0492725;

type Outcome = std::result::Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn sizes(s: &[u32]) -> GroupSizes {
    GroupSizes::new(s.to_vec()).unwrap()
}

fn workers(w: usize) -> EnumerationConfig {
    EnumerationConfig {
        workers: Some(w),
        ..Default::default()
    }
}

fn records(groups: &[(&str, &[f64])]) -> Vec<Record> {
    groups
        .iter()
        .flat_map(|(g, vs)| vs.iter().map(move |&v| Record::new(*g, v)))
        .collect()
}

fn hours(tied: bool) -> GroupedData {
    let a: &[f64] = if tied {
        &[12., 13., 15., 20., 24., 29., 30., 32., 40., 49.]
    } else {
        &[12., 13., 15., 20., 23., 28., 30., 32., 40., 48.]
    };
    arrangement_from_data(&records(&[
        ("A", a),
        ("B", &[29., 31., 49., 52., 54.]),
        ("C", &[24., 26., 44.]),
    ]))
    .unwrap()
}

fn factorial(n: u32) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

fn multinomial(s: &[u32]) -> BigUint {
    s.iter()
        .fold(factorial(s.iter().sum()), |acc, &k| acc / factorial(k))
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn table_222() -> Outcome {
    let start = Instant::now();
    let s = sizes(&[2, 2, 2]);
    let mut rows = 0;
    for line in TABLE_222.lines().filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = line.split_whitespace().collect();
        let labels: Vec<usize> = f[0].bytes().map(|b| (b - b'a') as usize).collect();
        let arr = Arrangement::from_labels(&labels);
        let d = disorder(&arr, &s).map_err(|e| e.to_string())?;
        let kw = kruskal_wallis(&arr, &s).map_err(|e| e.to_string())?;
        ensure!(d.disorder == Half::parse(f[1]).unwrap(), "{}: disorder {}", f[0], d.disorder);
        ensure!(format!("{:.4}", d.tau) == f[2], "{}: tau {:.4}", f[0], d.tau);
        ensure!(format!("{:.2}", kw.kw) == f[3], "{}: kw {:.2}", f[0], kw.kw);
        rows += 1;
    }
    let all = ::concordance::multiset::multiset_permutations(&s, 1000).map_err(|e| e.to_string())?;
    ensure!(rows == 90 && all.len() == 90, "{rows} rows, {} arrangements", all.len());
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {}", secs(elapsed));
    Ok(format!("90/90 rows match, {}", secs(elapsed)))
}

fn exact_222_tables() -> Outcome {
    let s = sizes(&[2, 2, 2]);
    let d = enumerate_distribution(&s, Statistic::Disorder, &Default::default())
        .map_err(|e| e.to_string())?;
    let counts: Vec<(i64, BigUint)> = d
        .atoms()
        .iter()
        .map(|a| (a.disorder().halves(), a.count.clone()))
        .collect();
    let expected: Vec<(i64, BigUint)> = [6u32, 12, 18, 18, 18, 12, 6]
        .iter()
        .enumerate()
        .map(|(i, &c)| (2 * i as i64, BigUint::from(c)))
        .collect();
    ensure!(counts == expected, "disorder counts {counts:?}");
    ensure!(d.total() == &BigUint::from(90u32), "total {}", d.total());
    let kw = enumerate_distribution(&s, Statistic::Kw, &Default::default())
        .map_err(|e| e.to_string())?;
    let got: Vec<(String, String)> = kw
        .atoms()
        .iter()
        .map(|a| (format!("{:.2}", kw.value(a)), format!("{:.5}", kw.probability(a))))
        .collect();
    let want: Vec<(String, String)> = [
        ("0.00", "0.06667"),
        ("0.29", "0.13333"),
        ("0.86", "0.13333"),
        ("1.14", "0.13333"),
        ("2.00", "0.13333"),
        ("2.57", "0.06667"),
        ("3.43", "0.13333"),
        ("3.71", "0.13333"),
        ("4.57", "0.06667"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    ensure!(got == want, "KW atoms {got:?}");
    Ok("disorder counts (6,12,18,18,18,12,6)/90, 9 KW atoms".into())
}

fn untied_hours() -> Outcome {
    let data = hours(false);
    let m = preference_matrix(&data.arrangement, &data.sizes).map_err(|e| e.to_string())?;
    ensure!(
        m.rows() == vec![vec![0., 43., 19.], vec![7., 0., 2.], vec![11., 13., 0.]],
        "matrix {:?}",
        m.rows()
    );
    let values: Vec<i64> = all_order_values(&m)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|(_, v)| v.halves() / 2)
        .collect();
    ensure!(values == [64, 75, 28, 20, 67, 31], "order values {values:?}");
    let d = disorder(&data.arrangement, &data.sizes).map_err(|e| e.to_string())?;
    ensure!(d.disorder == Half::from_int(20), "disorder {}", d.disorder);
    ensure!(d.closest_order == [0, 2, 1], "closest order {:?}", d.closest_order);
    let kw = kruskal_wallis(&data.arrangement, &data.sizes).map_err(|e| e.to_string())?;
    ensure!((kw.kw - 5.6).abs() <= 0.005, "KW {}", kw.kw);

    let start = Instant::now();
    let p = exact_pvalue(&data.sizes, d.disorder, &workers(1)).map_err(|e| e.to_string())?;
    let single = start.elapsed();
    ensure!(
        p.denominator == BigUint::from(2_450_448u32),
        "enumerated {}",
        p.denominator
    );
    ensure!(single < Duration::from_secs(300), "single-threaded run took {}", secs(single));
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let parallel = if cores >= 8 {
        let start = Instant::now();
        exact_pvalue(&data.sizes, d.disorder, &workers(8)).map_err(|e| e.to_string())?;
        let t = start.elapsed();
        ensure!(t < Duration::from_secs(60), "8-worker run took {}", secs(t));
        format!("8 workers {}", secs(t))
    } else {
        format!("8-worker target not timed on {cores} core(s)")
    };
    ensure!(
        (p.p_value - EXPECTED_P_10_5_3).abs() <= 5e-8,
        "p = {}/{} = {:.10}, expected {EXPECTED_P_10_5_3} ± 5e-8 (single-threaded {}, {parallel})",
        p.numerator,
        p.denominator,
        p.p_value,
        secs(single)
    );
    Ok(format!(
        "p = {}/{} = {:.7}, single-threaded {}, {parallel}",
        p.numerator,
        p.denominator,
        p.p_value,
        secs(single)
    ))
}

fn tied_hours() -> Outcome {
    let data = hours(true);
    let m = preference_matrix(&data.arrangement, &data.sizes).map_err(|e| e.to_string())?;
    ensure!(
        m.rows() == vec![vec![0., 42., 18.5], vec![8., 0., 2.], vec![11.5, 13., 0.]],
        "matrix {:?}",
        m.rows()
    );
    let d = disorder(&data.arrangement, &data.sizes).map_err(|e| e.to_string())?;
    ensure!(d.lop_value == Half::parse("73.5").unwrap(), "LOP value {}", d.lop_value);
    ensure!(d.disorder == Half::parse("21.5").unwrap(), "disorder {}", d.disorder);
    let kw = kruskal_wallis(&data.arrangement, &data.sizes).map_err(|e| e.to_string())?;
    ensure!((kw.kw - 5.074).abs() <= 0.001, "KW {}", kw.kw);
    let corrected = kw.kw_tie_corrected.ok_or("no tie correction")?;
    ensure!(
        (corrected - 5.074 / (1.0 - 18.0 / 5814.0)).abs() <= 0.001 && (corrected - 5.0897).abs() <= 0.001,
        "tie-corrected KW {corrected}"
    );
    Ok(format!("disorder 21.5, KW {:.3}, corrected {:.4}", kw.kw, corrected))
}

/// Sorted (descending) size vectors with every part ≥ 2 and multinomial ≤ limit.
fn size_vectors(limit: &BigUint) -> Vec<Vec<u32>> {
    fn extend(prefix: &mut Vec<u32>, max_part: u32, limit: &BigUint, out: &mut Vec<Vec<u32>>) {
        if prefix.len() >= 2 {
            out.push(prefix.clone());
        }
        for part in (2..=max_part).rev() {
            prefix.push(part);
            let fits = multinomial(prefix) <= *limit;
            if fits {
                extend(prefix, part, limit, out);
            }
            prefix.pop();
            // a smaller last part gives a smaller multinomial, so keep scanning
        }
    }
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    extend(&mut prefix, 500, limit, &mut out);
    out
}

fn max_disorder_formula() -> Outcome {
    ensure!(max_disorder(&sizes(&[2, 2, 2])).unwrap() == 6, "(2,2,2) formula");
    let table_max = TABLE_222
        .lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split_whitespace().nth(1)?.parse::<u64>().ok())
        .max();
    ensure!(table_max == Some(6), "table maximum {table_max:?}");
    ensure!(max_disorder(&sizes(&[10, 5, 3])).unwrap() == 47, "(10,5,3) formula");
    let brute = max_disorder_bruteforce(&sizes(&[10, 5, 3])).map_err(|e| e.to_string())?;
    ensure!(brute == 47, "(10,5,3) brute force {brute}");
    let vectors = size_vectors(&BigUint::from(100_000u32));
    for v in &vectors {
        let s = sizes(v);
        let formula = max_disorder(&s).map_err(|e| e.to_string())?;
        let brute = max_disorder_bruteforce(&s).map_err(|e| e.to_string())?;
        ensure!(formula == brute, "{s}: formula {formula}, brute force {brute}");
    }
    Ok(format!(
        "6 and 47; brute force agrees on (10,5,3) and {} size vectors",
        vectors.len()
    ))
}

fn lop_dp_vs_bruteforce() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..1000 {
        let k = 2 + case % 6;
        let n: Vec<i64> = (0..k).map(|_| rng.random_range(1..=8)).collect();
        let mut m = PreferenceMatrix::zeros(k);
        for r in 0..k {
            for s in r + 1..k {
                let total = 2 * n[r] * n[s];
                let up = rng.random_range(0..=total);
                m.set(r, s, Half::from_halves(up));
                m.set(s, r, Half::from_halves(total - up));
            }
        }
        let dp = lop_exact_dp(&m).map_err(|e| e.to_string())?;
        let brute = lop_bruteforce(&m).map_err(|e| e.to_string())?;
        ensure!(dp.value == brute.value, "case {case} (k={k}): {} vs {}", dp.value, brute.value);
    }
    Ok("1000 matrices, k = 2..7".into())
}

fn disorder_vs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let k = rng.random_range(2..=4);
        let s: Vec<u32> = (0..k).map(|_| rng.random_range(1..=5)).collect();
        let mut labels: Vec<usize> = s
            .iter()
            .enumerate()
            .flat_map(|(g, &n)| std::iter::repeat_n(g, n as usize))
            .collect();
        rand::seq::SliceRandom::shuffle(&mut labels[..], &mut rng);
        // every fourth case cuts the sequence into tie blocks
        let arr = if case % 4 == 0 {
            let blocks = labels.chunks(rng.random_range(1..=3)).map(<[usize]>::to_vec).collect();
            Arrangement::from_blocks(blocks).unwrap()
        } else {
            Arrangement::from_labels(&labels)
        };
        let s = sizes(&s);
        let d = disorder(&arr, &s).map_err(|e| e.to_string())?.disorder;
        let o = disorder_oracle(&arr, &s).map_err(|e| e.to_string())?;
        ensure!(d == o, "{arr}: {d} vs oracle {o}");
    }
    Ok("200 arrangements".into())
}

fn kendall_basics() -> Outcome {
    let base = [1, 2, 3];
    let d: Vec<u64> = [[1, 3, 2], [2, 3, 1], [3, 2, 1]]
        .iter()
        .map(|p| kendall_distance(&base, p).unwrap())
        .collect();
    ensure!(d == [1, 2, 3], "distances {d:?}");
    let hi = kendall_correlation(&base, &base).unwrap();
    let lo = kendall_correlation(&base, &[3, 2, 1]).unwrap();
    ensure!(hi == 1.0 && lo == -1.0, "correlations {hi}, {lo}");
    Ok("distances 1/2/3, correlation ±1".into())
}

fn monte_carlo() -> Outcome {
    let s = sizes(&[2, 2, 2]);
    let config = McConfig {
        samples: 100_000,
        seed: 2024,
        workers: None,
    };
    let mc = mc_distribution(&s, Statistic::Disorder, &config, false).map_err(|e| e.to_string())?;
    let table = [6.0, 12.0, 18.0, 18.0, 18.0, 12.0, 6.0].map(|c| c / 90.0);
    for (i, p) in table.iter().enumerate() {
        let hit = mc.atoms.iter().find(|a| a.key == 2 * i as u128).map_or(0, |a| a.count);
        let est = hit as f64 / config.samples as f64;
        ensure!((est - p).abs() <= 0.006, "atom {i}: {est} vs {p}");
    }

    let data = hours(false);
    let est = mc_pvalue(&data.arrangement, &data.sizes, &config).map_err(|e| e.to_string())?;
    let binom = Binomial::new(EXPECTED_P_10_5_3, config.samples).unwrap();
    let lo = binom.inverse_cdf(0.0005) as f64 / config.samples as f64;
    let hi = binom.inverse_cdf(0.9995) as f64 / config.samples as f64;
    ensure!(
        lo <= est.p_hat && est.p_hat <= hi,
        "p_hat {} outside [{lo}, {hi}]",
        est.p_hat
    );

    let run = |w| {
        mc_pvalue(
            &data.arrangement,
            &data.sizes,
            &McConfig {
                samples: 20_000,
                seed: 5,
                workers: Some(w),
            },
        )
        .unwrap()
    };
    let (a, b, c) = (run(1), run(2), run(7));
    ensure!(a == b && b == c, "worker counts disagree: {a:?} {b:?} {c:?}");
    Ok(format!("(2,2,2) atoms within 0.006, p_hat {:.5} in [{lo:.5}, {hi:.5}]", est.p_hat))
}

fn determinism() -> Outcome {
    let max = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut tested = 0;
    for v in [&[2u32, 2, 2][..], &[4, 3, 2], &[3, 3, 2, 2], &[6, 5], &[10, 5, 3]] {
        for stat in [Statistic::Disorder, Statistic::Kw] {
            let render = |w: usize| -> std::result::Result<String, String> {
                let d = enumerate_distribution(&sizes(v), stat, &workers(w)).map_err(|e| e.to_string())?;
                let sum: BigUint = d.atoms().iter().map(|a| &a.count).sum();
                if sum != multinomial(v) {
                    return Err(format!("{v:?}: Σ counts {sum} ≠ {}", multinomial(v)));
                }
                Ok(d.atoms()
                    .iter()
                    .map(|a| format!("{} {}\n", a.key, a.count))
                    .collect())
            };
            let one = render(1)?;
            ensure!(one == render(2)?, "{v:?} {stat}: 1 vs 2 workers");
            ensure!(one == render(max.max(3))?, "{v:?} {stat}: 1 vs {} workers", max.max(3));
            tested += 1;
        }
    }
    Ok(format!("{tested} distributions identical across worker counts"))
}

fn large_design() -> Outcome {
    let s = sizes(&[6, 6, 6, 6]);
    match enumerate_distribution(&s, Statistic::Disorder, &Default::default()) {
        Err(Error::Capacity(_)) => {}
        other => return Err(format!("expected a capacity error, got {other:?}")),
    }
    let start = Instant::now();
    let mc = mc_distribution(
        &s,
        Statistic::Disorder,
        &McConfig {
            samples: 100_000,
            seed: 1,
            workers: None,
        },
        false,
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let total: u64 = mc.atoms.iter().map(|a| a.count).sum();
    ensure!(total == 100_000, "histogram holds {total} samples");
    ensure!(elapsed < Duration::from_secs(60), "Monte Carlo took {}", secs(elapsed));
    Ok(format!("refused exactly; 100000 samples in {}", secs(elapsed)))
}

fn main() {
    let criteria: [(&str, Check); 11] = [
        ("all 90 arrangements of (2,2,2)", table_222),
        ("exact (2,2,2) disorder and KW tables", exact_222_tables),
        ("untied hours data end to end", untied_hours),
        ("tied hours data end to end", tied_hours),
        ("maximum disorder formula", max_disorder_formula),
        ("LOP subset DP vs brute force", lop_dp_vs_bruteforce),
        ("disorder vs pairwise oracle", disorder_vs_oracle),
        ("Kendall distance basics", kendall_basics),
        ("Monte Carlo consistency", monte_carlo),
        ("determinism across workers", determinism),
        ("(6,6,6,6) refused, Monte Carlo instead", large_design),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
