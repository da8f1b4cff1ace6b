//! `concordance`: k-sample concordance coefficient and Kruskal-Wallis tests.

mod cache;
mod commands;
mod error;
mod input;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use concordance::exact::DEFAULT_BUDGET;
use concordance::GroupSizes;

use commands::{DistMethod, Engine, Format, PValueMethod, StatisticArg, TestArgs};
use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "concordance", version, about = "Concordance coefficient test for k unrelated samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,

    /// Largest number of arrangements an exact enumeration may visit.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,

    /// Directory for cached exact distributions.
    #[arg(long)]
    cache_dir: Option<PathBuf>,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "CONCORDANCE_WORKERS")]
    workers: Option<usize>,

    /// Monte Carlo samples.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,

    /// Monte Carlo seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Common {
    fn engine(&self) -> Result<Engine> {
        if self.workers == Some(0) {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        Ok(Engine {
            budget: self.budget,
            workers: self.workers,
            samples: self.samples,
            seed: self.seed,
            cache_dir: self.cache_dir.clone(),
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test a data set: CSV with a `group,value` header, or a label sequence.
    Test {
        /// Input file, `-` for standard input.
        input: PathBuf,

        /// Read a label sequence such as `a a (a c) b` instead of CSV.
        #[arg(long)]
        pre_ranked: bool,

        /// `kw` also computes the Kruskal-Wallis p-value.
        #[arg(long, value_enum)]
        statistic: Option<StatisticArg>,

        #[arg(long, value_enum, default_value = "exact")]
        pvalue: PValueMethod,

        #[command(flatten)]
        common: Common,
    },
    /// Null distribution of a statistic for given group sizes.
    Dist {
        /// Comma separated group sizes, e.g. 10,5,3.
        #[arg(long, value_parser = parse_sizes)]
        sizes: GroupSizes,

        #[arg(long, value_enum, default_value = "disorder")]
        statistic: StatisticArg,

        #[arg(long, value_enum, default_value = "exact")]
        method: DistMethod,

        /// Divide KW by its largest attainable value.
        #[arg(long)]
        normalize_kw: bool,

        #[command(flatten)]
        common: Common,
    },
    /// Critical disorder values for significance levels.
    Tables {
        /// Group sizes; repeat the flag for several tables.
        #[arg(long, value_parser = parse_sizes, required = true)]
        sizes: Vec<GroupSizes>,

        /// Comma separated significance levels (default 0.10,0.05,0.01).
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,

        #[command(flatten)]
        common: Common,
    },
    /// Both statistics scaled to [0, 1] with their probability masses.
    Compare {
        #[arg(long, value_parser = parse_sizes)]
        sizes: GroupSizes,

        #[command(flatten)]
        common: Common,
    },
}

fn parse_sizes(text: &str) -> std::result::Result<GroupSizes, String> {
    GroupSizes::parse(text).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Test {
            input,
            pre_ranked,
            statistic,
            pvalue,
            common,
        } => {
            let args = TestArgs {
                input: &input,
                pre_ranked,
                statistic,
                pvalue,
            };
            commands::run_test(&args, &common.engine()?, common.format)
        }
        Command::Dist {
            sizes,
            statistic,
            method,
            normalize_kw,
            common,
        } => commands::run_dist(&sizes, statistic, method, normalize_kw, &common.engine()?, common.format),
        Command::Tables { sizes, alpha, common } => {
            commands::run_tables(&sizes, &alpha, &common.engine()?, common.format)
        }
        Command::Compare { sizes, common } => {
            commands::run_compare(&sizes, &common.engine()?, common.format)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
