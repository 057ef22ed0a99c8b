use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use certann::{DistributionKind, IndexMode, MetricP, DEFAULT_CELL_BUDGET};
use certann_cli::commands::{self, BenchArgs, BuildArgs, GenArgs, QueryArgs, QuerySource, Suite, ValidateArgs};
use certann_cli::{Approximation, CliError, Config, Format};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Near-neighbor search under l_p distances with guaranteed recall.
#[derive(Parser)]
#[command(name = "certann", version, about)]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IndexFlags {
    /// Metric exponent: a number >= 1 or "inf".
    #[arg(long, default_value = "2")]
    p: MetricP,
    /// Near radius r.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Approximation factor c; must exceed the threshold tau.
    #[arg(long, conflicts_with = "c_over_tau")]
    c: Option<f64>,
    /// Approximation factor as a multiple of tau (default 2).
    #[arg(long)]
    c_over_tau: Option<f64>,
    #[arg(long, value_enum, default_value_t = DistArg::Rademacher)]
    dist: DistArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Light)]
    mode: ModeArg,
    /// Number of hash functions; chosen from n when omitted.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum 3^k cells per point (full) or probes per query (light).
    #[arg(long, default_value_t = DEFAULT_CELL_BUDGET)]
    cell_budget: u64,
    /// Lower an automatic k that exceeds the cell budget instead of failing.
    #[arg(long)]
    clamp_k: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Uniform,
    Rademacher,
}

impl From<DistArg> for DistributionKind {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Uniform => DistributionKind::BoundedUniform,
            DistArg::Rademacher => DistributionKind::Rademacher,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Light,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Fvec,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Fvec => Format::Fvec,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Bounds,
    Tightness,
    Sandwich,
}

impl IndexFlags {
    fn config(&self, threads: usize) -> Config {
        let c = match (self.c, self.c_over_tau) {
            (Some(c), _) => Approximation::Absolute(c),
            (None, Some(ratio)) => Approximation::OverTau(ratio),
            (None, None) => Approximation::OverTau(2.0),
        };
        Config {
            p: self.p,
            r: self.radius,
            c,
            distribution: self.dist.into(),
            mode: match self.mode {
                ModeArg::Full => IndexMode::FullExpansion,
                ModeArg::Light => IndexMode::Light,
            },
            k: self.k,
            seed: self.seed,
            cell_budget: self.cell_budget,
            threads,
            clamp_k: self.clamp_k,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a dataset file and save it.
    Build {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        flags: IndexFlags,
    },
    /// Query a saved index with one vector or a file of vectors.
    Query {
        #[arg(long)]
        index: PathBuf,
        /// Comma-separated query vector.
        #[arg(long, conflicts_with = "queries", required_unless_present = "queries", allow_hyphen_values = true)]
        vector: Option<String>,
        /// File of query vectors.
        #[arg(long)]
        queries: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Print `query,id,distance` rows at full precision.
        #[arg(long)]
        csv: bool,
    },
    /// Time a batch of queries, optionally checking each against a linear scan.
    Bench {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Compare every result with an exact scan.
        #[arg(long)]
        oracle: bool,
    },
    /// Run a statistical or end-to-end validation suite.
    Validate {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[command(flatten)]
        flags: IndexFlags,
        /// Restrict the bounds suite to one distribution.
        #[arg(long = "only-dist", value_enum)]
        only_dist: Option<DistArg>,
        /// Hash trials per pair or witness.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Far pairs per cell in the bounds suite.
        #[arg(long, default_value_t = 50)]
        pairs: usize,
        /// Dimension of the sandwich workload.
        #[arg(long, default_value_t = 16)]
        dim: usize,
        /// Points in the sandwich workload.
        #[arg(long, default_value_t = 5000)]
        n: usize,
        /// Queries in the sandwich workload.
        #[arg(long, default_value_t = 100)]
        num_queries: usize,
        /// Also write the report as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write a seeded clustered dataset and matching queries.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value = "2")]
        p: MetricP,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 100)]
        num_queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        queries_output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    match cli.command {
        Command::Build { input, format, output, flags } => {
            commands::build(&BuildArgs { input, format: format.into(), output, config: flags.config(cli.threads) }, out)
        }
        Command::Query { index, vector, queries, format, csv } => {
            let source = match (vector, queries) {
                (Some(v), _) => QuerySource::Vector(v),
                (None, Some(path)) => QuerySource::File(path, format.into()),
                (None, None) => return Err(CliError::Config("give --vector or --queries".into())),
            };
            commands::query(&QueryArgs { index, source, csv }, out)
        }
        Command::Bench { index, queries, format, oracle } => {
            commands::bench(&BenchArgs { index, queries, format: format.into(), oracle }, out)
        }
        Command::Validate { suite, flags, only_dist, trials, pairs, dim, n, num_queries, csv } => {
            let dists = match only_dist {
                Some(d) => vec![d.into()],
                None => vec![DistributionKind::Rademacher, DistributionKind::BoundedUniform],
            };
            let suite = match suite {
                SuiteArg::Bounds => Suite::Bounds,
                SuiteArg::Tightness => Suite::Tightness,
                SuiteArg::Sandwich => Suite::Sandwich,
            };
            let args = ValidateArgs {
                suite,
                config: flags.config(cli.threads),
                dists,
                trials,
                pairs,
                dim,
                n,
                queries: num_queries,
                csv,
            };
            commands::validate(&args, out)
        }
        Command::Gen { n, dim, p, radius, num_queries, seed, output, queries_output, format } => commands::generate(
            &GenArgs {
                n,
                dim,
                p,
                r: radius,
                queries: num_queries,
                seed,
                output,
                queries_output,
                format: format.into(),
            },
            out,
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CERTANN_LOG", "warn")).init();
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = run(cli, &mut out);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("certann: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
