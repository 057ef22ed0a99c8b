use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use certann::report::sig6;
use certann::validation::{check_sandwich, run_bound_sweep, run_tightness_suite, SweepConfig, Workload, WorkloadSpec};
use certann::{cell_count, DistributionKind, Index, IndexMode, MetricP, RngSeed};
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::ingest::{ingest, parse_vector, write_rows, Format};

pub struct BuildArgs {
    pub input: PathBuf,
    pub format: Format,
    pub output: PathBuf,
    pub config: Config,
}

pub fn build(args: &BuildArgs, out: &mut dyn Write) -> CliResult<()> {
    let dataset = ingest(&args.input, args.format)?;
    let (n, d) = (dataset.len(), dataset.dim());
    let params = args.config.params(d)?;
    let options = args.config.index_options(n, &params)?;
    log::info!("building {} index over {n} points in {d} dimensions", args.config.mode.name());
    let index = Index::build(dataset, params, options)?;
    index.save(&args.output)?;
    let consts = index.constants();
    let meta = index.meta();
    let cells = cell_count(index.k(), index.cell_budget())?;
    let cell_line = match index.mode() {
        IndexMode::FullExpansion => format!("cells per point 3^{} = {cells}", index.k()),
        IndexMode::Light => format!("probes per query 3^{} = {cells}", index.k()),
    };
    let size = std::fs::metadata(&args.output)?.len();
    writeln!(out, "points: {n}, dimension: {d}, mode: {}", index.mode().name())?;
    writeln!(
        out,
        "p = {}, r = {}, c = {}, distribution: {}",
        params.p(),
        sig6(params.r()),
        sig6(params.c()),
        params.dist()
    )?;
    writeln!(
        out,
        "k = {}, tau = {}, p_fp = {}, gamma = {}",
        index.k(),
        sig6(consts.tau),
        sig6(consts.p_fp),
        sig6(consts.gamma)
    )?;
    writeln!(out, "{cell_line}, stored references: {}, buckets: {}", meta.stored_refs, meta.bucket_count)?;
    writeln!(out, "build time: {}s", sig6(meta.build_time.as_secs_f64()))?;
    writeln!(out, "wrote {} ({size} bytes)", args.output.display())?;
    Ok(())
}

pub enum QuerySource {
    Vector(String),
    File(PathBuf, Format),
}

pub struct QueryArgs {
    pub index: PathBuf,
    pub source: QuerySource,
    /// Emit `query,id,distance` rows at full precision.
    pub csv: bool,
}

fn load_queries(source: &QuerySource) -> CliResult<Vec<Vec<f64>>> {
    match source {
        QuerySource::Vector(text) => {
            let v = parse_vector(text).map_err(|e| CliError::Data(format!("query vector: {e}")))?;
            Ok(vec![v])
        }
        QuerySource::File(path, format) => {
            let ds = ingest(path, *format)?;
            Ok(ds.iter().map(<[f64]>::to_vec).collect())
        }
    }
}

pub fn query(args: &QueryArgs, out: &mut dyn Write) -> CliResult<()> {
    let index = Index::load(&args.index)?;
    let queries = load_queries(&args.source)?;
    if args.csv {
        writeln!(out, "query,id,distance")?;
    }
    for (i, q) in queries.iter().enumerate() {
        let result = index.query(q)?;
        if args.csv {
            for n in &result.neighbors {
                writeln!(out, "{i},{},{}", n.id, n.distance)?;
            }
        } else {
            writeln!(out, "query {i}: {} neighbors", result.len())?;
            for n in &result.neighbors {
                writeln!(out, "  {} {}", n.id, sig6(n.distance))?;
            }
        }
    }
    Ok(())
}

pub struct BenchArgs {
    pub index: PathBuf,
    pub queries: PathBuf,
    pub format: Format,
    pub oracle: bool,
}

pub fn bench(args: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    let index = Index::load(&args.index)?;
    let queries = load_queries(&QuerySource::File(args.queries.clone(), args.format))?;
    let start = Instant::now();
    let results = queries.par_iter().map(|q| index.query(q)).collect::<Result<Vec<_>, _>>()?;
    let elapsed = start.elapsed().as_secs_f64();
    let nq = results.len() as f64;
    let mean = |f: &dyn Fn(&certann::QueryResult) -> usize| results.iter().map(f).sum::<usize>() as f64 / nq;
    let max_candidates = results.iter().map(|r| r.candidates_scanned).max().unwrap_or(0);
    writeln!(
        out,
        "queries: {}, threads: {}, elapsed: {}s, throughput: {} queries/s",
        results.len(),
        rayon::current_num_threads(),
        sig6(elapsed),
        sig6(nq / elapsed.max(1e-12))
    )?;
    writeln!(
        out,
        "candidates per query: mean {}, max {max_candidates}; buckets probed per query: mean {}; neighbors per query: mean {}",
        sig6(mean(&|r| r.candidates_scanned)),
        sig6(mean(&|r| r.buckets_probed)),
        sig6(mean(&|r| r.len()))
    )?;
    if args.oracle {
        let report = check_sandwich(&index, &queries)?;
        for o in &report.outcomes {
            let status = if o.pass() { "pass" } else { "FAIL" };
            write!(out, "query {}: {status} (near {}, returned {})", o.query, o.near, o.returned)?;
            if !o.pass() {
                write!(out, " missing near {:?}, beyond c*r {:?}", o.missing_near, o.far_returned)?;
            }
            writeln!(out)?;
        }
        writeln!(out, "{}", report.summary())?;
        if !report.all_pass() {
            return Err(CliError::Internal(format!(
                "{} of {} queries violated the range guarantee",
                report.total() - report.passed(),
                report.total()
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Bounds,
    Tightness,
    Sandwich,
}

pub struct ValidateArgs {
    pub suite: Suite,
    pub config: Config,
    /// Distributions for the bounds suite.
    pub dists: Vec<DistributionKind>,
    pub trials: u64,
    pub pairs: usize,
    /// Workload shape for the sandwich suite.
    pub dim: usize,
    pub n: usize,
    pub queries: usize,
    pub csv: Option<PathBuf>,
}

fn write_csv(path: &Path, text: &str) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn validate(args: &ValidateArgs, out: &mut dyn Write) -> CliResult<()> {
    let seed = RngSeed(args.config.seed);
    let (pass, csv) = match args.suite {
        Suite::Bounds => {
            let sweep = SweepConfig {
                dists: args.dists.clone(),
                r: args.config.r,
                pairs: args.pairs,
                trials: args.trials,
                seed,
                ..SweepConfig::default()
            };
            let report = run_bound_sweep(&sweep)?;
            write!(out, "{}", report.to_text())?;
            (report.all_pass(), Some(report.to_csv()))
        }
        Suite::Tightness => {
            let report = run_tightness_suite(args.config.r, args.trials, seed)?;
            write!(out, "{}", report.to_text())?;
            (report.all_pass(), Some(report.to_csv()))
        }
        Suite::Sandwich => {
            let spec = WorkloadSpec {
                queries: args.queries,
                ..WorkloadSpec::new(args.n, args.dim, args.config.p, args.config.r)
            };
            let workload = Workload::clustered(&spec, seed)?;
            let params = args.config.params(args.dim)?;
            let options = args.config.index_options(args.n, &params)?;
            let index = Index::build(workload.dataset, params, options)?;
            let report = check_sandwich(&index, &workload.queries)?;
            writeln!(
                out,
                "sandwich suite: n = {}, d = {}, p = {}, k = {}, mode = {}",
                args.n,
                args.dim,
                args.config.p,
                index.k(),
                index.mode().name()
            )?;
            for o in report.outcomes.iter().filter(|o| !o.pass()) {
                writeln!(out, "query {}: missing near {:?}, beyond c*r {:?}", o.query, o.missing_near, o.far_returned)?;
            }
            writeln!(out, "{}", report.summary())?;
            let csv = report
                .outcomes
                .iter()
                .map(|o| format!("{},{},{},{}\n", o.query, o.near, o.returned, o.pass()))
                .fold(String::from("query,near,returned,pass\n"), |acc, line| acc + &line);
            (report.all_pass(), Some(csv))
        }
    };
    if let (Some(path), Some(csv)) = (&args.csv, csv) {
        write_csv(path, &csv)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Internal("validation suite reported failures".into()))
    }
}

pub struct GenArgs {
    pub n: usize,
    pub dim: usize,
    pub p: MetricP,
    pub r: f64,
    pub queries: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub queries_output: Option<PathBuf>,
    pub format: Format,
}

/// Writes a clustered synthetic dataset, and optionally matching queries.
pub fn generate(args: &GenArgs, out: &mut dyn Write) -> CliResult<()> {
    let spec = WorkloadSpec { queries: args.queries, ..WorkloadSpec::new(args.n, args.dim, args.p, args.r) };
    let workload = Workload::clustered(&spec, RngSeed(args.seed))?;
    let mut w = BufWriter::new(File::create(&args.output)?);
    write_rows(&mut w, workload.dataset.iter(), args.format)?;
    w.flush()?;
    writeln!(out, "wrote {} points to {}", workload.dataset.len(), args.output.display())?;
    if let Some(path) = &args.queries_output {
        let mut w = BufWriter::new(File::create(path)?);
        write_rows(&mut w, workload.queries.iter().map(Vec::as_slice), args.format)?;
        w.flush()?;
        writeln!(out, "wrote {} queries to {}", workload.queries.len(), path.display())?;
    }
    Ok(())
}
