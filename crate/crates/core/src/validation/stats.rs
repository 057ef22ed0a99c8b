use rayon::prelude::*;

use crate::analysis::{lp_distance, lp_norm, AnalysisParams, DistributionKind, MetricP};
use crate::error::{Error, Result};
use crate::hashing::{HashFunction, RngSeed, HASH_LIMIT};
use crate::report::sig6;
use crate::validation::workload::random_direction;

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Trials per independently seeded chunk.
const CHUNK: u64 = 4096;

/// 99% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials, "need 0 <= successes <= trials, trials > 0");
    let n = trials as f64;
    let rate = successes as f64 / n;
    let z2 = Z_99 * Z_99;
    let denom = 1.0 + z2 / n;
    let center = (rate + z2 / (2.0 * n)) / denom;
    let half = Z_99 * (rate * (1.0 - rate) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lower = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, rate) };
    let upper = if successes == trials { 1.0 } else { (center + half).clamp(rate, 1.0) };
    (lower, upper)
}

/// Monte-Carlo estimate of `P(|h(x) - h(y)| <= 1)` over random hash functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionEstimate {
    pub trials: u64,
    pub collisions: u64,
    pub rate: f64,
    pub wilson_lower_99: f64,
    pub wilson_upper_99: f64,
}

impl CollisionEstimate {
    pub fn from_counts(collisions: u64, trials: u64) -> Self {
        let (lo, hi) = wilson_interval(collisions, trials);
        Self { trials, collisions, rate: collisions as f64 / trials as f64, wilson_lower_99: lo, wilson_upper_99: hi }
    }

    /// Trials in which the pair was *not* hash-equivalent.
    pub fn separations(&self) -> u64 {
        self.trials - self.collisions
    }
}

/// Counts collisions of `x` and `y` over `trials` freshly drawn functions.
pub fn estimate_collision_rate(
    x: &[f64],
    y: &[f64],
    dist: DistributionKind,
    r: f64,
    p: MetricP,
    trials: u64,
    seed: RngSeed,
) -> Result<CollisionEstimate> {
    Error::check_dim(x.len(), y.len())?;
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let d = x.len();
    let template = HashFunction::sample(dist, d, r, p, &mut seed.rng())?;
    // |<x, v>| <= ||x||_1 for every admissible v, so one check covers all trials.
    for point in [x, y] {
        let worst = lp_norm(point, MetricP::L1) / template.denom();
        if !(worst <= HASH_LIMIT) {
            return Err(Error::HashOverflow(worst));
        }
    }
    let chunks = trials.div_ceil(CHUNK);
    let collisions: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = seed.stream(chunk);
            let mut h = template.clone();
            let count = CHUNK.min(trials - chunk * CHUNK);
            let mut hits = 0u64;
            for _ in 0..count {
                h.resample(dist, &mut rng);
                let gap = h.scaled(x).floor() - h.scaled(y).floor();
                if gap.abs() <= 1.0 {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(CollisionEstimate::from_counts(collisions, trials))
}

pub fn estimate_collision_probability(
    x: &[f64],
    y: &[f64],
    params: &AnalysisParams,
    trials: u64,
    seed: RngSeed,
) -> Result<CollisionEstimate> {
    Error::check_dim(params.d(), x.len())?;
    estimate_collision_rate(x, y, params.dist(), params.r(), params.p(), trials, seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FarPairRow {
    pub pair: usize,
    pub distance: f64,
    pub estimate: CollisionEstimate,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FarPairReport {
    pub params: AnalysisParams,
    /// Closed-form `p_fp` for `params`.
    pub bound: f64,
    pub rows: Vec<FarPairRow>,
    pub workers: usize,
}

impl FarPairReport {
    pub fn violations(&self) -> impl Iterator<Item = &FarPairRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Row with the largest upper confidence bound.
    pub fn worst(&self) -> Option<&FarPairRow> {
        self.rows.iter().max_by(|a, b| a.estimate.wilson_upper_99.total_cmp(&b.estimate.wilson_upper_99))
    }
}

/// Random pair at distance `u * c * r` with `u` uniform in `[1.01, 10]`.
fn far_pair<R: rand::Rng>(params: &AnalysisParams, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let cr = params.c() * params.r();
    loop {
        let origin_scale = cr * rng.random_range(0.0..4.0);
        let x: Vec<f64> =
            random_direction(params.d(), MetricP::L2, rng).into_iter().map(|v| v * origin_scale).collect();
        let stretch = rng.random_range(1.01..=10.0) * cr;
        let y: Vec<f64> =
            random_direction(params.d(), params.p(), rng).iter().zip(&x).map(|(dir, a)| a + dir * stretch).collect();
        if lp_distance(&x, &y, params.p()).expect("same dimension") > cr {
            return (x, y);
        }
    }
}

/// Estimates the collision rate of `num_pairs` random far pairs and checks
/// each 99% upper bound against the closed-form `p_fp`.
pub fn check_far_pair_bound(
    params: &AnalysisParams,
    num_pairs: usize,
    trials: u64,
    seed: RngSeed,
) -> Result<FarPairReport> {
    let bound = params.derived().p_fp;
    let mut rng = seed.derive(u64::MAX).rng();
    let pairs: Vec<_> = (0..num_pairs).map(|_| far_pair(params, &mut rng)).collect();
    let rows = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let estimate = estimate_collision_probability(x, y, params, trials, seed.derive(i as u64))?;
            Ok(FarPairRow {
                pair: i,
                distance: lp_distance(x, y, params.p())?,
                pass: estimate.wilson_upper_99 <= bound,
                estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FarPairReport { params: *params, bound, rows, workers: rayon::current_num_threads() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub ps: Vec<MetricP>,
    pub c_over_tau: Vec<f64>,
    pub dists: Vec<DistributionKind>,
    pub r: f64,
    pub pairs: usize,
    pub trials: u64,
    pub seed: RngSeed,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dims: vec![4, 16, 64],
            ps: vec![MetricP::L1, MetricP::L2, MetricP::INFINITY],
            c_over_tau: vec![1.5, 3.0],
            dists: vec![DistributionKind::Rademacher, DistributionKind::BoundedUniform],
            r: 1.0,
            pairs: 50,
            trials: 100_000,
            seed: RngSeed(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub d: usize,
    pub p: MetricP,
    pub c_over_tau: f64,
    pub dist: DistributionKind,
    pub report: FarPairReport,
}

impl SweepCell {
    pub fn pass(&self) -> bool {
        self.report.violations().next().is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub workers: usize,
}

pub const SWEEP_CSV_HEADER: &str = "d,p,c_over_tau,distribution,trials,rate,wilson_upper,bound,pass";

impl SweepReport {
    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(SweepCell::pass)
    }

    /// One row per cell, reporting its worst pair at full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for cell in &self.cells {
            let worst = cell.report.worst().map(|w| w.estimate);
            let (rate, upper) = worst.map_or((f64::NAN, f64::NAN), |e| (e.rate, e.wilson_upper_99));
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                cell.d,
                cell.p,
                cell.c_over_tau,
                cell.dist,
                worst.map_or(0, |e| e.trials),
                rate,
                upper,
                cell.report.bound,
                cell.pass()
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "far-pair bound sweep ({} cells, {} workers)\n{:>4} {:>5} {:>6} {:>11} {:>8} {:>10} {:>12} {:>10}  result\n",
            self.cells.len(),
            self.workers,
            "d",
            "p",
            "c/tau",
            "dist",
            "trials",
            "max rate",
            "wilson_upper",
            "bound"
        );
        for cell in &self.cells {
            let worst = cell.report.worst().map(|w| w.estimate);
            let (rate, upper) = worst.map_or((f64::NAN, f64::NAN), |e| (e.rate, e.wilson_upper_99));
            out.push_str(&format!(
                "{:>4} {:>5} {:>6} {:>11} {:>8} {:>10} {:>12} {:>10}  {}\n",
                cell.d,
                cell.p.to_string(),
                sig6(cell.c_over_tau),
                cell.dist.name(),
                worst.map_or(0, |e| e.trials),
                sig6(rate),
                sig6(upper),
                sig6(cell.report.bound),
                if cell.pass() {
                    format!("pass ({} pairs)", cell.report.rows.len())
                } else {
                    format!("FAIL ({} violations)", cell.report.violations().count())
                }
            ));
        }
        out
    }
}

/// Runs [`check_far_pair_bound`] over every `(dist, d, p, c/tau)` combination.
pub fn run_bound_sweep(config: &SweepConfig) -> Result<SweepReport> {
    let mut cells = Vec::new();
    let mut cell_index = 0u64;
    for &dist in &config.dists {
        for &d in &config.dims {
            for &p in &config.ps {
                for &ratio in &config.c_over_tau {
                    let params = AnalysisParams::with_c_over_tau(d, p, config.r, ratio, dist)?;
                    let report =
                        check_far_pair_bound(&params, config.pairs, config.trials, config.seed.derive(cell_index))?;
                    cells.push(SweepCell { d, p, c_over_tau: ratio, dist, report });
                    cell_index += 1;
                }
            }
        }
    }
    Ok(SweepReport { cells, workers: rayon::current_num_threads() })
}
