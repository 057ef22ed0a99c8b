use certann::{
    cell_count, AnalysisParams, DistributionKind, IndexMode, IndexOptions, MetricP, RngSeed, DEFAULT_CELL_BUDGET,
};

use crate::error::{CliError, CliResult};

/// How the approximation factor was given on the command line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Approximation {
    /// An absolute value of `c`.
    Absolute(f64),
    /// A multiple of the threshold `tau`, resolved once `d` is known.
    OverTau(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub p: MetricP,
    pub r: f64,
    pub c: Approximation,
    pub distribution: DistributionKind,
    pub mode: IndexMode,
    pub k: Option<usize>,
    pub seed: u64,
    pub cell_budget: u64,
    /// Worker threads; 0 means all cores.
    pub threads: usize,
    /// Lower an automatically chosen k to the largest value the cell budget allows.
    pub clamp_k: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            p: MetricP::L2,
            r: 1.0,
            c: Approximation::OverTau(2.0),
            distribution: DistributionKind::Rademacher,
            mode: IndexMode::Light,
            k: None,
            seed: 0,
            cell_budget: DEFAULT_CELL_BUDGET,
            threads: 0,
            clamp_k: false,
        }
    }
}

impl Config {
    /// Validates against dimension `d`. A rejected `c` reports the threshold.
    pub fn params(&self, d: usize) -> CliResult<AnalysisParams> {
        let result = match self.c {
            Approximation::Absolute(c) => AnalysisParams::new(d, self.p, self.r, c, self.distribution),
            Approximation::OverTau(ratio) => {
                AnalysisParams::with_c_over_tau(d, self.p, self.r, ratio, self.distribution)
            }
        };
        result.map_err(|e| match e {
            certann::Error::BelowThreshold { c, tau } => CliError::Config(format!(
                "c = {c} is not admissible for d = {d}, p = {}, {} projections: c must exceed tau = {tau}",
                self.p, self.distribution
            )),
            other => other.into(),
        })
    }

    /// Index options for a dataset of `n` points, resolving k when requested.
    pub fn index_options(&self, n: usize, params: &AnalysisParams) -> CliResult<IndexOptions> {
        let mut options =
            IndexOptions { mode: self.mode, k: self.k, seed: RngSeed(self.seed), cell_budget: self.cell_budget };
        if self.clamp_k && self.k.is_none() {
            let auto = options.resolve_k(n, params)?;
            let mut k = auto;
            while k > 1 && cell_count(k, self.cell_budget).is_err() {
                k -= 1;
            }
            if k < auto {
                log::warn!("automatic k = {auto} exceeds the cell budget; using k = {k}");
            }
            options.k = Some(k);
        }
        Ok(options)
    }
}
