use rayon::prelude::*;

use crate::analysis::{lp_distance, MetricP};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::index::Index;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    /// `distance < radius`
    Strict,
    /// `distance <= radius`
    Closed,
}

/// Exact linear scan: ids of all points within `radius` of `q`, ascending.
pub fn brute_force_query(dataset: &Dataset, q: &[f64], p: MetricP, radius: f64, cmp: Comparison) -> Result<Vec<u32>> {
    Error::check_dim(dataset.dim(), q.len())?;
    let mut out = Vec::new();
    for (id, x) in dataset.iter().enumerate() {
        let dist = lp_distance(x, q, p)?;
        let inside = match cmp {
            Comparison::Strict => dist < radius,
            Comparison::Closed => dist <= radius,
        };
        if inside {
            out.push(id as u32);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichOutcome {
    pub query: usize,
    pub returned: usize,
    pub near: usize,
    /// Points strictly within r that the index failed to return.
    pub missing_near: Vec<u32>,
    /// Returned points farther than c r.
    pub far_returned: Vec<u32>,
}

impl SandwichOutcome {
    pub fn pass(&self) -> bool {
        self.missing_near.is_empty() && self.far_returned.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SandwichReport {
    pub outcomes: Vec<SandwichOutcome>,
}

impl SandwichReport {
    pub fn passed(&self) -> usize {
        self.outcomes.iter().filter(|o| o.pass()).count()
    }

    pub fn total(&self) -> usize {
        self.outcomes.len()
    }

    pub fn all_pass(&self) -> bool {
        self.passed() == self.total()
    }

    pub fn summary(&self) -> String {
        format!("sandwich: {}/{} pass", self.passed(), self.total())
    }
}

/// Checks `{x : d(x,q) < r} ⊆ query(q) ⊆ {x : d(x,q) <= c r}` for every query.
pub fn check_sandwich(index: &Index, queries: &[Vec<f64>]) -> Result<SandwichReport> {
    let params = index.params();
    let (p, r, cr) = (params.p(), params.r(), params.c() * params.r());
    let outcomes = queries
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            let result = index.query(q)?;
            let returned = result.ids();
            let near = brute_force_query(index.dataset(), q, p, r, Comparison::Strict)?;
            let within = brute_force_query(index.dataset(), q, p, cr, Comparison::Closed)?;
            let missing_near = near.iter().copied().filter(|id| returned.binary_search(id).is_err()).collect();
            let far_returned = returned.iter().copied().filter(|id| within.binary_search(id).is_err()).collect();
            Ok(SandwichOutcome { query: i, returned: returned.len(), near: near.len(), missing_near, far_returned })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SandwichReport { outcomes })
}
