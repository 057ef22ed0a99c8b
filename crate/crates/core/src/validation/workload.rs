//! Seeded synthetic datasets for benchmarks and property checks.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::analysis::{distance_unchecked, lp_norm, rho_p, MetricP};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hashing::RngSeed;

/// Uniformly random direction scaled to unit l_p norm.
pub fn random_direction<R: Rng + ?Sized>(d: usize, p: MetricP, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = lp_norm(&v, p);
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Clustered points plus queries placed near the clusters, so that queries
/// have nonempty `r`-neighborhoods.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadSpec {
    pub n: usize,
    pub d: usize,
    pub p: MetricP,
    pub r: f64,
    pub queries: usize,
    pub cluster_size: usize,
    /// Maximum offset of a point from its cluster center, in units of `r`.
    pub cluster_radius: f64,
    /// Maximum offset of a query from a cluster center, in units of `r`.
    pub query_radius: f64,
    /// Standard deviation of cluster centers per coordinate (absolute).
    pub spread: f64,
    /// Points whose distance to any query lies within `r (1 ± margin)` are
    /// rejected and redrawn.
    pub margin: f64,
}

impl WorkloadSpec {
    pub fn new(n: usize, d: usize, p: MetricP, r: f64) -> Self {
        Self {
            n,
            d,
            p,
            r,
            queries: 100,
            cluster_size: 10,
            cluster_radius: 1.5,
            query_radius: 1.5,
            spread: 20.0 * r * rho_p(d, p),
            margin: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Workload {
    pub dataset: Dataset,
    pub queries: Vec<Vec<f64>>,
}

impl Workload {
    pub fn clustered(spec: &WorkloadSpec, seed: RngSeed) -> Result<Self> {
        if spec.d == 0 || !(spec.r > 0.0) || spec.cluster_size == 0 {
            return Err(Error::invalid("workload needs d >= 1, r > 0 and a nonzero cluster size"));
        }
        let mut rng = seed.rng();
        let clusters = spec.n.div_ceil(spec.cluster_size).max(1);
        let centers: Vec<Vec<f64>> = (0..clusters)
            .map(|_| {
                (0..spec.d)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        spec.spread * z
                    })
                    .collect()
            })
            .collect();
        let around = |center: &[f64], max_offset: f64, rng: &mut rand_chacha::ChaCha8Rng| {
            let radius = rng.random_range(0.0..=max_offset);
            random_direction(spec.d, spec.p, rng)
                .iter()
                .zip(center)
                .map(|(dir, c)| c + dir * radius)
                .collect::<Vec<f64>>()
        };
        let queries: Vec<Vec<f64>> = (0..spec.queries)
            .map(|_| {
                let c = rng.random_range(0..clusters);
                around(&centers[c], spec.query_radius * spec.r, &mut rng)
            })
            .collect();
        let mut dataset = Dataset::new(spec.d)?;
        while dataset.len() < spec.n {
            let c = rng.random_range(0..clusters);
            let x = around(&centers[c], spec.cluster_radius * spec.r, &mut rng);
            if clear_of_boundary(&x, &queries, spec.p, spec.r, spec.margin) {
                dataset.push(&x)?;
            }
        }
        Ok(Self { dataset, queries })
    }

    /// Points and queries uniform in `[-half_width, half_width]^d`, with the
    /// same boundary margin rule around radius `r`.
    pub fn uniform(
        n: usize,
        d: usize,
        half_width: f64,
        queries: usize,
        p: MetricP,
        r: f64,
        seed: RngSeed,
    ) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::invalid("half width must be positive"));
        }
        let mut rng = seed.rng();
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            (0..d).map(|_| rng.random_range(-half_width..half_width)).collect()
        };
        let queries: Vec<Vec<f64>> = (0..queries).map(|_| draw(&mut rng)).collect();
        let mut dataset = Dataset::new(d)?;
        while dataset.len() < n {
            let x = draw(&mut rng);
            if clear_of_boundary(&x, &queries, p, r, 1e-9) {
                dataset.push(&x)?;
            }
        }
        Ok(Self { dataset, queries })
    }
}

fn clear_of_boundary(x: &[f64], queries: &[Vec<f64>], p: MetricP, r: f64, margin: f64) -> bool {
    queries.iter().all(|q| (distance_unchecked(x, q, p) / r - 1.0).abs() > margin)
}
