//! Witness points at distance close to the approximation threshold that still
//! collide with the origin, one construction for `p >= 2` and one for `p < 2`.

use crate::analysis::{rho_p, DistributionKind, MetricP};
use crate::error::{Error, Result};
use crate::hashing::RngSeed;
use crate::report::sig6;
use crate::validation::stats::{estimate_collision_rate, CollisionEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `p >= 2`: a single nonzero coordinate.
    PGe2,
    /// `1 <= p < 2`: all coordinates equal.
    PLt2,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::PGe2 => "p>=2",
            Regime::PLt2 => "p<2",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TightnessWitness {
    pub point: Vec<f64>,
    /// `||point||_p` as constructed.
    pub claimed_norm: f64,
    pub epsilon: f64,
    pub regime: Regime,
}

/// `x0 = (r rho_p - eps, 0, ..., 0)`, which collides with the origin under
/// every admissible hash function.
pub fn tightness_witness_pge2(d: usize, p: MetricP, r: f64, epsilon: f64) -> Result<TightnessWitness> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if p.value() < 2.0 {
        return Err(Error::invalid(format!("this witness needs p >= 2, got {p}")));
    }
    let scale = r * rho_p(d, p);
    if !(epsilon > 0.0 && epsilon < scale) {
        return Err(Error::invalid(format!("epsilon must lie in (0, {scale}), got {epsilon}")));
    }
    let mut point = vec![0.0; d];
    point[0] = scale - epsilon;
    Ok(TightnessWitness { point, claimed_norm: scale - epsilon, epsilon, regime: Regime::PGe2 })
}

/// `x1 = r d^(-1/p + 1/2 - eps) (1, ..., 1)` with `||x1||_p = r d^(1/2 - eps)`.
pub fn tightness_witness_plt2(d: usize, p: MetricP, r: f64, epsilon: f64) -> Result<TightnessWitness> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if p.value() >= 2.0 {
        return Err(Error::invalid(format!("this witness needs 1 <= p < 2, got {p}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let df = d as f64;
    let coord = r * df.powf(-p.reciprocal() + 0.5 - epsilon);
    Ok(TightnessWitness {
        point: vec![coord; d],
        claimed_norm: r * df.powf(0.5 - epsilon),
        epsilon,
        regime: Regime::PLt2,
    })
}

/// `2 exp(-d^(2 eps) / 2)`. Not clamped: values above 1 are vacuous.
pub fn hoeffding_bound(d: usize, epsilon: f64) -> f64 {
    2.0 * (-(d as f64).powf(2.0 * epsilon) / 2.0).exp()
}

/// Collision estimate between the witness and the origin.
pub fn origin_collisions(
    witness: &TightnessWitness,
    dist: DistributionKind,
    p: MetricP,
    r: f64,
    trials: u64,
    seed: RngSeed,
) -> Result<CollisionEstimate> {
    let origin = vec![0.0; witness.point.len()];
    estimate_collision_rate(&witness.point, &origin, dist, r, p, trials, seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TightnessRow {
    pub regime: Regime,
    pub d: usize,
    pub p: MetricP,
    pub epsilon: f64,
    pub dist: DistributionKind,
    pub estimate: CollisionEstimate,
    /// Hoeffding bound on the separation probability (p < 2 only).
    pub bound: Option<f64>,
}

impl TightnessRow {
    /// p >= 2: every trial collides. p < 2: the 99% lower confidence bound
    /// of the separation rate does not exceed the Hoeffding bound.
    pub fn pass(&self) -> bool {
        match self.bound {
            None => self.estimate.collisions == self.estimate.trials,
            Some(bound) => 1.0 - self.estimate.wilson_upper_99 <= bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TightnessReport {
    pub rows: Vec<TightnessRow>,
}

pub const TIGHTNESS_CSV_HEADER: &str = "regime,d,p,epsilon,distribution,trials,collisions,separation_rate,bound,pass";

impl TightnessReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(TightnessRow::pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{TIGHTNESS_CSV_HEADER}\n");
        for row in &self.rows {
            let e = &row.estimate;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                row.regime.name(),
                row.d,
                row.p,
                row.epsilon,
                row.dist,
                e.trials,
                e.collisions,
                e.separations() as f64 / e.trials as f64,
                row.bound.map_or(String::new(), |b| b.to_string()),
                row.pass()
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("tightness witnesses\n");
        for row in &self.rows {
            let e = &row.estimate;
            let bound = match row.bound {
                // Bounds above 1 say nothing; show them as 1.
                Some(b) => format!(", hoeffding bound {}", sig6(b.min(1.0))),
                None => String::new(),
            };
            out.push_str(&format!(
                "{:<5} d={:<5} p={:<4} eps={:<10} {:<11} collided {}/{}{}  {}\n",
                row.regime.name(),
                row.d,
                row.p.to_string(),
                sig6(row.epsilon),
                row.dist.name(),
                e.collisions,
                e.trials,
                bound,
                if row.pass() { "pass" } else { "FAIL" }
            ));
        }
        out
    }
}

/// Both witness families over both distributions: `p >= 2` for
/// `d in {4, 64}`, `p in {2, 4, inf}` with `eps = 1e-6 r rho_p`, and `p < 2`
/// for `d = 4096`, `p in {1, 1.5}`, `eps = 1/4`.
pub fn run_tightness_suite(r: f64, trials: u64, seed: RngSeed) -> Result<TightnessReport> {
    let dists = [DistributionKind::Rademacher, DistributionKind::BoundedUniform];
    let mut rows = Vec::new();
    let mut stream = 0u64;
    for dist in dists {
        for d in [4usize, 64] {
            for p in [MetricP::L2, MetricP::new(4.0)?, MetricP::INFINITY] {
                let epsilon = 1e-6 * r * rho_p(d, p);
                let witness = tightness_witness_pge2(d, p, r, epsilon)?;
                let estimate = origin_collisions(&witness, dist, p, r, trials, seed.derive(stream))?;
                stream += 1;
                rows.push(TightnessRow { regime: Regime::PGe2, d, p, epsilon, dist, estimate, bound: None });
            }
        }
        for p in [MetricP::L1, MetricP::new(1.5)?] {
            let (d, epsilon) = (4096, 0.25);
            let witness = tightness_witness_plt2(d, p, r, epsilon)?;
            let estimate = origin_collisions(&witness, dist, p, r, trials, seed.derive(stream))?;
            stream += 1;
            rows.push(TightnessRow {
                regime: Regime::PLt2,
                d,
                p,
                epsilon,
                dist,
                estimate,
                bound: Some(hoeffding_bound(d, epsilon)),
            });
        }
    }
    Ok(TightnessReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::lp_norm;

    #[test]
    fn pge2_example() {
        let w = tightness_witness_pge2(4, MetricP::L2, 1.0, 0.1).unwrap();
        assert_eq!(w.point, vec![1.9, 0.0, 0.0, 0.0]);
        assert!((lp_norm(&w.point, MetricP::L2) - 1.9).abs() < 1e-15);
        assert_eq!(w.point.iter().filter(|v| **v != 0.0).count(), 1);
        assert!(tightness_witness_pge2(4, MetricP::L2, 1.0, 2.0).is_err());
        assert!(tightness_witness_pge2(4, MetricP::L2, 1.0, 0.0).is_err());
        assert!(tightness_witness_pge2(4, MetricP::L1, 1.0, 0.1).is_err());
    }

    #[test]
    fn pge2_norm_ratio_approaches_one() {
        let mut last = 0.0;
        for eps in [1e-1, 1e-3, 1e-6, 1e-9] {
            let w = tightness_witness_pge2(9, MetricP::INFINITY, 2.0, eps).unwrap();
            let ratio = w.claimed_norm / (2.0 * 9.0);
            assert!(ratio > last && ratio < 1.0);
            last = ratio;
        }
        assert!(1.0 - last < 1e-9);
    }

    #[test]
    fn pge2_always_collides() {
        for dist in [DistributionKind::Rademacher, DistributionKind::BoundedUniform] {
            let w = tightness_witness_pge2(8, MetricP::new(3.0).unwrap(), 0.5, 1e-3).unwrap();
            let est = origin_collisions(&w, dist, MetricP::new(3.0).unwrap(), 0.5, 20_000, RngSeed(1)).unwrap();
            assert_eq!(est.collisions, 20_000);
        }
    }

    #[test]
    fn plt2_example() {
        let w = tightness_witness_plt2(16, MetricP::L1, 1.0, 0.25).unwrap();
        assert!(w.point.iter().all(|&v| (v - 0.125).abs() < 1e-15));
        assert!((lp_norm(&w.point, MetricP::L1) - 2.0).abs() < 1e-12);
        assert!((w.claimed_norm - 2.0).abs() < 1e-12);
        assert!(tightness_witness_plt2(16, MetricP::L2, 1.0, 0.25).is_err());
        assert!(tightness_witness_plt2(16, MetricP::L1, 1.0, 0.0).is_err());
        let p = MetricP::new(1.5).unwrap();
        let w = tightness_witness_plt2(64, p, 3.0, 0.1).unwrap();
        assert!((lp_norm(&w.point, p) - w.claimed_norm).abs() < 1e-9 * w.claimed_norm);
    }

    #[test]
    fn plt2_small_epsilon_tends_to_sqrt_d() {
        let w = tightness_witness_plt2(100, MetricP::L1, 2.0, 1e-12).unwrap();
        assert!((w.claimed_norm - 2.0 * 10.0).abs() < 1e-9);
    }

    #[test]
    fn hoeffding_examples() {
        assert!((hoeffding_bound(1, 0.3) - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
        assert!((hoeffding_bound(1, 0.3) - 1.2131).abs() < 1e-4);
        assert_eq!(hoeffding_bound(10_000, 0.5), 0.0);
        assert!((hoeffding_bound(100, 0.25) - 2.0 * (-5.0f64).exp()).abs() < 1e-15);
        assert!((hoeffding_bound(100, 0.25) - 0.01348).abs() < 1e-5);
    }

    #[test]
    fn plt2_separation_rate_within_bound() {
        let (d, eps) = (1024, 0.25);
        let w = tightness_witness_plt2(d, MetricP::L1, 1.0, eps).unwrap();
        let est = origin_collisions(&w, DistributionKind::Rademacher, MetricP::L1, 1.0, 20_000, RngSeed(3)).unwrap();
        let row = TightnessRow {
            regime: Regime::PLt2,
            d,
            p: MetricP::L1,
            epsilon: eps,
            dist: DistributionKind::Rademacher,
            estimate: est,
            bound: Some(hoeffding_bound(d, eps)),
        };
        assert!(row.pass(), "{est:?}");
    }
}
