//! Closed-form quantities behind the index: l_p norms, the projection scaling
//! factor `rho_p = d^(1 - 1/p)`, the admissible approximation threshold `tau`,
//! the single-function false-positive bound `p_fp`, the growth exponent
//! `gamma = ln 3 / -ln p_fp`, and the two rules for picking the number of
//! concatenated hash functions `k`.
//!
//! Everything here is a pure function of its arguments.
//!
//! The Rademacher false-positive bound is `1 - (1 - tau/c)^2 / 2`, linear in
//! `tau/c` as the Khintchine/Paley-Zygmund argument produces it. A squared
//! variant `1 - (1 - tau^2/c^2)^2 / 2` has the same `c -> inf` limit of 1/2
//! but is not what [`p_fp_bound`] returns.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Exponent of an l_p metric, `p` in `[1, inf]`.
///
/// Infinity is a distinguished value rather than a large float, so every
/// formula can special-case `1/p = 0` exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricP(PRepr);

#[derive(Clone, Copy, Debug, PartialEq)]
enum PRepr {
    Finite(f64),
    Infinite,
}

impl MetricP {
    pub const L1: MetricP = MetricP(PRepr::Finite(1.0));
    pub const L2: MetricP = MetricP(PRepr::Finite(2.0));
    pub const INFINITY: MetricP = MetricP(PRepr::Infinite);

    /// Accepts any `p >= 1`; `f64::INFINITY` maps to [`MetricP::INFINITY`].
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Self::INFINITY)
        } else if p.is_finite() && p >= 1.0 {
            Ok(MetricP(PRepr::Finite(p)))
        } else {
            Err(Error::invalid(format!("metric exponent p must be in [1, inf], got {p}")))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self.0, PRepr::Infinite)
    }

    /// The exponent as a float (`f64::INFINITY` for the max-norm).
    pub fn value(self) -> f64 {
        match self.0 {
            PRepr::Finite(p) => p,
            PRepr::Infinite => f64::INFINITY,
        }
    }

    /// `1/p`, exactly zero for p = inf.
    pub fn reciprocal(self) -> f64 {
        match self.0 {
            PRepr::Finite(p) => 1.0 / p,
            PRepr::Infinite => 0.0,
        }
    }
}

impl fmt::Display for MetricP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            PRepr::Finite(p) => write!(f, "{p}"),
            PRepr::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for MetricP {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" | "∞" => Ok(Self::INFINITY),
            other => {
                let p: f64 =
                    other.parse().map_err(|_| Error::invalid(format!("cannot parse metric exponent {s:?}")))?;
                Self::new(p)
            }
        }
    }
}

/// Distribution of the projection-vector components. Both are supported on
/// `[-1, 1]`, which is what makes near pairs collide with certainty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistributionKind {
    /// Uniform on (-1, 1): mean 0, variance 1/3.
    BoundedUniform,
    /// +1 or -1 with probability 1/2 each.
    Rademacher,
}

impl DistributionKind {
    /// Standard deviation of a single component.
    pub fn alpha(self) -> f64 {
        match self {
            DistributionKind::BoundedUniform => (1.0f64 / 3.0).sqrt(),
            DistributionKind::Rademacher => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DistributionKind::BoundedUniform => "uniform",
            DistributionKind::Rademacher => "rademacher",
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "bounded-uniform" | "boundeduniform" => Ok(DistributionKind::BoundedUniform),
            "rademacher" => Ok(DistributionKind::Rademacher),
            _ => Err(Error::invalid(format!("unknown distribution {s:?} (expected uniform or rademacher)"))),
        }
    }
}

/// `d^(1 - 1/p)`: the smallest constant with `||z||_1 <= rho_p ||z||_p`.
pub fn rho_p(d: usize, p: MetricP) -> f64 {
    (d as f64).powf(1.0 - p.reciprocal())
}

/// `max{ sqrt(d), d^(1 - 1/p) }`.
pub fn max_scale(d: usize, p: MetricP) -> f64 {
    let d = d as f64;
    d.sqrt().max(d.powf(1.0 - p.reciprocal()))
}

/// Minimum admissible approximation factor for the false-positive bound.
pub fn tau(dist: DistributionKind, d: usize, p: MetricP) -> f64 {
    let scale = max_scale(d, p);
    match dist {
        DistributionKind::BoundedUniform => 2.0 / dist.alpha() * scale,
        DistributionKind::Rademacher => 8f64.sqrt() * scale,
    }
}

/// Upper bound on the probability that one hash function puts a pair at
/// distance greater than `c * r` into the same or adjacent buckets.
pub fn p_fp_bound(dist: DistributionKind, c: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be positive and finite, got {tau}")));
    }
    if !(c > tau) {
        return Err(Error::BelowThreshold { c, tau });
    }
    Ok(match dist {
        DistributionKind::BoundedUniform => {
            let ratio = tau / c;
            let slack = 1.0 - ratio * ratio;
            1.0 - slack * slack / 3.0
        }
        DistributionKind::Rademacher => {
            let slack = 1.0 - tau / c;
            1.0 - slack * slack / 2.0
        }
    })
}

/// `ln 3 / -ln p_fp`.
pub fn gamma(p_fp: f64) -> Result<f64> {
    if !(p_fp > 0.0 && p_fp < 1.0) {
        return Err(Error::ProbabilityOutOfRange(p_fp));
    }
    Ok(3f64.ln() / -p_fp.ln())
}

/// `k = ceil(ln(n a / d) / a)`, the choice for the fully expanded index.
pub fn choose_k_main(n: usize, d: usize, a: f64) -> Result<usize> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    positive_rate(a)?;
    let value = (n as f64 * a / d as f64).ln() / a;
    ceil_at_least_one(value)
}

/// `k = ceil(ln(n a / b) / (a + b))`, the choice for the light index.
pub fn choose_k_light(n: usize, a: f64, b: f64) -> Result<usize> {
    positive_rate(a)?;
    positive_rate(b)?;
    let value = (n as f64 * a / b).ln() / (a + b);
    ceil_at_least_one(value)
}

fn positive_rate(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("rate constant must be positive and finite, got {a}")))
    }
}

fn ceil_at_least_one(value: f64) -> Result<usize> {
    let k = value.ceil();
    // NaN (n = 0 gives ln 0 = -inf) falls through to the error as well.
    if k >= 1.0 && k.is_finite() {
        Ok(k as usize)
    } else {
        Err(Error::DatasetTooSmall { value })
    }
}

/// l_p norm of `z`.
pub fn lp_norm(z: &[f64], p: MetricP) -> f64 {
    match p.0 {
        PRepr::Infinite => z.iter().fold(0.0, |m, v| m.max(v.abs())),
        PRepr::Finite(1.0) => z.iter().map(|v| v.abs()).sum(),
        PRepr::Finite(2.0) => z.iter().map(|v| v * v).sum::<f64>().sqrt(),
        PRepr::Finite(e) => z.iter().map(|v| v.abs().powf(e)).sum::<f64>().powf(1.0 / e),
    }
}

/// l_p distance between two vectors of equal dimension.
pub fn lp_distance(x: &[f64], y: &[f64], p: MetricP) -> Result<f64> {
    Error::check_dim(x.len(), y.len())?;
    Ok(distance_unchecked(x, y, p))
}

pub(crate) fn distance_unchecked(x: &[f64], y: &[f64], p: MetricP) -> f64 {
    let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
    match p.0 {
        PRepr::Infinite => diffs.fold(0.0, f64::max),
        PRepr::Finite(1.0) => diffs.sum(),
        PRepr::Finite(2.0) => diffs.map(|v| v * v).sum::<f64>().sqrt(),
        PRepr::Finite(e) => diffs.map(|v| v.powf(e)).sum::<f64>().powf(1.0 / e),
    }
}

/// A validated parameter set: dimension, metric, near radius, approximation
/// factor and projection distribution, with `c > tau` enforced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisParams {
    d: usize,
    p: MetricP,
    r: f64,
    c: f64,
    dist: DistributionKind,
}

impl AnalysisParams {
    pub fn new(d: usize, p: MetricP, r: f64, c: f64, dist: DistributionKind) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid(format!("radius must be positive and finite, got {r}")));
        }
        let threshold = tau(dist, d, p);
        if !(c > threshold) || c.is_nan() {
            return Err(Error::BelowThreshold { c, tau: threshold });
        }
        if !c.is_finite() {
            return Err(Error::invalid("approximation factor must be finite"));
        }
        Ok(Self { d, p, r, c, dist })
    }

    /// Builds parameters with `c = ratio * tau`; `ratio` must exceed 1.
    pub fn with_c_over_tau(d: usize, p: MetricP, r: f64, ratio: f64, dist: DistributionKind) -> Result<Self> {
        Self::new(d, p, r, ratio * tau(dist, d, p), dist)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> MetricP {
        self.p
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn dist(&self) -> DistributionKind {
        self.dist
    }

    pub fn tau(&self) -> f64 {
        tau(self.dist, self.d, self.p)
    }

    pub fn derived(&self) -> DerivedConstants {
        let tau = self.tau();
        let p_fp = p_fp_bound(self.dist, self.c, tau).expect("c > tau checked at construction");
        let a = -p_fp.ln();
        let b = 3f64.ln();
        DerivedConstants { rho_p: rho_p(self.d, self.p), tau, p_fp, gamma: b / a, a, b }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedConstants {
    pub rho_p: f64,
    pub tau: f64,
    pub p_fp: f64,
    pub gamma: f64,
    /// `-ln p_fp`.
    pub a: f64,
    /// `ln 3`.
    pub b: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn rho_p_examples() {
        assert!(close(rho_p(4, MetricP::L2), 2.0));
        assert!(close(rho_p(7, MetricP::L1), 1.0));
        assert!(close(rho_p(9, MetricP::INFINITY), 9.0));
    }

    #[test]
    fn lp_distance_examples() {
        assert!(close(lp_distance(&[0.0, 0.0], &[3.0, 4.0], MetricP::L2).unwrap(), 5.0));
        assert!(close(lp_distance(&[1.0, 1.0, 1.0], &[0.0; 3], MetricP::L1).unwrap(), 3.0));
        assert!(close(lp_distance(&[2.0, -7.0], &[0.0, 0.0], MetricP::INFINITY).unwrap(), 7.0));
        let p3 = MetricP::new(3.0).unwrap();
        assert!(close(lp_distance(&[1.0, 2.0], &[0.0, 0.0], p3).unwrap(), 9f64.cbrt()));
    }

    #[test]
    fn lp_distance_rejects_mismatch() {
        let err = lp_distance(&[1.0], &[1.0, 2.0], MetricP::L2).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 1, actual: 2 }));
    }

    #[test]
    fn max_scale_examples() {
        assert!(close(max_scale(16, MetricP::L1), 4.0));
        assert!(close(max_scale(16, MetricP::new(4.0).unwrap()), 8.0));
        assert!(close(max_scale(16, MetricP::L2), 4.0));
    }

    #[test]
    fn tau_examples() {
        let r = DistributionKind::Rademacher;
        let u = DistributionKind::BoundedUniform;
        assert!(close(tau(r, 4, MetricP::L2), 8f64.sqrt() * 2.0));
        assert!((tau(r, 4, MetricP::L2) - 5.65685).abs() < 1e-5);
        assert!(close(tau(u, 4, MetricP::L2), 2.0 * 3f64.sqrt() * 2.0));
        assert!((tau(u, 4, MetricP::L2) - 6.92820).abs() < 1e-5);
        assert!((tau(r, 1, MetricP::L1) - 2.82843).abs() < 1e-5);
    }

    #[test]
    fn p_fp_examples() {
        let r = DistributionKind::Rademacher;
        let u = DistributionKind::BoundedUniform;
        assert!(close(p_fp_bound(r, 2.0 * 3.0, 3.0).unwrap(), 7.0 / 8.0));
        assert!((p_fp_bound(r, 1e12, 1.0).unwrap() - 0.5).abs() < 1e-9);
        assert!((p_fp_bound(u, 1e12, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn p_fp_rejects_c_at_or_below_tau() {
        let err = p_fp_bound(DistributionKind::Rademacher, 2.0, 2.0).unwrap_err();
        assert!(err.to_string().contains("below admissible threshold"));
        assert!(p_fp_bound(DistributionKind::BoundedUniform, 1.0, 2.0).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert!(close(gamma(0.5).unwrap(), 3f64.log2()));
        assert!((gamma(0.5).unwrap() - 1.58496).abs() < 1e-5);
        assert!((gamma(2.0 / 3.0).unwrap() - 2.70951).abs() < 1e-5);
        assert!(close(gamma(1.0 / 3.0).unwrap(), 1.0));
        assert!(gamma(0.0).is_err());
        assert!(gamma(1.0).is_err());
        assert!(gamma(f64::NAN).is_err());
    }

    #[test]
    fn choose_k_main_examples() {
        let ln2 = 2f64.ln();
        assert_eq!(choose_k_main(1000, 10, ln2).unwrap(), 7);
        assert_eq!(choose_k_main(1_000_000, 32, ln2).unwrap(), 15);
        // n = e*d, so ln(n a / d) is just under 1.
        assert_eq!(choose_k_main(271_828, 100_000, 1.0).unwrap(), 1);
        let err = choose_k_main(5, 10, ln2).unwrap_err();
        assert!(err.to_string().contains("supply k manually"));
        assert!(choose_k_main(0, 10, ln2).is_err());
    }

    #[test]
    fn choose_k_light_examples() {
        let (a, b) = (2f64.ln(), 3f64.ln());
        assert_eq!(choose_k_light(1_000_000, a, b).unwrap(), 8);
        assert_eq!(choose_k_light(1000, a, b).unwrap(), 4);
        // ln(n a / b) = a + b exactly when n = 6 b / a; one step below stays at k = 1.
        let boundary = (6.0 * b / a).floor() as usize;
        assert_eq!(choose_k_light(boundary, a, b).unwrap(), 1);
        assert!(choose_k_light(1, a, b).is_err());
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("inf".parse::<MetricP>().unwrap(), MetricP::INFINITY);
        assert_eq!("1.5".parse::<MetricP>().unwrap().value(), 1.5);
        assert!("0.5".parse::<MetricP>().is_err());
        assert!(MetricP::new(f64::NAN).is_err());
        assert_eq!(MetricP::new(f64::INFINITY).unwrap(), MetricP::INFINITY);
        assert_eq!(MetricP::INFINITY.to_string(), "inf");
    }

    #[test]
    fn params_enforce_threshold() {
        let err = AnalysisParams::new(4, MetricP::L2, 1.0, 5.0, DistributionKind::Rademacher).unwrap_err();
        assert!(matches!(err, Error::BelowThreshold { .. }));
        assert!(AnalysisParams::new(0, MetricP::L2, 1.0, 100.0, DistributionKind::Rademacher).is_err());
        assert!(AnalysisParams::new(4, MetricP::L2, 0.0, 100.0, DistributionKind::Rademacher).is_err());
        let params = AnalysisParams::with_c_over_tau(4, MetricP::L2, 1.0, 2.0, DistributionKind::Rademacher).unwrap();
        let consts = params.derived();
        assert!(close(consts.p_fp, 7.0 / 8.0));
        assert!(close(consts.gamma, consts.b / consts.a));
        assert!(close(consts.rho_p, 2.0));
    }

    fn any_p() -> impl Strategy<Value = MetricP> {
        prop_oneof![(1.0f64..8.0).prop_map(|p| MetricP::new(p).unwrap()), Just(MetricP::INFINITY),]
    }

    proptest! {
        #[test]
        fn l1_bounded_by_rho_times_lp(z in prop::collection::vec(-100.0f64..100.0, 1..40), p in any_p()) {
            let d = z.len();
            let l1 = lp_norm(&z, MetricP::L1);
            let rhs = rho_p(d, p) * lp_norm(&z, p);
            prop_assert!(l1 <= rhs * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn norm_sandwich(z in prop::collection::vec(-100.0f64..100.0, 1..40), pa in 1.0f64..6.0, pb in 1.0f64..6.0) {
            let (a, b) = if pa >= pb { (pa, pb) } else { (pb, pa) };
            let d = z.len() as f64;
            let za = lp_norm(&z, MetricP::new(a).unwrap());
            let zb = lp_norm(&z, MetricP::new(b).unwrap());
            prop_assert!(za <= zb * (1.0 + 1e-12));
            prop_assert!(zb <= d.powf(1.0 / b - 1.0 / a) * za * (1.0 + 1e-12));
        }

        #[test]
        fn gamma_decreasing_in_c(d in 1usize..200, p in any_p(), lo in 1.001f64..50.0, step in 0.01f64..50.0) {
            let t = tau(DistributionKind::Rademacher, d, p);
            let g1 = gamma(p_fp_bound(DistributionKind::Rademacher, lo * t, t).unwrap()).unwrap();
            let g2 = gamma(p_fp_bound(DistributionKind::Rademacher, (lo + step) * t, t).unwrap()).unwrap();
            prop_assert!(g2 < g1);
            prop_assert!(g2 > 3f64.log2());
        }

        #[test]
        fn choose_k_monotone_in_n(n in 1usize..10_000_000, extra in 0usize..10_000_000, d in 1usize..512, a in 0.01f64..3.0) {
            if let (Ok(k1), Ok(k2)) = (choose_k_main(n, d, a), choose_k_main(n + extra, d, a)) {
                prop_assert!(k1 <= k2);
            }
            if let Ok(k1) = choose_k_light(n, a, 3f64.ln()) {
                prop_assert!(k1 <= choose_k_light(n + extra, a, 3f64.ln()).unwrap());
            }
        }
    }
}
