//! Random-projection hash family with guaranteed collisions for near pairs.
//!
//! A [`HashFunction`] maps `x` to `floor(<x, v> / (r * rho_p))` where every
//! component of `v` lies in `[-1, 1]`. Because `|<x - y, v>| <= ||x - y||_1 <=
//! rho_p ||x - y||_p`, any pair with `||x - y||_p < r` lands in the same or an
//! adjacent bucket under every sampled function. There is deliberately no
//! random offset term: the guarantee depends on its absence.
//!
//! Floating point: the guarantee is exact in real arithmetic. With f64
//! accumulation it holds whenever `rho_p * r - |<x - y, v>|` exceeds the
//! rounding error of the two dot products (about `d * eps * sum |x_i v_i|`).

use std::borrow::Borrow;
use std::ops::Deref;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{rho_p, DistributionKind, MetricP};
use crate::error::{Error, Result};

/// Largest magnitude a hash component may take before it is rejected.
pub const HASH_LIMIT: f64 = 4_611_686_018_427_387_904.0; // 2^62

/// Seed for every random draw in the crate. The generator is ChaCha8, which
/// produces the same stream on every platform.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent stream `stream` under the same key.
    pub fn stream(self, stream: u64) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_stream(stream);
        rng
    }

    /// A decorrelated child seed, used to give sub-experiments their own seed.
    pub fn derive(self, index: u64) -> RngSeed {
        RngSeed(splitmix64(self.0 ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D))))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Overwrites `out` with i.i.d. draws from `dist`.
pub fn fill_projection<R: RngCore + ?Sized>(dist: DistributionKind, out: &mut [f64], rng: &mut R) {
    match dist {
        DistributionKind::Rademacher => {
            for chunk in out.chunks_mut(64) {
                let bits = rng.next_u64();
                for (i, v) in chunk.iter_mut().enumerate() {
                    *v = if (bits >> i) & 1 == 1 { 1.0 } else { -1.0 };
                }
            }
        }
        DistributionKind::BoundedUniform => {
            for v in out.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
        }
    }
}

pub(crate) fn dot(x: &[f64], v: &[f64]) -> f64 {
    x.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn floor_checked(scaled: f64) -> Result<i64> {
    if scaled.abs() <= HASH_LIMIT {
        Ok(scaled.floor() as i64)
    } else {
        Err(Error::HashOverflow(scaled))
    }
}

/// One projection `v` together with the bucket width `r * rho_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct HashFunction {
    projection: Vec<f64>,
    denom: f64,
}

impl HashFunction {
    pub fn sample<R: RngCore + ?Sized>(
        dist: DistributionKind,
        d: usize,
        r: f64,
        p: MetricP,
        rng: &mut R,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid(format!("radius must be positive and finite, got {r}")));
        }
        let mut projection = vec![0.0; d];
        fill_projection(dist, &mut projection, rng);
        Ok(Self { projection, denom: r * rho_p(d, p) })
    }

    /// Builds a function from explicit parts. Components must lie in `[-1, 1]`.
    pub fn from_parts(projection: Vec<f64>, denom: f64) -> Result<Self> {
        if projection.is_empty() {
            return Err(Error::invalid("projection must have at least one component"));
        }
        if let Some(bad) = projection.iter().find(|v| !(v.abs() <= 1.0)) {
            return Err(Error::invalid(format!("projection component {bad} is outside [-1, 1]")));
        }
        if !(denom > 0.0 && denom.is_finite()) {
            return Err(Error::invalid(format!("bucket width must be positive, got {denom}")));
        }
        Ok(Self { projection, denom })
    }

    pub fn projection(&self) -> &[f64] {
        &self.projection
    }

    pub fn denom(&self) -> f64 {
        self.denom
    }

    pub fn dim(&self) -> usize {
        self.projection.len()
    }

    pub fn hash(&self, x: &[f64]) -> Result<i64> {
        Error::check_dim(self.dim(), x.len())?;
        floor_checked(self.scaled(x))
    }

    /// `<x, v> / denom` before flooring.
    pub fn scaled(&self, x: &[f64]) -> f64 {
        dot(x, &self.projection) / self.denom
    }

    /// Redraws the projection in place, keeping the bucket width.
    pub fn resample<R: RngCore + ?Sized>(&mut self, dist: DistributionKind, rng: &mut R) {
        fill_projection(dist, &mut self.projection, rng);
    }
}

/// Concatenation `g = (h^1, ..., h^k)` of independently sampled functions.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeHash {
    funcs: Vec<HashFunction>,
    d: usize,
    p: MetricP,
    r: f64,
    dist: DistributionKind,
    seed: RngSeed,
}

impl CompositeHash {
    /// Draws `k` functions in order from the stream for `seed`.
    pub fn sample(dist: DistributionKind, d: usize, r: f64, p: MetricP, k: usize, seed: RngSeed) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        let mut rng = seed.rng();
        let funcs = (0..k).map(|_| HashFunction::sample(dist, d, r, p, &mut rng)).collect::<Result<Vec<_>>>()?;
        Ok(Self { funcs, d, p, r, dist, seed })
    }

    pub(crate) fn from_parts(
        funcs: Vec<HashFunction>,
        p: MetricP,
        r: f64,
        dist: DistributionKind,
        seed: RngSeed,
    ) -> Result<Self> {
        let d = funcs.first().map(HashFunction::dim).ok_or_else(|| Error::invalid("k must be at least 1"))?;
        let denom = r * rho_p(d, p);
        if funcs.iter().any(|f| f.dim() != d || f.denom != denom) {
            return Err(Error::invalid("hash functions disagree on dimension or bucket width"));
        }
        Ok(Self { funcs, d, p, r, dist, seed })
    }

    pub fn functions(&self) -> &[HashFunction] {
        &self.funcs
    }

    pub fn k(&self) -> usize {
        self.funcs.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> MetricP {
        self.p
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn dist(&self) -> DistributionKind {
        self.dist
    }

    pub fn seed(&self) -> RngSeed {
        self.seed
    }

    pub fn hash(&self, x: &[f64]) -> Result<HashKey> {
        let mut values = vec![0; self.k()];
        self.hash_into(x, &mut values)?;
        Ok(HashKey(values))
    }

    /// Writes the k components of `g(x)` into `out`.
    pub fn hash_into(&self, x: &[f64], out: &mut [i64]) -> Result<()> {
        Error::check_dim(self.d, x.len())?;
        Error::check_dim(self.k(), out.len())?;
        for (slot, h) in out.iter_mut().zip(&self.funcs) {
            *slot = floor_checked(h.scaled(x))?;
        }
        Ok(())
    }
}

/// The k integer components of a composite hash.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HashKey(Vec<i64>);

impl HashKey {
    pub fn new(values: Vec<i64>) -> Self {
        HashKey(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<i64> {
        self.0
    }

    pub fn adjacent(&self, other: &HashKey) -> Result<bool> {
        keys_adjacent(self, other)
    }
}

impl Deref for HashKey {
    type Target = [i64];

    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl Borrow<[i64]> for HashKey {
    fn borrow(&self) -> &[i64] {
        &self.0
    }
}

/// True iff the keys differ by at most one in every component.
pub fn keys_adjacent(a: &[i64], b: &[i64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::KeyLengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).all(|(x, y)| x.abs_diff(*y) <= 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{lp_distance, lp_norm};
    use proptest::prelude::*;
    use rand::{Rng, RngCore};
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn rademacher_components_are_signs() {
        let mut rng = RngSeed(3).rng();
        let h = HashFunction::sample(DistributionKind::Rademacher, 5, 1.0, MetricP::L2, &mut rng).unwrap();
        assert!(h.projection().iter().all(|&v| v == 1.0 || v == -1.0));
        let wide = HashFunction::sample(DistributionKind::Rademacher, 200, 1.0, MetricP::L2, &mut rng).unwrap();
        let plus = wide.projection().iter().filter(|&&v| v > 0.0).count();
        assert!(plus > 50 && plus < 150);
    }

    #[test]
    fn uniform_sample_mean_near_zero() {
        // 99% normal interval for the mean of 1e5 draws: 2.58 * sqrt(1/3) / sqrt(1e5) ~ 0.0047.
        let mut rng = RngSeed(11).rng();
        let d = 100_000;
        let h = HashFunction::sample(DistributionKind::BoundedUniform, d, 1.0, MetricP::L1, &mut rng).unwrap();
        let mean = h.projection().iter().sum::<f64>() / d as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!(h.projection().iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn same_seed_same_projection() {
        for dist in [DistributionKind::Rademacher, DistributionKind::BoundedUniform] {
            let a = CompositeHash::sample(dist, 17, 0.5, MetricP::L2, 4, RngSeed(99)).unwrap();
            let b = CompositeHash::sample(dist, 17, 0.5, MetricP::L2, 4, RngSeed(99)).unwrap();
            assert_eq!(a, b);
            let c = CompositeHash::sample(dist, 17, 0.5, MetricP::L2, 4, RngSeed(100)).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn hash_point_examples() {
        let h = HashFunction::from_parts(vec![1.0; 4], 1.0).unwrap();
        assert_eq!(h.hash(&[0.0; 4]).unwrap(), 0);
        assert_eq!(h.hash(&[3.0, 0.0, 0.0, 0.0]).unwrap(), 3);
        let h = HashFunction::from_parts(vec![1.0, -1.0], 1.0).unwrap();
        assert_eq!(h.hash(&[0.2, 0.9]).unwrap(), -1);
    }

    #[test]
    fn hash_point_errors() {
        let h = HashFunction::from_parts(vec![1.0, 1.0], 1.0).unwrap();
        assert!(matches!(h.hash(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(h.hash(&[1e19, 0.0]), Err(Error::HashOverflow(_))));
        assert!(matches!(h.hash(&[f64::NAN, 0.0]), Err(Error::HashOverflow(_))));
        assert!(HashFunction::from_parts(vec![1.5], 1.0).is_err());
        assert!(HashFunction::from_parts(vec![0.5], 0.0).is_err());
    }

    #[test]
    fn composite_examples() {
        let g = CompositeHash::sample(DistributionKind::BoundedUniform, 6, 1.0, MetricP::L2, 1, RngSeed(5)).unwrap();
        let x = [0.3, -2.0, 1.0, 4.0, 0.0, 7.5];
        assert_eq!(g.hash(&x).unwrap().values(), &[g.functions()[0].hash(&x).unwrap()]);

        let g = CompositeHash::sample(DistributionKind::Rademacher, 6, 1.0, MetricP::L2, 5, RngSeed(5)).unwrap();
        assert_eq!(g.hash(&[0.0; 6]).unwrap().values(), &[0; 5]);
        assert_eq!(g.hash(&x).unwrap(), g.hash(&x).unwrap());
        assert!(CompositeHash::sample(DistributionKind::Rademacher, 6, 1.0, MetricP::L2, 0, RngSeed(5)).is_err());
    }

    #[test]
    fn adjacency_examples() {
        assert!(keys_adjacent(&[0, 0, 0], &[1, -1, 0]).unwrap());
        assert!(!keys_adjacent(&[0, 0], &[2, 0]).unwrap());
        assert!(keys_adjacent(&[4, -9], &[4, -9]).unwrap());
        assert!(matches!(keys_adjacent(&[0], &[0, 0]), Err(Error::KeyLengthMismatch(1, 2))));
        assert!(keys_adjacent(&[i64::MIN], &[i64::MAX]).is_ok_and(|a| !a));
    }

    #[test]
    fn derived_seeds_differ() {
        let s = RngSeed(7);
        assert_ne!(s.derive(0), s.derive(1));
        assert_eq!(s.derive(3), s.derive(3));
        let a: u64 = s.stream(0).next_u64();
        let b: u64 = s.stream(1).next_u64();
        assert_ne!(a, b);
    }

    fn normal<R: Rng>(rng: &mut R) -> f64 {
        StandardNormal.sample(rng)
    }

    fn any_p() -> impl Strategy<Value = MetricP> {
        prop_oneof![
            Just(MetricP::L1),
            Just(MetricP::new(1.5).unwrap()),
            Just(MetricP::L2),
            Just(MetricP::new(3.0).unwrap()),
            Just(MetricP::INFINITY),
        ]
    }

    fn any_dist() -> impl Strategy<Value = DistributionKind> {
        prop_oneof![Just(DistributionKind::Rademacher), Just(DistributionKind::BoundedUniform)]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        /// Near pairs land in the same or adjacent buckets for every sampled function.
        #[test]
        fn near_pairs_always_collide(
            d in 1usize..48,
            p in any_p(),
            dist in any_dist(),
            r in 0.01f64..100.0,
            frac in 0.0f64..0.999_999,
            seed in any::<u64>(),
        ) {
            let mut rng = RngSeed(seed).rng();
            let x: Vec<f64> = (0..d).map(|_| 50.0 * normal(&mut rng)).collect();
            let dir: Vec<f64> = (0..d).map(|_| normal(&mut rng)).collect();
            let norm = lp_norm(&dir, p);
            prop_assume!(norm > 0.0);
            let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + b / norm * frac * r).collect();
            prop_assume!(lp_distance(&x, &y, p).unwrap() < r * (1.0 - 1e-9));
            for _ in 0..16 {
                let h = HashFunction::sample(dist, d, r, p, &mut rng).unwrap();
                let diff = h.hash(&x).unwrap() - h.hash(&y).unwrap();
                prop_assert!(diff.abs() <= 1);
            }
        }

        #[test]
        fn adjacency_reflexive_and_symmetric(a in prop::collection::vec(-5i64..5, 1..6), shift in prop::collection::vec(-2i64..3, 6)) {
            let b: Vec<i64> = a.iter().zip(&shift).map(|(x, s)| x + s).collect();
            prop_assert!(keys_adjacent(&a, &a).unwrap());
            prop_assert_eq!(keys_adjacent(&a, &b).unwrap(), keys_adjacent(&b, &a).unwrap());
        }
    }

    #[test]
    fn rademacher_far_pair_rate_below_bound() {
        use crate::analysis::{p_fp_bound, tau};
        use crate::validation::stats::wilson_interval;

        let (d, p, r) = (8, MetricP::L2, 1.0);
        let dist = DistributionKind::Rademacher;
        let t = tau(dist, d, p);
        let c = 2.0 * t;
        let bound = p_fp_bound(dist, c, t).unwrap();
        let mut rng = RngSeed(21).rng();
        let dir: Vec<f64> = (0..d).map(|_| normal(&mut rng)).collect();
        let norm = lp_norm(&dir, p);
        let x = vec![0.25; d];
        let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + b / norm * 1.01 * c * r).collect();
        let trials = 20_000;
        let mut h = HashFunction::sample(dist, d, r, p, &mut rng).unwrap();
        let mut hits = 0u64;
        for _ in 0..trials {
            h.resample(dist, &mut rng);
            if (h.hash(&x).unwrap() - h.hash(&y).unwrap()).abs() <= 1 {
                hits += 1;
            }
        }
        let (_, upper) = wilson_interval(hits, trials);
        assert!(upper <= bound, "upper {upper} bound {bound}");
    }
}
