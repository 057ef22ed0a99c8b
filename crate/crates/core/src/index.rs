//! Static (R, c)-near-neighbor index over a composite hash.
//!
//! Two points are hash-equivalent when their composite keys differ by at most
//! one in every component, so a query must see every point whose key lies in
//! the `3^k` cube around its own key. The two modes differ only in who pays
//! for that cube:
//!
//! * [`IndexMode::FullExpansion`] stores each point id under all `3^k`
//!   neighboring keys at build time; a query reads the single bucket `g(q)`.
//! * [`IndexMode::Light`] stores each point id once under `g(x)`; a query
//!   looks up all `3^k` neighbors of `g(q)`.
//!
//! Both produce the candidate set `{x : ||g(x) - g(q)||_inf <= 1}`. Candidates
//! are then filtered to `||x - q||_p <= c r`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::analysis::{choose_k_light, choose_k_main, distance_unchecked, AnalysisParams, DerivedConstants};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::format;
use crate::hashing::{CompositeHash, HashKey, RngSeed};

/// Default cap on `3^k`: cells written per point (full expansion) or probed
/// per query (light).
pub const DEFAULT_CELL_BUDGET: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndexMode {
    FullExpansion,
    Light,
}

impl IndexMode {
    pub fn name(self) -> &'static str {
        match self {
            IndexMode::FullExpansion => "full",
            IndexMode::Light => "light",
        }
    }
}

impl fmt::Display for IndexMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IndexMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" | "full-expansion" | "fullexpansion" => Ok(IndexMode::FullExpansion),
            "light" => Ok(IndexMode::Light),
            _ => Err(Error::invalid(format!("unknown index mode {s:?} (expected full or light)"))),
        }
    }
}

/// `3^k`, or an error when it exceeds `budget`.
pub fn cell_count(k: usize, budget: u64) -> Result<u64> {
    let mut cells: u64 = 1;
    for _ in 0..k {
        cells = match cells.checked_mul(3) {
            Some(c) if c <= budget => c,
            _ => return Err(Error::CellBudgetExceeded { k, budget }),
        };
    }
    Ok(cells)
}

/// All offsets in `{-1, 0, 1}^k` in lexicographic order.
pub fn enumerate_offsets(k: usize, budget: u64) -> Result<Offsets> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let remaining = cell_count(k, budget)?;
    Ok(Offsets { current: vec![-1; k], remaining })
}

#[derive(Clone, Debug)]
pub struct Offsets {
    current: Vec<i8>,
    remaining: u64,
}

impl Iterator for Offsets {
    type Item = Vec<i8>;

    fn next(&mut self) -> Option<Vec<i8>> {
        if self.remaining == 0 {
            return None;
        }
        let out = self.current.clone();
        self.remaining -= 1;
        for digit in self.current.iter_mut().rev() {
            if *digit < 1 {
                *digit += 1;
                break;
            }
            *digit = -1;
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}

impl ExactSizeIterator for Offsets {}

/// Calls `f` on every key within l_inf distance 1 of `base`, in the same
/// order as [`enumerate_offsets`].
fn for_each_neighbor(base: &[i64], scratch: &mut Vec<i64>, mut f: impl FnMut(&[i64])) {
    scratch.clear();
    scratch.extend(base.iter().map(|v| v - 1));
    loop {
        f(scratch);
        let mut carried = true;
        for (slot, &center) in scratch.iter_mut().zip(base).rev() {
            if *slot <= center {
                *slot += 1;
                carried = false;
                break;
            }
            *slot = center - 1;
        }
        if carried {
            return;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndexOptions {
    pub mode: IndexMode,
    /// Number of concatenated hash functions; derived from `n` when `None`.
    pub k: Option<usize>,
    pub seed: RngSeed,
    pub cell_budget: u64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self { mode: IndexMode::Light, k: None, seed: RngSeed(0), cell_budget: DEFAULT_CELL_BUDGET }
    }
}

impl IndexOptions {
    /// The `k` this configuration would use for `n` points.
    pub fn resolve_k(&self, n: usize, params: &AnalysisParams) -> Result<usize> {
        let k = match self.k {
            Some(k) => k,
            None => {
                let consts = params.derived();
                match self.mode {
                    IndexMode::FullExpansion => choose_k_main(n, params.d(), consts.a)?,
                    IndexMode::Light => choose_k_light(n, consts.a, consts.b)?,
                }
            }
        };
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        Ok(k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexMeta {
    pub seed: RngSeed,
    pub k: usize,
    /// Wall time of the build; zero for an index loaded from disk.
    pub build_time: Duration,
    pub stored_refs: u64,
    pub bucket_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub id: u32,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    /// Sorted by distance, then id.
    pub neighbors: Vec<Neighbor>,
    pub candidates_scanned: usize,
    pub buckets_probed: usize,
}

impl QueryResult {
    /// Returned ids in ascending order.
    pub fn ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.neighbors.iter().map(|n| n.id).collect();
        ids.sort_unstable();
        ids
    }

    pub fn contains(&self, id: u32) -> bool {
        self.neighbors.iter().any(|n| n.id == id)
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// Hash-equivalent points before distance filtering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidates {
    /// Ascending, duplicate-free.
    pub ids: Vec<u32>,
    pub buckets_probed: usize,
}

#[derive(Clone, Debug)]
pub struct Index {
    params: AnalysisParams,
    consts: DerivedConstants,
    hash: CompositeHash,
    mode: IndexMode,
    cell_budget: u64,
    buckets: HashMap<HashKey, Vec<u32>>,
    dataset: Dataset,
    meta: IndexMeta,
}

impl Index {
    pub fn build(dataset: Dataset, params: AnalysisParams, options: IndexOptions) -> Result<Self> {
        let started = Instant::now();
        Error::check_dim(params.d(), dataset.dim())?;
        let k = options.resolve_k(dataset.len(), &params)?;
        cell_count(k, options.cell_budget)?;
        let hash = CompositeHash::sample(params.dist(), params.d(), params.r(), params.p(), k, options.seed)?;

        let keys: Vec<i64> = {
            let mut keys = vec![0i64; dataset.len() * k];
            keys.par_chunks_mut(k)
                .zip(dataset.as_flat().par_chunks(dataset.dim()))
                .try_for_each(|(out, x)| hash.hash_into(x, out))?;
            keys
        };

        let mut buckets: HashMap<HashKey, Vec<u32>> = HashMap::new();
        let mut stored_refs = 0u64;
        let mut scratch = Vec::with_capacity(k);
        // Ids are inserted in ascending order, so every bucket stays sorted and duplicate-free.
        for (id, key) in keys.chunks_exact(k).enumerate() {
            let id = id as u32;
            match options.mode {
                IndexMode::Light => {
                    insert(&mut buckets, key, id);
                    stored_refs += 1;
                }
                IndexMode::FullExpansion => {
                    for_each_neighbor(key, &mut scratch, |cell| {
                        insert(&mut buckets, cell, id);
                        stored_refs += 1;
                    });
                }
            }
        }

        let meta = IndexMeta {
            seed: options.seed,
            k,
            build_time: started.elapsed(),
            stored_refs,
            bucket_count: buckets.len(),
        };
        Ok(Self {
            params,
            consts: params.derived(),
            hash,
            mode: options.mode,
            cell_budget: options.cell_budget,
            buckets,
            dataset,
            meta,
        })
    }

    pub(crate) fn from_parts(
        params: AnalysisParams,
        hash: CompositeHash,
        mode: IndexMode,
        cell_budget: u64,
        dataset: Dataset,
        buckets: HashMap<HashKey, Vec<u32>>,
    ) -> Result<Self> {
        let stored_refs = buckets.values().map(|ids| ids.len() as u64).sum();
        let meta = IndexMeta {
            seed: hash.seed(),
            k: hash.k(),
            build_time: Duration::ZERO,
            stored_refs,
            bucket_count: buckets.len(),
        };
        Ok(Self { params, consts: params.derived(), hash, mode, cell_budget, buckets, dataset, meta })
    }

    pub fn params(&self) -> &AnalysisParams {
        &self.params
    }

    pub fn constants(&self) -> &DerivedConstants {
        &self.consts
    }

    pub fn composite_hash(&self) -> &CompositeHash {
        &self.hash
    }

    pub fn mode(&self) -> IndexMode {
        self.mode
    }

    pub fn k(&self) -> usize {
        self.hash.k()
    }

    pub fn cell_budget(&self) -> u64 {
        self.cell_budget
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn meta(&self) -> &IndexMeta {
        &self.meta
    }

    pub fn bucket(&self, key: &[i64]) -> Option<&[u32]> {
        self.buckets.get(key).map(Vec::as_slice)
    }

    pub fn buckets(&self) -> impl Iterator<Item = (&HashKey, &[u32])> {
        self.buckets.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Every indexed point whose key is adjacent to `g(q)`.
    pub fn candidates(&self, q: &[f64]) -> Result<Candidates> {
        let key = self.hash.hash(q)?;
        let (mut ids, buckets_probed) = match self.mode {
            IndexMode::FullExpansion => (self.bucket(&key).map(<[u32]>::to_vec).unwrap_or_default(), 1),
            IndexMode::Light => {
                let mut ids = Vec::new();
                let mut probed = 0usize;
                let mut scratch = Vec::with_capacity(key.len());
                for_each_neighbor(&key, &mut scratch, |cell| {
                    probed += 1;
                    if let Some(found) = self.buckets.get(cell) {
                        ids.extend_from_slice(found);
                    }
                });
                (ids, probed)
            }
        };
        ids.sort_unstable();
        ids.dedup();
        Ok(Candidates { ids, buckets_probed })
    }

    /// Returns a set `P` with `{x : ||x - q|| < r} ⊆ P ⊆ {x : ||x - q|| <= c r}`.
    pub fn query(&self, q: &[f64]) -> Result<QueryResult> {
        let candidates = self.candidates(q)?;
        let limit = self.params.c() * self.params.r();
        let p = self.params.p();
        let mut neighbors: Vec<Neighbor> = candidates
            .ids
            .iter()
            .filter_map(|&id| {
                let distance = distance_unchecked(self.dataset.point(id), q, p);
                (distance <= limit).then_some(Neighbor { id, distance })
            })
            .collect();
        neighbors.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.id.cmp(&b.id)));
        Ok(QueryResult {
            neighbors,
            candidates_scanned: candidates.ids.len(),
            buckets_probed: candidates.buckets_probed,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        format::encode_index(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        format::decode_index(bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn insert(buckets: &mut HashMap<HashKey, Vec<u32>>, key: &[i64], id: u32) {
    match buckets.get_mut(key) {
        Some(ids) => ids.push(id),
        None => {
            buckets.insert(HashKey::new(key.to_vec()), vec![id]);
        }
    }
}
