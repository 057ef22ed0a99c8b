//! Locality-sensitive hashing for l_p near-neighbor search with no false
//! negatives.
//!
//! Each hash function projects onto a random vector with entries in
//! `[-1, 1]` and floors the result at scale `r d^(1 - 1/p)`. Any two points
//! within distance `r` land in equal or adjacent buckets of every such hash,
//! so probing the `3^k` neighboring keys of a query's composite key finds
//! every near point. Points farther than `c r` are filtered out by an exact
//! distance check.
//!
//! ```
//! use certann::{AnalysisParams, Dataset, DistributionKind, Index, IndexOptions, MetricP};
//!
//! let data = Dataset::from_rows(2, [[0.0, 0.0], [0.5, 0.5], [40.0, -3.0]]).unwrap();
//! let params =
//!     AnalysisParams::with_c_over_tau(2, MetricP::L2, 1.0, 2.0, DistributionKind::Rademacher).unwrap();
//! let index = Index::build(data, params, IndexOptions { k: Some(3), ..Default::default() }).unwrap();
//! let hits = index.query(&[0.1, 0.2]).unwrap();
//! assert!(hits.contains(0) && hits.contains(1) && !hits.contains(2));
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod analysis;
pub mod dataset;
pub mod error;
mod format;
pub mod hashing;
pub mod index;
pub mod report;
pub mod validation;

pub use analysis::{
    choose_k_light, choose_k_main, gamma, lp_distance, lp_norm, max_scale, p_fp_bound, rho_p, tau, AnalysisParams,
    DerivedConstants, DistributionKind, MetricP,
};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use format::{checksum, FORMAT_VERSION, MAGIC};
pub use hashing::{keys_adjacent, CompositeHash, HashFunction, HashKey, RngSeed, HASH_LIMIT};
pub use index::{
    cell_count, enumerate_offsets, Candidates, Index, IndexMeta, IndexMode, IndexOptions, Neighbor, QueryResult,
    DEFAULT_CELL_BUDGET,
};
