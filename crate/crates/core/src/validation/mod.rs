//! Ground truth and statistical checks for the index and the hash family.
//!
//! * [`oracle`]: exact linear-scan range queries and the sandwich check.
//! * [`stats`]: Monte-Carlo collision estimates with Wilson intervals, and the
//!   far-pair sweep comparing them to the closed-form bounds.
//! * [`tightness`]: witness points showing the approximation threshold cannot
//!   be lowered for this family.
//! * [`workload`]: seeded synthetic datasets and query sets.
//!
//! Trial loops are split into fixed-size chunks, each drawing from its own
//! ChaCha stream, so results depend only on the seed and never on how many
//! worker threads ran them.

pub mod oracle;
pub mod stats;
pub mod tightness;
pub mod workload;

pub use oracle::{brute_force_query, check_sandwich, Comparison, SandwichOutcome, SandwichReport};
pub use stats::{
    check_far_pair_bound, estimate_collision_probability, estimate_collision_rate, run_bound_sweep, wilson_interval,
    CollisionEstimate, FarPairReport, FarPairRow, SweepCell, SweepConfig, SweepReport, Z_99,
};
pub use tightness::{
    hoeffding_bound, origin_collisions, run_tightness_suite, tightness_witness_pge2, tightness_witness_plt2, Regime,
    TightnessReport, TightnessRow, TightnessWitness,
};
pub use workload::{random_direction, Workload, WorkloadSpec};
