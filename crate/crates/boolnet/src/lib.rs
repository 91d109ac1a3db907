//! Training feedforward NAND networks on multi-label Boolean problems with
//! hierarchical target-curriculum losses, plus a-priori curriculum discovery
//! via exact minimum-feature-set solving.
//!
//! The pieces, bottom up:
//!
//! - [`bitdata`]: packed bit matrices, datasets, the text dataset format and
//!   train/test splits with exhaustive complements.
//! - [`network`]: feedforward NAND-gate structures, single-connection moves
//!   and bit-parallel evaluation.
//! - [`loss`]: the error matrix and the four guiding functions `L1`, `Lw`,
//!   `Llh`, `Lgh` over a difficulty-ordered error matrix.
//! - [`minfs`]: exact minimum-feature-set solving by branch and bound over a
//!   set-cover reduction; target ordering, overlap and nestedness.
//! - [`problems`]: circuit-inference benchmark generators (add, sub, cpar,
//!   cmaj, cmux), dataset ingestion and time-series preprocessing.
//! - [`optimizer`]: Late-Acceptance Hill Climbing with random restarts.
//! - [`stats`]: Kendall's τ, uniform sampling of permutations within a τ
//!   stratum, confidence intervals.
//! - [`harness`]: reproducible experiment runners, JSON-lines records and
//!   CSV summaries.
//!
//! The `examples/` directory shows one runnable program per capability; the
//! `boolnet` binary wraps the same entry points as CLI subcommands.

pub mod bitdata;
pub mod error;
pub mod harness;
pub mod loss;
pub mod minfs;
pub mod network;
pub mod optimizer;
pub mod problems;
pub mod stats;

pub use bitdata::{sample_split, BitMatrix, Dataset, SampleSplit};
pub use error::{Error, Result};
pub use loss::{
    error_summary, loss_l1, loss_lgh, loss_llh, loss_lw, Curriculum, ErrorSummary, LossKind,
};
pub use minfs::{
    build_cover_instance, estimate_curriculum, nestedness, overlap_coefficient,
    solve_minfs_exact, solve_minfs_greedy, CoverInstance, CurriculumEstimate, FeatureSetResult,
};
pub use network::{
    check_feedforward, evaluate, propose_move, random_network, Move, NetworkStructure,
};
pub use optimizer::{guiding_cost, lahc_train, LahcConfig, TrainResult};
pub use problems::{
    gen_add, gen_cmaj, gen_cmux, gen_cpar, gen_sub, load_dataset, parse_timeseries,
    timeseries_to_pairs, ProblemKind, ProblemSpec, StatePairs,
};
pub use stats::{
    kendall_tau, mean_ci, paired_t_greater, sample_permutation_with_tau, TauValue,
};
