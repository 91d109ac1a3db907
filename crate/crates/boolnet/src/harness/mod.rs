//! Experiment harness: configuration, runners, record streams and summaries.

pub mod config;
pub mod records;
pub mod run;
pub mod summary;

pub use config::{
    default_history_for, load_config, parse_config, CurriculumMode, GateBudget, ResolvedConfig,
};
pub use records::{read_records, write_records, ExperimentRecord, RecordKey};
pub use run::{
    default_workers, derive_seed, replicate_split, run_experiment, run_tau_sweep, stratum_tau,
    RunStats,
};
pub use summary::{summarize, to_csv, GroupBy, SummaryRow, CSV_HEADER};
