//! Experiment configuration, seeded suites and result files.
//!
//! A suite expands its config into an ordered task list (n, k_n, seed, case),
//! runs the tasks on a worker pool and returns one [`ResultRecord`] per task.
//! Records are written as JSONL or as CSV with the fixed column order
//! [`CSV_COLUMNS`].

mod config;
mod record;
mod suites;

pub use config::{
    load_config, ConstructionConfig, EstimatorConfig, EventConfig, ExperimentConfig, Format, IdentityConfig,
    Realization, Suite, TrajectoryConfig, THREADS_ENV,
};
pub use record::{
    read_records, read_records_from, regime_predicates, write_records, write_records_to, RegimeEvents, ResultRecord,
    CSV_COLUMNS,
};
pub use suites::{phase_blueprint, rate_k_right_limit, run_suite, RESIDUAL_TOL};
