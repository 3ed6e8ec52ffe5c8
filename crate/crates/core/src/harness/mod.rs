//! Run configuration, seeded Monte-Carlo batches, aggregation, export and
//! the invariant suite.

mod aggregate;
mod baselines;
mod config;
mod export;
mod montecarlo;
mod validate;

pub use aggregate::{aggregate, GroupKey, Stat, SummaryRow};
pub use baselines::{
    run_baselines, write_baselines_csv, BaselineRecord, BaselineScheme, BASELINE_COLUMNS, BASELINE_LEVELS,
};
pub use config::{load_config, RunConfig, Scheme, SweepSpec, DEFAULT_TRIALS};
pub use export::{
    export_records, export_summary, read_records_json, write_beampattern_csv, write_file, write_json,
    write_records_csv, write_summary_csv, ExportFormat, BEAMPATTERN_COLUMNS, RECORD_COLUMNS, SUMMARY_COLUMNS,
};
pub use montecarlo::{
    mix, run_montecarlo, MonteCarloOutput, TrialRecord, TrialStatus, FAILURE_THRESHOLD, RECORD_SCHEMA_VERSION,
};
pub use validate::{validate_suite, Check, ValidationReport};
