//! Config-driven experiments, CSV records and rate fits.

pub mod config;
pub mod experiments;
pub mod fit;
pub mod record;

pub use config::{ExperimentConfig, ExperimentKind, KRule};
pub use experiments::{
    coverage_from_records, run_coverage, run_experiment, run_levelset, run_manifold, run_maxima,
    run_regression_rate, run_setcount, CoverageReport, RunOutput,
};
pub use fit::{fit_rate, RateFit};
pub use record::{parse_csv, to_csv, ExperimentRecord, CSV_HEADER};
