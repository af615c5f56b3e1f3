//! Experiment orchestration, the validation suite and their file outputs.
//!
//! Every CSV starts with a `# schema_version=N` comment line; floats are
//! written with 17 significant digits so identical runs give identical bytes.

mod config;
mod experiment;
mod plot;
mod validation;

pub use config::{ExperimentConfig, Model, RegionPreset, MIN_REPS, MIN_SWEEP};
pub use experiment::{
    convergence_plot, run_experiment, ExperimentFiles, ExperimentResult, SweepRow, MIN_R_SQUARED,
    SLOPE_RANGE,
};
pub use plot::{loglog_svg, Series};
pub use validation::{
    run_checks, run_validation_suite, CheckGroup, CheckRow, ValidationOptions, ValidationReport,
    CLOSED_FORM_TOLERANCE, COAREA_TOLERANCE, CONTRACTION_TIMES, GLAUBER_REPS, GLAUBER_TIMES,
    IDENTITY_K, INVARIANCE_LAMBDA, INVARIANCE_REPS, INVARIANCE_TIMES, MECKE_REPS,
};

pub const SCHEMA_VERSION: u32 = 1;

pub fn schema_line() -> String {
    format!("# schema_version={SCHEMA_VERSION}")
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
