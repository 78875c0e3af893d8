//! Monte Carlo experiments: versioned configs, parallel trials with derived
//! seeds, and reports with Wilson intervals and resource counters.

mod config;
pub mod props;
mod report;
mod runs;

pub use config::{
    BudgetSection, ConfigError, ExperimentConfig, ExperimentKind, ExperimentSection, FieldError, OutputSection,
    ParamsSection, Resolved, CONFIG_VERSION,
};
pub use report::{wilson_interval, Check, ExperimentReport, Outcome};
pub use runs::{
    default_threshold, expected_cost, honest_run, run_experiment, HarnessError, HonestRun, CQ_QUERIES,
    UNIFORMITY_OUT_LEN, UNPREDICTABILITY_M, UNPREDICTABILITY_QUERIES, UNPREDICTABILITY_RG,
};
