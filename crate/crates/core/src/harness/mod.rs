//! Deterministic scenario engine.
//!
//! The ball and vehicle advance together at the physics step (1 ms by
//! default). On every camera frame with the ball in view the loop runs
//! detect → enqueue → predict → plan, and the resulting setpoint is held
//! until the next frame. A run ends on interception, ground impact, loss of
//! the ball for `lost_timeout` seconds, or `max_sim_time`.

mod config;
mod output;
mod run;
mod suite;

pub use config::{
    BallConfig, BallMotion, ConfigError, PlaneConfig, PlannerConfig, ScenarioConfig, ScenarioId,
    UavConfig,
};
pub use output::{
    format_decimal, summary_json, trace_csv_string, trace_row, write_trace_csv, ScenarioSummary,
    TRACE_HEADER,
};
pub use run::{
    ground_truth, prediction_error, run_planar2d, run_scenario, HarnessError, MetricsRecord,
    ScenarioResult, Termination,
};
pub use suite::{
    bundled_configs, expected_outcome, meets_expectation, run_suite, write_outputs, SuiteEntry,
    SuiteReport, D_FINAL_ERROR_LIMIT, PLANAR_FINAL_ERROR_LIMIT,
};
