use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, ScenarioId};
use super::output::{summary_json, write_trace_csv};
use super::run::{run_scenario, HarnessError, ScenarioResult};

/// D is allowed this much prediction error at the last replan and still
/// count as a catch, given the vehicle's size.
pub const D_FINAL_ERROR_LIMIT: f64 = 0.7;
/// Final plane-crossing error allowed in the planar experiment.
pub const PLANAR_FINAL_ERROR_LIMIT: f64 = 0.5;

/// What each scenario is expected to show.
pub fn expected_outcome(id: ScenarioId) -> &'static str {
    match id {
        ScenarioId::A => "intercept",
        ScenarioId::B => "lose the ball from view without intercepting",
        ScenarioId::C => "intercept with yaw-keep",
        ScenarioId::D => "intercept with final prediction error <= 0.7 m",
        ScenarioId::E => "intercept, fastest index never after shortest index",
        ScenarioId::Planar2d => "final plane-crossing error < 0.5 m",
    }
}

pub fn meets_expectation(r: &ScenarioResult) -> bool {
    match r.scenario_id {
        ScenarioId::A | ScenarioId::C => r.intercepted,
        ScenarioId::B => !r.intercepted && r.view_lost_time.is_some(),
        ScenarioId::D => {
            r.intercepted
                && r.final_prediction_error
                    .is_some_and(|e| e <= D_FINAL_ERROR_LIMIT)
        }
        ScenarioId::E => r.intercepted && r.fastest_never_after_shortest(),
        ScenarioId::Planar2d => r
            .final_prediction_error
            .is_some_and(|e| e < PLANAR_FINAL_ERROR_LIMIT),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub scenario_id: ScenarioId,
    pub expected: String,
    pub intercepted: bool,
    pub interception_time: Option<f64>,
    pub min_distance: f64,
    pub final_prediction_error: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub scenarios: Vec<SuiteEntry>,
    pub all_passed: bool,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs every config concurrently; results come back in input order.
pub fn run_suite(
    configs: &[ScenarioConfig],
) -> Result<(SuiteReport, Vec<ScenarioResult>), HarnessError> {
    let results = configs
        .par_iter()
        .map(run_scenario)
        .collect::<Result<Vec<_>, _>>()?;
    let scenarios: Vec<SuiteEntry> = results
        .iter()
        .map(|r| SuiteEntry {
            scenario_id: r.scenario_id,
            expected: expected_outcome(r.scenario_id).to_string(),
            intercepted: r.intercepted,
            interception_time: r.interception_time,
            min_distance: r.min_distance,
            final_prediction_error: r.final_prediction_error,
            passed: meets_expectation(r),
        })
        .collect();
    let all_passed = scenarios.iter().all(|e| e.passed);
    Ok((
        SuiteReport {
            scenarios,
            all_passed,
        },
        results,
    ))
}

pub fn bundled_configs() -> Vec<ScenarioConfig> {
    ScenarioId::ALL
        .iter()
        .map(|&id| ScenarioConfig::bundled(id))
        .collect()
}

/// Writes `<id>_trace.csv` and `<id>_summary.json` into `dir`.
pub fn write_outputs(dir: &Path, result: &ScenarioResult) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let id = result.scenario_id.name();
    let file = std::fs::File::create(dir.join(format!("{id}_trace.csv")))?;
    write_trace_csv(std::io::BufWriter::new(file), &result.records)?;
    std::fs::write(
        dir.join(format!("{id}_summary.json")),
        summary_json(result) + "\n",
    )
}
