//! Trace CSV and summary JSON.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::config::ScenarioId;
use super::run::{MetricsRecord, ScenarioResult, Termination};
use crate::planner::PlanMethod;
use crate::Vec3;

pub const TRACE_HEADER: &str = "time,ball_x,ball_y,ball_z,obs_x,obs_y,obs_z,pred_x,pred_y,pred_z,pred_err,uav_x,uav_y,uav_z,sp_x,sp_y,sp_z,intercepted";

/// Fixed-point decimal with at least nine significant digits.
pub fn format_decimal(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).clamp(0, 40) as usize;
    format!("{x:.decimals$}")
}

fn push_vec(row: &mut Vec<String>, v: Option<&Vec3>) {
    match v {
        Some(v) => row.extend(v.iter().map(|c| format_decimal(*c))),
        None => row.extend(std::iter::repeat_n(String::new(), 3)),
    }
}

pub fn trace_row(r: &MetricsRecord) -> String {
    let mut row = Vec::with_capacity(18);
    row.push(format_decimal(r.time));
    push_vec(&mut row, Some(&r.ball_position));
    push_vec(&mut row, r.observation.as_ref());
    push_vec(&mut row, r.predicted_point.as_ref());
    row.push(r.prediction_error.map(format_decimal).unwrap_or_default());
    push_vec(&mut row, Some(&r.uav_position));
    push_vec(&mut row, Some(&r.setpoint));
    row.push(if r.intercepted { "true" } else { "false" }.to_string());
    row.join(",")
}

pub fn write_trace_csv<W: Write>(mut w: W, records: &[MetricsRecord]) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in records {
        writeln!(w, "{}", trace_row(r))?;
    }
    w.flush()
}

pub fn trace_csv_string(records: &[MetricsRecord]) -> String {
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

/// [`ScenarioResult`] without the per-tick records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario_id: ScenarioId,
    pub method: PlanMethod,
    pub intercepted: bool,
    pub interception_time: Option<f64>,
    pub min_distance: f64,
    pub termination: Termination,
    pub observations: usize,
    pub view_lost_time: Option<f64>,
    pub final_prediction_error: Option<f64>,
}

impl From<&ScenarioResult> for ScenarioSummary {
    fn from(r: &ScenarioResult) -> Self {
        Self {
            scenario_id: r.scenario_id,
            method: r.method,
            intercepted: r.intercepted,
            interception_time: r.interception_time,
            min_distance: r.min_distance,
            termination: r.termination,
            observations: r.observations,
            view_lost_time: r.view_lost_time,
            final_prediction_error: r.final_prediction_error,
        }
    }
}

pub fn summary_json(result: &ScenarioResult) -> String {
    serde_json::to_string_pretty(&ScenarioSummary::from(result)).expect("summary serializes")
}
