//! Interception planners.
//!
//! * Cat & Mouse: fly at the latest detection.
//! * Shortest path: the reachable predicted point nearest the vehicle.
//! * Fastest path: the earliest reachable predicted point.
//!
//! "Reachable" means the vehicle's trapezoidal time-to-go to the point is no
//! more than the time the object needs to get there.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::predictor::PredictedPath;
use crate::sensor::Observation;
use crate::vehicle::UavState;
use crate::{wrap_angle, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("no predicted point is reachable before the object")]
    NoFeasibleIntercept,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UavLimits {
    /// m/s
    pub max_speed: f64,
    /// m/s²
    pub max_accel: f64,
    /// rad/s
    pub max_yaw_rate: f64,
    /// m
    pub intercept_radius: f64,
}

impl Default for UavLimits {
    fn default() -> Self {
        Self {
            max_speed: 3.0,
            max_accel: 6.0,
            max_yaw_rate: 2.0,
            intercept_radius: 0.35,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMethod {
    CatMouse,
    ShortestPath,
    FastestPath,
    /// Fixed-plane interception used by the planar experiment.
    PlaneCrossing,
}

impl std::fmt::Display for PlanMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlanMethod::CatMouse => "cat_mouse",
            PlanMethod::ShortestPath => "shortest_path",
            PlanMethod::FastestPath => "fastest_path",
            PlanMethod::PlaneCrossing => "plane_crossing",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setpoint {
    pub target_position: Vec3,
    /// rad, in (-π, π]
    pub target_yaw: f64,
    pub source_method: PlanMethod,
    /// Index of the chosen predicted-path sample.
    pub path_index: Option<usize>,
}

impl Setpoint {
    pub fn hold(uav: &UavState) -> Self {
        Self {
            target_position: uav.position,
            target_yaw: uav.yaw,
            source_method: PlanMethod::CatMouse,
            path_index: None,
        }
    }
}

/// Path samples the vehicle can reach no later than the object.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReachableRegion {
    /// Strictly increasing sample indices.
    pub indices: Vec<usize>,
    /// Object arrival time minus vehicle time-to-reach, per index (s).
    pub margins: Vec<f64>,
}

impl ReachableRegion {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }
}

/// Rest-to-rest trapezoidal time-to-go: accelerate at `max_accel`, cruise at
/// `max_speed`.
pub fn time_to_reach(uav: &UavState, limits: &UavLimits, target: &Vec3) -> f64 {
    let d = (target - uav.position).norm();
    let (v, a) = (limits.max_speed, limits.max_accel);
    if d >= v * v / (2.0 * a) {
        d / v + v / (2.0 * a)
    } else {
        (2.0 * d / a).sqrt()
    }
}

pub fn reachable_region(
    path: &PredictedPath,
    now: f64,
    uav: &UavState,
    limits: &UavLimits,
) -> ReachableRegion {
    let mut region = ReachableRegion::default();
    for (i, s) in path.samples.iter().enumerate() {
        let margin = (s.time - now) - time_to_reach(uav, limits, &s.position);
        if margin >= 0.0 {
            region.indices.push(i);
            region.margins.push(margin);
        }
    }
    region
}

/// Heading that puts the object on the boresight when it has drifted past
/// `edge_threshold` of the half field of view; otherwise the current yaw.
pub fn yaw_command(obs: &Observation, uav: &UavState, edge_threshold: f64) -> f64 {
    if obs.edge_fraction >= edge_threshold {
        wrap_angle(uav.yaw + obs.bearing_azimuth)
    } else {
        wrap_angle(uav.yaw)
    }
}

pub fn plan_cat_mouse(
    obs: &Observation,
    uav: &UavState,
    yaw_enabled: bool,
    edge_threshold: f64,
) -> Setpoint {
    Setpoint {
        target_position: obs.position,
        target_yaw: if yaw_enabled {
            yaw_command(obs, uav, edge_threshold)
        } else {
            wrap_angle(uav.yaw)
        },
        source_method: PlanMethod::CatMouse,
        path_index: None,
    }
}

fn setpoint_at(path: &PredictedPath, index: usize, uav: &UavState, method: PlanMethod) -> Setpoint {
    Setpoint {
        target_position: path.samples[index].position,
        target_yaw: wrap_angle(uav.yaw),
        source_method: method,
        path_index: Some(index),
    }
}

/// Index of the region sample nearest the vehicle; ties go to the earlier
/// index.
pub fn shortest_index(
    path: &PredictedPath,
    region: &ReachableRegion,
    uav: &UavState,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &i in &region.indices {
        let d = (path.samples[i].position - uav.position).norm();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

pub fn plan_shortest(
    path: &PredictedPath,
    region: &ReachableRegion,
    uav: &UavState,
) -> Result<Setpoint, PlanError> {
    let i = shortest_index(path, region, uav).ok_or(PlanError::NoFeasibleIntercept)?;
    Ok(setpoint_at(path, i, uav, PlanMethod::ShortestPath))
}

pub fn plan_fastest(
    path: &PredictedPath,
    region: &ReachableRegion,
    uav: &UavState,
) -> Result<Setpoint, PlanError> {
    let &i = region
        .indices
        .first()
        .ok_or(PlanError::NoFeasibleIntercept)?;
    Ok(setpoint_at(path, i, uav, PlanMethod::FastestPath))
}

/// Suppresses setpoint chatter between replans: a candidate replaces the held
/// setpoint only if it moved more than `threshold` or the held target is no
/// longer near any reachable sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SetpointHysteresis {
    pub threshold: f64,
    held: Option<Setpoint>,
}

impl SetpointHysteresis {
    pub fn new(threshold: f64) -> Self {
        Self {
            threshold,
            held: None,
        }
    }

    pub fn held(&self) -> Option<&Setpoint> {
        self.held.as_ref()
    }

    pub fn reset(&mut self) {
        self.held = None;
    }

    pub fn filter(
        &mut self,
        candidate: Setpoint,
        path: &PredictedPath,
        region: &ReachableRegion,
    ) -> Setpoint {
        let keep = match &self.held {
            Some(old) if old.source_method == candidate.source_method => {
                let moved = (candidate.target_position - old.target_position).norm();
                let still_green = region.indices.iter().any(|&i| {
                    (path.samples[i].position - old.target_position).norm() <= self.threshold
                });
                moved <= self.threshold && still_green
            }
            _ => false,
        };
        let chosen = if keep {
            Setpoint {
                target_yaw: candidate.target_yaw,
                ..*self.held.as_ref().unwrap()
            }
        } else {
            candidate
        };
        self.held = Some(chosen);
        chosen
    }
}
