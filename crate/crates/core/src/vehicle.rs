//! Kinematic point-mass multirotor.
//!
//! A PD loop turns the setpoint into an acceleration command, clamped to the
//! vehicle limits. With tilt coupling on, the horizontal part of that command
//! tilts the airframe (and the camera) nose-down by `atan(|a_h| / g)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planner::{Setpoint, UavLimits};
use crate::{wrap_angle, Vec3};

const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VehicleError {
    #[error("hover elevation must be positive, got {0}")]
    Elevation(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub position: Vec3,
    pub velocity: Vec3,
    /// rad, CCW from +x, in (-π, π]
    pub yaw: f64,
    /// rad, nose-down tilt induced by the acceleration command
    pub pitch: f64,
    pub time: f64,
}

impl UavState {
    pub fn at(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
            yaw: wrap_angle(yaw),
            pitch: 0.0,
            time: 0.0,
        }
    }
}

/// Hovering at `(0, 0, elevation)`, level and facing +x.
pub fn hover_init(elevation: f64) -> Result<UavState, VehicleError> {
    if !(elevation.is_finite() && elevation > 0.0) {
        return Err(VehicleError::Elevation(elevation));
    }
    Ok(UavState::at(Vec3::new(0.0, 0.0, elevation), 0.0))
}

/// Setpoint tracking gains and the tilt/field-of-view options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleConfig {
    /// s⁻²
    pub kp: f64,
    /// s⁻¹
    pub kd: f64,
    pub tilt_coupling: bool,
    /// Climb in proportion to pitch to keep a target in view while
    /// accelerating.
    pub height_compensation: bool,
    /// m/rad, used when `height_compensation` is on
    pub height_gain: f64,
    /// Scale factor in (0, 1] applied to `max_accel`, limiting tilt.
    pub accel_reduction: Option<f64>,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        Self {
            kp: 4.0,
            kd: 3.0,
            tilt_coupling: true,
            height_compensation: false,
            height_gain: 0.5,
            accel_reduction: None,
        }
    }
}

impl VehicleConfig {
    pub fn effective_max_accel(&self, limits: &UavLimits) -> f64 {
        limits.max_accel * self.accel_reduction.unwrap_or(1.0)
    }
}

fn clamp_norm(v: Vec3, max: f64) -> Vec3 {
    let n = v.norm();
    if n > max {
        v * (max / n)
    } else {
        v
    }
}

/// Advances the vehicle by `dt` toward `sp`.
pub fn step_uav(
    state: &UavState,
    sp: &Setpoint,
    limits: &UavLimits,
    cfg: &VehicleConfig,
    dt: f64,
) -> UavState {
    let mut target = sp.target_position;
    if cfg.height_compensation {
        target.z += cfg.height_gain * state.pitch;
    }
    let max_accel = cfg.effective_max_accel(limits);
    let command = clamp_norm(
        (target - state.position) * cfg.kp - state.velocity * cfg.kd,
        max_accel,
    );
    let velocity = clamp_norm(state.velocity + command * dt, limits.max_speed);
    let position = state.position + velocity * dt;

    let max_turn = limits.max_yaw_rate * dt;
    let turn = wrap_angle(sp.target_yaw - state.yaw).clamp(-max_turn, max_turn);
    let yaw = wrap_angle(state.yaw + turn);

    let pitch = if cfg.tilt_coupling {
        command.xy().norm().atan2(STANDARD_GRAVITY)
    } else {
        0.0
    };

    UavState {
        position,
        velocity,
        yaw,
        pitch,
        time: state.time + dt,
    }
}
