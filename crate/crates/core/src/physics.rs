//! Ground-truth projectile dynamics.
//!
//! Gravity plus Reynolds-dependent quadratic drag on a smooth sphere. The
//! drag coefficient comes from Morrison's four-term sphere correlation. The
//! same acceleration field is shared by the RK4 ground-truth integrator here
//! and by the kinematic propagator in [`crate::predictor`].
//!
//! World frame is z-up with gravity `(0, 0, -g)`, except in
//! [`DragMode::PaperExact`], which evaluates the published component
//! equations verbatim (gravity on the y axis, angle-based drag split).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("drag correlation undefined for Re = {0} (requires Re > 0)")]
    Domain(f64),
}

/// Ambient conditions. Defaults are sea-level room temperature air.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Environment {
    /// m/s²
    pub gravity: f64,
    /// kg/m³
    pub air_density: f64,
    /// m²/s
    pub kinematic_viscosity: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Self {
            gravity: 9.81,
            air_density: 1.204,
            kinematic_viscosity: 1.5e-5,
        }
    }
}

impl Environment {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.gravity) {
            return Err(PhysicsError::InvalidInput("gravity must be positive"));
        }
        if !ok(self.air_density) {
            return Err(PhysicsError::InvalidInput("air_density must be positive"));
        }
        if !ok(self.kinematic_viscosity) {
            return Err(PhysicsError::InvalidInput(
                "kinematic_viscosity must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DragMode {
    /// Drag acts along `-v̂`.
    #[default]
    VelocityOpposed,
    /// Published component equations with `φ = atan2(U, W)`, `θ = atan2(V, U)`
    /// and gravity on +y. Not guaranteed to oppose velocity.
    PaperExact,
    None,
}

/// Mass and geometry of the projectile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectileParams {
    /// kg
    pub mass: f64,
    /// m
    pub diameter: f64,
    /// m², frontal area
    pub reference_area: f64,
    #[serde(default)]
    pub drag_mode: DragMode,
}

impl Default for ProjectileParams {
    /// Standard 40 mm, 2.7 g table-tennis ball.
    fn default() -> Self {
        Self::sphere(2.7e-3, 0.04, DragMode::VelocityOpposed)
    }
}

impl ProjectileParams {
    pub fn sphere(mass: f64, diameter: f64, drag_mode: DragMode) -> Self {
        Self {
            mass,
            diameter,
            reference_area: PI * diameter * diameter / 4.0,
            drag_mode,
        }
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.mass) {
            return Err(PhysicsError::InvalidInput("mass must be positive"));
        }
        if !ok(self.diameter) {
            return Err(PhysicsError::InvalidInput("diameter must be positive"));
        }
        if !ok(self.reference_area) {
            return Err(PhysicsError::InvalidInput(
                "reference_area must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub time: f64,
}

impl BallState {
    pub fn new(position: Vec3, velocity: Vec3, time: f64) -> Self {
        Self {
            position,
            velocity,
            time,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_finite()
            && self.position.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
    }
}

/// Drag magnitude together with the two angles used by the published
/// component split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DragDecomposition {
    /// N
    pub magnitude: f64,
    /// `atan2(U, W)`
    pub phi: f64,
    /// `atan2(V, U)`
    pub theta: f64,
}

/// `Re = V·D/ν`.
pub fn reynolds_number(speed: f64, diameter: f64, nu: f64) -> Result<f64, PhysicsError> {
    if !(speed.is_finite() && diameter.is_finite() && nu.is_finite()) {
        return Err(PhysicsError::InvalidInput("non-finite Reynolds input"));
    }
    if speed < 0.0 || diameter <= 0.0 || nu <= 0.0 {
        return Err(PhysicsError::InvalidInput(
            "Reynolds number needs speed >= 0, diameter > 0, nu > 0",
        ));
    }
    Ok(speed * diameter / nu)
}

/// Morrison's sphere drag correlation, valid up to Re ≈ 1e6.
pub fn drag_coefficient(re: f64) -> Result<f64, PhysicsError> {
    if re.is_nan() || re <= 0.0 || re.is_infinite() {
        return Err(PhysicsError::Domain(re));
    }
    let stokes = 24.0 / re;
    let r5 = re / 5.0;
    let intermediate = 2.6 * r5 / (1.0 + r5.powf(1.52));
    let rc = re / 2.63e5;
    let crisis = 0.411 * rc.powf(-7.94) / (1.0 + rc.powf(-8.00));
    let r6 = re / 1.0e6;
    let supercritical = 0.25 * r6 / (1.0 + r6);
    Ok(stokes + intermediate + crisis + supercritical)
}

/// `½ρC_D|V|²A`.
pub fn drag_force(rho: f64, cd: f64, speed: f64, area: f64) -> Result<f64, PhysicsError> {
    if !(rho.is_finite() && cd.is_finite() && speed.is_finite() && area.is_finite()) {
        return Err(PhysicsError::InvalidInput("non-finite drag input"));
    }
    Ok(0.5 * rho * cd * speed * speed * area)
}

/// Drag magnitude for a ball moving at `velocity`. A ball at rest gets
/// exactly zero drag so the Stokes term is never evaluated at Re = 0.
pub fn drag_magnitude(velocity: &Vec3, params: &ProjectileParams, env: &Environment) -> f64 {
    let speed = velocity.norm();
    if speed == 0.0 || !speed.is_finite() {
        return 0.0;
    }
    let re = speed * params.diameter / env.kinematic_viscosity;
    match drag_coefficient(re) {
        Ok(cd) => 0.5 * env.air_density * cd * speed * speed * params.reference_area,
        Err(_) => 0.0,
    }
}

pub fn drag_decomposition(
    velocity: &Vec3,
    params: &ProjectileParams,
    env: &Environment,
) -> DragDecomposition {
    DragDecomposition {
        magnitude: drag_magnitude(velocity, params, env),
        phi: velocity.x.atan2(velocity.z),
        theta: velocity.y.atan2(velocity.x),
    }
}

/// Acceleration of the ball at `state`.
pub fn acceleration(state: &BallState, params: &ProjectileParams, env: &Environment) -> Vec3 {
    let gravity = Vec3::new(0.0, 0.0, -env.gravity);
    let v = &state.velocity;
    match params.drag_mode {
        DragMode::None => gravity,
        DragMode::VelocityOpposed => {
            let speed = v.norm();
            if speed == 0.0 {
                return gravity;
            }
            let dr = drag_magnitude(v, params, env);
            gravity - v * (dr / (params.mass * speed))
        }
        DragMode::PaperExact => {
            if v.norm() == 0.0 {
                // at rest: no drag, and the default z-up gravity
                return gravity;
            }
            let d = drag_decomposition(v, params, env);
            let k = d.magnitude / params.mass;
            Vec3::new(
                -k * d.phi.sin() * d.theta.cos(),
                env.gravity - k * d.phi.sin() * d.theta.sin(),
                -k * d.phi.cos() * d.theta.cos(),
            )
        }
    }
}

/// One classical RK4 step of the ball dynamics.
pub fn step_ground_truth(
    state: &BallState,
    params: &ProjectileParams,
    env: &Environment,
    dt: f64,
) -> BallState {
    let deriv = |p: Vec3, v: Vec3| -> (Vec3, Vec3) {
        let s = BallState::new(p, v, state.time);
        (v, acceleration(&s, params, env))
    };
    let (p0, v0) = (state.position, state.velocity);
    let (k1p, k1v) = deriv(p0, v0);
    let (k2p, k2v) = deriv(p0 + k1p * (0.5 * dt), v0 + k1v * (0.5 * dt));
    let (k3p, k3v) = deriv(p0 + k2p * (0.5 * dt), v0 + k2v * (0.5 * dt));
    let (k4p, k4v) = deriv(p0 + k3p * dt, v0 + k3v * dt);
    let sixth = dt / 6.0;
    BallState {
        position: p0 + (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * sixth,
        velocity: v0 + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * sixth,
        time: state.time + dt,
    }
}

/// Integrates with RK4 for `steps` steps, returning every state including
/// the initial one.
pub fn integrate(
    initial: &BallState,
    params: &ProjectileParams,
    env: &Environment,
    dt: f64,
    steps: usize,
) -> Vec<BallState> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(*initial);
    let mut s = *initial;
    for k in 1..=steps {
        s = step_ground_truth(&s, params, env, dt);
        // keep times on the exact grid
        s.time = initial.time + k as f64 * dt;
        out.push(s);
    }
    out
}
