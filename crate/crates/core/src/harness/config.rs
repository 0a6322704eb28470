use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physics::{BallState, Environment, PhysicsError, ProjectileParams};
use crate::planner::{reachable_region, shortest_index, PlanMethod, UavLimits};
use crate::predictor::{predict_path, PropagationStop, DEFAULT_T_STEP};
use crate::sensor::SensorError;
use crate::vehicle::{UavState, VehicleConfig};
use crate::{CameraModel, Vec3};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("could not read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config at `{path}`: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    fn invalid(field: &str, reason: impl fmt::Display) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            reason: reason.to_string(),
        }
    }

    /// `detail` starts with the offending member of `prefix`, e.g.
    /// "frame_rate must be positive".
    fn nested(prefix: &str, detail: &str) -> Self {
        match detail.split_once(' ') {
            Some((name, rest)) if name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => {
                Self::invalid(&format!("{prefix}.{name}"), rest)
            }
            _ => Self::invalid(prefix, detail),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioId {
    A,
    B,
    C,
    D,
    E,
    #[serde(rename = "planar2d")]
    Planar2d,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [
        ScenarioId::A,
        ScenarioId::B,
        ScenarioId::C,
        ScenarioId::D,
        ScenarioId::E,
        ScenarioId::Planar2d,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioId::A => "A",
            ScenarioId::B => "B",
            ScenarioId::C => "C",
            ScenarioId::D => "D",
            ScenarioId::E => "E",
            ScenarioId::Planar2d => "planar2d",
        }
    }

    /// Planner method and yaw-keep flag each scenario is defined by.
    pub fn expected_planner(&self) -> (PlanMethod, bool) {
        match self {
            ScenarioId::A | ScenarioId::B => (PlanMethod::CatMouse, false),
            ScenarioId::C => (PlanMethod::CatMouse, true),
            ScenarioId::D => (PlanMethod::ShortestPath, true),
            ScenarioId::E => (PlanMethod::FastestPath, true),
            ScenarioId::Planar2d => (PlanMethod::PlaneCrossing, true),
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the ground-truth ball moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallMotion {
    /// Gravity and drag, integrated with RK4.
    #[default]
    Ballistic,
    /// Constant velocity, no forces (a held or carried ball).
    Kinematic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    /// m
    pub position: Vec3,
    /// m/s
    pub velocity: Vec3,
    #[serde(default)]
    pub motion: BallMotion,
    #[serde(default)]
    pub params: ProjectileParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UavConfig {
    /// m
    pub initial_position: Vec3,
    /// rad
    pub initial_yaw: f64,
    pub limits: UavLimits,
    pub vehicle: VehicleConfig,
}

impl Default for UavConfig {
    fn default() -> Self {
        Self {
            initial_position: Vec3::new(0.0, 0.0, 2.0),
            initial_yaw: 0.0,
            limits: UavLimits::default(),
            vehicle: VehicleConfig::default(),
        }
    }
}

impl UavConfig {
    pub fn initial_state(&self) -> UavState {
        UavState::at(self.initial_position, self.initial_yaw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    pub method: PlanMethod,
    #[serde(default)]
    pub yaw_enabled: bool,
    /// Fraction of the half-FOV at which Cat & Mouse starts yawing.
    #[serde(default = "default_edge_threshold")]
    pub edge_threshold: f64,
    /// m
    #[serde(default = "default_hysteresis")]
    pub hysteresis: f64,
    #[serde(default = "default_queue_capacity")]
    pub queue_capacity: usize,
    /// s
    #[serde(default = "default_t_step")]
    pub t_step: f64,
    #[serde(default)]
    pub stop: PropagationStop,
}

fn default_edge_threshold() -> f64 {
    0.8
}
fn default_hysteresis() -> f64 {
    0.1
}
fn default_queue_capacity() -> usize {
    5
}
fn default_t_step() -> f64 {
    DEFAULT_T_STEP
}

impl PlannerConfig {
    pub fn for_method(method: PlanMethod, yaw_enabled: bool) -> Self {
        Self {
            method,
            yaw_enabled,
            edge_threshold: default_edge_threshold(),
            hysteresis: default_hysteresis(),
            queue_capacity: default_queue_capacity(),
            t_step: default_t_step(),
            stop: PropagationStop::default(),
        }
    }
}

/// Vertical plane the planar experiment confines the vehicle to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneConfig {
    pub point: Vec3,
    /// Unit, horizontal.
    pub normal: Vec3,
}

impl PlaneConfig {
    pub fn project(&self, p: &Vec3) -> Vec3 {
        p - self.normal * (p - self.point).dot(&self.normal)
    }

    pub fn project_direction(&self, v: &Vec3) -> Vec3 {
        v - self.normal * v.dot(&self.normal)
    }
}

/// Everything needed to run one scenario reproducibly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_id: ScenarioId,
    #[serde(default)]
    pub seed: u64,
    /// s
    #[serde(default = "default_physics_dt")]
    pub physics_dt: f64,
    /// s
    pub max_sim_time: f64,
    /// s without a detection, after the first one, before the ball counts
    /// as lost
    #[serde(default = "default_lost_timeout")]
    pub lost_timeout: f64,
    pub ball: BallConfig,
    #[serde(default)]
    pub environment: Environment,
    #[serde(default)]
    pub camera: CameraModel,
    #[serde(default)]
    pub uav: UavConfig,
    pub planner: PlannerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<PlaneConfig>,
}

fn default_physics_dt() -> f64 {
    0.001
}
fn default_lost_timeout() -> f64 {
    1.0
}

const BUNDLED_A: &str = include_str!("../../../../scenarios/A.json");
const BUNDLED_B: &str = include_str!("../../../../scenarios/B.json");
const BUNDLED_C: &str = include_str!("../../../../scenarios/C.json");
const BUNDLED_D: &str = include_str!("../../../../scenarios/D.json");
const BUNDLED_E: &str = include_str!("../../../../scenarios/E.json");
const BUNDLED_PLANAR: &str = include_str!("../../../../scenarios/planar2d.json");

impl ScenarioConfig {
    /// Parses and fully validates a JSON config.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig =
            serde_path_to_error::deserialize(&mut de).map_err(|e| ConfigError::Parse {
                path: e.path().to_string(),
                source: e.into_inner(),
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The default configuration shipped for `id`.
    pub fn bundled(id: ScenarioId) -> Self {
        let text = match id {
            ScenarioId::A => BUNDLED_A,
            ScenarioId::B => BUNDLED_B,
            ScenarioId::C => BUNDLED_C,
            ScenarioId::D => BUNDLED_D,
            ScenarioId::E => BUNDLED_E,
            ScenarioId::Planar2d => BUNDLED_PLANAR,
        };
        Self::from_json(text).unwrap_or_else(|e| panic!("bundled config {id} is invalid: {e}"))
    }

    pub fn initial_ball(&self) -> BallState {
        BallState::new(self.ball.position, self.ball.velocity, 0.0)
    }

    /// Replaces the planner method, e.g. from a command-line override. This
    /// deliberately leaves the scenario/method pairing unchecked.
    pub fn with_method(mut self, method: PlanMethod) -> Self {
        self.planner.method = method;
        self
    }

    /// Full load-time validation: parameter ranges, the scenario/planner
    /// pairing, and the throw geometry sanity check for D and E.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_parameters()?;
        let (method, yaw) = self.scenario_id.expected_planner();
        if self.planner.method != method {
            return Err(ConfigError::invalid(
                "planner.method",
                format!(
                    "scenario {} uses {method}, got {}",
                    self.scenario_id, self.planner.method
                ),
            ));
        }
        if self.planner.yaw_enabled != yaw {
            return Err(ConfigError::invalid(
                "planner.yaw_enabled",
                format!("scenario {} requires yaw_enabled = {yaw}", self.scenario_id),
            ));
        }
        self.check_throw_geometry()
    }

    /// Value-range checks only; what [`super::run_scenario`] enforces.
    pub fn validate_parameters(&self) -> Result<(), ConfigError> {
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(
                    field,
                    format!("must be positive and finite, got {v}"),
                ))
            }
        };
        let finite = |field: &str, v: &Vec3| {
            if v.iter().all(|c| c.is_finite()) {
                Ok(())
            } else {
                Err(ConfigError::invalid(field, "must be finite"))
            }
        };
        positive("physics_dt", self.physics_dt)?;
        positive("max_sim_time", self.max_sim_time)?;
        positive("lost_timeout", self.lost_timeout)?;
        finite("ball.position", &self.ball.position)?;
        finite("ball.velocity", &self.ball.velocity)?;
        let physics = |prefix: &str, e: PhysicsError| match e {
            PhysicsError::InvalidInput(m) => ConfigError::nested(prefix, m),
            other => ConfigError::invalid(prefix, other),
        };
        self.ball
            .params
            .validate()
            .map_err(|e| physics("ball.params", e))?;
        self.environment
            .validate()
            .map_err(|e| physics("environment", e))?;
        self.camera.validate().map_err(|e| match e {
            SensorError::InvalidCamera(m) => ConfigError::nested("camera", m),
            other => ConfigError::invalid("camera", other),
        })?;
        let u = &self.uav;
        finite("uav.initial_position", &u.initial_position)?;
        if !u.initial_yaw.is_finite() {
            return Err(ConfigError::invalid("uav.initial_yaw", "must be finite"));
        }
        positive("uav.limits.max_speed", u.limits.max_speed)?;
        positive("uav.limits.max_accel", u.limits.max_accel)?;
        positive("uav.limits.max_yaw_rate", u.limits.max_yaw_rate)?;
        positive("uav.limits.intercept_radius", u.limits.intercept_radius)?;
        positive("uav.vehicle.kp", u.vehicle.kp)?;
        positive("uav.vehicle.kd", u.vehicle.kd)?;
        let g = u.vehicle.height_gain;
        if !(g.is_finite() && g >= 0.0) {
            return Err(ConfigError::invalid(
                "uav.vehicle.height_gain",
                "must be >= 0",
            ));
        }
        if let Some(f) = u.vehicle.accel_reduction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(ConfigError::invalid(
                    "uav.vehicle.accel_reduction",
                    "must be in (0, 1]",
                ));
            }
        }
        let p = &self.planner;
        if !(0.0..=1.0).contains(&p.edge_threshold) {
            return Err(ConfigError::invalid(
                "planner.edge_threshold",
                "must be in [0, 1]",
            ));
        }
        if !(p.hysteresis.is_finite() && p.hysteresis >= 0.0) {
            return Err(ConfigError::invalid("planner.hysteresis", "must be >= 0"));
        }
        if p.queue_capacity < 2 {
            return Err(ConfigError::invalid(
                "planner.queue_capacity",
                "must be at least 2",
            ));
        }
        positive("planner.t_step", p.t_step)?;
        positive("planner.stop.max_horizon", p.stop.max_horizon)?;
        if p.stop.ground_height.is_nan() {
            return Err(ConfigError::invalid(
                "planner.stop.ground_height",
                "must not be NaN",
            ));
        }
        match (self.scenario_id, &self.plane) {
            (ScenarioId::Planar2d, None) => {
                return Err(ConfigError::invalid("plane", "planar2d requires a plane"));
            }
            (ScenarioId::Planar2d, Some(plane)) => {
                finite("plane.point", &plane.point)?;
                if (plane.normal.norm() - 1.0).abs() > 1e-9 {
                    return Err(ConfigError::invalid("plane.normal", "must have unit norm"));
                }
                if plane.normal.z.abs() > 1e-9 {
                    return Err(ConfigError::invalid(
                        "plane.normal",
                        "plane must be vertical",
                    ));
                }
            }
            (_, Some(_)) => {
                return Err(ConfigError::invalid("plane", "only planar2d takes a plane"));
            }
            (_, None) => {}
        }
        Ok(())
    }

    /// For D and E the noiseless prediction from the launch state, seen from
    /// the starting hover, must have its nearest reachable point later than
    /// its earliest one, so shortest-distance and shortest-time choices
    /// differ.
    pub fn check_throw_geometry(&self) -> Result<(), ConfigError> {
        if !matches!(self.scenario_id, ScenarioId::D | ScenarioId::E) {
            return Ok(());
        }
        let path = predict_path(
            &self.initial_ball(),
            &self.ball.params,
            &self.environment,
            self.planner.t_step,
            &self.planner.stop,
        );
        let uav = self.uav.initial_state();
        let region = reachable_region(&path, 0.0, &uav, &self.uav.limits);
        let Some(&earliest) = region.indices.first() else {
            return Err(ConfigError::invalid(
                "ball",
                "no point of the throw is reachable from the starting hover within uav.limits",
            ));
        };
        let nearest = shortest_index(&path, &region, &uav).expect("non-empty region");
        if nearest <= earliest {
            return Err(ConfigError::invalid(
                "ball",
                format!(
                    "throw geometry: nearest reachable sample {nearest} is not later than earliest {earliest}"
                ),
            ));
        }
        Ok(())
    }
}
