//! On-board ball interception for a multirotor with a forward depth camera.
//!
//! The pipeline runs once per camera frame:
//!
//! 1. [`sensor`]: the ball is detected as the centroid of a fringe-filtered
//!    point cloud.
//! 2. [`predictor`]: a least-squares fit over the last few detections gives
//!    the velocity, and the drag-aware kinematic propagator rolls out the
//!    future path.
//! 3. [`planner`]: one of Cat & Mouse, shortest-path or fastest-path picks
//!    a setpoint, and [`vehicle`] flies it.
//!
//! [`physics`] provides the ground truth and [`harness`] runs whole
//! scenarios deterministically, writing CSV traces and JSON summaries.
//!
//! ```
//! use catcher_core::harness::{run_scenario, ScenarioConfig, ScenarioId};
//!
//! let cfg = ScenarioConfig::bundled(ScenarioId::A);
//! let result = run_scenario(&cfg).unwrap();
//! assert!(result.intercepted);
//! ```

pub mod battery;
pub mod harness;
pub mod physics;
pub mod planner;
pub mod predictor;
pub mod sensor;
pub mod vehicle;

pub use harness::{run_scenario, ScenarioConfig, ScenarioId, ScenarioResult};
pub use physics::{BallState, DragMode, Environment, ProjectileParams};
pub use planner::{PlanMethod, Setpoint, UavLimits};
pub use predictor::{ObservationQueue, PredictedPath};
pub use sensor::{CameraModel, Observation};
pub use vehicle::{UavState, VehicleConfig};

/// World-frame 3-vector, z up.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Wraps an angle into (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    // rem_euclid can round up to exactly TAU
    if w <= -PI {
        w += TAU;
    }
    w
}
