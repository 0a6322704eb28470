//! Iterative trajectory prediction.
//!
//! Velocity comes from a least-squares line fit over a short FIFO of recent
//! detections. The predicted path is then rolled forward with the constant
//! acceleration kinematic update, recomputing Reynolds number, drag
//! coefficient and drag at every step.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physics::{acceleration, BallState, Environment, ProjectileParams};
use crate::sensor::Observation;
use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictorError {
    #[error("need at least 2 observations, have {0}")]
    InsufficientData(usize),
    #[error("all observation timestamps coincide")]
    DegenerateRegression,
    #[error("timestamp {got} is not after newest queued timestamp {newest}")]
    Ordering { newest: f64, got: f64 },
}

/// Fixed-capacity FIFO of timestamped positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationQueue {
    capacity: usize,
    entries: VecDeque<(f64, Vec3)>,
}

impl ObservationQueue {
    pub const DEFAULT_CAPACITY: usize = 5;

    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "queue capacity must be at least 1");
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &(f64, Vec3)> {
        self.entries.iter()
    }

    pub fn newest(&self) -> Option<&(f64, Vec3)> {
        self.entries.back()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn push_sample(&mut self, timestamp: f64, position: Vec3) -> Result<(), PredictorError> {
        if let Some(&(newest, _)) = self.entries.back() {
            if timestamp.is_nan() || timestamp <= newest {
                return Err(PredictorError::Ordering {
                    newest,
                    got: timestamp,
                });
            }
        }
        self.entries.push_back((timestamp, position));
        while self.entries.len() > self.capacity {
            self.entries.pop_front();
        }
        Ok(())
    }

    pub fn push_observation(&mut self, obs: &Observation) -> Result<(), PredictorError> {
        self.push_sample(obs.timestamp, obs.position)
    }
}

impl Default for ObservationQueue {
    fn default() -> Self {
        Self::new(Self::DEFAULT_CAPACITY)
    }
}

/// Least-squares slope of position against time, per axis.
pub fn estimate_velocity(queue: &ObservationQueue) -> Result<Vec3, PredictorError> {
    let n = queue.len();
    if n < 2 {
        return Err(PredictorError::InsufficientData(n));
    }
    let t0 = queue.entries[0].0;
    let mut sum_t = 0.0;
    let mut sum_tt = 0.0;
    let mut sum_p = Vec3::zeros();
    let mut sum_tp = Vec3::zeros();
    for &(t, p) in &queue.entries {
        let t = t - t0;
        sum_t += t;
        sum_tt += t * t;
        sum_p += p;
        sum_tp += p * t;
    }
    let nf = n as f64;
    let denom = nf * sum_tt - sum_t * sum_t;
    if denom.abs() <= f64::EPSILON * nf * sum_tt {
        return Err(PredictorError::DegenerateRegression);
    }
    Ok((sum_tp * nf - sum_p * sum_t) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub position: Vec3,
    pub time: f64,
}

/// Ordered future samples of the object, starting at the seed state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedPath {
    pub samples: Vec<PathSample>,
    pub t_step: f64,
}

impl PredictedPath {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// When to stop rolling the prediction forward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationStop {
    /// s past the seed time
    pub max_horizon: f64,
    /// m, the path ends at the first sample below this height
    pub ground_height: f64,
}

impl Default for PropagationStop {
    fn default() -> Self {
        Self {
            max_horizon: 3.0,
            ground_height: 0.0,
        }
    }
}

pub const DEFAULT_T_STEP: f64 = 0.01;

/// Rolls `initial` forward with `p += v·dt + ½a·dt²`, `v += a·dt`.
pub fn predict_path(
    initial: &BallState,
    params: &ProjectileParams,
    env: &Environment,
    t_step: f64,
    stop: &PropagationStop,
) -> PredictedPath {
    assert!(t_step > 0.0, "t_step must be positive");
    let mut samples = vec![PathSample {
        position: initial.position,
        time: initial.time,
    }];
    let mut state = *initial;
    let mut k: u64 = 0;
    loop {
        let a = acceleration(&state, params, env);
        state.position += state.velocity * t_step + a * (0.5 * t_step * t_step);
        state.velocity += a * t_step;
        k += 1;
        let elapsed = k as f64 * t_step;
        state.time = initial.time + elapsed;
        if elapsed > stop.max_horizon + 1e-9 * t_step {
            break;
        }
        samples.push(PathSample {
            position: state.position,
            time: state.time,
        });
        if state.position.z < stop.ground_height || !state.is_finite() {
            break;
        }
    }
    PredictedPath { samples, t_step }
}

/// Seeds [`predict_path`] from the newest queued position, the regression
/// velocity and the newest timestamp.
///
/// The regression slope is the velocity at the window's mean time, so it is
/// carried forward to the newest sample with the model acceleration first.
pub fn predict_from_queue(
    queue: &ObservationQueue,
    params: &ProjectileParams,
    env: &Environment,
    t_step: f64,
    stop: &PropagationStop,
) -> Result<PredictedPath, PredictorError> {
    let slope = estimate_velocity(queue)?;
    let &(time, position) = queue.newest().expect("non-empty after estimate");
    let t_mean = queue.entries().map(|&(t, _)| t).sum::<f64>() / queue.len() as f64;
    let accel = acceleration(&BallState::new(position, slope, t_mean), params, env);
    let velocity = slope + accel * (time - t_mean);
    Ok(predict_path(
        &BallState::new(position, velocity, time),
        params,
        env,
        t_step,
        stop,
    ))
}

/// First crossing of the plane through `plane_point` with unit normal
/// `plane_normal`, linearly interpolated between the bracketing samples.
pub fn plane_crossing(
    samples: &[PathSample],
    plane_point: &Vec3,
    plane_normal: &Vec3,
) -> Option<PathSample> {
    let signed = |p: &Vec3| (p - plane_point).dot(plane_normal);
    samples.windows(2).find_map(|w| {
        let d0 = signed(&w[0].position);
        let d1 = signed(&w[1].position);
        if d0 == 0.0 || d0.signum() == d1.signum() && d1 != 0.0 {
            return None;
        }
        let f = d0 / (d0 - d1);
        Some(PathSample {
            position: w[0].position + (w[1].position - w[0].position) * f,
            time: w[0].time + (w[1].time - w[0].time) * f,
        })
    })
}
