use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{BallMotion, ConfigError, PlaneConfig, ScenarioConfig, ScenarioId};
use crate::physics::{step_ground_truth, BallState};
use crate::planner::{
    plan_cat_mouse, plan_fastest, plan_shortest, reachable_region, shortest_index, yaw_command,
    PlanMethod, Setpoint, SetpointHysteresis,
};
use crate::predictor::{plane_crossing, predict_from_queue, ObservationQueue, PathSample};
use crate::sensor::{frame_index, observe, visible, Observation};
use crate::vehicle::{step_uav, UavState};
use crate::Vec3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Intercepted,
    GroundImpact,
    BallLost,
    Timeout,
}

/// One row of the trace, written every physics tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub time: f64,
    pub ball_position: Vec3,
    pub observation: Option<Vec3>,
    pub predicted_point: Option<Vec3>,
    /// m
    pub prediction_error: Option<f64>,
    pub uav_position: Vec3,
    /// rad
    pub uav_yaw: f64,
    /// rad, nose-down tilt
    pub uav_pitch: f64,
    pub setpoint: Vec3,
    pub intercepted: bool,
    /// On replanning frames of the prediction methods: the index the active
    /// method picked, before hysteresis.
    pub candidate_index: Option<usize>,
    /// On the same frames: the index the shortest-path rule would pick.
    pub shortest_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario_id: ScenarioId,
    pub method: PlanMethod,
    pub intercepted: bool,
    pub interception_time: Option<f64>,
    /// m, closest vehicle–ball distance over the run
    pub min_distance: f64,
    pub termination: Termination,
    pub observations: usize,
    /// First frame, after the first detection, at which the ball was in
    /// flight but out of view.
    pub view_lost_time: Option<f64>,
    pub final_prediction_error: Option<f64>,
    pub records: Vec<MetricsRecord>,
}

impl ScenarioResult {
    pub fn prediction_errors(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(|r| r.prediction_error)
            .collect()
    }

    /// Mean prediction error over the first and the last quarter of the
    /// frames that produced one. `None` with fewer than four such frames.
    pub fn quarter_means(&self) -> Option<(f64, f64)> {
        let e = self.prediction_errors();
        let q = e.len() / 4;
        if q == 0 {
            return None;
        }
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        Some((mean(&e[..q]), mean(&e[e.len() - q..])))
    }

    /// Whether the fastest-path choice never came after the shortest-path
    /// choice on any replanning frame.
    pub fn fastest_never_after_shortest(&self) -> bool {
        self.records
            .iter()
            .filter_map(|r| Some((r.candidate_index?, r.shortest_index?)))
            .all(|(c, s)| c <= s)
    }
}

/// Minimum distance from `point` to the polyline through `trajectory`.
pub fn prediction_error(point: &Vec3, trajectory: &[Vec3]) -> f64 {
    assert!(!trajectory.is_empty(), "trajectory must be non-empty");
    if trajectory.len() == 1 {
        return (point - trajectory[0]).norm();
    }
    trajectory
        .windows(2)
        .map(|w| point_segment_distance(point, &w[0], &w[1]))
        .fold(f64::INFINITY, f64::min)
}

fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    };
    (p - (a + ab * t)).norm()
}

/// Ball states at every physics tick, from launch until the first tick below
/// ground or `max_sim_time`.
pub fn ground_truth(cfg: &ScenarioConfig) -> Vec<BallState> {
    let dt = cfg.physics_dt;
    let steps = (cfg.max_sim_time / dt).ceil() as usize;
    let initial = cfg.initial_ball();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(initial);
    let mut s = initial;
    for k in 1..=steps {
        let t = k as f64 * dt;
        s = match cfg.ball.motion {
            BallMotion::Ballistic => {
                let mut next = step_ground_truth(&s, &cfg.ball.params, &cfg.environment, dt);
                next.time = t;
                next
            }
            BallMotion::Kinematic => {
                BallState::new(initial.position + initial.velocity * t, initial.velocity, t)
            }
        };
        out.push(s);
        if s.position.z < 0.0 {
            break;
        }
    }
    out
}

struct Tracker {
    min_distance: f64,
    observations: usize,
    last_obs_time: Option<f64>,
    view_lost_time: Option<f64>,
    final_prediction_error: Option<f64>,
    records: Vec<MetricsRecord>,
}

impl Tracker {
    fn new() -> Self {
        Self {
            min_distance: f64::INFINITY,
            observations: 0,
            last_obs_time: None,
            view_lost_time: None,
            final_prediction_error: None,
            records: Vec::new(),
        }
    }

    fn finish(
        self,
        cfg: &ScenarioConfig,
        method: PlanMethod,
        termination: Termination,
    ) -> ScenarioResult {
        let interception_time = self.records.iter().find(|r| r.intercepted).map(|r| r.time);
        ScenarioResult {
            scenario_id: cfg.scenario_id,
            method,
            intercepted: termination == Termination::Intercepted,
            interception_time,
            min_distance: self.min_distance,
            termination,
            observations: self.observations,
            view_lost_time: self.view_lost_time,
            final_prediction_error: self.final_prediction_error,
            records: self.records,
        }
    }
}

/// Per-frame planning output.
#[derive(Default)]
struct Plan {
    setpoint: Option<Setpoint>,
    predicted_point: Option<Vec3>,
    prediction_error: Option<f64>,
    candidate_index: Option<usize>,
    shortest_index: Option<usize>,
}

/// Runs one scenario to completion. Deterministic in `cfg`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult, HarnessError> {
    cfg.validate_parameters()?;
    if cfg.scenario_id == ScenarioId::Planar2d {
        return run_planar2d(cfg);
    }
    let truth = ground_truth(cfg);
    let truth_positions: Vec<Vec3> = truth.iter().map(|s| s.position).collect();
    let method = cfg.planner.method;
    let mut hysteresis = SetpointHysteresis::new(cfg.planner.hysteresis);

    let planner = |obs: &Observation,
                   queue: &ObservationQueue,
                   uav: &UavState,
                   now: f64,
                   hysteresis: &mut SetpointHysteresis|
     -> Plan {
        let pc = &cfg.planner;
        if method == PlanMethod::CatMouse {
            return Plan {
                setpoint: Some(plan_cat_mouse(obs, uav, pc.yaw_enabled, pc.edge_threshold)),
                ..Plan::default()
            };
        }
        // prediction methods always keep the object centred
        let yaw = yaw_command(obs, uav, 0.0);
        let fallback = || {
            let mut sp = plan_cat_mouse(obs, uav, true, 0.0);
            sp.target_yaw = yaw;
            sp
        };
        let Ok(path) = predict_from_queue(
            queue,
            &cfg.ball.params,
            &cfg.environment,
            pc.t_step,
            &pc.stop,
        ) else {
            return Plan {
                setpoint: Some(fallback()),
                ..Plan::default()
            };
        };
        let region = reachable_region(&path, now, uav, &cfg.uav.limits);
        let candidate = match method {
            PlanMethod::FastestPath => plan_fastest(&path, &region, uav),
            _ => plan_shortest(&path, &region, uav),
        };
        match candidate {
            Ok(mut sp) => {
                sp.target_yaw = yaw;
                let candidate_index = sp.path_index;
                let sp = hysteresis.filter(sp, &path, &region);
                Plan {
                    setpoint: Some(sp),
                    predicted_point: Some(sp.target_position),
                    prediction_error: Some(prediction_error(&sp.target_position, &truth_positions)),
                    candidate_index,
                    shortest_index: shortest_index(&path, &region, uav),
                }
            }
            Err(_) => {
                hysteresis.reset();
                Plan {
                    setpoint: Some(fallback()),
                    ..Plan::default()
                }
            }
        }
    };

    simulate(cfg, &truth, method, None, |obs, queue, uav, now| {
        planner(obs, queue, uav, now, &mut hysteresis)
    })
}

/// The planar experiment: the vehicle is confined to a vertical plane and
/// flies to the predicted point where the ball pierces it.
pub fn run_planar2d(cfg: &ScenarioConfig) -> Result<ScenarioResult, HarnessError> {
    cfg.validate_parameters()?;
    if cfg.scenario_id != ScenarioId::Planar2d {
        return Err(ConfigError::Invalid {
            field: "scenario_id".into(),
            reason: "run_planar2d needs a planar2d scenario".into(),
        }
        .into());
    }
    let plane = cfg.plane.expect("validated");
    let truth = ground_truth(cfg);
    let truth_samples: Vec<PathSample> = truth
        .iter()
        .map(|s| PathSample {
            position: s.position,
            time: s.time,
        })
        .collect();
    let true_crossing = plane_crossing(&truth_samples, &plane.point, &plane.normal);

    let planner =
        |obs: &Observation, queue: &ObservationQueue, uav: &UavState, _now: f64| -> Plan {
            let pc = &cfg.planner;
            let Ok(path) = predict_from_queue(
                queue,
                &cfg.ball.params,
                &cfg.environment,
                pc.t_step,
                &pc.stop,
            ) else {
                return Plan::default();
            };
            let Some(crossing) = plane_crossing(&path.samples, &plane.point, &plane.normal) else {
                return Plan::default();
            };
            let target = plane.project(&crossing.position);
            Plan {
                setpoint: Some(Setpoint {
                    target_position: target,
                    target_yaw: yaw_command(obs, uav, 0.0),
                    source_method: PlanMethod::PlaneCrossing,
                    path_index: None,
                }),
                predicted_point: Some(crossing.position),
                prediction_error: true_crossing.map(|t| (crossing.position - t.position).norm()),
                candidate_index: None,
                shortest_index: None,
            }
        };
    simulate(cfg, &truth, PlanMethod::PlaneCrossing, Some(plane), planner)
}

fn simulate(
    cfg: &ScenarioConfig,
    truth: &[BallState],
    method: PlanMethod,
    plane: Option<PlaneConfig>,
    mut plan: impl FnMut(&Observation, &ObservationQueue, &UavState, f64) -> Plan,
) -> Result<ScenarioResult, HarnessError> {
    let dt = cfg.physics_dt;
    let limits = cfg.uav.limits;
    let mut uav = cfg.uav.initial_state();
    if let Some(pl) = &plane {
        uav.position = pl.project(&uav.position);
    }
    let mut setpoint = Setpoint::hold(&uav);
    let mut queue = ObservationQueue::new(cfg.planner.queue_capacity);
    let mut tr = Tracker::new();
    let mut termination = Termination::Timeout;

    for (k, ball) in truth.iter().enumerate() {
        let t = k as f64 * dt;
        uav.time = t;
        let distance = (uav.position - ball.position).norm();
        tr.min_distance = tr.min_distance.min(distance);
        let intercepted = distance <= limits.intercept_radius;
        let grounded = ball.position.z < 0.0;

        let mut plan_out = Plan::default();
        let mut obs_pos = None;
        if !intercepted && !grounded {
            let obs = observe(ball, &cfg.ball.params, &uav, &cfg.camera, t, dt, cfg.seed);
            if let Some(obs) = obs {
                tr.observations += 1;
                tr.last_obs_time = Some(t);
                obs_pos = Some(obs.position);
                queue
                    .push_observation(&obs)
                    .expect("frame timestamps increase");
                plan_out = plan(&obs, &queue, &uav, t);
                if let Some(sp) = plan_out.setpoint {
                    setpoint = sp;
                }
                if plan_out.prediction_error.is_some() {
                    tr.final_prediction_error = plan_out.prediction_error;
                }
            } else if tr.last_obs_time.is_some()
                && tr.view_lost_time.is_none()
                && frame_index(t, cfg.camera.frame_rate, dt).is_some()
                && !visible(&ball.position, &uav, &cfg.camera)
            {
                tr.view_lost_time = Some(t);
            }
        }

        tr.records.push(MetricsRecord {
            time: t,
            ball_position: ball.position,
            observation: obs_pos,
            predicted_point: plan_out.predicted_point,
            prediction_error: plan_out.prediction_error,
            uav_position: uav.position,
            uav_yaw: uav.yaw,
            uav_pitch: uav.pitch,
            setpoint: setpoint.target_position,
            intercepted,
            candidate_index: plan_out.candidate_index,
            shortest_index: plan_out.shortest_index,
        });

        if intercepted {
            termination = Termination::Intercepted;
            break;
        }
        if grounded {
            termination = Termination::GroundImpact;
            break;
        }
        if let Some(last) = tr.last_obs_time {
            if t - last >= cfg.lost_timeout - 0.5 * dt {
                termination = Termination::BallLost;
                break;
            }
        }

        uav = step_uav(&uav, &setpoint, &limits, &cfg.uav.vehicle, dt);
        if let Some(pl) = &plane {
            uav.position = pl.project(&uav.position);
            uav.velocity = pl.project_direction(&uav.velocity);
        }
    }
    Ok(tr.finish(cfg, method, termination))
}
