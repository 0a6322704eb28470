//! Acceptance checks, runnable from the command line (`catcher accept`) and
//! from the test suite.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::harness::{
    bundled_configs, run_scenario, run_suite, trace_csv_string, ScenarioConfig, ScenarioId,
    PLANAR_FINAL_ERROR_LIMIT,
};
use crate::physics::{
    acceleration, drag_coefficient, integrate, BallState, Environment, ProjectileParams,
};
use crate::planner::{
    plan_fastest, reachable_region, shortest_index, time_to_reach, PlanMethod, Setpoint, UavLimits,
};
use crate::predictor::{
    estimate_velocity, predict_path, ObservationQueue, PathSample, PredictedPath, PropagationStop,
};
use crate::vehicle::{step_uav, UavState, VehicleConfig};
use crate::Vec3;

/// Term-by-term evaluation of the drag correlation at Re = 2700, computed
/// offline.
pub const CD_2700_REFERENCE: f64 = 0.420_479_447_854_311_5;
pub const CD_TOLERANCE: f64 = 0.002;
pub const REGRESSION_TOLERANCE: f64 = 1e-9;
pub const DIVERGENCE_LIMIT: f64 = 0.05;
pub const HALVING_RATIO: (f64, f64) = (1.7, 2.3);
pub const D_RATE_MIN: f64 = 0.9;
pub const E_RATE_MIN: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(id: u8, name: &str, passed: bool, detail: String) -> Self {
        Self {
            id,
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {}. {}: {}", self.id, self.name, self.detail)
    }
}

pub fn check_drag_coefficient() -> CheckReport {
    let cd = drag_coefficient(2700.0).expect("in domain");
    let diff = (cd - CD_2700_REFERENCE).abs();
    CheckReport::new(
        1,
        "drag coefficient",
        diff <= CD_TOLERANCE,
        format!("Cd(2700) = {cd:.6}, reference {CD_2700_REFERENCE:.6}, |diff| = {diff:.2e}"),
    )
}

/// Worst slope error of [`estimate_velocity`] over affine tracks with
/// 2 to 10 samples.
pub fn regression_worst_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for n in 2..=10 {
        for _ in 0..20 {
            let p0 = Vec3::from_fn(|_, _| rng.random_range(-5.0..5.0));
            let v = Vec3::from_fn(|_, _| rng.random_range(-8.0..8.0));
            let t0 = rng.random_range(0.0..100.0);
            let dt = rng.random_range(0.005..0.1);
            let mut q = ObservationQueue::new(n);
            for k in 0..n {
                let t = t0 + k as f64 * dt;
                q.push_sample(t, p0 + v * (t - t0)).expect("increasing");
            }
            let est = estimate_velocity(&q).expect("enough samples");
            worst = worst.max((est - v).norm());
        }
    }
    worst
}

pub fn check_regression() -> CheckReport {
    let worst = regression_worst_error(2);
    CheckReport::new(
        2,
        "regression exactness",
        worst < REGRESSION_TOLERANCE,
        format!("worst slope error {worst:.2e} m/s over queue sizes 2-10"),
    )
}

/// A random throw from around head height, speed at most 8 m/s.
pub fn random_throw(rng: &mut impl Rng) -> BallState {
    let position = Vec3::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(0.5..3.0),
    );
    let dir: [f64; 3] = UnitSphere.sample(rng);
    let speed = rng.random_range(0.5..=8.0);
    BallState::new(position, Vec3::from(dir) * speed, 0.0)
}

/// Predictor accuracy for one throw over `horizon` seconds, against RK4 at
/// 1 ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrowDivergence {
    /// m, over all samples at the coarse step
    pub max_divergence: f64,
    /// m, at the horizon with the coarse step
    pub endpoint_coarse: f64,
    /// m, at the horizon with half the coarse step
    pub endpoint_fine: f64,
}

impl ThrowDivergence {
    pub fn halving_ratio(&self) -> f64 {
        self.endpoint_coarse / self.endpoint_fine
    }
}

pub fn throw_divergence(
    initial: &BallState,
    params: &ProjectileParams,
    env: &Environment,
    t_step: f64,
    horizon: f64,
) -> ThrowDivergence {
    let truth_dt = 0.001;
    let steps = (horizon / truth_dt).round() as usize;
    let truth = integrate(initial, params, env, truth_dt, steps);
    let truth_at = |t: f64| truth[((t - initial.time) / truth_dt).round() as usize].position;
    let stop = PropagationStop {
        max_horizon: horizon,
        ground_height: f64::NEG_INFINITY,
    };
    let coarse = predict_path(initial, params, env, t_step, &stop);
    let fine = predict_path(initial, params, env, t_step / 2.0, &stop);
    let max_divergence = coarse
        .samples
        .iter()
        .map(|s| (s.position - truth_at(s.time)).norm())
        .fold(0.0, f64::max);
    let end = truth[steps].position;
    let last = |p: &PredictedPath| p.samples.last().expect("non-empty").position;
    ThrowDivergence {
        max_divergence,
        endpoint_coarse: (last(&coarse) - end).norm(),
        endpoint_fine: (last(&fine) - end).norm(),
    }
}

pub fn check_predictor(throws: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = ProjectileParams::default();
    let env = Environment::default();
    let results: Vec<ThrowDivergence> = (0..throws)
        .map(|_| throw_divergence(&random_throw(&mut rng), &params, &env, 0.01, 0.5))
        .collect();
    let worst = results.iter().map(|r| r.max_divergence).fold(0.0, f64::max);
    let ratios: Vec<f64> = results.iter().map(ThrowDivergence::halving_ratio).collect();
    let rmin = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let rmax = ratios.iter().copied().fold(0.0, f64::max);
    let passed = worst < DIVERGENCE_LIMIT && rmin >= HALVING_RATIO.0 && rmax <= HALVING_RATIO.1;
    CheckReport::new(
        3,
        "predictor vs RK4",
        passed,
        format!("{throws} throws: max divergence {worst:.4} m, step-halving ratio in [{rmin:.3}, {rmax:.3}]"),
    )
}

pub fn check_planar() -> CheckReport {
    let r =
        run_scenario(&ScenarioConfig::bundled(ScenarioId::Planar2d)).expect("bundled config runs");
    let fin = r.final_prediction_error;
    let quarters = r.quarter_means();
    let passed =
        fin.is_some_and(|e| e < PLANAR_FINAL_ERROR_LIMIT) && quarters.is_some_and(|(a, b)| b < a);
    let detail = match (fin, quarters) {
        (Some(e), Some((a, b))) => {
            format!("final error {e:.3} m, quarter means {a:.3} -> {b:.3} m")
        }
        _ => "no plane-crossing predictions recorded".to_string(),
    };
    CheckReport::new(4, "planar experiment", passed, detail)
}

pub fn check_suite() -> CheckReport {
    let (report, _) = run_suite(&bundled_configs()).expect("bundled configs run");
    let detail = report
        .scenarios
        .iter()
        .map(|e| {
            format!(
                "{}={}",
                e.scenario_id,
                if e.passed { "ok" } else { "FAILED" }
            )
        })
        .collect::<Vec<_>>()
        .join(" ");
    CheckReport::new(5, "scenario suite", report.all_passed, detail)
}

/// Fraction of `seeds` noise realizations (σ = 1 cm) in which `id`
/// intercepts.
pub fn interception_rate(id: ScenarioId, seeds: std::ops::Range<u64>) -> f64 {
    let base = ScenarioConfig::bundled(id);
    let n = seeds.end - seeds.start;
    let hits = seeds
        .into_par_iter()
        .filter(|&seed| {
            let mut cfg = base.clone();
            cfg.seed = seed;
            cfg.camera.noise_sigma = 0.01;
            run_scenario(&cfg).expect("bundled config runs").intercepted
        })
        .count();
    hits as f64 / n as f64
}

pub fn check_rates(seeds: u64) -> CheckReport {
    let d = interception_rate(ScenarioId::D, 1..seeds + 1);
    let e = interception_rate(ScenarioId::E, 1..seeds + 1);
    CheckReport::new(
        6,
        "interception rate",
        d >= D_RATE_MIN && e >= E_RATE_MIN,
        format!(
            "over {seeds} seeds: D {:.0}%, E {:.0}%",
            d * 100.0,
            e * 100.0
        ),
    )
}

pub fn check_determinism() -> CheckReport {
    let mismatched: Vec<String> = bundled_configs()
        .par_iter()
        .filter_map(|cfg| {
            let a = trace_csv_string(&run_scenario(cfg).expect("runs").records);
            let b = trace_csv_string(&run_scenario(cfg).expect("runs").records);
            (a != b).then(|| cfg.scenario_id.to_string())
        })
        .collect();
    CheckReport::new(
        7,
        "determinism",
        mismatched.is_empty(),
        if mismatched.is_empty() {
            "every bundled scenario reproduces its trace byte for byte".to_string()
        } else {
            format!("traces differ on rerun: {}", mismatched.join(", "))
        },
    )
}

fn random_vec(rng: &mut impl Rng, lo: f64, hi: f64) -> Vec3 {
    Vec3::from_fn(|_, _| rng.random_range(lo..hi))
}

/// Randomized sweep over the module invariants. Returns the first violation.
pub fn invariant_sweep(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = ProjectileParams::default();
    let env = Environment::default();
    let limits = UavLimits::default();
    for case in 0..cases {
        // drag opposes velocity
        let v = random_vec(&mut rng, -15.0, 15.0);
        let a = acceleration(&BallState::new(Vec3::zeros(), v, 0.0), &params, &env);
        let drag = a + Vec3::new(0.0, 0.0, env.gravity);
        if drag.dot(&v) > 1e-12 * v.norm() * drag.norm() {
            return Err(format!("case {case}: drag {drag:?} does not oppose {v:?}"));
        }

        // queue keeps the newest `cap` samples in order
        let cap: usize = rng.random_range(2..8);
        let n: usize = rng.random_range(1..20);
        let mut q = ObservationQueue::new(cap);
        for k in 0..n {
            q.push_sample(k as f64, Vec3::repeat(k as f64))
                .expect("increasing");
        }
        let times: Vec<f64> = q.entries().map(|e| e.0).collect();
        let expected: Vec<f64> = (n.saturating_sub(cap)..n).map(|k| k as f64).collect();
        if times != expected {
            return Err(format!(
                "case {case}: queue holds {times:?}, expected {expected:?}"
            ));
        }

        // green region margins, fastest before shortest
        let uav = UavState::at(random_vec(&mut rng, -3.0, 3.0), rng.random_range(-3.0..3.0));
        let now = rng.random_range(0.0..2.0);
        let path = PredictedPath {
            samples: (0..rng.random_range(1..60))
                .map(|i| PathSample {
                    position: random_vec(&mut rng, -5.0, 5.0),
                    time: now + i as f64 * 0.05,
                })
                .collect(),
            t_step: 0.05,
        };
        let region = reachable_region(&path, now, &uav, &limits);
        for (&i, &m) in region.indices.iter().zip(&region.margins) {
            let expected = (path.samples[i].time - now)
                - time_to_reach(&uav, &limits, &path.samples[i].position);
            if m < 0.0 || (m - expected).abs() > 1e-12 {
                return Err(format!(
                    "case {case}: margin {m} at index {i}, expected {expected}"
                ));
            }
        }
        if let (Ok(fast), Some(short)) = (
            plan_fastest(&path, &region, &uav),
            shortest_index(&path, &region, &uav),
        ) {
            if fast.path_index.is_none_or(|f| f > short) {
                return Err(format!(
                    "case {case}: fastest {:?} after shortest {short}",
                    fast.path_index
                ));
            }
        }

        // yaw slew bound
        let dt = rng.random_range(0.0005..0.05);
        let sp = Setpoint {
            target_position: random_vec(&mut rng, -5.0, 5.0),
            target_yaw: rng.random_range(-10.0..10.0),
            source_method: PlanMethod::CatMouse,
            path_index: None,
        };
        let next = step_uav(&uav, &sp, &limits, &VehicleConfig::default(), dt);
        let turned = crate::wrap_angle(next.yaw - uav.yaw).abs();
        if turned > limits.max_yaw_rate * dt + 1e-12 {
            return Err(format!("case {case}: yaw moved {turned} in {dt} s"));
        }
    }
    Ok(())
}

pub fn check_invariants(cases: usize) -> CheckReport {
    let outcome = invariant_sweep(cases, 8);
    CheckReport::new(
        8,
        "invariant battery",
        outcome.is_ok(),
        match outcome {
            Ok(()) => format!("{cases} random cases"),
            Err(e) => e,
        },
    )
}

/// Every check at its acceptance size.
pub fn run_all() -> Vec<CheckReport> {
    vec![
        check_drag_coefficient(),
        check_regression(),
        check_predictor(100, 3),
        check_planar(),
        check_suite(),
        check_rates(50),
        check_determinism(),
        check_invariants(2000),
    ]
}
