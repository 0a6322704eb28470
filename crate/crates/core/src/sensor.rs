//! Virtual forward-looking depth camera.
//!
//! The camera sits at the vehicle's position looking along its heading,
//! tilted down by the mount pitch plus whatever pitch the airframe carries.
//! Detection samples the camera-facing hemisphere of the ball, drops fringe
//! points more than one standard deviation from the mean, and reports the
//! centroid of the rest.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physics::{BallState, ProjectileParams};
use crate::vehicle::UavState;
use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error("no points to detect")]
    NoDetection,
    #[error("invalid camera model: {0}")]
    InvalidCamera(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraModel {
    /// rad, full angle
    pub horizontal_fov: f64,
    /// rad, full angle
    pub vertical_fov: f64,
    /// Hz
    pub frame_rate: f64,
    /// m
    pub max_range: f64,
    /// m, per-point isotropic depth noise
    pub noise_sigma: f64,
    pub points_per_detection: usize,
    /// rad, downward tilt of the camera relative to the body
    pub mount_pitch: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            horizontal_fov: 1.204,
            vertical_fov: 0.733,
            frame_rate: 30.0,
            max_range: 10.0,
            noise_sigma: 0.0,
            points_per_detection: 50,
            mount_pitch: 0.0,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), SensorError> {
        use std::f64::consts::PI;
        let fov_ok = |f: f64| f > 0.0 && f < PI;
        if !fov_ok(self.horizontal_fov) {
            return Err(SensorError::InvalidCamera(
                "horizontal_fov must be in (0, π)",
            ));
        }
        if !fov_ok(self.vertical_fov) {
            return Err(SensorError::InvalidCamera("vertical_fov must be in (0, π)"));
        }
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(SensorError::InvalidCamera("frame_rate must be positive"));
        }
        if self.max_range.is_nan() || self.max_range <= 0.0 {
            return Err(SensorError::InvalidCamera("max_range must be positive"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(SensorError::InvalidCamera("noise_sigma must be >= 0"));
        }
        if self.points_per_detection == 0 {
            return Err(SensorError::InvalidCamera(
                "points_per_detection must be >= 1",
            ));
        }
        if !self.mount_pitch.is_finite() {
            return Err(SensorError::InvalidCamera("mount_pitch must be finite"));
        }
        Ok(())
    }

    pub fn frame_period(&self) -> f64 {
        1.0 / self.frame_rate
    }
}

/// A detected object position, as published by the camera pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// World frame centroid.
    pub position: Vec3,
    pub timestamp: f64,
    /// rad, positive to the left of the boresight
    pub bearing_azimuth: f64,
    /// rad, positive above the boresight
    pub bearing_elevation: f64,
    /// 0 on the boresight, 1 at the nearest FOV edge.
    pub edge_fraction: f64,
}

/// Camera axes in the world frame: forward, left, up.
#[derive(Debug, Clone, Copy)]
struct CameraFrame {
    forward: Vec3,
    left: Vec3,
    up: Vec3,
}

fn camera_frame(uav: &UavState, cam: &CameraModel) -> CameraFrame {
    let (sy, cy) = uav.yaw.sin_cos();
    let (sp, cp) = (cam.mount_pitch + uav.pitch).sin_cos();
    CameraFrame {
        forward: Vec3::new(cy * cp, sy * cp, -sp),
        left: Vec3::new(-sy, cy, 0.0),
        up: Vec3::new(cy * sp, sy * sp, cp),
    }
}

/// Bearing of a world point as seen by the camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bearing {
    pub azimuth: f64,
    pub elevation: f64,
    /// Distance along the boresight.
    pub depth: f64,
    pub range: f64,
}

pub fn bearing(point: &Vec3, uav: &UavState, cam: &CameraModel) -> Bearing {
    let frame = camera_frame(uav, cam);
    let rel = point - uav.position;
    let depth = rel.dot(&frame.forward);
    Bearing {
        azimuth: rel.dot(&frame.left).atan2(depth),
        elevation: rel.dot(&frame.up).atan2(depth),
        depth,
        range: rel.norm(),
    }
}

fn edge_fraction(b: &Bearing, cam: &CameraModel) -> f64 {
    (b.azimuth.abs() / (0.5 * cam.horizontal_fov)).max(b.elevation.abs() / (0.5 * cam.vertical_fov))
}

/// True when the ball centre lies strictly inside the field of view and
/// within range.
pub fn visible(ball_position: &Vec3, uav: &UavState, cam: &CameraModel) -> bool {
    let b = bearing(ball_position, uav, cam);
    b.depth > 0.0 && b.range <= cam.max_range && edge_fraction(&b, cam) < 1.0
}

/// Synthetic depth returns from the camera-facing hemisphere of the ball.
/// Empty when the ball is not visible.
pub fn sample_point_cloud(
    ball: &BallState,
    params: &ProjectileParams,
    uav: &UavState,
    cam: &CameraModel,
    rng_seed: u64,
) -> Vec<Vec3> {
    if !visible(&ball.position, uav, cam) {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let radius = params.radius();
    let toward_camera = uav.position - ball.position;
    let noise = Normal::new(0.0, cam.noise_sigma).expect("noise_sigma validated");
    (0..cam.points_per_detection)
        .map(|_| {
            let mut n = loop {
                let v = Vec3::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                );
                let len = v.norm();
                if len > 1e-12 {
                    break v / len;
                }
            };
            if n.dot(&toward_camera) < 0.0 {
                n = -n;
            }
            let mut p = ball.position + n * radius;
            if cam.noise_sigma > 0.0 {
                p += Vec3::new(
                    noise.sample(&mut rng),
                    noise.sample(&mut rng),
                    noise.sample(&mut rng),
                );
            }
            p
        })
        .collect()
}

/// Fringe-filtered centroid of a detected point set.
pub fn detect_centroid(points: &[Vec3]) -> Result<Vec3, SensorError> {
    if points.is_empty() {
        return Err(SensorError::NoDetection);
    }
    let n = points.len() as f64;
    let mean = points.iter().sum::<Vec3>() / n;
    let dists: Vec<f64> = points.iter().map(|p| (p - mean).norm()).collect();
    // positional standard deviation about the mean
    let sigma = (dists.iter().map(|d| d * d).sum::<f64>() / n).sqrt();
    let (sum, count) = points
        .iter()
        .zip(&dists)
        .filter(|(_, d)| **d <= sigma)
        .fold((Vec3::zeros(), 0usize), |(s, c), (p, _)| (s + p, c + 1));
    if count == 0 {
        Ok(mean)
    } else {
        Ok(sum / count as f64)
    }
}

/// Index of the camera frame at `sim_time`, if `sim_time` is within half a
/// physics step of a frame boundary.
pub fn frame_index(sim_time: f64, frame_rate: f64, physics_dt: f64) -> Option<u64> {
    let k = (sim_time * frame_rate).round();
    let offset = sim_time - k / frame_rate;
    if k >= 0.0 && offset >= -0.5 * physics_dt && offset < 0.5 * physics_dt {
        Some(k as u64)
    } else {
        None
    }
}

/// Runs the camera pipeline for one physics tick. Yields an observation only
/// on frame boundaries and only when the ball is in view.
pub fn observe(
    ball: &BallState,
    params: &ProjectileParams,
    uav: &UavState,
    cam: &CameraModel,
    sim_time: f64,
    physics_dt: f64,
    rng_seed: u64,
) -> Option<Observation> {
    let frame = frame_index(sim_time, cam.frame_rate, physics_dt)?;
    let cloud = sample_point_cloud(ball, params, uav, cam, frame_seed(rng_seed, frame));
    let position = detect_centroid(&cloud).ok()?;
    let b = bearing(&ball.position, uav, cam);
    Some(Observation {
        position,
        timestamp: frame as f64 / cam.frame_rate,
        bearing_azimuth: b.azimuth,
        bearing_elevation: b.elevation,
        edge_fraction: edge_fraction(&b, cam),
    })
}

/// Decorrelated per-frame seed.
pub fn frame_seed(seed: u64, frame: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ frame.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn hover() -> UavState {
        UavState::at(Vec3::new(0.0, 0.0, 2.0), 0.0)
    }

    fn ball_at(p: Vec3) -> BallState {
        BallState::new(p, Vec3::zeros(), 0.0)
    }

    #[test]
    fn visibility_examples() {
        let cam = CameraModel::default();
        let uav = hover();
        assert!(visible(&Vec3::new(2.0, 0.0, 2.0), &uav, &cam));
        assert!(!visible(&Vec3::new(-2.0, 0.0, 2.0), &uav, &cam));
        let az = cam.horizontal_fov / 2.0 + 0.01;
        let outside = Vec3::new(3.0 * az.cos(), 3.0 * az.sin(), 2.0);
        assert!(!visible(&outside, &uav, &cam));
        let az = cam.horizontal_fov / 2.0 - 0.01;
        let inside = Vec3::new(3.0 * az.cos(), 3.0 * az.sin(), 2.0);
        assert!(visible(&inside, &uav, &cam));
        assert!(!visible(&Vec3::new(10.5, 0.0, 2.0), &uav, &cam));
    }

    #[test]
    fn pitch_tilts_boresight_down() {
        let cam = CameraModel::default();
        let mut uav = hover();
        uav.pitch = 0.5;
        // level target now sits 0.5 rad above the boresight
        let b = bearing(&Vec3::new(3.0, 0.0, 2.0), &uav, &cam);
        assert_abs_diff_eq!(b.elevation, 0.5, epsilon = 1e-12);
        assert!(!visible(&Vec3::new(3.0, 0.0, 2.0), &uav, &cam));
    }

    #[test]
    fn yaw_rotates_azimuth() {
        let cam = CameraModel::default();
        let uav = UavState::at(Vec3::new(0.0, 0.0, 2.0), std::f64::consts::FRAC_PI_2);
        let b = bearing(&Vec3::new(0.0, 3.0, 2.0), &uav, &cam);
        assert_abs_diff_eq!(b.azimuth, 0.0, epsilon = 1e-12);
        let b = bearing(&Vec3::new(1.0, 3.0, 2.0), &uav, &cam);
        assert!(b.azimuth < 0.0, "target to the right");
    }

    #[test]
    fn noiseless_cloud_lies_on_surface() {
        let cam = CameraModel::default();
        let params = ProjectileParams::default();
        let ball = ball_at(Vec3::new(3.0, 0.2, 2.1));
        let cloud = sample_point_cloud(&ball, &params, &hover(), &cam, 3);
        assert_eq!(cloud.len(), cam.points_per_detection);
        for p in &cloud {
            assert_abs_diff_eq!((p - ball.position).norm(), params.radius(), epsilon = 1e-12);
            // facing the camera
            assert!((p - ball.position).dot(&(hover().position - ball.position)) >= 0.0);
        }
        assert_eq!(cloud, sample_point_cloud(&ball, &params, &hover(), &cam, 3));
        assert!(sample_point_cloud(
            &ball_at(Vec3::new(-3.0, 0.0, 2.0)),
            &params,
            &hover(),
            &cam,
            3
        )
        .is_empty());
    }

    #[test]
    fn radial_noise_matches_sigma() {
        let cam = CameraModel {
            noise_sigma: 0.005,
            points_per_detection: 10_000,
            ..CameraModel::default()
        };
        let params = ProjectileParams::default();
        let ball = ball_at(Vec3::new(3.0, 0.0, 2.0));
        let cloud = sample_point_cloud(&ball, &params, &hover(), &cam, 11);
        let radial: Vec<f64> = cloud
            .iter()
            .map(|p| (p - ball.position).norm() - params.radius())
            .collect();
        let n = radial.len() as f64;
        let mean = radial.iter().sum::<f64>() / n;
        let sd = (radial.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd - 0.005).abs() < 0.0005, "sd = {sd}");
    }

    #[test]
    fn centroid_examples() {
        let p = Vec3::new(1.0, -2.0, 3.0);
        assert_eq!(detect_centroid(&[p; 7]).unwrap(), p);
        assert_eq!(detect_centroid(&[]), Err(SensorError::NoDetection));

        // 100-point ring of radius 0.01 around the origin plus one far outlier
        let mut pts: Vec<Vec3> = (0..100)
            .map(|i| {
                let a = i as f64 * 0.0628;
                Vec3::new(
                    0.01 * a.cos(),
                    0.01 * a.sin(),
                    0.005 * (i % 3) as f64 - 0.005,
                )
            })
            .collect();
        pts.push(Vec3::new(10.0, 10.0, 10.0));
        let c = detect_centroid(&pts).unwrap();
        assert!(c.norm() <= 0.02, "outlier leaked into centroid: {c}");

        let mirrored: Vec<Vec3> = pts.iter().map(|p| Vec3::new(-p.x, p.y, p.z)).collect();
        let cm = detect_centroid(&mirrored).unwrap();
        assert_abs_diff_eq!(cm.x, -c.x, epsilon = 1e-12);
        assert_abs_diff_eq!(cm.y, c.y, epsilon = 1e-12);
    }

    #[test]
    fn observe_on_boresight() {
        let cam = CameraModel::default();
        let params = ProjectileParams::default();
        let ball = ball_at(Vec3::new(2.0, 0.0, 2.0));
        let obs = observe(&ball, &params, &hover(), &cam, 0.0, 0.001, 1).unwrap();
        assert_eq!(obs.edge_fraction, 0.0);
        assert_eq!(obs.timestamp, 0.0);
        // between frames
        assert!(observe(&ball, &params, &hover(), &cam, 0.010, 0.001, 1).is_none());
        // out of view
        let behind = ball_at(Vec3::new(-2.0, 0.0, 2.0));
        assert!(observe(&behind, &params, &hover(), &cam, 0.0, 0.001, 1).is_none());
    }

    #[test]
    fn one_second_yields_thirty_or_thirty_one_frames() {
        let cam = CameraModel::default();
        let params = ProjectileParams::default();
        let ball = ball_at(Vec3::new(2.0, 0.0, 2.0));
        let dt = 0.001;
        let stamps: Vec<f64> = (0..=1000)
            .filter_map(|k| observe(&ball, &params, &hover(), &cam, k as f64 * dt, dt, 9))
            .map(|o| o.timestamp)
            .collect();
        assert!(stamps.len() == 30 || stamps.len() == 31, "{}", stamps.len());
        for w in stamps.windows(2) {
            assert!(w[1] > w[0]);
            let frames = w[1] * cam.frame_rate;
            assert_abs_diff_eq!(frames, frames.round(), epsilon = 1e-9);
        }
    }

    #[test]
    fn hemisphere_bias_is_bounded() {
        let cam = CameraModel::default();
        let params = ProjectileParams::default();
        for seed in 0..20 {
            let ball = ball_at(Vec3::new(3.0, 0.3 * (seed as f64 - 10.0) / 10.0, 2.2));
            let cloud = sample_point_cloud(&ball, &params, &hover(), &cam, seed);
            let c = detect_centroid(&cloud).unwrap();
            assert!((c - ball.position).norm() <= params.radius());
        }
    }

    fn cloud() -> impl Strategy<Value = Vec<Vec3>> {
        prop::collection::vec(
            (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z)),
            1..40,
        )
    }

    proptest! {
        #[test]
        fn centroid_is_permutation_invariant(pts in cloud(), rot in 0usize..40) {
            let mut shuffled = pts.clone();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let a = detect_centroid(&pts).unwrap();
            let b = detect_centroid(&shuffled).unwrap();
            prop_assert!((a - b).norm() < 1e-9);
        }

        #[test]
        fn emitted_observations_are_inside_fov(
            x in -6.0..6.0f64, y in -6.0..6.0f64, z in -1.0..5.0f64,
            yaw in -3.0..3.0f64, pitch in 0.0..0.6f64,
        ) {
            let cam = CameraModel::default();
            let mut uav = UavState::at(Vec3::new(0.0, 0.0, 2.0), yaw);
            uav.pitch = pitch;
            let ball = ball_at(Vec3::new(x, y, z));
            let obs = observe(&ball, &ProjectileParams::default(), &uav, &cam, 0.0, 0.001, 5);
            prop_assert_eq!(obs.is_some(), visible(&ball.position, &uav, &cam));
            if let Some(o) = obs {
                prop_assert!(o.edge_fraction >= 0.0 && o.edge_fraction < 1.0);
            }
        }
    }
}
