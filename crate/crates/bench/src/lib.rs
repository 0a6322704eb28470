//! Shared fixtures for the criterion benches.

use catcher_core::physics::BallState;
use catcher_core::predictor::ObservationQueue;
use catcher_core::Vec3;
use nalgebra::Vector3;

/// A mid-speed throw similar to the bundled D and E scenarios.
pub fn sample_throw() -> BallState {
    BallState::new(
        Vector3::new(6.0, 1.5, 1.2),
        Vector3::new(-4.5, -1.2, 3.5),
        0.0,
    )
}

/// Five noiseless 30 Hz samples of a drag-free arc.
pub fn sample_queue() -> ObservationQueue {
    let mut q = ObservationQueue::default();
    let s = sample_throw();
    for k in 0..5 {
        let t = k as f64 / 30.0;
        let p: Vec3 = s.position + s.velocity * t + Vec3::new(0.0, 0.0, -4.905 * t * t);
        q.push_sample(t, p).expect("increasing timestamps");
    }
    q
}
