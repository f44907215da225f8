//! Center-of-mass acceleration from irregularly stamped positions.

use crate::geometry::Vec3;
use crate::scalar::Scalar;
use crate::track::TrackSequence;

/// Second-difference acceleration magnitude at each interior sample:
///
/// `a_i = | 2 · ((p[i+1]-p[i])/dt1 - (p[i]-p[i-1])/dt0) / (dt0 + dt1) |`
///
/// Exact for positions quadratic in time, whatever the spacing. Returns one
/// value per interior sample (empty for fewer than three samples).
pub fn accelerations<T: Scalar>(stamps: &[T], positions: &[Vec3<T>]) -> Vec<T> {
    assert_eq!(stamps.len(), positions.len(), "one stamp per position");
    if stamps.len() < 3 {
        return Vec::new();
    }
    (1..stamps.len() - 1)
        .map(|i| {
            let dt0 = stamps[i] - stamps[i - 1];
            let dt1 = stamps[i + 1] - stamps[i];
            let v0 = (positions[i] - positions[i - 1]) * (T::one() / dt0);
            let v1 = (positions[i + 1] - positions[i]) * (T::one() / dt1);
            ((v1 - v0) * (T::two() / (dt0 + dt1))).norm()
        })
        .collect()
}

/// Largest interior acceleration, or zero when it cannot be estimated.
pub fn max_acceleration_of<T: Scalar>(stamps: &[T], positions: &[Vec3<T>]) -> T {
    accelerations(stamps, positions).into_iter().fold(T::zero(), T::max)
}

pub fn max_acceleration(seq: &TrackSequence) -> f64 {
    let (stamps, positions): (Vec<f64>, Vec<Vec3<f64>>) = seq.samples.iter().map(|s| (s.stamp, s.position)).unzip();
    max_acceleration_of(&stamps, &positions)
}
