use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;
use crate::signal::SampledTrajectory;

/// Finite-difference velocity and acceleration check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LimitReport<T> {
    pub pass: bool,
    /// Largest central-difference speed (deg/s) and its sample index.
    pub max_velocity: T,
    pub max_velocity_index: usize,
    /// Largest second-difference acceleration magnitude (deg/s^2).
    pub max_acceleration: T,
    pub max_acceleration_index: usize,
    pub velocity_violations: Vec<usize>,
    pub acceleration_violations: Vec<usize>,
}

/// Compares central-difference velocity and acceleration against bounds.
/// Only interior samples have estimates; shorter trajectories pass with zeros.
pub fn validate_limits<T: Real>(
    traj: &SampledTrajectory<T>,
    vmax: T,
    amax: T,
) -> Result<LimitReport<T>> {
    if !(vmax > T::zero() && amax > T::zero()) {
        return Err(invalid("limits", "vmax and amax must be positive"));
    }
    let q = &traj.values;
    let dt = traj.dt;
    let slack = T::one() + T::lit(1e-9);
    let mut report = LimitReport {
        pass: true,
        max_velocity: T::zero(),
        max_velocity_index: 0,
        max_acceleration: T::zero(),
        max_acceleration_index: 0,
        velocity_violations: Vec::new(),
        acceleration_violations: Vec::new(),
    };
    for i in 1..q.len().saturating_sub(1) {
        let v = ((q[i + 1] - q[i - 1]) / (T::lit(2.0) * dt)).abs();
        let a = ((q[i + 1] - T::lit(2.0) * q[i] + q[i - 1]) / (dt * dt)).abs();
        if v > report.max_velocity {
            report.max_velocity = v;
            report.max_velocity_index = i;
        }
        if a > report.max_acceleration {
            report.max_acceleration = a;
            report.max_acceleration_index = i;
        }
        if v > vmax * slack {
            report.velocity_violations.push(i);
        }
        if a > amax * slack {
            report.acceleration_violations.push(i);
        }
    }
    report.pass = report.velocity_violations.is_empty() && report.acceleration_violations.is_empty();
    Ok(report)
}
