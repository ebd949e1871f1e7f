use serde::{Deserialize, Serialize};

use super::model::PlantModel;
use crate::error::{invalid, Result};
use crate::scalar::Real;
use crate::signal::SampledTrajectory;

/// Step-response metrics normalized by the step amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StepMetrics<T> {
    pub amplitude: T,
    /// Zero amplitude: the response is identically zero and the ratios
    /// below are reported as zero.
    pub degenerate: bool,
    /// 10 % to 90 % rise time (s).
    pub rise_time: Option<T>,
    /// Maximum of `y / amplitude`.
    pub peak_ratio: T,
    pub peak_time: T,
    /// Time after which `y / amplitude` stays within 2 % of one (s).
    pub settling_time: Option<T>,
    /// `y / amplitude` at the last sample.
    pub final_ratio: T,
    /// First sample at which the output leaves its initial value.
    pub deadtime: Option<T>,
}

/// Steps of each amplitude from rest at zero, `horizon` samples long.
pub fn step_response_report<T: Real>(
    plant: &PlantModel<T>,
    amplitudes: &[T],
    horizon: usize,
) -> Result<Vec<StepMetrics<T>>> {
    amplitudes
        .iter()
        .map(|&amp| {
            if !(amp.is_finite() && amp >= T::zero()) {
                return Err(invalid("amplitude", "step amplitudes must be non-negative"));
            }
            let u = SampledTrajectory::constant(plant.dt(), amp, horizon);
            let y = plant.run(&u, T::zero())?;
            Ok(metrics_for(&y, amp))
        })
        .collect()
}

fn metrics_for<T: Real>(y: &SampledTrajectory<T>, amp: T) -> StepMetrics<T> {
    let dt = y.dt;
    if amp == T::zero() {
        return StepMetrics {
            amplitude: amp,
            degenerate: true,
            rise_time: None,
            peak_ratio: T::zero(),
            peak_time: T::zero(),
            settling_time: None,
            final_ratio: T::zero(),
            deadtime: None,
        };
    }
    let r: Vec<T> = y.values.iter().map(|&v| v / amp).collect();
    let first = |p: &dyn Fn(T) -> bool| r.iter().position(|&v| p(v));
    let t10 = first(&|v| v >= T::lit(0.1));
    let t90 = first(&|v| v >= T::lit(0.9));
    let rise_time = match (t10, t90) {
        (Some(a), Some(b)) => Some(T::of_usize(b - a) * dt),
        _ => None,
    };
    let (peak_idx, peak_ratio) = r
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let band = T::lit(0.02);
    let settling_time = match r.iter().rposition(|&v| (v - T::one()).abs() > band) {
        None => Some(T::zero()),
        Some(i) if i + 1 < r.len() => Some(T::of_usize(i + 1) * dt),
        Some(_) => None,
    };
    let deadtime = first(&|v| v != r[0]).map(|i| T::of_usize(i) * dt);
    StepMetrics {
        amplitude: amp,
        degenerate: false,
        rise_time,
        peak_ratio,
        peak_time: T::of_usize(peak_idx) * dt,
        settling_time,
        final_ratio: *r.last().expect("non-empty response"),
        deadtime,
    }
}
