//! Perturbed "physical" plant variants used to emulate a reality gap.

use serde::{Deserialize, Serialize};

use super::model::{GainShaping, PlantModel};
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// How the physical variant differs from the simulated plant.
///
/// `gain_scale` changes the response magnitude at high rates only; the
/// steady-state gain stays one, so slow motions and settled positions agree
/// with the nominal plant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PerturbationSpec<T> {
    #[serde(default)]
    pub omega_scale: Option<T>,
    #[serde(default)]
    pub gain_scale: Option<T>,
    /// Frequency (rad/s) above which `gain_scale` applies.
    #[serde(default = "default_corner")]
    pub gain_corner: T,
    #[serde(default = "default_damping")]
    pub gain_damping: T,
    #[serde(default)]
    pub extra_delay: usize,
}

fn default_corner<T: Real>() -> T {
    T::lit(4.5)
}

fn default_damping<T: Real>() -> T {
    T::lit(0.4)
}

impl<T: Real> Default for PerturbationSpec<T> {
    fn default() -> Self {
        Self {
            omega_scale: None,
            gain_scale: None,
            gain_corner: default_corner(),
            gain_damping: default_damping(),
            extra_delay: 0,
        }
    }
}

impl<T: Real> PerturbationSpec<T> {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn gain(gain_scale: T) -> Self {
        Self {
            gain_scale: Some(gain_scale),
            ..Self::default()
        }
    }
}

/// Builds the perturbed variant of `plant`. Rejects perturbations whose
/// discretized dynamics are not strictly stable.
pub fn make_physical_variant<T: Real>(
    plant: &PlantModel<T>,
    perturbation: &PerturbationSpec<T>,
) -> Result<PlantModel<T>> {
    let mut config = plant.config().clone();
    if let Some(scale) = perturbation.omega_scale {
        if !(scale.is_finite() && scale > T::zero()) {
            return Err(invalid("perturbation.omega_scale", "must be positive and finite"));
        }
        config.linear.omega = config.linear.omega * scale;
    }
    config.delay_samples += perturbation.extra_delay;
    if let Some(gain) = perturbation.gain_scale {
        config.shaping = Some(GainShaping {
            gain,
            corner: perturbation.gain_corner,
            damping: perturbation.gain_damping,
        });
    }
    PlantModel::new(config)
}
