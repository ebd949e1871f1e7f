use rayon::prelude::*;

use super::model::{PlantConfig, PlantModel};
use super::linear::LinearModel;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::{MultiTrajectory, SampledTrajectory};

/// `n` decoupled joints; channel `i` of every signal drives joint `i` only.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiAxisPlant<T> {
    pub joints: Vec<PlantModel<T>>,
}

impl<T: Real> MultiAxisPlant<T> {
    pub fn new(joints: Vec<PlantModel<T>>) -> Self {
        Self { joints }
    }

    pub fn from_configs(configs: Vec<PlantConfig<T>>) -> Result<Self> {
        Ok(Self::new(
            configs
                .into_iter()
                .map(PlantModel::new)
                .collect::<Result<_>>()?,
        ))
    }

    /// Six joints with distinct, mildly different inner loops.
    pub fn default_six() -> Self {
        // (a, zeta, omega) per joint
        const JOINTS: [(f64, f64, f64); 6] = [
            (25.0, 0.50, 15.0),
            (22.0, 0.55, 13.0),
            (28.0, 0.45, 16.0),
            (30.0, 0.50, 18.0),
            (26.0, 0.60, 17.0),
            (32.0, 0.50, 20.0),
        ];
        let configs = JOINTS
            .iter()
            .map(|&(a, zeta, omega)| PlantConfig {
                linear: LinearModel {
                    a: T::lit(a),
                    zeta: T::lit(zeta),
                    omega: T::lit(omega),
                    ..LinearModel::default()
                },
                ..PlantConfig::default()
            })
            .collect();
        Self::from_configs(configs).expect("default joint parameters are valid")
    }

    pub fn n_joints(&self) -> usize {
        self.joints.len()
    }

    /// Runs every joint on its own channel, each from a plant holding `hold[i]`.
    pub fn run_multi(&self, u: &MultiTrajectory<T>, hold: &[T]) -> Result<MultiTrajectory<T>> {
        if u.n_channels() != self.n_joints() {
            return Err(Error::ChannelMismatch {
                expected: self.n_joints(),
                actual: u.n_channels(),
            });
        }
        if hold.len() != self.n_joints() {
            return Err(Error::ChannelMismatch {
                expected: self.n_joints(),
                actual: hold.len(),
            });
        }
        let outputs: Vec<Vec<T>> = self
            .joints
            .par_iter()
            .zip(u.channels.par_iter())
            .zip(hold.par_iter())
            .map(|((plant, ch), &q0)| {
                plant
                    .run(&SampledTrajectory::new(u.dt, ch.clone()), q0)
                    .map(|y| y.values)
            })
            .collect::<Result<_>>()?;
        MultiTrajectory::new(u.dt, outputs)
    }
}
