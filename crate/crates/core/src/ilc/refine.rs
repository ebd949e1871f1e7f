use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adjoint::{adjoint_direction_lifted, adjoint_direction_modelfree};
use super::line_search::{line_search, LineSearchConfig, LineSearchOutcome};
use crate::error::{invalid, Error, Result};
use crate::plant::{LiftedModel, MultiAxisPlant, PlantModel, PlantState};
use crate::scalar::Real;
use crate::signal::{MultiTrajectory, SampledTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientSource {
    /// Backward propagation through the plant's own lifted linear part.
    Lifted,
    /// Time-reversed extra plant run; needs no model.
    ModelFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IlcConfig<T> {
    pub max_iters: usize,
    /// Stop once the l2 tracking error is at or below this (deg).
    pub target_error: T,
    pub line_search: LineSearchConfig<T>,
    pub gradient_source: GradientSource,
}

impl<T: Real> Default for IlcConfig<T> {
    fn default() -> Self {
        Self {
            max_iters: 20,
            target_error: T::zero(),
            line_search: LineSearchConfig::default(),
            gradient_source: GradientSource::ModelFree,
        }
    }
}

impl<T: Real> IlcConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be at least 1"));
        }
        if !(self.target_error >= T::zero()) {
            return Err(invalid("target_error", "must be non-negative"));
        }
        self.line_search.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IlcStatus {
    TargetReached,
    MaxIterations,
    /// The line search found no descent along the gradient.
    Stalled,
    /// Gradient below tolerance.
    Converged,
}

/// History of one refinement. `u_history[k]` produced `error_history[k]`;
/// `alpha_history[k]` is the step that led from `u_history[k]` to
/// `u_history[k + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IlcRun<T> {
    pub u_history: Vec<SampledTrajectory<T>>,
    pub error_history: Vec<T>,
    pub alpha_history: Vec<T>,
    /// Plant output for the last input.
    pub y_final: SampledTrajectory<T>,
    pub status: IlcStatus,
    pub plant_evaluations: usize,
}

impl<T: Real> IlcRun<T> {
    pub fn u_final(&self) -> &SampledTrajectory<T> {
        self.u_history.last().expect("a run holds at least the initial input")
    }

    pub fn final_error(&self) -> T {
        *self.error_history.last().expect("a run holds at least the initial error")
    }

    pub fn iterations(&self) -> usize {
        self.alpha_history.len()
    }
}

/// Refines the command for `y_d` starting from `u0 = y_d`, with the plant
/// holding `y_d[0]` at the start of every run.
pub fn refine<T: Real>(
    plant: &PlantModel<T>,
    y_d: &SampledTrajectory<T>,
    cfg: &IlcConfig<T>,
) -> Result<IlcRun<T>> {
    let q0 = *y_d.values.first().ok_or(Error::Empty("desired trajectory"))?;
    refine_from(plant, y_d, &plant.hold_state(q0), cfg)
}

/// Gradient-descent refinement `u <- u - alpha_k G* (y - y_d)` from an
/// explicit initial plant state.
pub fn refine_from<T: Real>(
    plant: &PlantModel<T>,
    y_d: &SampledTrajectory<T>,
    initial: &PlantState<T>,
    cfg: &IlcConfig<T>,
) -> Result<IlcRun<T>> {
    cfg.validate()?;
    if y_d.is_empty() {
        return Err(Error::Empty("desired trajectory"));
    }
    if !y_d.is_finite() {
        return Err(Error::NonFinite("desired trajectory".into()));
    }
    let lifted: Option<LiftedModel<T>> = match cfg.gradient_source {
        GradientSource::Lifted => Some(plant.lifted()),
        GradientSource::ModelFree => None,
    };

    let mut u = y_d.clone();
    let mut y = plant.run_from(&u, &mut initial.clone())?;
    let mut err = y.sub(y_d)?.norm2();
    let mut run = IlcRun {
        u_history: vec![u.clone()],
        error_history: vec![err],
        alpha_history: Vec::new(),
        y_final: y.clone(),
        status: IlcStatus::MaxIterations,
        plant_evaluations: 1,
    };

    for _ in 0..cfg.max_iters {
        if err <= cfg.target_error {
            run.status = IlcStatus::TargetReached;
            break;
        }
        let direction = match &lifted {
            Some(model) => adjoint_direction_lifted(model, &y.sub(y_d)?)?,
            None => {
                run.plant_evaluations += 1;
                adjoint_direction_modelfree(plant, &u, &y, y_d, initial)?
            }
        };
        let outcome = line_search(plant, initial, &u, &direction, y_d, err, &cfg.line_search)?;
        match outcome {
            LineSearchOutcome::Accepted {
                alpha,
                error,
                payload: (u_next, y_next),
                evaluations,
            } => {
                run.plant_evaluations += evaluations;
                u = u_next;
                y = y_next;
                err = error;
                run.u_history.push(u.clone());
                run.error_history.push(err);
                run.alpha_history.push(alpha);
            }
            LineSearchOutcome::ZeroDirection { .. } => {
                run.status = IlcStatus::Converged;
                break;
            }
            LineSearchOutcome::Stalled { evaluations } => {
                run.plant_evaluations += evaluations;
                run.status = IlcStatus::Stalled;
                break;
            }
        }
    }
    if run.status == IlcStatus::MaxIterations && err <= cfg.target_error {
        run.status = IlcStatus::TargetReached;
    }
    run.y_final = y;
    Ok(run)
}

/// Applies [`refine`] to every axis independently; channel `i` of `y_d`
/// is refined on joint `i`.
pub fn refine_multi<T: Real>(
    plant: &MultiAxisPlant<T>,
    y_d: &MultiTrajectory<T>,
    cfg: &IlcConfig<T>,
) -> Result<Vec<IlcRun<T>>> {
    if y_d.n_channels() != plant.n_joints() {
        return Err(Error::ChannelMismatch {
            expected: plant.n_joints(),
            actual: y_d.n_channels(),
        });
    }
    plant
        .joints
        .par_iter()
        .enumerate()
        .map(|(i, joint)| refine(joint, &y_d.channel(i), cfg))
        .collect()
}
