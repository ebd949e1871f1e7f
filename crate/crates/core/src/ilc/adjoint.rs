use crate::error::{Error, Result};
use crate::plant::{LiftedModel, PlantModel, PlantState};
use crate::scalar::Real;
use crate::signal::SampledTrajectory;

/// Gradient direction `G* e_y` obtained from one extra plant run, with no
/// model of the plant:
///
/// 1. `e_y = y_k - y_d`
/// 2. reverse `e_y` in time
/// 3. run the plant on `u_k + reversed(e_y)` from the same initial state
/// 4. reverse `y' - y_k` in time
///
/// Exact for a linear time-invariant plant, where it equals `G^T e_y`.
pub fn adjoint_direction_modelfree<T: Real>(
    plant: &PlantModel<T>,
    u_k: &SampledTrajectory<T>,
    y_k: &SampledTrajectory<T>,
    y_d: &SampledTrajectory<T>,
    initial: &PlantState<T>,
) -> Result<SampledTrajectory<T>> {
    check_len("y_k", u_k.len(), y_k.len())?;
    check_len("y_d", u_k.len(), y_d.len())?;
    let e_y = y_k.sub(y_d)?;
    let augmented = u_k.add(&e_y.reversed())?;
    let mut state = initial.clone();
    let y_aug = plant.run_from(&augmented, &mut state)?;
    Ok(y_aug.sub(y_k)?.reversed())
}

/// Gradient direction `G^T e_y` from the lifted linear model, propagated
/// backward in time.
pub fn adjoint_direction_lifted<T: Real>(
    model: &LiftedModel<T>,
    e_y: &SampledTrajectory<T>,
) -> Result<SampledTrajectory<T>> {
    if !e_y.is_finite() {
        return Err(Error::NonFinite("tracking error".into()));
    }
    Ok(SampledTrajectory::new(e_y.dt, model.apply_adjoint(&e_y.values)))
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch {
            what,
            expected,
            actual,
        });
    }
    Ok(())
}
