//! Step-size selection along a fixed descent direction.
//!
//! Plant evaluations are the unit of cost; every strategy stays within
//! `max_probes` evaluations and returns the best probe seen.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::plant::{PlantModel, PlantState};
use crate::scalar::Real;
use crate::signal::SampledTrajectory;

/// Direction norms below this are treated as converged (deg).
pub const DIRECTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineSearchStrategy {
    /// Geometric backtracking from `alpha_init`; once a probe descends, keeps
    /// shrinking while the error keeps improving.
    Backtracking,
    /// Backtracking (or one expansion) to bracket, then a three-point
    /// parabolic step on the squared error. Exact on quadratic objectives.
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LineSearchConfig<T> {
    pub strategy: LineSearchStrategy,
    pub alpha_init: T,
    pub shrink: T,
    pub max_probes: usize,
}

impl<T: Real> Default for LineSearchConfig<T> {
    fn default() -> Self {
        Self {
            strategy: LineSearchStrategy::Parabolic,
            alpha_init: T::one(),
            shrink: T::lit(0.5),
            max_probes: 8,
        }
    }
}

impl<T: Real> LineSearchConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_init.is_finite() && self.alpha_init > T::zero()) {
            return Err(invalid("line_search.alpha_init", "must be positive"));
        }
        if !(self.shrink > T::zero() && self.shrink < T::one()) {
            return Err(invalid("line_search.shrink", "must lie in (0, 1)"));
        }
        if self.max_probes == 0 {
            return Err(invalid("line_search.max_probes", "must be at least 1"));
        }
        Ok(())
    }
}

/// Result of a search. `P` is whatever the objective produced alongside the
/// error for the accepted step (the plant output, for plant searches).
#[derive(Debug, Clone, PartialEq)]
pub enum LineSearchOutcome<T, P> {
    Accepted {
        alpha: T,
        error: T,
        payload: P,
        evaluations: usize,
    },
    /// Direction below tolerance: alpha 0, error unchanged.
    ZeroDirection { error: T },
    /// No probe reduced the error within the budget.
    Stalled { evaluations: usize },
}

impl<T: Real, P> LineSearchOutcome<T, P> {
    /// `(alpha, error)`, with `alpha = 0` and the current error when no step
    /// is taken.
    pub fn step(&self, current_error: T) -> (T, T) {
        match self {
            Self::Accepted { alpha, error, .. } => (*alpha, *error),
            _ => (T::zero(), current_error),
        }
    }
}

/// Runs the configured strategy on `objective(alpha) -> (l2 error, payload)`.
pub fn search<T, P, F>(
    mut objective: F,
    current_error: T,
    direction_norm: T,
    cfg: &LineSearchConfig<T>,
) -> Result<LineSearchOutcome<T, P>>
where
    T: Real,
    F: FnMut(T) -> Result<(T, P)>,
{
    cfg.validate()?;
    if direction_norm < T::lit(DIRECTION_TOLERANCE) {
        return Ok(LineSearchOutcome::ZeroDirection {
            error: current_error,
        });
    }
    let mut probes: Vec<(T, T)> = Vec::new();
    let mut best: Option<(T, T, P)> = None;
    let mut eval = |alpha: T, probes: &mut Vec<(T, T)>, best: &mut Option<(T, T, P)>| -> Result<T> {
        let (err, payload) = objective(alpha)?;
        probes.push((alpha, err));
        let improves = err.is_finite()
            && err < current_error
            && best.as_ref().map_or(true, |(_, b, _)| err < *b);
        if improves {
            *best = Some((alpha, err, payload));
        }
        Ok(err)
    };

    // Phase 1: backtrack until the first descent.
    let mut alpha = cfg.alpha_init;
    let mut last_failed: Option<T> = None;
    let mut first_descent = None;
    while probes.len() < cfg.max_probes {
        let err = eval(alpha, &mut probes, &mut best)?;
        if err.is_finite() && err < current_error {
            first_descent = Some((alpha, err));
            break;
        }
        last_failed = Some(alpha);
        alpha = alpha * cfg.shrink;
    }

    if let Some((mut a, mut e)) = first_descent {
        match cfg.strategy {
            LineSearchStrategy::Backtracking => {
                while probes.len() < cfg.max_probes {
                    let next = a * cfg.shrink;
                    let err = eval(next, &mut probes, &mut best)?;
                    if !(err < e) {
                        break;
                    }
                    a = next;
                    e = err;
                }
            }
            LineSearchStrategy::Parabolic => {
                // third point: the failed probe above, or one expansion step
                let third = match last_failed {
                    Some(f) => Some((f, probes.iter().find(|p| p.0 == f).map(|p| p.1))),
                    None if probes.len() < cfg.max_probes => {
                        let f = a / cfg.shrink;
                        let err = eval(f, &mut probes, &mut best)?;
                        Some((f, Some(err)))
                    }
                    None => None,
                };
                if let Some((a2, Some(e2))) = third {
                    if e2.is_finite() && probes.len() < cfg.max_probes {
                        if let Some(vertex) =
                            parabola_vertex((T::zero(), current_error), (a, e), (a2, e2))
                        {
                            if vertex > T::zero() && vertex.is_finite() {
                                eval(vertex, &mut probes, &mut best)?;
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(match best {
        Some((alpha, error, payload)) => LineSearchOutcome::Accepted {
            alpha,
            error,
            payload,
            evaluations: probes.len(),
        },
        None => LineSearchOutcome::Stalled {
            evaluations: probes.len(),
        },
    })
}

/// Minimizer of the parabola through three `(alpha, l2 error)` points,
/// fitted on squared errors. `None` unless the curvature is positive.
fn parabola_vertex<T: Real>(p0: (T, T), p1: (T, T), p2: (T, T)) -> Option<T> {
    let (x0, x1, x2) = (p0.0, p1.0, p2.0);
    let (y0, y1, y2) = (p0.1 * p0.1, p1.1 * p1.1, p2.1 * p2.1);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if !(curvature > T::zero()) {
        return None;
    }
    // y = y0 + d01 (x - x0) + curvature (x - x0)(x - x1)
    let two = T::lit(2.0);
    Some((curvature * (x0 + x1) - d01) / (two * curvature))
}

/// Searches `u_k - alpha * direction` on the plant, measuring the l2
/// tracking error against `y_d`. The accepted payload is `(u, y)`.
pub fn line_search<T: Real>(
    plant: &PlantModel<T>,
    initial: &PlantState<T>,
    u_k: &SampledTrajectory<T>,
    direction: &SampledTrajectory<T>,
    y_d: &SampledTrajectory<T>,
    current_error: T,
    cfg: &LineSearchConfig<T>,
) -> Result<LineSearchOutcome<T, (SampledTrajectory<T>, SampledTrajectory<T>)>> {
    let objective = |alpha: T| {
        let u = u_k.axpy(-alpha, direction)?;
        let mut state = initial.clone();
        let y = plant.run_from(&u, &mut state)?;
        let err = y.sub(y_d)?.norm2();
        Ok((err, (u, y)))
    };
    search(objective, current_error, direction.norm2(), cfg)
}
