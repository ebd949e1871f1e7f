//! Desired joint trajectories: sinusoids, chirps, trapezoids, sigmoids and
//! filtered noise, plus a finite-difference limit checker.

mod limits;
mod sampling;
mod spec;

pub use limits::{validate_limits, LimitReport};
pub use sampling::{sample_specs, sample_training_set, FamilyMix, Spacing, TrainingSetConfig};
pub use spec::{generate, trapezoid_move_duration, TrajectoryKind, TrajectorySpec, DEFAULT_LENGTH};
