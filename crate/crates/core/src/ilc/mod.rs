//! Gradient-descent iterative refinement of command trajectories.

mod adjoint;
mod line_search;
mod refine;

pub use adjoint::{adjoint_direction_lifted, adjoint_direction_modelfree};
pub use line_search::{
    line_search, search, LineSearchConfig, LineSearchOutcome, LineSearchStrategy,
    DIRECTION_TOLERANCE,
};
pub use refine::{refine, refine_from, refine_multi, GradientSource, IlcConfig, IlcRun, IlcStatus};
