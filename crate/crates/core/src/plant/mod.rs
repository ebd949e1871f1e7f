//! Simulated joint inner loop.

mod config;
mod linear;
mod model;
mod multi;
mod perturb;
mod report;

pub use config::PlantSetup;
pub use linear::{discretize, ContinuousStateSpace, DiscreteStateSpace, LinearModel};
pub use model::{
    GainShaping, LiftedModel, NonlinearityParams, PlantConfig, PlantModel, PlantState,
};
pub use multi::MultiAxisPlant;
pub use perturb::{make_physical_variant, PerturbationSpec};
pub use report::{step_response_report, StepMetrics};
