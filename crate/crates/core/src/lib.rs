//! Learned feedforward compensation of a robot joint inner loop.
//!
//! The pipeline refines command trajectories with model-free gradient-descent
//! iterative learning control ([`ilc`]), turns the refined
//! `(desired, command)` pairs into windowed samples ([`dataset`]), fits one
//! multilayer perceptron per joint ([`nn`]), and applies the networks as a
//! pure feedforward filter ([`compensator`]). [`plant`] simulates the inner
//! loop and [`eval`] hosts metrics and the experiment harness.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

pub mod compensator;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod ilc;
pub mod linalg;
pub mod nn;
pub mod plant;
pub mod scalar;
pub mod signal;
pub mod trajgen;

pub use error::{Error, Result};
pub use scalar::Real;
pub use signal::{MultiTrajectory, SampledTrajectory, DEFAULT_DT};

pub type Trajectory = signal::SampledTrajectory<f64>;
pub type Multi = signal::MultiTrajectory<f64>;
pub type Plant = plant::PlantModel<f64>;
pub type MultiPlant = plant::MultiAxisPlant<f64>;
