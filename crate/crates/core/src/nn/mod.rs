//! Per-joint multilayer perceptrons mapping a desired-trajectory window to
//! the command segment that tracks it.

mod adam;
mod io;
mod mlp;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use io::{load_models, model_file_name, save_models};
pub use mlp::{Gradients, Layer, Mlp, DEFAULT_HIDDEN};
pub use train::{retrain_output_layer, train, TrainConfig, TrainReport};
