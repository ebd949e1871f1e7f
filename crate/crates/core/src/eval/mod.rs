//! Tracking metrics, the end-to-end training pipeline and the experiment
//! harness.

mod experiments;
mod metrics;
mod pipeline;
mod plots;

pub use metrics::{channel_metrics, metrics, ErrorReport, JointErrors, Units, DEFAULT_TRANSIENT};
pub use pipeline::{
    collect_dataset, joint_corpus, retrain_models, train_on_dataset, train_pipeline, PipelineConfig, TrainedModels,
};
pub use experiments::{
    chirp_trajectory, run_experiment, run_experiments, sine_trajectory, transfer_study, trapezoid_corner_study,
    ChirpCase, CornerStudy, DescentCase, ExperimentConfig, ExperimentOutcome, PlantVariant, SineCase, SummaryRow,
    TransferCase, TransferStudy, TrapezoidCase, EXPERIMENTS, SUMMARY_FILE,
};
pub use plots::export_plots;
