//! Feedforward compensation: per-joint networks map the desired trajectory
//! to a command, window by window, with no feedback from the plant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{window_anchors, HALF_WINDOW, INPUT_LEN, OUTPUT_LEN};
use crate::error::{invalid, Error, Result};
use crate::eval::{metrics, ErrorReport};
use crate::nn::Mlp;
use crate::plant::MultiAxisPlant;
use crate::scalar::Real;
use crate::signal::{MultiTrajectory, SampledTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Stitching {
    /// Anchors every 25 samples; output segments tile the command.
    NonOverlapping,
    /// Anchors every `stride` samples (< 25); overlapping predictions are
    /// averaged uniformly.
    OverlapAverage { stride: usize },
}

impl Default for Stitching {
    fn default() -> Self {
        Stitching::NonOverlapping
    }
}

impl Stitching {
    fn stride(self) -> Result<usize> {
        match self {
            Stitching::NonOverlapping => Ok(OUTPUT_LEN),
            Stitching::OverlapAverage { stride } if (1..OUTPUT_LEN).contains(&stride) => Ok(stride),
            Stitching::OverlapAverage { .. } => Err(invalid("stitching.stride", "must lie in 1..25")),
        }
    }
}

/// What happened on one channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelCompensation {
    pub invocations: usize,
    /// Leading samples copied from the desired trajectory.
    pub head_passthrough: usize,
    /// Trailing samples copied from the desired trajectory.
    pub tail_passthrough: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompensationReport {
    pub channels: Vec<ChannelCompensation>,
}

/// Compensates a single channel.
pub fn compensate_channel<T: Real>(
    model: &Mlp<T>,
    q_d: &SampledTrajectory<T>,
    stitching: Stitching,
) -> Result<(SampledTrajectory<T>, ChannelCompensation)> {
    if model.input_len() != INPUT_LEN || model.output_len() != OUTPUT_LEN {
        return Err(Error::Dimension(format!(
            "model maps {} -> {}, compensation needs {INPUT_LEN} -> {OUTPUT_LEN}",
            model.input_len(),
            model.output_len()
        )));
    }
    let anchors = window_anchors(q_d.len(), stitching.stride()?)?;
    let n = q_d.len();
    let mut sum = vec![T::zero(); n];
    let mut count = vec![0u32; n];
    for &t in &anchors {
        let out = model.infer(&q_d.values[t - HALF_WINDOW..t + HALF_WINDOW])?;
        for (k, v) in out.into_iter().enumerate() {
            sum[t + k] += v;
            count[t + k] += 1;
        }
    }
    let u: Vec<T> = (0..n)
        .map(|k| if count[k] == 0 { q_d.values[k] } else { sum[k] / T::of_usize(count[k] as usize) })
        .collect();
    let head = count.iter().take_while(|c| **c == 0).count();
    let tail = count.iter().rev().take_while(|c| **c == 0).count();
    Ok((
        SampledTrajectory::new(q_d.dt, u),
        ChannelCompensation {
            invocations: anchors.len(),
            head_passthrough: head,
            tail_passthrough: tail,
        },
    ))
}

/// Runs `models[i]` over channel `i` of `q_d`. Pure function of its inputs.
pub fn compensate<T: Real>(
    models: &[Mlp<T>],
    q_d: &MultiTrajectory<T>,
    stitching: Stitching,
) -> Result<(MultiTrajectory<T>, CompensationReport)> {
    if models.len() != q_d.n_channels() {
        return Err(Error::ChannelMismatch {
            expected: q_d.n_channels(),
            actual: models.len(),
        });
    }
    let results: Vec<(SampledTrajectory<T>, ChannelCompensation)> = models
        .par_iter()
        .enumerate()
        .map(|(i, m)| compensate_channel(m, &q_d.channel(i), stitching))
        .collect::<Result<_>>()?;
    let (channels, reports): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok((MultiTrajectory::from_channels(channels)?, CompensationReport { channels: reports }))
}

/// Command, response and paired errors of a compensated run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun<T> {
    pub u: MultiTrajectory<T>,
    pub y: MultiTrajectory<T>,
    /// Response to the uncompensated command `u = q_d`.
    pub y_uncompensated: MultiTrajectory<T>,
    pub errors: ErrorReport<T>,
    pub compensation: CompensationReport,
}

/// Compensates `q_d`, runs it and the uncompensated command on a plant
/// holding `q_d[0]`, and scores both.
pub fn closed_pipeline_eval<T: Real>(
    plant: &MultiAxisPlant<T>,
    models: &[Mlp<T>],
    q_d: &MultiTrajectory<T>,
    stitching: Stitching,
    transient_samples: usize,
) -> Result<PipelineRun<T>> {
    let (u, compensation) = compensate(models, q_d, stitching)?;
    let hold = q_d.initial_values();
    let y = plant.run_multi(&u, &hold)?;
    let y_uncompensated = plant.run_multi(q_d, &hold)?;
    let baseline = metrics(&y_uncompensated, q_d, transient_samples)?;
    let errors = metrics(&y, q_d, transient_samples)?.with_baseline(baseline)?;
    Ok(PipelineRun {
        u,
        y,
        y_uncompensated,
        errors,
        compensation,
    })
}
