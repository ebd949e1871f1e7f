use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::build::SourcePair;
use crate::error::{Error, Result};
use crate::ilc::{refine, IlcConfig, IlcStatus};
use crate::plant::MultiAxisPlant;
use crate::scalar::Real;
use crate::signal::SampledTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct CollectConfig<T> {
    pub ilc: IlcConfig<T>,
    /// Samples dropped from the start of each refined pair, where the
    /// command fights the unavoidable start-up lag.
    pub crop_head: usize,
    /// Samples dropped from the end, where the command no longer affects
    /// the output within the horizon.
    pub crop_tail: usize,
}

impl<T: Real> Default for CollectConfig<T> {
    fn default() -> Self {
        Self {
            ilc: IlcConfig::default(),
            crop_head: 25,
            crop_tail: 25,
        }
    }
}

/// Outcome of refining one source trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CollectRecord<T> {
    pub joint_index: usize,
    pub source_id: usize,
    pub initial_error: T,
    pub final_error: T,
    pub iterations: usize,
    pub status: IlcStatus,
}

/// Runs ILC for every `(joint, trajectory)` pair: `per_joint[j]` lists the
/// desired trajectories of joint `j`, and source ids are their positions.
pub fn collect_sources<T: Real>(
    plant: &MultiAxisPlant<T>,
    per_joint: &[Vec<SampledTrajectory<T>>],
    cfg: &CollectConfig<T>,
) -> Result<(Vec<SourcePair<T>>, Vec<CollectRecord<T>>)> {
    if per_joint.len() != plant.n_joints() {
        return Err(Error::ChannelMismatch {
            expected: plant.n_joints(),
            actual: per_joint.len(),
        });
    }
    let jobs: Vec<(usize, usize, &SampledTrajectory<T>)> = per_joint
        .iter()
        .enumerate()
        .flat_map(|(j, trajs)| trajs.iter().enumerate().map(move |(s, t)| (j, s, t)))
        .collect();
    if jobs.is_empty() {
        return Err(Error::Empty("collection trajectories"));
    }
    let results: Vec<(SourcePair<T>, CollectRecord<T>)> = jobs
        .par_iter()
        .map(|&(joint_index, source_id, q_d)| {
            let n = q_d.len();
            if n < cfg.crop_head + cfg.crop_tail + 1 {
                return Err(Error::LengthMismatch {
                    what: "trajectory shorter than the crop",
                    expected: cfg.crop_head + cfg.crop_tail + 1,
                    actual: n,
                });
            }
            let run = refine(&plant.joints[joint_index], q_d, &cfg.ilc)?;
            let keep = cfg.crop_head..n - cfg.crop_tail;
            Ok((
                SourcePair {
                    joint_index,
                    source_id,
                    q_d: q_d.values[keep.clone()].to_vec(),
                    u: run.u_final().values[keep].to_vec(),
                },
                CollectRecord {
                    joint_index,
                    source_id,
                    initial_error: run.error_history[0],
                    final_error: run.final_error(),
                    iterations: run.iterations(),
                    status: run.status,
                },
            ))
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().unzip())
}
