use serde::{Deserialize, Serialize};

use crate::dataset::{build, collect_sources, BuildConfig, CollectConfig, CollectRecord, Dataset};
use crate::error::{Error, Result};
use crate::nn::{retrain_output_layer, train, Mlp, TrainConfig, TrainReport, DEFAULT_HIDDEN};
use crate::plant::MultiAxisPlant;
use crate::scalar::Real;
use crate::signal::SampledTrajectory;
use crate::trajgen::{sample_training_set, FamilyMix, TrainingSetConfig};
use rayon::prelude::*;

/// Everything needed to go from a plant to trained per-joint networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct PipelineConfig<T> {
    /// Trajectory corpus drawn independently for every joint.
    pub corpus: TrainingSetConfig,
    pub collect: CollectConfig<T>,
    pub dataset: BuildConfig,
    pub train: TrainConfig<T>,
    pub hidden: Vec<usize>,
    pub l2_lambda: T,
    /// Seed of the weight initialization; joint `j` uses `model_seed + j`.
    pub model_seed: u64,
}

impl<T: Real> Default for PipelineConfig<T> {
    fn default() -> Self {
        Self {
            corpus: TrainingSetConfig {
                n_traj: 60,
                mix: FamilyMix::default(),
                ..TrainingSetConfig::default()
            },
            collect: CollectConfig::default(),
            dataset: BuildConfig::default(),
            train: TrainConfig {
                epochs: 100,
                batch_size: 64,
                lr_decay: T::lit(0.98),
                ..TrainConfig::default()
            },
            hidden: DEFAULT_HIDDEN.to_vec(),
            l2_lambda: T::lit(1e-6),
            model_seed: 0,
        }
    }
}

/// Output of [`train_pipeline`].
#[derive(Debug, Clone)]
pub struct TrainedModels<T> {
    pub models: Vec<Mlp<T>>,
    pub dataset: Dataset<T>,
    pub reports: Vec<TrainReport<T>>,
    pub collection: Vec<CollectRecord<T>>,
}

/// Desired trajectories per joint; joint `j` draws with seed
/// `corpus.seed + j`.
pub fn joint_corpus<T: Real>(corpus: &TrainingSetConfig, n_joints: usize) -> Result<Vec<Vec<SampledTrajectory<T>>>> {
    (0..n_joints)
        .map(|j| {
            let cfg = TrainingSetConfig {
                seed: corpus.seed.wrapping_add(j as u64),
                ..corpus.clone()
            };
            Ok(sample_training_set::<T>(&cfg)?.into_iter().map(|(_, t)| t).collect())
        })
        .collect()
}

/// Refines a corpus on `plant` with ILC and builds the windowed dataset.
pub fn collect_dataset<T: Real>(
    plant: &MultiAxisPlant<T>,
    cfg: &PipelineConfig<T>,
) -> Result<(Dataset<T>, Vec<CollectRecord<T>>)> {
    let corpus = joint_corpus::<T>(&cfg.corpus, plant.n_joints())?;
    let (sources, records) = collect_sources(plant, &corpus, &cfg.collect)?;
    Ok((build(&sources, &cfg.dataset)?, records))
}

/// Trains one network per joint of `dataset`.
pub fn train_on_dataset<T: Real>(
    dataset: &Dataset<T>,
    cfg: &PipelineConfig<T>,
) -> Result<(Vec<Mlp<T>>, Vec<TrainReport<T>>)> {
    let dims = Mlp::<T>::dims_for(&cfg.hidden);
    let results: Vec<(Mlp<T>, TrainReport<T>)> = dataset
        .joints
        .par_iter()
        .map(|joint| {
            let mut model = Mlp::new(&dims, cfg.l2_lambda, cfg.model_seed.wrapping_add(joint.joint_index as u64))?;
            let report = train(&mut model, joint, &cfg.train)?;
            Ok((model, report))
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().unzip())
}

/// Corpus, ILC refinement, dataset and training in one deterministic run.
pub fn train_pipeline<T: Real>(plant: &MultiAxisPlant<T>, cfg: &PipelineConfig<T>) -> Result<TrainedModels<T>> {
    let (dataset, collection) = collect_dataset(plant, cfg)?;
    let (models, reports) = train_on_dataset(&dataset, cfg)?;
    Ok(TrainedModels {
        models,
        dataset,
        reports,
        collection,
    })
}

/// Output-layer retraining of every model on its joint of `dataset`.
pub fn retrain_models<T: Real>(
    models: &[Mlp<T>],
    dataset: &Dataset<T>,
    cfg: &TrainConfig<T>,
) -> Result<(Vec<Mlp<T>>, Vec<TrainReport<T>>)> {
    if models.len() != dataset.joints.len() {
        return Err(Error::ChannelMismatch {
            expected: models.len(),
            actual: dataset.joints.len(),
        });
    }
    let results: Vec<(Mlp<T>, TrainReport<T>)> = models
        .par_iter()
        .zip(&dataset.joints)
        .map(|(m, joint)| {
            let mut model = m.clone();
            let report = retrain_output_layer(&mut model, joint, cfg)?;
            Ok((model, report))
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().unzip())
}
