use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::normalize::Normalization;
use super::windows::{extract_windows, WindowPair, HALF_WINDOW};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// A desired trajectory and the command that tracks it on one joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SourcePair<T> {
    pub joint_index: usize,
    pub source_id: usize,
    pub q_d: Vec<T>,
    pub u: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Every window of a source trajectory lands in the same split.
    ByTrajectory,
    ByWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

impl SplitFractions {
    pub fn new(train: f64, validation: f64, test: f64) -> Self {
        Self { train, validation, test }
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(invalid("split", "fractions must be finite and non-negative"));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(invalid("split", "fractions must sum to 1"));
        }
        if self.train <= 0.0 {
            return Err(invalid("split", "train fraction must be positive"));
        }
        Ok(())
    }

    /// `(train, validation, test)` counts for `n` items: validation and test
    /// are floored, the remainder goes to train.
    pub fn counts(&self, n: usize) -> (usize, usize, usize) {
        let part = |f: f64| ((f * n as f64) + 1e-9).floor() as usize;
        let validation = part(self.validation);
        let test = part(self.test);
        (n - validation - test, validation, test)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildConfig {
    pub stride: usize,
    pub seed: u64,
    pub split: SplitFractions,
    pub mode: SplitMode,
    /// Normalize each input window relative to its anchor sample.
    pub anchor_centered: bool,
    /// Learn the command's deviation from the desired trajectory.
    pub residual_target: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            stride: HALF_WINDOW,
            seed: 0,
            split: SplitFractions::default(),
            mode: SplitMode::ByTrajectory,
            anchor_centered: true,
            residual_target: true,
        }
    }
}

/// Indices into a joint's pair list. Disjoint and exhaustive.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subset {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn indices(&self, subset: Subset) -> &[usize] {
        match subset {
            Subset::Train => &self.train,
            Subset::Validation => &self.validation,
            Subset::Test => &self.test,
        }
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Windows of one joint with their split and normalization. Pairs are kept
/// in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct JointDataset<T> {
    pub joint_index: usize,
    pub pairs: Vec<WindowPair<T>>,
    pub split: Split,
    pub normalization: Normalization<T>,
}

impl<T: Real> JointDataset<T> {
    pub fn subset(&self, subset: Subset) -> impl Iterator<Item = &WindowPair<T>> + '_ {
        self.split.indices(subset).iter().map(move |&i| &self.pairs[i])
    }

    /// Normalized copies of the pairs in `subset`.
    pub fn normalized(&self, subset: Subset) -> Vec<WindowPair<T>> {
        self.subset(subset).map(|p| self.normalization.apply_pair(p)).collect()
    }

    /// Refits the normalization on the train split only.
    pub fn refit_normalization(&mut self) -> Result<()> {
        let n = self.normalization;
        self.normalization = Normalization::fit(self.subset(Subset::Train), n.anchor_centered, n.residual_target)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Dataset<T> {
    pub config: BuildConfig,
    /// Sorted by joint index.
    pub joints: Vec<JointDataset<T>>,
}

impl<T: Real> Dataset<T> {
    pub fn joint(&self, joint_index: usize) -> Option<&JointDataset<T>> {
        self.joints.iter().find(|j| j.joint_index == joint_index)
    }

    pub fn total_pairs(&self) -> usize {
        self.joints.iter().map(|j| j.pairs.len()).sum()
    }
}

/// Windows every source, groups by joint, splits under `cfg.seed` and fits
/// per-joint normalization on the train split.
pub fn build<T: Real>(sources: &[SourcePair<T>], cfg: &BuildConfig) -> Result<Dataset<T>> {
    if sources.is_empty() {
        return Err(Error::Empty("dataset sources"));
    }
    cfg.split.validate()?;
    let mut grouped: BTreeMap<usize, Vec<WindowPair<T>>> = BTreeMap::new();
    for src in sources {
        if !src.q_d.iter().chain(&src.u).all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "source {} of joint {}",
                src.source_id, src.joint_index
            )));
        }
        let pairs = extract_windows(&src.q_d, &src.u, cfg.stride)?;
        grouped.entry(src.joint_index).or_default().extend(pairs.into_iter().map(|p| WindowPair {
            joint_index: src.joint_index,
            source_id: src.source_id,
            ..p
        }));
    }
    let joints = grouped
        .into_iter()
        .map(|(joint_index, pairs)| {
            let split = split_pairs(&pairs, cfg, joint_index);
            let mut joint = JointDataset {
                joint_index,
                pairs,
                split,
                normalization: Normalization {
                    anchor_centered: cfg.anchor_centered,
                    residual_target: cfg.residual_target,
                    ..Normalization::identity()
                },
            };
            joint.refit_normalization()?;
            Ok(joint)
        })
        .collect::<Result<_>>()?;
    Ok(Dataset { config: *cfg, joints })
}

/// Recomputes every joint's constants from its train split.
pub fn normalize<T: Real>(mut ds: Dataset<T>) -> Result<Dataset<T>> {
    for joint in &mut ds.joints {
        joint.refit_normalization()?;
    }
    Ok(ds)
}

fn joint_rng(seed: u64, joint_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(joint_index as u64);
    rng
}

fn split_pairs<T>(pairs: &[WindowPair<T>], cfg: &BuildConfig, joint_index: usize) -> Split {
    let mut rng = joint_rng(cfg.seed, joint_index);
    let mut split = Split::default();
    match cfg.mode {
        SplitMode::ByWindow => {
            let mut order: Vec<usize> = (0..pairs.len()).collect();
            order.shuffle(&mut rng);
            let (train, validation, _) = cfg.split.counts(order.len());
            split.train = order[..train].to_vec();
            split.validation = order[train..train + validation].to_vec();
            split.test = order[train + validation..].to_vec();
        }
        SplitMode::ByTrajectory => {
            let mut sources: Vec<usize> = pairs.iter().map(|p| p.source_id).collect();
            sources.sort_unstable();
            sources.dedup();
            sources.shuffle(&mut rng);
            let (train, validation, _) = cfg.split.counts(sources.len());
            let mut bucket = BTreeMap::new();
            for (rank, s) in sources.iter().enumerate() {
                let which = if rank < train {
                    Subset::Train
                } else if rank < train + validation {
                    Subset::Validation
                } else {
                    Subset::Test
                };
                bucket.insert(*s, which);
            }
            for (i, p) in pairs.iter().enumerate() {
                match bucket[&p.source_id] {
                    Subset::Train => split.train.push(i),
                    Subset::Validation => split.validation.push(i),
                    Subset::Test => split.test.push(i),
                }
            }
        }
    }
    for list in [&mut split.train, &mut split.validation, &mut split.test] {
        list.sort_unstable();
    }
    split
}
