use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::mlp::{Layer, Mlp};
use crate::dataset::{JointDataset, Normalization, Subset, WindowPair};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct TrainConfig<T> {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: T,
    /// Learning rate multiplier applied after every epoch.
    pub lr_decay: T,
    pub seed: u64,
    /// Per-layer flags; a set flag keeps that layer's parameters fixed.
    /// Missing entries mean trainable.
    pub freeze_mask: Vec<bool>,
    /// Stop after this many epochs without a new best validation loss; the
    /// best parameters are restored. `None` trains every epoch.
    pub patience: Option<usize>,
    pub adam: AdamConfig<T>,
}

impl<T: Real> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            batch_size: 256,
            epochs: 200,
            learning_rate: T::lit(1e-3),
            lr_decay: T::one(),
            seed: 0,
            freeze_mask: Vec::new(),
            patience: Some(20),
            adam: AdamConfig::default(),
        }
    }
}

impl<T: Real> TrainConfig<T> {
    pub fn validate(&self, n_layers: usize) -> Result<()> {
        if self.batch_size == 0 {
            return Err(invalid("batch_size", "must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(invalid("epochs", "must be at least 1"));
        }
        if !(self.learning_rate > T::zero() && self.learning_rate.is_finite()) {
            return Err(invalid("learning_rate", "must be positive"));
        }
        if !(self.lr_decay > T::zero() && self.lr_decay <= T::one()) {
            return Err(invalid("lr_decay", "must lie in (0, 1]"));
        }
        if self.freeze_mask.len() > n_layers {
            return Err(invalid("freeze_mask", format!("has {} entries for {n_layers} layers", self.freeze_mask.len())));
        }
        if (0..n_layers).all(|i| self.freeze_mask.get(i).copied().unwrap_or(false)) {
            return Err(invalid("freeze_mask", "at least one layer must stay trainable"));
        }
        if self.patience == Some(0) {
            return Err(invalid("patience", "must be at least 1"));
        }
        Ok(())
    }
}

/// Per-epoch losses in physical units (deg^2, penalty excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TrainReport<T> {
    pub train_mse: Vec<T>,
    /// Empty when the dataset has no validation split.
    pub validation_mse: Vec<T>,
    /// Epoch (0-based) whose parameters were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// Fits `model` to the train split of `data`, adopting the dataset's
/// normalization.
pub fn train<T: Real>(model: &mut Mlp<T>, data: &JointDataset<T>, cfg: &TrainConfig<T>) -> Result<TrainReport<T>> {
    model.normalization = Some(data.normalization);
    model.joint_index = data.joint_index;
    fit(model, data, data.normalization, cfg)
}

/// Refits only the output layer on new data, keeping the hidden layers and
/// the normalization the model was trained with.
pub fn retrain_output_layer<T: Real>(
    model: &mut Mlp<T>,
    data: &JointDataset<T>,
    cfg: &TrainConfig<T>,
) -> Result<TrainReport<T>> {
    let norm = model.normalization.ok_or_else(|| {
        invalid("normalization", "retraining needs a model trained on a dataset")
    })?;
    let n = model.layers.len();
    let cfg = TrainConfig {
        freeze_mask: (0..n).map(|i| i + 1 < n).collect(),
        ..cfg.clone()
    };
    fit(model, data, norm, &cfg)
}

struct Normalized<T> {
    x: Vec<Vec<T>>,
    y: Vec<Vec<T>>,
}

impl<T: Real> Normalized<T> {
    fn new<'a>(pairs: impl Iterator<Item = &'a WindowPair<T>>, norm: &Normalization<T>) -> Self {
        let (x, y) = pairs
            .map(|p| {
                let q = norm.apply_pair(p);
                (q.x, q.y)
            })
            .unzip();
        Self { x, y }
    }

    fn refs(&self, idx: &[usize]) -> (Vec<&[T]>, Vec<&[T]>) {
        idx.iter().map(|&i| (self.x[i].as_slice(), self.y[i].as_slice())).unzip()
    }

    fn all(&self) -> (Vec<&[T]>, Vec<&[T]>) {
        (self.x.iter().map(Vec::as_slice).collect(), self.y.iter().map(Vec::as_slice).collect())
    }
}

fn fit<T: Real>(
    model: &mut Mlp<T>,
    data: &JointDataset<T>,
    norm: Normalization<T>,
    cfg: &TrainConfig<T>,
) -> Result<TrainReport<T>> {
    cfg.validate(model.layers.len())?;
    if data.split.train.is_empty() {
        return Err(Error::Empty("train split"));
    }
    let train = Normalized::new(data.subset(Subset::Train), &norm);
    let validation = Normalized::new(data.subset(Subset::Validation), &norm);
    let to_physical = norm.target_scale * norm.target_scale;
    let frozen: Vec<bool> = (0..model.layers.len())
        .map(|i| cfg.freeze_mask.get(i).copied().unwrap_or(false))
        .collect();

    let mut state = AdamState::new(&model.layers, cfg.adam)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train.x.len()).collect();
    let mut lr = cfg.learning_rate;
    let mut report = TrainReport {
        train_mse: Vec::new(),
        validation_mse: Vec::new(),
        best_epoch: 0,
        stopped_early: false,
    };
    let mut best: Option<(T, Vec<Layer<T>>)> = None;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let (xs, ys) = train.refs(batch);
            let (_, grads) = model.loss_and_grad(&xs, &ys).map_err(|e| Error::Diverged {
                epoch,
                detail: e.to_string(),
            })?;
            adam_step(&mut model.layers, &grads, &mut state, lr, &frozen)?;
        }
        if !model.is_finite() {
            return Err(Error::Diverged {
                epoch,
                detail: "parameters became non-finite".into(),
            });
        }
        lr *= cfg.lr_decay;

        let (xs, ys) = train.all();
        let train_mse = model.mse(&xs, &ys)? * to_physical;
        let monitored = if validation.x.is_empty() {
            train_mse
        } else {
            let (xs, ys) = validation.all();
            let v = model.mse(&xs, &ys)? * to_physical;
            report.validation_mse.push(v);
            v
        };
        report.train_mse.push(train_mse);
        if !monitored.is_finite() {
            return Err(Error::Diverged {
                epoch,
                detail: format!("loss {}", monitored),
            });
        }
        if best.as_ref().map_or(true, |(b, _)| monitored < *b) {
            best = Some((monitored, model.layers.clone()));
            report.best_epoch = epoch;
        } else if let Some(p) = cfg.patience {
            if epoch - report.best_epoch >= p {
                report.stopped_early = true;
                break;
            }
        }
    }
    if cfg.patience.is_some() {
        if let Some((_, layers)) = best {
            model.layers = layers;
        }
    } else {
        report.best_epoch = report.train_mse.len() - 1;
    }
    Ok(report)
}
