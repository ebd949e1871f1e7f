use serde::{Deserialize, Serialize};

use super::windows::{WindowPair, HALF_WINDOW};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-joint affine maps between physical windows and network units.
///
/// Inputs: `(x_i - r - input_shift) / input_scale`, where the reference `r`
/// is the anchor sample `x[25]` when `anchor_centered` is set and zero
/// otherwise. Targets: `(y_k - b_k - target_shift) / target_scale`, where
/// the base `b_k` is the desired value at the same sample, `x[25 + k]`,
/// when `residual_target` is set, and `r` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Normalization<T> {
    pub input_shift: T,
    pub input_scale: T,
    pub target_shift: T,
    pub target_scale: T,
    pub anchor_centered: bool,
    pub residual_target: bool,
    /// A scale fitted to constant data was forced to 1.
    pub degenerate: bool,
}

impl<T: Real> Normalization<T> {
    pub fn identity() -> Self {
        Self {
            input_shift: T::zero(),
            input_scale: T::one(),
            target_shift: T::zero(),
            target_scale: T::one(),
            anchor_centered: false,
            residual_target: false,
            degenerate: false,
        }
    }

    /// Fits shifts (means) and scales (largest absolute deviation from the
    /// mean) over `pairs`.
    pub fn fit<'a>(
        pairs: impl IntoIterator<Item = &'a WindowPair<T>>,
        anchor_centered: bool,
        residual_target: bool,
    ) -> Result<Self> {
        let pairs: Vec<&WindowPair<T>> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(Error::Empty("training windows"));
        }
        let mut norm = Self {
            anchor_centered,
            residual_target,
            ..Self::identity()
        };
        let inputs = |p: &WindowPair<T>| {
            let r = norm.reference(&p.x);
            p.x.iter().map(move |v| *v - r).collect::<Vec<_>>()
        };
        let targets = |p: &WindowPair<T>| (0..p.y.len()).map(|k| p.y[k] - norm.base(&p.x, k)).collect::<Vec<_>>();
        let (input_shift, input_spread) = mean_and_spread(pairs.iter().map(|p| inputs(p)))?;
        let (target_shift, target_spread) = mean_and_spread(pairs.iter().map(|p| targets(p)))?;
        let tiny = |spread: T, level: T| spread <= T::epsilon() * (T::one() + level.abs());
        let input_degenerate = tiny(input_spread, input_shift);
        let target_degenerate = tiny(target_spread, target_shift.abs() + input_spread);
        norm.input_shift = input_shift;
        norm.input_scale = if input_degenerate { T::one() } else { input_spread };
        norm.target_shift = target_shift;
        norm.target_scale = if target_degenerate { T::one() } else { target_spread };
        norm.degenerate = input_degenerate || target_degenerate;
        Ok(norm)
    }

    /// Reference offset `r` of a raw input window.
    pub fn reference(&self, x: &[T]) -> T {
        if self.anchor_centered {
            x[HALF_WINDOW]
        } else {
            T::zero()
        }
    }

    fn base(&self, x: &[T], k: usize) -> T {
        if self.residual_target {
            x[HALF_WINDOW + k]
        } else {
            self.reference(x)
        }
    }

    pub fn normalize_input(&self, x: &[T]) -> Vec<T> {
        let r = self.reference(x) + self.input_shift;
        x.iter().map(|v| (*v - r) / self.input_scale).collect()
    }

    pub fn denormalize_input(&self, x_hat: &[T], reference: T) -> Vec<T> {
        let r = reference + self.input_shift;
        x_hat.iter().map(|v| *v * self.input_scale + r).collect()
    }

    /// Target `y` in network units, given its raw input window `x`.
    pub fn normalize_target(&self, x: &[T], y: &[T]) -> Vec<T> {
        (0..y.len())
            .map(|k| (y[k] - self.base(x, k) - self.target_shift) / self.target_scale)
            .collect()
    }

    /// Physical command from a network output and its raw input window.
    pub fn denormalize_target(&self, x: &[T], y_hat: &[T]) -> Vec<T> {
        (0..y_hat.len())
            .map(|k| y_hat[k] * self.target_scale + self.target_shift + self.base(x, k))
            .collect()
    }

    pub fn cast<U: Real>(&self) -> Normalization<U> {
        Normalization {
            input_shift: U::lit(self.input_shift.as_f64()),
            input_scale: U::lit(self.input_scale.as_f64()),
            target_shift: U::lit(self.target_shift.as_f64()),
            target_scale: U::lit(self.target_scale.as_f64()),
            anchor_centered: self.anchor_centered,
            residual_target: self.residual_target,
            degenerate: self.degenerate,
        }
    }

    /// Normalized copy of a pair.
    pub fn apply_pair(&self, pair: &WindowPair<T>) -> WindowPair<T> {
        WindowPair {
            x: self.normalize_input(&pair.x),
            y: self.normalize_target(&pair.x, &pair.y),
            ..pair.clone()
        }
    }
}

fn mean_and_spread<T: Real>(groups: impl Iterator<Item = Vec<T>> + Clone) -> Result<(T, T)> {
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for g in groups.clone() {
        for v in g {
            sum += v.as_f64();
            count += 1;
        }
    }
    let mean = T::lit(sum / count.max(1) as f64);
    let mut spread = T::zero();
    for g in groups {
        for v in g {
            spread = spread.max((v - mean).abs());
        }
    }
    if !(mean.is_finite() && spread.is_finite()) {
        return Err(Error::NonFinite("training windows".into()));
    }
    Ok((mean, spread))
}
