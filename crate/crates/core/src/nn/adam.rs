use serde::{Deserialize, Serialize};

use super::mlp::Layer;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Adaptive moment estimation hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct AdamConfig<T> {
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Real> Default for AdamConfig<T> {
    fn default() -> Self {
        Self {
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            epsilon: T::lit(1e-8),
        }
    }
}

/// First and second moments per parameter, laid out like the layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AdamState<T> {
    pub config: AdamConfig<T>,
    pub first: Vec<Layer<T>>,
    pub second: Vec<Layer<T>>,
    pub step: u64,
}

impl<T: Real> AdamState<T> {
    pub fn new(layers: &[Layer<T>], config: AdamConfig<T>) -> Result<Self> {
        let in_unit = |v: T| v >= T::zero() && v < T::one();
        if !(in_unit(config.beta1) && in_unit(config.beta2)) {
            return Err(invalid("adam", "decay rates must lie in [0, 1)"));
        }
        if !(config.epsilon > T::zero()) {
            return Err(invalid("adam", "epsilon must be positive"));
        }
        let zeros = || layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect();
        Ok(Self {
            config,
            first: zeros(),
            second: zeros(),
            step: 0,
        })
    }
}

/// One bias-corrected Adam update with learning rate `lr`. Layers whose
/// `frozen` flag is set keep their parameters and moments untouched.
pub fn adam_step<T: Real>(
    params: &mut [Layer<T>],
    grads: &[Layer<T>],
    state: &mut AdamState<T>,
    lr: T,
    frozen: &[bool],
) -> Result<()> {
    let shapes_match = |a: &[Layer<T>]| {
        a.len() == params.len()
            && a.iter()
                .zip(params.iter())
                .all(|(x, p)| x.weights.len() == p.weights.len() && x.biases.len() == p.biases.len())
    };
    if !(shapes_match(grads) && shapes_match(&state.first) && shapes_match(&state.second)) {
        return Err(Error::Dimension("gradient or optimizer state does not match parameters".into()));
    }
    state.step += 1;
    let AdamConfig { beta1, beta2, epsilon } = state.config;
    let t = i32::try_from(state.step).unwrap_or(i32::MAX);
    let c1 = T::one() - beta1.powi(t);
    let c2 = T::one() - beta2.powi(t);
    for (i, layer) in params.iter_mut().enumerate() {
        if frozen.get(i).copied().unwrap_or(false) {
            continue;
        }
        let g = &grads[i];
        let m = &mut state.first[i];
        let v = &mut state.second[i];
        let update = |p: &mut [T], g: &[T], m: &mut [T], v: &mut [T]| {
            for k in 0..p.len() {
                m[k] = beta1 * m[k] + (T::one() - beta1) * g[k];
                v[k] = beta2 * v[k] + (T::one() - beta2) * g[k] * g[k];
                let m_hat = m[k] / c1;
                let v_hat = v[k] / c2;
                p[k] -= lr * m_hat / (v_hat.sqrt() + epsilon);
            }
        };
        update(&mut layer.weights, &g.weights, &mut m.weights, &mut v.weights);
        update(&mut layer.biases, &g.biases, &mut m.biases, &mut v.biases);
    }
    Ok(())
}
