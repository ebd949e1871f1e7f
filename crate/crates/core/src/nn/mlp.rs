use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Normalization, INPUT_LEN, OUTPUT_LEN};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Hidden layout of the default network.
pub const DEFAULT_HIDDEN: [usize; 2] = [100, 100];

/// Fully connected layer `z = W x + b`, `W` stored row-major as
/// `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Layer<T> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
}

impl<T: Real> Layer<T> {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![T::zero(); inputs * outputs],
            biases: vec![T::zero(); outputs],
        }
    }

    pub fn weight(&self, row: usize, col: usize) -> T {
        self.weights[row * self.inputs + col]
    }

    pub fn n_params(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    fn forward_into(&self, x: &[T], z: &mut [T]) {
        for (o, zo) in z.iter_mut().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            *zo = dot(row, x) + self.biases[o];
        }
    }
}

/// Dot product with four independent accumulators so the compiler can
/// vectorize it.
#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
fn axpy<T: Real>(y: &mut [T], alpha: T, x: &[T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

/// Multilayer perceptron with ReLU hidden layers and a linear output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Mlp<T> {
    pub layers: Vec<Layer<T>>,
    /// Coefficient of the squared-weight penalty (biases excluded).
    pub l2_lambda: T,
    /// Constants mapping physical windows to network units; required by
    /// [`Mlp::infer`].
    pub normalization: Option<Normalization<T>>,
    pub joint_index: usize,
}

/// Gradients share the parameter layout.
pub type Gradients<T> = Vec<Layer<T>>;

impl<T: Real> Mlp<T> {
    /// Network with layer sizes `dims` and fan-in scaled uniform weights
    /// `U(-sqrt(6 / fan_in), sqrt(6 / fan_in))`; biases start at zero.
    pub fn new(dims: &[usize], l2_lambda: T, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(dims, l2_lambda)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut model.layers {
            let bound = (6.0 / layer.inputs as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound);
            for w in &mut layer.weights {
                *w = T::lit(dist.sample(&mut rng));
            }
        }
        Ok(model)
    }

    /// `50 -> 100 -> 100 -> 25`.
    pub fn default_architecture(l2_lambda: T, seed: u64) -> Self {
        Self::new(&Self::dims_for(&DEFAULT_HIDDEN), l2_lambda, seed).expect("default dims are valid")
    }

    /// Full layer sizes for a hidden layout between the window sizes.
    pub fn dims_for(hidden: &[usize]) -> Vec<usize> {
        let mut dims = vec![INPUT_LEN];
        dims.extend_from_slice(hidden);
        dims.push(OUTPUT_LEN);
        dims
    }

    pub fn zeros(dims: &[usize], l2_lambda: T) -> Result<Self> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(invalid("dims", "need at least two non-zero layer sizes"));
        }
        if !(l2_lambda.is_finite() && l2_lambda >= T::zero()) {
            return Err(invalid("l2_lambda", "must be finite and non-negative"));
        }
        Ok(Self {
            layers: dims.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
            l2_lambda,
            normalization: None,
            joint_index: 0,
        })
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].inputs];
        dims.extend(self.layers.iter().map(|l| l.outputs));
        dims
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Layer::n_params).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.input_len() {
            return Err(Error::Dimension(format!(
                "input has {} values, network expects {}",
                x.len(),
                self.input_len()
            )));
        }
        Ok(())
    }

    /// Network output for an already normalized input.
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_input(x)?;
        let mut a = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = vec![T::zero(); layer.outputs];
            layer.forward_into(&a, &mut z);
            if i + 1 < self.layers.len() {
                z.iter_mut().for_each(|v| *v = v.max(T::zero()));
            }
            a = z;
        }
        Ok(a)
    }

    /// Physical-unit prediction: normalizes `x`, runs the network and maps
    /// the output back.
    pub fn infer(&self, x: &[T]) -> Result<Vec<T>> {
        let norm = self.normalization.as_ref().ok_or_else(|| {
            invalid("normalization", "model has no normalization constants; train it on a dataset first")
        })?;
        self.check_input(x)?;
        let out = self.forward(&norm.normalize_input(x))?;
        Ok(norm.denormalize_target(x, &out))
    }

    /// Mean squared error over every output of the batch plus
    /// `l2_lambda * sum(W^2)`, and its gradient.
    pub fn loss_and_grad(&self, inputs: &[&[T]], targets: &[&[T]]) -> Result<(T, Gradients<T>)> {
        if inputs.is_empty() {
            return Err(Error::Empty("batch"));
        }
        if inputs.len() != targets.len() {
            return Err(Error::LengthMismatch {
                what: "batch targets",
                expected: inputs.len(),
                actual: targets.len(),
            });
        }
        let n_layers = self.layers.len();
        let out_len = self.output_len();
        let mut grads: Gradients<T> = self.layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect();
        let norm = T::one() / T::of_usize(inputs.len() * out_len);
        let two = T::lit(2.0);
        let mut data_loss = T::zero();
        // activations[0] is the input, activations[i + 1] the post-activation of layer i
        let mut activations: Vec<Vec<T>> = self.dims().iter().map(|&d| vec![T::zero(); d]).collect();
        let mut deltas: Vec<Vec<T>> = self.layers.iter().map(|l| vec![T::zero(); l.outputs]).collect();
        for (s, (x, y)) in inputs.iter().zip(targets).enumerate() {
            self.check_input(x)?;
            if y.len() != out_len {
                return Err(Error::Dimension(format!(
                    "target {s} has {} values, network outputs {out_len}",
                    y.len()
                )));
            }
            activations[0].copy_from_slice(x);
            for (i, layer) in self.layers.iter().enumerate() {
                let (prev, next) = activations.split_at_mut(i + 1);
                let z = &mut next[0];
                layer.forward_into(&prev[i], z);
                if let Some(k) = z.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(format!(
                        "pre-activation of layer {i}, unit {k}, batch sample {s}"
                    )));
                }
                if i + 1 < n_layers {
                    z.iter_mut().for_each(|v| *v = v.max(T::zero()));
                }
            }
            let out = &activations[n_layers];
            let last = &mut deltas[n_layers - 1];
            for k in 0..out_len {
                let r = out[k] - y[k];
                data_loss += r * r;
                last[k] = two * r * norm;
            }
            for i in (0..n_layers).rev() {
                let layer = &self.layers[i];
                let input = &activations[i];
                let (lower, upper) = deltas.split_at_mut(i);
                let delta = &upper[0];
                let grad = &mut grads[i];
                for (o, d) in delta.iter().enumerate() {
                    if *d != T::zero() {
                        axpy(&mut grad.weights[o * layer.inputs..(o + 1) * layer.inputs], *d, input);
                        grad.biases[o] += *d;
                    }
                }
                if i > 0 {
                    let below = &mut lower[i - 1];
                    below.iter_mut().for_each(|v| *v = T::zero());
                    for (o, d) in delta.iter().enumerate() {
                        if *d != T::zero() {
                            axpy(below, *d, &layer.weights[o * layer.inputs..(o + 1) * layer.inputs]);
                        }
                    }
                    // ReLU derivative: zero where the unit was inactive
                    for (b, a) in below.iter_mut().zip(&activations[i]) {
                        if *a <= T::zero() {
                            *b = T::zero();
                        }
                    }
                }
            }
        }
        let mut loss = data_loss * norm;
        if self.l2_lambda > T::zero() {
            let mut penalty = T::zero();
            for (layer, grad) in self.layers.iter().zip(grads.iter_mut()) {
                for (w, g) in layer.weights.iter().zip(grad.weights.iter_mut()) {
                    penalty += *w * *w;
                    *g += two * self.l2_lambda * *w;
                }
            }
            loss += self.l2_lambda * penalty;
        }
        if !loss.is_finite() {
            return Err(Error::NonFinite("batch loss".into()));
        }
        Ok((loss, grads))
    }

    /// Mean squared error of the batch, without the penalty.
    pub fn mse(&self, inputs: &[&[T]], targets: &[&[T]]) -> Result<T> {
        if inputs.is_empty() {
            return Err(Error::Empty("batch"));
        }
        let mut total = T::zero();
        let mut count = 0usize;
        for (x, y) in inputs.iter().zip(targets) {
            let out = self.forward(x)?;
            for (o, t) in out.iter().zip(y.iter()) {
                total += (*o - *t) * (*o - *t);
            }
            count += out.len();
        }
        Ok(total / T::of_usize(count))
    }
}
