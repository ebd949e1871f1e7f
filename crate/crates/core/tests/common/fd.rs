//! Central finite differences of the MLP loss evaluated in double-double
//! arithmetic (about 32 significant digits), so the difference quotient at a
//! 1e-6 step is not swamped by cancellation.
//!
//! A perturbed parameter only changes one unit of its layer; the change is
//! pushed forward through the later layers instead of re-running the whole
//! network. The evaluator reads raw weights and shares no code with the
//! library's forward or backward pass.

use nnilc::nn::Mlp;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = two_sum(s, e + t);
        Dd::renorm(s, e + f)
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::renorm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    pub fn mul_f(self, v: f64) -> Dd {
        self.mul(Dd::from(v))
    }

    pub fn div_f(self, v: f64) -> Dd {
        let q = self.hi / v;
        // one correction step: r = self - q v
        let r = self.sub(Dd::from(q).mul_f(v));
        Dd::renorm(q, r.hi / v)
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }

    pub fn relu(self) -> Dd {
        if self.hi > 0.0 || (self.hi == 0.0 && self.lo > 0.0) {
            self
        } else {
            Dd::ZERO
        }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Pre-activations and activations of every layer for one sample.
struct Trace {
    z: Vec<Vec<Dd>>,
    a: Vec<Vec<Dd>>,
}

fn trace(model: &Mlp<f64>, x: &[f64]) -> Trace {
    let n = model.layers.len();
    let mut a = vec![x.iter().map(|v| Dd::from(*v)).collect::<Vec<_>>()];
    let mut z = Vec::new();
    for (li, l) in model.layers.iter().enumerate() {
        let prev = &a[li];
        let zl: Vec<Dd> = (0..l.outputs)
            .map(|o| {
                let mut s = Dd::from(l.biases[o]);
                for i in 0..l.inputs {
                    s = s.add(prev[i].mul_f(l.weights[o * l.inputs + i]));
                }
                s
            })
            .collect();
        let al = if li + 1 < n { zl.iter().map(|v| v.relu()).collect() } else { zl.clone() };
        z.push(zl);
        a.push(al);
    }
    Trace { z, a }
}

/// Outputs after adding `dz` to unit `unit` of layer `layer`.
fn perturbed_outputs(model: &Mlp<f64>, t: &Trace, layer: usize, unit: usize, dz: Dd) -> Vec<Dd> {
    let n = model.layers.len();
    let mut z = t.z[layer].clone();
    z[unit] = z[unit].add(dz);
    if layer + 1 == n {
        return z;
    }
    let mut delta: Vec<Dd> = z
        .iter()
        .zip(&t.a[layer + 1])
        .map(|(zi, ai)| zi.relu().sub(*ai))
        .collect();
    for li in layer + 1..n {
        let l = &model.layers[li];
        let mut zl = t.z[li].clone();
        for (i, d) in delta.iter().enumerate() {
            if d.is_zero() {
                continue;
            }
            for (o, zo) in zl.iter_mut().enumerate() {
                *zo = zo.add(d.mul_f(l.weights[o * l.inputs + i]));
            }
        }
        if li + 1 == n {
            return zl;
        }
        delta = zl.iter().zip(&t.a[li + 1]).map(|(zi, ai)| zi.relu().sub(*ai)).collect();
    }
    unreachable!("loop returns at the output layer")
}

/// Numeric gradient of mean squared error plus `l2 * sum(W^2)`, laid out as
/// `[layer][weights..., biases...]`.
pub fn central_difference_gradient(model: &Mlp<f64>, xs: &[Vec<f64>], ys: &[Vec<f64>], h: f64) -> Vec<Vec<f64>> {
    let traces: Vec<Trace> = xs.iter().map(|x| trace(model, x)).collect();
    let out_len = model.layers.last().unwrap().outputs;
    let count = (xs.len() * out_len) as f64;
    let sq_err = |outs: &[Dd], y: &[f64]| {
        outs.iter()
            .zip(y)
            .fold(Dd::ZERO, |acc, (o, t)| {
                let r = o.sub(Dd::from(*t));
                acc.add(r.mul(r))
            })
    };
    // loss change of one sample when unit (layer, unit) moves by dz
    let sample_delta = |s: usize, layer: usize, unit: usize, dz: Dd| {
        let base = sq_err(traces[s].a.last().unwrap(), &ys[s]);
        let out = perturbed_outputs(model, &traces[s], layer, unit, dz);
        sq_err(&out, &ys[s]).sub(base)
    };
    let mut grads = Vec::new();
    for (li, l) in model.layers.iter().enumerate() {
        let mut g = Vec::with_capacity(l.weights.len() + l.biases.len());
        let n_weights = l.weights.len();
        for k in 0..n_weights + l.biases.len() {
            let (unit, input) = if k < n_weights { (k / l.inputs, Some(k % l.inputs)) } else { (k - n_weights, None) };
            let base = if k < n_weights { l.weights[k] } else { l.biases[unit] };
            // exact representable steps actually taken
            let up = Dd::from(base + h).sub(Dd::from(base));
            let down = Dd::from(base).sub(Dd::from(base - h));
            let mut diff = Dd::ZERO;
            for s in 0..xs.len() {
                let scale = input.map_or(Dd::from(1.0), |i| traces[s].a[li][i]);
                let plus = sample_delta(s, li, unit, up.mul(scale));
                let minus = sample_delta(s, li, unit, down.neg().mul(scale));
                diff = diff.add(plus.sub(minus));
            }
            diff = diff.div_f(count);
            if k < n_weights {
                // l2 * ((w + up)^2 - (w - down)^2)
                let w = Dd::from(base);
                let hi = w.add(up);
                let lo = w.sub(down);
                diff = diff.add(hi.mul(hi).sub(lo.mul(lo)).mul_f(model.l2_lambda));
            }
            let step = up.add(down);
            g.push(diff.to_f64() / step.to_f64());
        }
        grads.push(g);
    }
    grads
}

/// Largest per-parameter relative discrepancy `|a - n| / max(|a|, |n|)`;
/// entries where both vanish are skipped.
pub fn worst_relative_error(analytic: &[nnilc::nn::Layer<f64>], numeric: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, n) in analytic.iter().zip(numeric) {
        for (x, y) in a.weights.iter().chain(&a.biases).zip(n) {
            let scale = x.abs().max(y.abs());
            if scale > 0.0 {
                worst = worst.max((x - y).abs() / scale);
            }
        }
    }
    worst
}

/// True when every hidden pre-activation of `x` is at least `margin` away
/// from the ReLU kink.
pub fn clear_of_kinks(model: &Mlp<f64>, x: &[f64], margin: f64) -> bool {
    let t = trace(model, x);
    let n = model.layers.len();
    t.z[..n - 1].iter().all(|z| z.iter().all(|v| v.to_f64().abs() > margin))
}
