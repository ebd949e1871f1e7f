use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::linear::{ContinuousStateSpace, DiscreteStateSpace, LinearModel};
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::signal::SampledTrajectory;

/// Input-side nonlinearity: a rate limiter followed by a smooth compression of
/// the per-sample increment, `delta * knee / (knee + |delta|)`.
///
/// Larger and faster commands are followed with reduced gain and more lag;
/// held commands are reached exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NonlinearityParams<T> {
    /// Increment (deg per sample) compressed to half gain; `None` disables.
    #[serde(default)]
    pub knee: Option<T>,
    /// Maximum command rate (deg/s); `None` disables.
    #[serde(default)]
    pub rate_limit: Option<T>,
}

impl<T: Real> NonlinearityParams<T> {
    pub fn disabled() -> Self {
        Self {
            knee: None,
            rate_limit: None,
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.knee.is_some() || self.rate_limit.is_some()
    }

    fn validate(&self) -> Result<()> {
        if let Some(k) = self.knee {
            if !(k.is_finite() && k > T::zero()) {
                return Err(invalid("nonlin.knee", "must be positive and finite"));
            }
        }
        if let Some(r) = self.rate_limit {
            if !(r.is_finite() && r > T::zero()) {
                return Err(invalid("nonlin.rate_limit", "must be positive and finite"));
            }
        }
        Ok(())
    }
}

impl<T: Real> Default for NonlinearityParams<T> {
    fn default() -> Self {
        Self {
            knee: Some(T::lit(5.0)),
            rate_limit: Some(T::lit(250.0)),
        }
    }
}

/// Output shaping with unity DC gain and gain `gain` at high frequency:
///
/// ```text
/// F(s) = 1 + (gain - 1) * s^2 / (s^2 + 2 damping corner s + corner^2)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GainShaping<T> {
    pub gain: T,
    /// Transition frequency (rad/s).
    pub corner: T,
    pub damping: T,
}

impl<T: Real> GainShaping<T> {
    pub fn state_space(&self) -> ContinuousStateSpace<T> {
        let (g, b, z) = (self.gain, self.corner, self.damping);
        let two = T::lit(2.0);
        ContinuousStateSpace {
            a: Matrix::from_rows(&[
                vec![T::zero(), T::one()],
                vec![-(b * b), -two * z * b],
            ]),
            b: vec![T::zero(), T::one()],
            c: vec![(T::one() - g) * b * b, (T::one() - g) * two * z * b],
            d: g,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("perturbation.gain_scale", self.gain),
            ("perturbation.gain_corner", self.corner),
            ("perturbation.gain_damping", self.damping),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name.to_string()));
            }
        }
        if self.gain <= T::zero() {
            return Err(invalid("perturbation.gain_scale", "must be positive"));
        }
        Ok(())
    }
}

/// Static description of one joint's inner loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PlantConfig<T> {
    pub linear: LinearModel<T>,
    pub delay_samples: usize,
    /// Output quantization step (deg); zero disables.
    pub quant_step: T,
    pub nonlin: NonlinearityParams<T>,
    /// High-rate gain shaping, present on perturbed variants.
    #[serde(default)]
    pub shaping: Option<GainShaping<T>>,
}

impl<T: Real> Default for PlantConfig<T> {
    fn default() -> Self {
        Self {
            linear: LinearModel::default(),
            delay_samples: 6,
            quant_step: T::zero(),
            nonlin: NonlinearityParams::default(),
            shaping: None,
        }
    }
}

impl<T: Real> PlantConfig<T> {
    /// Linear time-invariant configuration: no nonlinearity, no quantization.
    pub fn linear(linear: LinearModel<T>, delay_samples: usize) -> Self {
        Self {
            linear,
            delay_samples,
            quant_step: T::zero(),
            nonlin: NonlinearityParams::disabled(),
            shaping: None,
        }
    }

    pub fn is_lti(&self) -> bool {
        !self.nonlin.is_enabled() && self.quant_step == T::zero()
    }
}

/// The simulated inner loop of one joint: transport delay, input
/// nonlinearity, discretized linear dynamics and output quantization.
///
/// A `PlantModel` is immutable; every run starts from an explicit
/// [`PlantState`], so runs are deterministic and instances can be shared
/// across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel<T> {
    config: PlantConfig<T>,
    system: DiscreteStateSpace<T>,
}

impl<T: Real> PlantModel<T> {
    pub fn new(config: PlantConfig<T>) -> Result<Self> {
        config.linear.validate()?;
        config.nonlin.validate()?;
        if !(config.quant_step.is_finite() && config.quant_step >= T::zero()) {
            return Err(invalid("quant_step", "must be finite and non-negative"));
        }
        let mut ct = config.linear.state_space();
        if let Some(shaping) = &config.shaping {
            shaping.validate()?;
            ct = ct.series(&shaping.state_space());
        }
        let system = ct.zoh(config.linear.dt);
        if !system.ad.is_finite() {
            return Err(Error::NonFinite("discretized plant".into()));
        }
        if !system.is_schur_stable() {
            return Err(Error::Unstable(
                "discretized plant has a pole on or outside the unit circle".into(),
            ));
        }
        Ok(Self { config, system })
    }

    pub fn config(&self) -> &PlantConfig<T> {
        &self.config
    }

    pub fn system(&self) -> &DiscreteStateSpace<T> {
        &self.system
    }

    pub fn dt(&self) -> T {
        self.config.linear.dt
    }

    pub fn delay_samples(&self) -> usize {
        self.config.delay_samples
    }

    /// State of a plant holding position `q0` with a settled command history.
    pub fn hold_state(&self, q0: T) -> PlantState<T> {
        PlantState {
            reference: q0,
            deviation: vec![T::zero(); self.system.order()],
            pending: std::iter::repeat(q0).take(self.config.delay_samples).collect(),
            effective: q0,
        }
    }

    /// Simulates from a plant holding `q0`.
    pub fn run(&self, u: &SampledTrajectory<T>, q0: T) -> Result<SampledTrajectory<T>> {
        let mut state = self.hold_state(q0);
        self.run_from(u, &mut state)
    }

    /// Simulates from `state`, leaving it at the end-of-run state.
    pub fn run_from(
        &self,
        u: &SampledTrajectory<T>,
        state: &mut PlantState<T>,
    ) -> Result<SampledTrajectory<T>> {
        if u.is_empty() {
            return Err(Error::Empty("plant input trajectory"));
        }
        let tol = T::lit(1e-9) * self.dt();
        if (u.dt - self.dt()).abs() > tol {
            return Err(invalid(
                "dt",
                format!("input sampled at {} s, plant at {} s", u.dt, self.dt()),
            ));
        }
        if !u.is_finite() {
            return Err(Error::NonFinite("plant input trajectory".into()));
        }
        if state.deviation.len() != self.system.order()
            || state.pending.len() != self.config.delay_samples
        {
            return Err(Error::Dimension("plant state does not match plant model".into()));
        }
        let y = u.values.iter().map(|&uk| self.step(state, uk)).collect();
        Ok(SampledTrajectory::new(u.dt, y))
    }

    /// Advances one sample, returning the measured output for this sample.
    pub fn step(&self, state: &mut PlantState<T>, command: T) -> T {
        let delayed = if self.config.delay_samples == 0 {
            command
        } else {
            state.pending.push_back(command);
            state.pending.pop_front().expect("delay line is non-empty")
        };

        let effective = if self.config.nonlin.is_enabled() {
            let mut delta = delayed - state.effective;
            if let Some(rate) = self.config.nonlin.rate_limit {
                let max_step = rate * self.dt();
                delta = delta.max(-max_step).min(max_step);
            }
            if let Some(knee) = self.config.nonlin.knee {
                delta = delta * knee / (knee + delta.abs());
            }
            state.effective + delta
        } else {
            delayed
        };
        state.effective = effective;

        let sys = &self.system;
        let input = effective - state.reference;
        let y_dev = crate::scalar::dot(&sys.c, &state.deviation) + sys.d * input;
        let next = sys.ad.mul_vec(&state.deviation);
        for (i, x) in state.deviation.iter_mut().enumerate() {
            *x = next[i] + sys.bd[i] * input;
        }
        let y = state.reference + y_dev;
        quantize(y, self.config.quant_step)
    }

    /// The linear part as a lifted operator (delay included).
    pub fn lifted(&self) -> LiftedModel<T> {
        LiftedModel {
            system: self.system.clone(),
            delay_samples: self.config.delay_samples,
        }
    }
}

fn quantize<T: Real>(y: T, step: T) -> T {
    if step > T::zero() {
        (y / step).round() * step
    } else {
        y
    }
}

/// Runtime state. The linear states are stored as deviations from the held
/// `reference` position, so a plant holding still reproduces its position
/// exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState<T> {
    pub reference: T,
    pub deviation: Vec<T>,
    /// Commands in flight through the transport delay, oldest first.
    pub pending: VecDeque<T>,
    /// Command after the nonlinearity at the previous sample.
    pub effective: T,
}

/// Discrete linear dynamics plus a pure input delay, viewed as a
/// finite-horizon operator.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedModel<T> {
    pub system: DiscreteStateSpace<T>,
    pub delay_samples: usize,
}

impl<T: Real> LiftedModel<T> {
    pub fn from_linear(model: &LinearModel<T>, delay_samples: usize) -> Result<Self> {
        Ok(Self {
            system: super::linear::discretize(model)?,
            delay_samples,
        })
    }

    /// Markov parameters `h[k]`: response at sample `k` to a unit pulse at 0.
    pub fn markov(&self, len: usize) -> Vec<T> {
        let d = self.delay_samples;
        let h = self.system.pulse_response(len.saturating_sub(d));
        let mut out = vec![T::zero(); len];
        out[d.min(len)..].copy_from_slice(&h);
        out
    }

    /// Zero-state forward response `G u`.
    pub fn apply(&self, u: &[T]) -> Vec<T> {
        let sys = &self.system;
        let d = self.delay_samples;
        let mut x = vec![T::zero(); sys.order()];
        let mut y = Vec::with_capacity(u.len());
        for k in 0..u.len() {
            let uk = if k >= d { u[k - d] } else { T::zero() };
            y.push(crate::scalar::dot(&sys.c, &x) + sys.d * uk);
            let ax = sys.ad.mul_vec(&x);
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = ax[i] + sys.bd[i] * uk;
            }
        }
        y
    }

    /// Adjoint `G^T e` by backward-in-time costate propagation.
    ///
    /// With costate `p[j] = Ad^T p[j+1] + C^T e[j]`, entry `j` of the result
    /// is `Bd^T p[j+1+d] + D e[j+d]`.
    pub fn apply_adjoint(&self, e: &[T]) -> Vec<T> {
        let sys = &self.system;
        let n = e.len();
        let d = self.delay_samples;
        let at = sys.ad.transpose();
        // costate[j] for j in 0..=n, costate[n] = 0
        let mut costate = vec![vec![T::zero(); sys.order()]; n + 1];
        for j in (0..n).rev() {
            let mut p = at.mul_vec(&costate[j + 1]);
            for (pi, &ci) in p.iter_mut().zip(&sys.c) {
                *pi += ci * e[j];
            }
            costate[j] = p;
        }
        (0..n)
            .map(|j| {
                let k = j + d;
                if k >= n {
                    return T::zero();
                }
                crate::scalar::dot(&sys.bd, &costate[k + 1]) + sys.d * e[k]
            })
            .collect()
    }
}
