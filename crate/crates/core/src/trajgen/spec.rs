use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::limits::validate_limits;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::signal::{SampledTrajectory, DEFAULT_DT};

/// Default trajectory length: 3000 samples, 12 s at 4 ms.
pub const DEFAULT_LENGTH: usize = 3000;

/// Trajectory family and its parameters. Angles in deg, rates in rad/s
/// (angular frequencies) or deg/s (velocities).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum TrajectoryKind<T> {
    /// `offset + amplitude sin(omega t + phase)`.
    Sinusoid {
        amplitude: T,
        omega: T,
        #[serde(default)]
        phase: T,
        #[serde(default)]
        offset: T,
    },
    /// Sinusoid whose angular frequency sweeps linearly in time from
    /// `omega_start` at `t = 0` to `omega_end` at the last sample.
    Chirp {
        amplitude: T,
        omega_start: T,
        omega_end: T,
        #[serde(default)]
        phase: T,
        #[serde(default)]
        offset: T,
    },
    /// Back-and-forth point-to-point moves with trapezoidal velocity,
    /// separated by `dwell` seconds at rest.
    Trapezoid {
        distance: T,
        vmax: T,
        amax: T,
        #[serde(default)]
        dwell: T,
        #[serde(default)]
        offset: T,
    },
    /// Alternating logistic transitions of height `distance`, one per half
    /// `period`; `rate` is the logistic slope (1/s).
    Sigmoid {
        distance: T,
        rate: T,
        period: T,
        #[serde(default)]
        offset: T,
    },
    /// Zero-phase low-pass filtered Gaussian noise, scaled to `amplitude`
    /// and then down to the velocity/acceleration bounds. `noise` adds
    /// unfiltered Gaussian noise of that standard deviation afterwards.
    RandomSmooth {
        amplitude: T,
        cutoff: T,
        vmax: T,
        amax: T,
        seed: u64,
        #[serde(default)]
        offset: T,
        #[serde(default)]
        noise: T,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TrajectorySpec<T> {
    #[serde(flatten)]
    pub kind: TrajectoryKind<T>,
    #[serde(default = "default_length")]
    pub length: usize,
    #[serde(default = "default_dt")]
    pub dt: T,
}

fn default_length() -> usize {
    DEFAULT_LENGTH
}

fn default_dt<T: Real>() -> T {
    T::lit(DEFAULT_DT)
}

impl<T: Real> TrajectorySpec<T> {
    pub fn new(kind: TrajectoryKind<T>) -> Self {
        Self {
            kind,
            length: DEFAULT_LENGTH,
            dt: T::lit(DEFAULT_DT),
        }
    }

    pub fn with_length(mut self, length: usize) -> Self {
        self.length = length;
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("trajectory spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(invalid("length", "must be at least 1"));
        }
        if !(self.dt.is_finite() && self.dt > T::zero()) {
            return Err(invalid("dt", "must be positive"));
        }
        let finite = |name: &'static str, v: T| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::NonFinite(format!("trajectory parameter `{name}`")))
            }
        };
        let positive = |name: &'static str, v: T| {
            finite(name, v)?;
            if v > T::zero() {
                Ok(())
            } else {
                Err(invalid(name, "must be positive"))
            }
        };
        match &self.kind {
            TrajectoryKind::Sinusoid { amplitude, omega, phase, offset } => {
                finite("amplitude", *amplitude)?;
                finite("omega", *omega)?;
                finite("phase", *phase)?;
                finite("offset", *offset)
            }
            TrajectoryKind::Chirp { amplitude, omega_start, omega_end, phase, offset } => {
                finite("amplitude", *amplitude)?;
                finite("omega_start", *omega_start)?;
                finite("omega_end", *omega_end)?;
                finite("phase", *phase)?;
                finite("offset", *offset)
            }
            TrajectoryKind::Trapezoid { distance, vmax, amax, dwell, offset } => {
                finite("distance", *distance)?;
                positive("vmax", *vmax)?;
                positive("amax", *amax)?;
                finite("offset", *offset)?;
                finite("dwell", *dwell)?;
                if *dwell < T::zero() {
                    return Err(invalid("dwell", "must be non-negative"));
                }
                Ok(())
            }
            TrajectoryKind::Sigmoid { distance, rate, period, offset } => {
                finite("distance", *distance)?;
                positive("rate", *rate)?;
                positive("period", *period)?;
                finite("offset", *offset)
            }
            TrajectoryKind::RandomSmooth { amplitude, cutoff, vmax, amax, offset, noise, .. } => {
                finite("amplitude", *amplitude)?;
                positive("cutoff", *cutoff)?;
                positive("vmax", *vmax)?;
                positive("amax", *amax)?;
                finite("offset", *offset)?;
                finite("noise", *noise)?;
                if *noise < T::zero() {
                    return Err(invalid("noise", "must be non-negative"));
                }
                Ok(())
            }
        }
    }
}

/// Samples the trajectory described by `spec`. Pure: the same spec (seed
/// included) always yields the same samples.
pub fn generate<T: Real>(spec: &TrajectorySpec<T>) -> Result<SampledTrajectory<T>> {
    spec.validate()?;
    let n = spec.length;
    let dt = spec.dt;
    let time = |k: usize| T::of_usize(k) * dt;
    let values: Vec<T> = match spec.kind {
        TrajectoryKind::Sinusoid { amplitude, omega, phase, offset } => (0..n)
            .map(|k| offset + amplitude * (omega * time(k) + phase).sin())
            .collect(),
        TrajectoryKind::Chirp { amplitude, omega_start, omega_end, phase, offset } => {
            let horizon = time(n.saturating_sub(1)).max(dt);
            let half = T::lit(0.5);
            (0..n)
                .map(|k| {
                    let t = time(k);
                    let theta = omega_start * t + half * (omega_end - omega_start) * t * t / horizon;
                    offset + amplitude * (theta + phase).sin()
                })
                .collect()
        }
        TrajectoryKind::Trapezoid { distance, vmax, amax, dwell, offset } => {
            let profile = TrapezoidProfile::new(distance.abs(), vmax, amax);
            let cycle = T::lit(2.0) * (dwell + profile.duration);
            (0..n)
                .map(|k| {
                    let t = time(k);
                    let cycles = (t / cycle).floor();
                    let tau = t - cycles * cycle;
                    let leg = if tau < dwell + profile.duration {
                        profile.position(tau - dwell)
                    } else {
                        profile.distance - profile.position(tau - T::lit(2.0) * dwell - profile.duration)
                    };
                    offset + distance.signum() * leg
                })
                .collect()
        }
        TrajectoryKind::Sigmoid { distance, rate, period, offset } => {
            let half_period = period * T::lit(0.5);
            let reach = rate * half_period * T::lit(0.5);
            let logistic = |x: T| T::one() / (T::one() + (-x).exp());
            let (lo, hi) = (logistic(-reach), logistic(reach));
            (0..n)
                .map(|k| {
                    let t = time(k);
                    let m = (t / half_period).floor();
                    let tau = t - m * half_period;
                    let s = (logistic(rate * (tau - half_period * T::lit(0.5))) - lo) / (hi - lo);
                    let rising = m.to_i64().unwrap_or(0) % 2 == 0;
                    let frac = if rising { s } else { T::one() - s };
                    offset + distance * frac
                })
                .collect()
        }
        TrajectoryKind::RandomSmooth { amplitude, cutoff, vmax, amax, seed, offset, noise } => {
            random_smooth(n, dt, amplitude, cutoff, vmax, amax, seed, offset, noise)?
        }
    };
    Ok(SampledTrajectory::new(dt, values))
}

/// Duration of one trapezoidal (or triangular) move of `distance`.
pub fn trapezoid_move_duration<T: Real>(distance: T, vmax: T, amax: T) -> T {
    TrapezoidProfile::new(distance.abs(), vmax, amax).duration
}

struct TrapezoidProfile<T> {
    distance: T,
    accel: T,
    /// Time spent accelerating (and decelerating).
    ramp: T,
    peak_velocity: T,
    duration: T,
}

impl<T: Real> TrapezoidProfile<T> {
    fn new(distance: T, vmax: T, amax: T) -> Self {
        if distance * amax > vmax * vmax {
            let ramp = vmax / amax;
            Self {
                distance,
                accel: amax,
                ramp,
                peak_velocity: vmax,
                duration: distance / vmax + ramp,
            }
        } else {
            let ramp = (distance / amax).sqrt();
            Self {
                distance,
                accel: amax,
                ramp,
                peak_velocity: amax * ramp,
                duration: T::lit(2.0) * ramp,
            }
        }
    }

    fn position(&self, t: T) -> T {
        let half = T::lit(0.5);
        if t <= T::zero() {
            T::zero()
        } else if t >= self.duration {
            self.distance
        } else if t < self.ramp {
            half * self.accel * t * t
        } else if t <= self.duration - self.ramp {
            half * self.accel * self.ramp * self.ramp + self.peak_velocity * (t - self.ramp)
        } else {
            let r = self.duration - t;
            self.distance - half * self.accel * r * r
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn random_smooth<T: Real>(
    n: usize,
    dt: T,
    amplitude: T,
    cutoff: T,
    vmax: T,
    amax: T,
    seed: u64,
    offset: T,
    noise: T,
) -> Result<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    // two forward-backward passes of a first-order low pass: zero phase
    let alpha = 1.0 - (-(cutoff * dt).as_f64()).exp();
    for _ in 0..2 {
        lowpass_in_place(&mut x, alpha);
        x.reverse();
        lowpass_in_place(&mut x, alpha);
        x.reverse();
    }
    let start = x.first().copied().unwrap_or(0.0);
    x.iter_mut().for_each(|v| *v -= start);
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut values: Vec<T> = if peak > 0.0 {
        x.iter().map(|&v| T::lit(v / peak) * amplitude).collect()
    } else {
        vec![T::zero(); n]
    };
    let report = validate_limits(&SampledTrajectory::new(dt, values.clone()), vmax, amax)?;
    let mut factor = T::one();
    if report.max_velocity > vmax {
        factor = factor.min(vmax / report.max_velocity);
    }
    if report.max_acceleration > amax {
        factor = factor.min(amax / report.max_acceleration);
    }
    if factor < T::one() {
        factor *= T::lit(0.999);
    }
    for v in values.iter_mut() {
        *v = offset + *v * factor;
    }
    if noise > T::zero() {
        for v in values.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += noise * T::lit(z);
        }
    }
    Ok(values)
}

fn lowpass_in_place(x: &mut [f64], alpha: f64) {
    let mut state = x.first().copied().unwrap_or(0.0);
    for v in x.iter_mut() {
        state += alpha * (*v - state);
        *v = state;
    }
}
