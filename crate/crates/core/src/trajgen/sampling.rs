use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spec::{generate, TrajectoryKind, TrajectorySpec, DEFAULT_LENGTH};
use crate::error::{invalid, Result};
use crate::scalar::Real;
use crate::signal::{SampledTrajectory, DEFAULT_DT};

/// Relative weights of each family in a sampled set. Zero excludes a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyMix {
    pub sinusoid: f64,
    pub chirp: f64,
    pub trapezoid: f64,
    pub sigmoid: f64,
    pub random_smooth: f64,
}

impl Default for FamilyMix {
    fn default() -> Self {
        Self {
            sinusoid: 0.6,
            chirp: 0.0,
            trapezoid: 0.2,
            sigmoid: 0.2,
            random_smooth: 0.0,
        }
    }
}

impl FamilyMix {
    pub fn only_sinusoids() -> Self {
        Self {
            sinusoid: 1.0,
            chirp: 0.0,
            trapezoid: 0.0,
            sigmoid: 0.0,
            random_smooth: 0.0,
        }
    }

    fn weights(&self) -> [f64; 5] {
        [self.sinusoid, self.chirp, self.trapezoid, self.sigmoid, self.random_smooth]
    }

    fn validate(&self) -> Result<()> {
        let w = self.weights();
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("family_mix", "weights must be finite and non-negative"));
        }
        if w.iter().sum::<f64>() <= 0.0 {
            return Err(invalid("family_mix", "at least one family needs a positive weight"));
        }
        Ok(())
    }
}

/// How frequency levels (or continuous draws) are spread over the range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    /// Uniform in log frequency.
    Log,
}

/// Sampling ranges for a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingSetConfig {
    pub n_traj: usize,
    pub seed: u64,
    pub mix: FamilyMix,
    /// Angular frequency range (rad/s).
    pub omega_min: f64,
    pub omega_max: f64,
    /// When set, frequencies are drawn from this many levels spanning the
    /// range instead of continuously.
    pub omega_levels: Option<usize>,
    pub omega_spacing: Spacing,
    /// Amplitude range (deg).
    pub amplitude_min: f64,
    pub amplitude_max: f64,
    /// Start offsets are uniform in `[-offset_range, offset_range]` (deg).
    pub offset_range: f64,
    /// Amplitudes are reduced so that `amplitude * omega` stays under this
    /// speed (deg/s) and `amplitude * omega^2` under `accel_cap` (deg/s^2).
    pub speed_cap: f64,
    pub accel_cap: f64,
    pub length: usize,
    pub dt: f64,
}

impl Default for TrainingSetConfig {
    fn default() -> Self {
        Self {
            n_traj: 20,
            seed: 0,
            mix: FamilyMix::default(),
            omega_min: 0.5,
            omega_max: 15.0,
            omega_levels: Some(30),
            omega_spacing: Spacing::Linear,
            amplitude_min: 1.0,
            amplitude_max: 10.0,
            offset_range: 30.0,
            speed_cap: 60.0,
            accel_cap: 500.0,
            length: DEFAULT_LENGTH,
            dt: DEFAULT_DT,
        }
    }
}

impl TrainingSetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(invalid("n_traj", "must be at least 1"));
        }
        self.mix.validate()?;
        if !(self.omega_min > 0.0 && self.omega_max >= self.omega_min && self.omega_max.is_finite()) {
            return Err(invalid("omega range", "need 0 < omega_min <= omega_max"));
        }
        if self.omega_levels == Some(0) {
            return Err(invalid("omega_levels", "must be at least 1"));
        }
        if !(self.amplitude_min >= 0.0 && self.amplitude_max >= self.amplitude_min && self.amplitude_max.is_finite()) {
            return Err(invalid("amplitude range", "need 0 <= amplitude_min <= amplitude_max"));
        }
        if !(self.offset_range >= 0.0 && self.offset_range.is_finite()) {
            return Err(invalid("offset_range", "must be finite and non-negative"));
        }
        if !(self.speed_cap > 0.0 && self.accel_cap > 0.0) {
            return Err(invalid("speed_cap", "speed and acceleration caps must be positive"));
        }
        Ok(())
    }

    fn draw_omega(&self, rng: &mut ChaCha8Rng) -> f64 {
        let frac = match self.omega_levels {
            Some(1) => 0.0,
            Some(levels) => rng.gen_range(0..levels) as f64 / (levels - 1) as f64,
            None => rng.gen::<f64>(),
        };
        match self.omega_spacing {
            Spacing::Linear => self.omega_min + (self.omega_max - self.omega_min) * frac,
            Spacing::Log => self.omega_min * (self.omega_max / self.omega_min).powf(frac),
        }
    }
}

/// Draws a reproducible set of trajectory specs and samples them.
pub fn sample_training_set<T: Real>(
    cfg: &TrainingSetConfig,
) -> Result<Vec<(TrajectorySpec<T>, SampledTrajectory<T>)>> {
    sample_specs(cfg)?
        .into_iter()
        .map(|spec| generate(&spec).map(|traj| (spec, traj)))
        .collect()
}

/// The specs behind [`sample_training_set`], without sampling them.
pub fn sample_specs<T: Real>(cfg: &TrainingSetConfig) -> Result<Vec<TrajectorySpec<T>>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weights = cfg.mix.weights();
    let total: f64 = weights.iter().sum();
    let mut specs = Vec::with_capacity(cfg.n_traj);
    for _ in 0..cfg.n_traj {
        let mut pick = rng.gen::<f64>() * total;
        let mut family = 0;
        for (i, w) in weights.iter().enumerate() {
            if *w > 0.0 {
                family = i;
                if pick < *w {
                    break;
                }
                pick -= w;
            }
        }
        let omega = cfg.draw_omega(&mut rng);
        let amplitude = if cfg.amplitude_max > cfg.amplitude_min {
            rng.gen_range(cfg.amplitude_min..=cfg.amplitude_max)
        } else {
            cfg.amplitude_min
        }
        .min(cfg.speed_cap / omega)
        .min(cfg.accel_cap / (omega * omega));
        let offset = if cfg.offset_range > 0.0 {
            rng.gen_range(-cfg.offset_range..=cfg.offset_range)
        } else {
            0.0
        };
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let direction = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let seed = rng.gen::<u64>();
        let lit = T::lit;
        let kind = match family {
            0 => TrajectoryKind::Sinusoid {
                amplitude: lit(amplitude),
                omega: lit(omega),
                phase: lit(phase),
                offset: lit(offset),
            },
            1 => TrajectoryKind::Chirp {
                amplitude: lit(amplitude),
                omega_start: lit(cfg.omega_min),
                omega_end: lit(omega),
                phase: lit(phase),
                offset: lit(offset),
            },
            2 => TrajectoryKind::Trapezoid {
                distance: lit(2.0 * amplitude * direction),
                vmax: lit(amplitude * omega),
                amax: lit(amplitude * omega * omega),
                dwell: lit((std::f64::consts::PI / omega).min(1.0)),
                offset: lit(offset),
            },
            3 => {
                let period = (4.0 * std::f64::consts::PI / omega).clamp(0.5, 12.0);
                TrajectoryKind::Sigmoid {
                    distance: lit(2.0 * amplitude * direction),
                    rate: lit(2.0 * omega),
                    period: lit(period),
                    offset: lit(offset),
                }
            }
            _ => TrajectoryKind::RandomSmooth {
                amplitude: lit(amplitude),
                cutoff: lit(omega),
                vmax: lit(1.5 * amplitude * omega),
                amax: lit(2.0 * amplitude * omega * omega),
                seed,
                offset: lit(offset),
                noise: T::zero(),
            },
        };
        specs.push(TrajectorySpec {
            kind,
            length: cfg.length,
            dt: lit(cfg.dt),
        });
    }
    Ok(specs)
}
