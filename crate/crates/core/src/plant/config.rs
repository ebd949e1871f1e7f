//! Plant configuration files.
//!
//! TOML, one `[[joint]]` table per joint in channel order:
//!
//! ```toml
//! [[joint]]
//! a = 25.0              # low-pass corner (rad/s)
//! zeta = 0.5            # damping ratio
//! omega = 15.0          # natural frequency (rad/s)
//! dt = 0.004            # sampling period (s)
//! delay_samples = 6
//! quant_step = 0.0      # deg, 0 disables
//!
//! [joint.nonlin]        # omit the table for the defaults
//! knee = 5.0            # deg per sample, 0 disables
//! rate_limit = 250.0    # deg/s, 0 disables
//!
//! [joint.perturbation]  # optional, describes the physical variant
//! omega_scale = 1.0
//! gain_scale = 0.9
//! gain_corner = 4.5     # rad/s
//! gain_damping = 0.4
//! extra_delay = 0
//! ```
//!
//! Missing scalar keys take the defaults of [`PlantConfig::default`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::linear::LinearModel;
use super::model::{NonlinearityParams, PlantConfig};
use super::multi::MultiAxisPlant;
use super::perturb::{make_physical_variant, PerturbationSpec};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlantFile {
    #[serde(default)]
    joint: Vec<JointSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delay_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quant_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nonlin: Option<NonlinSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    perturbation: Option<PerturbationSpec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NonlinSection {
    #[serde(default)]
    knee: f64,
    #[serde(default)]
    rate_limit: f64,
}

/// A nominal multi-axis plant with optional per-joint physical perturbations.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantSetup<T> {
    pub configs: Vec<PlantConfig<T>>,
    pub perturbations: Vec<Option<PerturbationSpec<T>>>,
}

impl<T: Real> PlantSetup<T> {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: PlantFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if file.joint.is_empty() {
            return Err(Error::Config("plant file defines no [[joint]] tables".into()));
        }
        let defaults = PlantConfig::<f64>::default();
        let mut configs = Vec::new();
        let mut perturbations = Vec::new();
        for j in file.joint {
            let nonlin = match j.nonlin {
                None => defaults.nonlin,
                Some(n) => NonlinearityParams {
                    knee: (n.knee != 0.0).then_some(n.knee),
                    rate_limit: (n.rate_limit != 0.0).then_some(n.rate_limit),
                },
            };
            let cfg = PlantConfig {
                linear: LinearModel {
                    a: T::lit(j.a.unwrap_or(defaults.linear.a)),
                    zeta: T::lit(j.zeta.unwrap_or(defaults.linear.zeta)),
                    omega: T::lit(j.omega.unwrap_or(defaults.linear.omega)),
                    dt: T::lit(j.dt.unwrap_or(defaults.linear.dt)),
                },
                delay_samples: j.delay_samples.unwrap_or(defaults.delay_samples),
                quant_step: T::lit(j.quant_step.unwrap_or(defaults.quant_step)),
                nonlin: NonlinearityParams {
                    knee: nonlin.knee.map(T::lit),
                    rate_limit: nonlin.rate_limit.map(T::lit),
                },
                shaping: None,
            };
            configs.push(cfg);
            perturbations.push(j.perturbation.map(|p| PerturbationSpec {
                omega_scale: p.omega_scale.map(T::lit),
                gain_scale: p.gain_scale.map(T::lit),
                gain_corner: T::lit(p.gain_corner),
                gain_damping: T::lit(p.gain_damping),
                extra_delay: p.extra_delay,
            }));
        }
        Ok(Self {
            configs,
            perturbations,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::MissingArtifact {
            path: path.to_path_buf(),
            hint: format!("cannot read plant config ({e}); write one with `nnilc plant-template`"),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let file = PlantFile {
            joint: self
                .configs
                .iter()
                .zip(&self.perturbations)
                .map(|(c, p)| JointSection {
                    a: Some(c.linear.a.as_f64()),
                    zeta: Some(c.linear.zeta.as_f64()),
                    omega: Some(c.linear.omega.as_f64()),
                    dt: Some(c.linear.dt.as_f64()),
                    delay_samples: Some(c.delay_samples),
                    quant_step: Some(c.quant_step.as_f64()),
                    nonlin: Some(NonlinSection {
                        knee: c.nonlin.knee.map_or(0.0, Real::as_f64),
                        rate_limit: c.nonlin.rate_limit.map_or(0.0, Real::as_f64),
                    }),
                    perturbation: p.map(|p| PerturbationSpec {
                        omega_scale: p.omega_scale.map(Real::as_f64),
                        gain_scale: p.gain_scale.map(Real::as_f64),
                        gain_corner: p.gain_corner.as_f64(),
                        gain_damping: p.gain_damping.as_f64(),
                        extra_delay: p.extra_delay,
                    }),
                })
                .collect(),
        };
        toml::to_string_pretty(&file).expect("plant file serializes")
    }

    /// Setup matching [`MultiAxisPlant::default_six`] with a 0.9 high-rate
    /// gain perturbation on every joint.
    pub fn default_six() -> Self {
        let nominal = MultiAxisPlant::<T>::default_six();
        let configs: Vec<_> = nominal.joints.iter().map(|j| j.config().clone()).collect();
        let perturbations = vec![Some(PerturbationSpec::gain(T::lit(0.9))); configs.len()];
        Self {
            configs,
            perturbations,
        }
    }

    pub fn nominal(&self) -> Result<MultiAxisPlant<T>> {
        MultiAxisPlant::from_configs(self.configs.clone())
    }

    /// The physical variant; joints without a perturbation are unchanged.
    pub fn physical(&self) -> Result<MultiAxisPlant<T>> {
        let nominal = self.nominal()?;
        let joints = nominal
            .joints
            .iter()
            .zip(&self.perturbations)
            .map(|(plant, p)| match p {
                Some(p) => make_physical_variant(plant, p),
                None => Ok(plant.clone()),
            })
            .collect::<Result<_>>()?;
        Ok(MultiAxisPlant::new(joints))
    }
}
