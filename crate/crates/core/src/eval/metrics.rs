use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::signal::{MultiTrajectory, SampledTrajectory};

/// Default number of leading samples excluded from the peak error (0.2 s).
pub const DEFAULT_TRANSIENT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Deg,
    Rad,
}

impl Units {
    pub fn label(self) -> &'static str {
        match self {
            Units::Deg => "deg",
            Units::Rad => "rad",
        }
    }
}

/// Tracking error of one joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct JointErrors<T> {
    /// Euclidean norm over every sample.
    pub l2: T,
    /// Largest absolute error from the transient cutoff on.
    pub linf: T,
}

/// Per-joint errors with units and transient cutoff recorded, optionally
/// paired with an uncompensated baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ErrorReport<T> {
    pub units: Units,
    pub transient_samples: usize,
    pub joints: Vec<JointErrors<T>>,
    pub uncompensated: Option<Vec<JointErrors<T>>>,
}

impl<T: Real> ErrorReport<T> {
    pub fn with_baseline(mut self, baseline: ErrorReport<T>) -> Result<Self> {
        if baseline.joints.len() != self.joints.len() {
            return Err(Error::ChannelMismatch {
                expected: self.joints.len(),
                actual: baseline.joints.len(),
            });
        }
        if baseline.units != self.units || baseline.transient_samples != self.transient_samples {
            return Err(invalid("baseline", "units and transient cutoff must match"));
        }
        self.uncompensated = Some(baseline.joints);
        Ok(self)
    }

    /// Same report in other units (internal values are degrees).
    pub fn to_units(&self, units: Units) -> Self {
        let factor = match (self.units, units) {
            (a, b) if a == b => T::one(),
            (Units::Deg, Units::Rad) => T::PI() / T::lit(180.0),
            _ => T::lit(180.0) / T::PI(),
        };
        let conv = |v: &[JointErrors<T>]| {
            v.iter()
                .map(|e| JointErrors {
                    l2: e.l2 * factor,
                    linf: e.linf * factor,
                })
                .collect::<Vec<_>>()
        };
        Self {
            units,
            transient_samples: self.transient_samples,
            joints: conv(&self.joints),
            uncompensated: self.uncompensated.as_deref().map(conv),
        }
    }

    /// `compensated / uncompensated` l2 per joint, when paired.
    pub fn l2_ratios(&self) -> Option<Vec<T>> {
        let base = self.uncompensated.as_ref()?;
        Some(self.joints.iter().zip(base).map(|(c, u)| c.l2 / u.l2).collect())
    }
}

/// Errors of one channel (degrees).
pub fn channel_metrics<T: Real>(
    y: &SampledTrajectory<T>,
    y_d: &SampledTrajectory<T>,
    transient_samples: usize,
) -> Result<JointErrors<T>> {
    if y.len() != y_d.len() {
        return Err(Error::LengthMismatch {
            what: "output vs desired trajectory",
            expected: y_d.len(),
            actual: y.len(),
        });
    }
    if transient_samples >= y.len() {
        return Err(invalid(
            "transient_samples",
            format!("{transient_samples} leaves no samples of a {}-sample run", y.len()),
        ));
    }
    let mut sq = T::zero();
    let mut linf = T::zero();
    for (k, (a, b)) in y.values.iter().zip(&y_d.values).enumerate() {
        let e = *a - *b;
        sq += e * e;
        if k >= transient_samples {
            linf = linf.max(e.abs());
        }
    }
    Ok(JointErrors { l2: sq.sqrt(), linf })
}

/// Per-joint l2 over all samples and l-infinity after `transient_samples`.
pub fn metrics<T: Real>(
    y: &MultiTrajectory<T>,
    y_d: &MultiTrajectory<T>,
    transient_samples: usize,
) -> Result<ErrorReport<T>> {
    if y.n_channels() != y_d.n_channels() {
        return Err(Error::ChannelMismatch {
            expected: y_d.n_channels(),
            actual: y.n_channels(),
        });
    }
    let joints = (0..y.n_channels())
        .map(|i| channel_metrics(&y.channel(i), &y_d.channel(i), transient_samples))
        .collect::<Result<_>>()?;
    Ok(ErrorReport {
        units: Units::Deg,
        transient_samples,
        joints,
        uncompensated: None,
    })
}
