//! Sampled signals: the carrier for desired trajectories, commands, outputs
//! and errors.
//!
//! CSV layout: a header row `t,j1,...,jn` followed by one row per sample,
//! time in seconds at a fixed period and angles in degrees.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Default sampling period (4 ms setpoint stream).
pub const DEFAULT_DT: f64 = 0.004;

/// A single-channel signal sampled at a fixed period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SampledTrajectory<T> {
    pub dt: T,
    pub values: Vec<T>,
}

impl<T: Real> SampledTrajectory<T> {
    pub fn new(dt: T, values: Vec<T>) -> Self {
        Self { dt, values }
    }

    pub fn constant(dt: T, value: T, len: usize) -> Self {
        Self::new(dt, vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    /// Time stamp of sample `i`.
    pub fn time(&self, i: usize) -> T {
        T::of_usize(i) * self.dt
    }

    /// Reversal over the full horizon, index `i` maps to `N - 1 - i`.
    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self::new(self.dt, values)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::new(self.dt, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Elementwise `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// `self + scale * other`.
    pub fn axpy(&self, scale: T, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + scale * b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                what: "trajectory operands",
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(Self::new(
            self.dt,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn norm2(&self) -> T {
        crate::scalar::norm2(&self.values)
    }

    pub fn is_finite(&self) -> bool {
        crate::scalar::all_finite(&self.values)
    }
}

/// A multi-channel signal; channel `i` is joint `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MultiTrajectory<T> {
    pub dt: T,
    pub channels: Vec<Vec<T>>,
}

impl<T: Real> MultiTrajectory<T> {
    /// Builds from channels, which must share one length.
    pub fn new(dt: T, channels: Vec<Vec<T>>) -> Result<Self> {
        if let Some(first) = channels.first() {
            for c in &channels {
                if c.len() != first.len() {
                    return Err(Error::LengthMismatch {
                        what: "channel length",
                        expected: first.len(),
                        actual: c.len(),
                    });
                }
            }
        }
        Ok(Self { dt, channels })
    }

    pub fn from_channels(channels: Vec<SampledTrajectory<T>>) -> Result<Self> {
        let dt = channels
            .first()
            .map(|c| c.dt)
            .unwrap_or_else(|| T::lit(DEFAULT_DT));
        Self::new(dt, channels.into_iter().map(|c| c.values).collect())
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, i: usize) -> SampledTrajectory<T> {
        SampledTrajectory::new(self.dt, self.channels[i].clone())
    }

    pub fn channel_trajectories(&self) -> Vec<SampledTrajectory<T>> {
        (0..self.n_channels()).map(|i| self.channel(i)).collect()
    }

    /// First sample of every channel.
    pub fn initial_values(&self) -> Vec<T> {
        self.channels
            .iter()
            .map(|c| c.first().copied().unwrap_or_else(T::zero))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.n_channels()).map(|j| format!("j{j}")));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = Vec::with_capacity(self.n_channels() + 1);
            row.push(format!("{}", (T::of_usize(i) * self.dt).as_f64()));
            for c in &self.channels {
                // Shortest round-trip representation of the stored value.
                row.push(format!("{:?}", c[i].as_f64()));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = r.headers()?.clone();
        if header.is_empty() || &header[0] != "t" {
            return Err(invalid("csv header", "first column must be `t`"));
        }
        for (k, name) in header.iter().enumerate().skip(1) {
            if name != format!("j{k}") {
                return Err(invalid(
                    "csv header",
                    format!("column {k} must be `j{k}`, found `{name}`"),
                ));
            }
        }
        let n = header.len() - 1;
        let mut times = Vec::new();
        let mut channels = vec![Vec::new(); n];
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|e| invalid("csv value", format!("`{s}`: {e}")))
            };
            times.push(parse(&rec[0])?);
            for (k, ch) in channels.iter_mut().enumerate() {
                ch.push(T::lit(parse(&rec[k + 1])?));
            }
        }
        let dt = if times.len() >= 2 {
            times[1] - times[0]
        } else {
            DEFAULT_DT
        };
        if !(dt > 0.0) {
            return Err(invalid("csv time column", "sampling period must be positive"));
        }
        Self::new(T::lit(dt), channels)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

impl<T: Real> From<SampledTrajectory<T>> for MultiTrajectory<T> {
    fn from(t: SampledTrajectory<T>) -> Self {
        Self {
            dt: t.dt,
            channels: vec![t.values],
        }
    }
}
