//! Binary model files.
//!
//! Little-endian layout:
//!
//! | field                 | type                                         |
//! |-----------------------|----------------------------------------------|
//! | magic                 | 8 bytes `NNILCMLP`                           |
//! | version               | u32 (currently 1)                            |
//! | joint index           | u32                                          |
//! | layer count + 1       | u32 `L + 1`                                  |
//! | layer sizes           | `L + 1` x u32                                |
//! | l2 coefficient        | f64                                          |
//! | normalization flags   | u8 each: present, anchor centered, residual target, degenerate |
//! | normalization         | f64 input shift, input scale, target shift, target scale (zeros when absent) |
//! | parameters            | per layer: weights row-major, then biases, f64 |

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::mlp::Mlp;
use crate::dataset::Normalization;
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAGIC: &[u8; 8] = b"NNILCMLP";
const VERSION: u32 = 1;
/// Upper bound on any stored layer size; guards against corrupt headers.
const MAX_WIDTH: usize = 1 << 20;

impl<T: Real> Mlp<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + 8 * self.n_params());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.joint_index as u32).to_le_bytes());
        let dims = self.dims();
        out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
        for d in dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.l2_lambda.as_f64().to_le_bytes());
        let norm = self.normalization.map(|n| n.cast::<f64>());
        out.push(norm.is_some() as u8);
        out.push(norm.map_or(0, |n| n.anchor_centered as u8));
        out.push(norm.map_or(0, |n| n.residual_target as u8));
        out.push(norm.map_or(0, |n| n.degenerate as u8));
        let constants = norm.map_or([0.0; 4], |n| [n.input_shift, n.input_scale, n.target_shift, n.target_scale]);
        for c in constants {
            out.extend_from_slice(&c.to_le_bytes());
        }
        for layer in &self.layers {
            for v in layer.weights.iter().chain(&layer.biases) {
                out.extend_from_slice(&v.as_f64().to_le_bytes());
            }
        }
        out
    }

    /// Parses [`Mlp::to_bytes`] output; `origin` only labels errors.
    pub fn from_bytes(bytes: &[u8], origin: &Path) -> Result<Self> {
        let fail = |reason: String| Error::Format {
            path: PathBuf::from(origin),
            reason,
        };
        let mut r = bytes;
        let mut take = |n: usize| -> Result<&[u8]> {
            if r.len() < n {
                return Err(fail("file is truncated".into()));
            }
            let (head, tail) = r.split_at(n);
            r = tail;
            Ok(head)
        };
        if take(8)? != MAGIC {
            return Err(fail("bad magic bytes (not a model file)".into()));
        }
        let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes"));
        let f64_at = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8 bytes"));
        let version = u32_at(take(4)?);
        if version != VERSION {
            return Err(fail(format!("unsupported version {version}")));
        }
        let joint_index = u32_at(take(4)?) as usize;
        let n_dims = u32_at(take(4)?) as usize;
        if !(2..=64).contains(&n_dims) {
            return Err(fail(format!("implausible layer count {n_dims}")));
        }
        let mut dims = Vec::with_capacity(n_dims);
        for _ in 0..n_dims {
            let d = u32_at(take(4)?) as usize;
            if d == 0 || d > MAX_WIDTH {
                return Err(fail(format!("implausible layer size {d}")));
            }
            dims.push(d);
        }
        let l2 = f64_at(take(8)?);
        let flags = take(4)?.to_vec();
        if flags.iter().any(|f| *f > 1) {
            return Err(fail("corrupt normalization flags".into()));
        }
        let mut constants = [0.0; 4];
        for c in &mut constants {
            *c = f64_at(take(8)?);
        }
        let mut model = Mlp::zeros(&dims, T::lit(l2)).map_err(|e| fail(e.to_string()))?;
        model.joint_index = joint_index;
        if flags[0] == 1 {
            let n = Normalization {
                input_shift: constants[0],
                input_scale: constants[1],
                target_shift: constants[2],
                target_scale: constants[3],
                anchor_centered: flags[1] == 1,
                residual_target: flags[2] == 1,
                degenerate: flags[3] == 1,
            };
            model.normalization = Some(n.cast());
        }
        let expected = 8 * model.n_params();
        if r.len() != expected {
            return Err(fail(format!(
                "parameter block has {} bytes, layer sizes {:?} need {expected}",
                r.len(),
                dims
            )));
        }
        let mut values = r.chunks_exact(8).map(|c| T::lit(f64_at(c)));
        for layer in &mut model.layers {
            for v in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *v = values.next().expect("length checked");
            }
        }
        if !model.is_finite() {
            return Err(fail("non-finite parameters".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::File::create(path)?.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        fs::File::open(path)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => Error::MissingArtifact {
                    path: path.to_path_buf(),
                    hint: "train a model first (`nnilc train`)".into(),
                },
                _ => e.into(),
            })?
            .read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes, path)
    }

    /// Loads a model and checks its layer sizes.
    pub fn load_expecting(path: impl AsRef<Path>, dims: &[usize]) -> Result<Self> {
        let model = Self::load(path)?;
        if model.dims() != dims {
            return Err(Error::Dimension(format!(
                "model has layer sizes {:?}, expected {:?}",
                model.dims(),
                dims
            )));
        }
        Ok(model)
    }
}

/// File name used for joint `j` inside a model directory.
pub fn model_file_name(joint_index: usize) -> String {
    format!("joint_{joint_index}.mlp")
}

/// Writes `models[i]` to `dir/joint_<i>.mlp`.
pub fn save_models<T: Real>(models: &[Mlp<T>], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    for (i, m) in models.iter().enumerate() {
        m.save(dir.join(model_file_name(i)))?;
    }
    Ok(())
}

/// Loads `joint_0.mlp, joint_1.mlp, ...` from `dir`, stopping at the first
/// missing index.
pub fn load_models<T: Real>(dir: impl AsRef<Path>) -> Result<Vec<Mlp<T>>> {
    let dir = dir.as_ref();
    let mut models = Vec::new();
    loop {
        let path = dir.join(model_file_name(models.len()));
        if !path.exists() {
            break;
        }
        models.push(Mlp::load(path)?);
    }
    if models.is_empty() {
        return Err(Error::MissingArtifact {
            path: dir.join(model_file_name(0)),
            hint: "train per-joint models first (`nnilc train`)".into(),
        });
    }
    Ok(models)
}
