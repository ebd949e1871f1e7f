//! On-disk dataset layout.
//!
//! A dataset directory holds `manifest.json` and one `joint_<i>.bin` per
//! joint. Each block is little-endian:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 8    | magic `NNILCWIN`                        |
//! | 8      | 4    | format version (u32, currently 1)       |
//! | 12     | 4    | joint index (u32)                       |
//! | 16     | 4    | values per record (u32, 75)             |
//! | 20     | 8    | record count (u64)                      |
//! | 28     | ...  | records                                 |
//!
//! A record is `source_id: u64`, `t_index: u64`, then 50 input and 25
//! target values as `f64`.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::build::{BuildConfig, Dataset, JointDataset, Split};
use super::normalize::Normalization;
use super::windows::{WindowPair, INPUT_LEN, OUTPUT_LEN, RECORD_LEN};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MANIFEST_FILE: &str = "manifest.json";
const MAGIC: &[u8; 8] = b"NNILCWIN";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    config: BuildConfig,
    joints: Vec<JointEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JointEntry {
    joint_index: usize,
    file: String,
    count: usize,
    normalization: Normalization<f64>,
    split: Split,
}

fn block_name(joint_index: usize) -> String {
    format!("joint_{joint_index}.bin")
}

/// Writes `ds` under `dir`, creating the directory if needed.
pub fn save_dataset<T: Real>(ds: &Dataset<T>, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut joints = Vec::with_capacity(ds.joints.len());
    for joint in &ds.joints {
        let file = block_name(joint.joint_index);
        write_block(&dir.join(&file), joint)?;
        joints.push(JointEntry {
            joint_index: joint.joint_index,
            file,
            count: joint.pairs.len(),
            normalization: joint.normalization.cast(),
            split: joint.split.clone(),
        });
    }
    let manifest = Manifest {
        version: VERSION,
        config: ds.config,
        joints,
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(())
}

/// Reads a directory written by [`save_dataset`].
pub fn load_dataset<T: Real>(dir: impl AsRef<Path>) -> Result<Dataset<T>> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.exists() {
        return Err(Error::MissingArtifact {
            path: manifest_path,
            hint: "build a dataset first (`nnilc collect`)".into(),
        });
    }
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)?;
    if manifest.version != VERSION {
        return Err(format_error(&manifest_path, format!("unsupported version {}", manifest.version)));
    }
    let mut joints = Vec::with_capacity(manifest.joints.len());
    for entry in manifest.joints {
        let path = dir.join(&entry.file);
        let pairs = read_block::<T>(&path, entry.joint_index)?;
        if pairs.len() != entry.count {
            return Err(format_error(
                &path,
                format!("manifest lists {} records, block has {}", entry.count, pairs.len()),
            ));
        }
        let covered = entry.split.len();
        let in_range = [&entry.split.train, &entry.split.validation, &entry.split.test]
            .iter()
            .all(|l| l.iter().all(|&i| i < pairs.len()));
        if covered != pairs.len() || !in_range {
            return Err(format_error(&manifest_path, "split lists do not cover the records".into()));
        }
        joints.push(JointDataset {
            joint_index: entry.joint_index,
            pairs,
            split: entry.split,
            normalization: entry.normalization.cast(),
        });
    }
    Ok(Dataset {
        config: manifest.config,
        joints,
    })
}

fn format_error(path: &Path, reason: String) -> Error {
    Error::Format {
        path: PathBuf::from(path),
        reason,
    }
}

fn write_block<T: Real>(path: &Path, joint: &JointDataset<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(joint.joint_index as u32).to_le_bytes())?;
    w.write_all(&(RECORD_LEN as u32).to_le_bytes())?;
    w.write_all(&(joint.pairs.len() as u64).to_le_bytes())?;
    for p in &joint.pairs {
        w.write_all(&(p.source_id as u64).to_le_bytes())?;
        w.write_all(&(p.t_index as u64).to_le_bytes())?;
        for v in p.x.iter().chain(&p.y) {
            w.write_all(&v.as_f64().to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_block<T: Real>(path: &Path, joint_index: usize) -> Result<Vec<WindowPair<T>>> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingArtifact {
            path: path.to_path_buf(),
            hint: "dataset directory is incomplete; rebuild it".into(),
        },
        _ => e.into(),
    })?;
    let truncated = |_| format_error(path, "truncated block".into());
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(format_error(path, "bad magic bytes".into()));
    }
    let version = read_u32(&mut r).map_err(truncated)?;
    if version != VERSION {
        return Err(format_error(path, format!("unsupported version {version}")));
    }
    let stored_joint = read_u32(&mut r).map_err(truncated)? as usize;
    if stored_joint != joint_index {
        return Err(format_error(path, format!("block is for joint {stored_joint}, expected {joint_index}")));
    }
    let record_len = read_u32(&mut r).map_err(truncated)? as usize;
    if record_len != RECORD_LEN {
        return Err(format_error(path, format!("record length {record_len}, expected {RECORD_LEN}")));
    }
    let count = read_u64(&mut r).map_err(truncated)? as usize;
    let mut pairs = Vec::with_capacity(count.min(1 << 20));
    let mut buf = [0u8; RECORD_LEN * 8];
    for _ in 0..count {
        let source_id = read_u64(&mut r).map_err(truncated)? as usize;
        let t_index = read_u64(&mut r).map_err(truncated)? as usize;
        r.read_exact(&mut buf).map_err(truncated)?;
        let values: Vec<T> = buf
            .chunks_exact(8)
            .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
            .collect();
        pairs.push(WindowPair {
            x: values[..INPUT_LEN].to_vec(),
            y: values[INPUT_LEN..INPUT_LEN + OUTPUT_LEN].to_vec(),
            joint_index,
            source_id,
            t_index,
        });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(format_error(path, "trailing bytes after records".into()));
    }
    Ok(pairs)
}
