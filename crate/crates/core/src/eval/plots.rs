use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const QD_SUFFIX: &str = "_qd.csv";

/// Writes one matplotlib script per run found in `rundir` (a run is a
/// `<name>_qd.csv` with sibling `<name>_u.csv` and `<name>_y.csv`). Scripts
/// locate their data relative to themselves, so the directory can be moved.
/// Returns the scripts written; none, with a warning, when `rundir` holds
/// no runs.
pub fn export_plots(rundir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let rundir = rundir.as_ref();
    if !rundir.is_dir() {
        return Err(Error::MissingArtifact {
            path: rundir.to_path_buf(),
            hint: "run an experiment or `nnilc rollout` to create a run directory".into(),
        });
    }
    let mut runs: Vec<String> = fs::read_dir(rundir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str().map(str::to_string))
        .filter_map(|n| n.strip_suffix(QD_SUFFIX).map(str::to_string))
        .filter(|stem| ["u", "y"].iter().all(|s| rundir.join(format!("{stem}_{s}.csv")).is_file()))
        .collect();
    runs.sort();
    if runs.is_empty() {
        log::warn!("no runs in {}; no plot scripts written", rundir.display());
        return Ok(Vec::new());
    }
    runs.iter()
        .map(|stem| {
            let path = rundir.join(format!("plot_{stem}.py"));
            fs::write(&path, script(stem))?;
            Ok(path)
        })
        .collect()
}

fn script(stem: &str) -> String {
    format!(
        r#"# Desired, output and command overlay for run `{stem}`.
import csv
from pathlib import Path

import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent


def load(name):
    with open(HERE / name, newline="") as f:
        rows = list(csv.reader(f))
    header, body = rows[0], rows[1:]
    cols = list(zip(*[[float(v) for v in r] for r in body]))
    return header[1:], cols[0], cols[1:]


joints, t, qd = load("{stem}_qd.csv")
_, _, u = load("{stem}_u.csv")
_, _, y = load("{stem}_y.csv")

fig, axes = plt.subplots(len(joints), 1, sharex=True, figsize=(9, 2.2 * len(joints)), squeeze=False)
for ax, name, d, c, o in zip(axes[:, 0], joints, qd, u, y):
    ax.plot(t, d, "k--", label="desired")
    ax.plot(t, o, label="output")
    ax.plot(t, c, alpha=0.6, label="command")
    ax.set_ylabel(name + " [deg]")
axes[0, 0].legend(loc="upper right")
axes[-1, 0].set_xlabel("time [s]")
fig.tight_layout()
fig.savefig(HERE / "{stem}.png", dpi=120)
"#
    )
}
