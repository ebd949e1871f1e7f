use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Half-width of the input window, in samples: the input covers
/// `[t - HALF_WINDOW, t + HALF_WINDOW)` and the target `[t, t + HALF_WINDOW)`.
pub const HALF_WINDOW: usize = 25;
pub const INPUT_LEN: usize = 2 * HALF_WINDOW;
pub const OUTPUT_LEN: usize = HALF_WINDOW;
/// Values per stored record: inputs followed by targets.
pub const RECORD_LEN: usize = INPUT_LEN + OUTPUT_LEN;

/// One supervised sample: desired-trajectory context and the refined
/// command segment that starts at the anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WindowPair<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub joint_index: usize,
    pub source_id: usize,
    /// Anchor sample `t`.
    pub t_index: usize,
}

/// Anchors `25, 25 + stride, ...` while the input window fits.
pub fn window_anchors(len: usize, stride: usize) -> Result<Vec<usize>> {
    if stride == 0 {
        return Err(invalid("stride", "must be at least 1"));
    }
    if len < INPUT_LEN {
        return Err(Error::LengthMismatch {
            what: "trajectory shorter than one input window",
            expected: INPUT_LEN,
            actual: len,
        });
    }
    Ok((HALF_WINDOW..=len - HALF_WINDOW).step_by(stride).collect())
}

/// Cuts aligned `(x, y)` windows out of a desired trajectory and its
/// refined command. Both must have the same length `N >= 50`; the result
/// has `floor((N - 50) / stride) + 1` pairs tagged with joint and source 0.
pub fn extract_windows<T: Real>(q_d: &[T], u: &[T], stride: usize) -> Result<Vec<WindowPair<T>>> {
    if q_d.len() != u.len() {
        return Err(Error::LengthMismatch {
            what: "refined input vs desired trajectory",
            expected: q_d.len(),
            actual: u.len(),
        });
    }
    Ok(window_anchors(q_d.len(), stride)?
        .into_iter()
        .map(|t| WindowPair {
            x: q_d[t - HALF_WINDOW..t + HALF_WINDOW].to_vec(),
            y: u[t..t + OUTPUT_LEN].to_vec(),
            joint_index: 0,
            source_id: 0,
            t_index: t,
        })
        .collect())
}
