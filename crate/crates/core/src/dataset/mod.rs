//! Windowed supervised samples from `(desired, refined command)` pairs.
//!
//! The input window holds 50 desired samples `q_d[t-25 .. t+25)` and the
//! target holds the 25 refined commands `u[t .. t+25)`.

mod build;
mod collect;
mod normalize;
mod store;
mod windows;

pub use build::{
    build, normalize, BuildConfig, Dataset, JointDataset, SourcePair, Split, SplitFractions, SplitMode, Subset,
};
pub use collect::{collect_sources, CollectConfig, CollectRecord};
pub use normalize::Normalization;
pub use store::{load_dataset, save_dataset, MANIFEST_FILE};
pub use windows::{extract_windows, window_anchors, WindowPair, HALF_WINDOW, INPUT_LEN, OUTPUT_LEN, RECORD_LEN};
