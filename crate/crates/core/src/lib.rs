//! Curation and pre-training preparation for weakly-supervised video corpora.
//!
//! The crate covers the data- and protocol-side of hashtag-supervised video
//! pre-training:
//!
//! * [`corpus`] and [`manifest`]: the record types and their JSONL persistence.
//! * [`labelspace`]: relevant-hashtag generation from seed action labels.
//! * [`sampling`]: random, square-root and tail-preserving subset selection.
//! * [`dedup`]: census-transform frame signatures and LSH overlap detection.
//! * [`temporal`]: clip jittering, length classes and clip budget planning.
//! * [`tensor`]: a small forward-only convolution engine with 2D to 3D
//!   filter inflation and the fully-convolutional transform.
//! * [`eval`]: label assignment, learning-rate schedules, clip averaging,
//!   the linear probe and ranking metrics.

pub mod corpus;
pub mod dedup;
pub mod error;
pub mod eval;
pub mod labelspace;
pub mod manifest;
pub mod rng;
pub mod sampling;
pub mod synth;
pub mod temporal;
pub mod tensor;

pub use corpus::{label_histogram, LabelHistogram, LabelKind, LabelSpace, VideoRecord};
pub use error::{Error, Result};
pub use manifest::{DatasetManifest, ManifestRow};
pub use tensor::Tensor;
