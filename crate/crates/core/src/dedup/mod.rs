//! Near-duplicate detection between a source corpus and target datasets.
//!
//! Videos are decoded at 16 fps, scaled to 112×112 and reduced to one
//! 64-dim census-histogram signature per frame. Target frames go into a
//! random-hyperplane LSH index; a source frame matches a target when an LSH
//! candidate from that target has cosine similarity at least `tau`. A source
//! is flagged against a target when the matched fraction of its frames
//! reaches the threshold.

pub mod census;
pub mod frames;
pub mod lsh;
pub mod report;
pub mod synthetic;

pub use census::{census_signature, cosine, Signature, SIGNATURE_DIM, SIGNATURE_SIDE};
pub use frames::{decode_all, decode_frames, Frame, FrameSource, GrayFrame, RawVideo, RgbFrame, SignatureSequence, TARGET_FPS};
pub use lsh::{LshIndex, LshParams, Search};
pub use report::{
    build_index, dedup_report, dedup_report_with, overlap, write_report, DedupParams, OverlapPair, OverlapReport,
};
pub use synthetic::SyntheticVideo;
