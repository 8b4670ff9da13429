//! Training-adjacent protocols at desk scale: single-label assignment,
//! learning-rate schedules, test-time clip averaging, the linear probe and
//! ranking metrics.
//!
//! Full fine-tuning is not implemented; it needs real training
//! infrastructure. The fc-only protocol is covered by [`probe`].

mod assign;
pub mod clips;
pub mod features;
pub mod metrics;
pub mod probe;
pub mod schedule;

pub use assign::assign_single_label;
pub use clips::{uniform_clip_starts, video_prediction, ClipSpacing, PredictionAverage};
pub use metrics::{accuracy_topk, mean_average_precision, MapReport};
pub use probe::{train_probe, ProbeConfig, ProbeMode, ProbeModel, ProbeTargets};
pub use schedule::{lr_schedule, LrSchedule};
