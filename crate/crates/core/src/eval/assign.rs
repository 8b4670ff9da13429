use rand::Rng;

use crate::corpus::{LabelSpace, VideoRecord};
use crate::error::{Error, Result};
use crate::rng;

/// Collapses a multi-label video to one label, chosen uniformly among the
/// labels it matches. The choice depends only on `(video.id, seed)`.
pub fn assign_single_label(video: &VideoRecord, space: &LabelSpace, seed: u64) -> Result<String> {
    let matched = space.matched_labels(video);
    match matched.len() {
        0 => Err(Error::invalid(format!(
            "video {} matches no label in {}",
            video.id, space.name
        ))),
        1 => Ok(matched[0].to_string()),
        n => {
            let mut rng = rng::substream(seed, &format!("assign:{}", video.id));
            Ok(matched[rng.random_range(0..n)].to_string())
        }
    }
}
