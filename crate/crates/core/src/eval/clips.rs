//! Test-time clip placement and video-level prediction.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ClipSpacing {
    /// Even spacing with the first clip at frame 0 and the last flush with
    /// the end of the video.
    #[default]
    EndpointInclusive,
    /// One clip centered in each of `n` equal segments.
    SegmentCenter,
}

/// Start frames of `n_clips` clips of `clip_len` frames.
pub fn uniform_clip_starts(
    num_frames: usize,
    clip_len: usize,
    n_clips: usize,
    spacing: ClipSpacing,
) -> Result<Vec<usize>> {
    if clip_len == 0 || n_clips == 0 {
        return Err(Error::invalid("clip length and clip count must be positive"));
    }
    if clip_len > num_frames {
        return Err(Error::invalid(format!(
            "clip of {clip_len} frames is longer than the video ({num_frames})"
        )));
    }
    let span = num_frames - clip_len;
    let starts = match spacing {
        ClipSpacing::EndpointInclusive if n_clips == 1 => vec![span / 2],
        ClipSpacing::EndpointInclusive => {
            let d = n_clips - 1;
            // round(i * span / d), halves rounded up
            (0..n_clips).map(|i| (2 * i * span + d) / (2 * d)).collect()
        }
        ClipSpacing::SegmentCenter => (0..n_clips)
            .map(|i| {
                let center2 = (2 * i + 1) * num_frames; // 2 * n * segment center
                let start2n = center2 as i64 - (clip_len * n_clips) as i64;
                let s = (start2n + n_clips as i64) / (2 * n_clips as i64);
                (s.max(0) as usize).min(span)
            })
            .collect(),
    };
    Ok(starts)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PredictionAverage {
    #[default]
    Logits,
    /// Average per-clip softmax probabilities instead of raw scores.
    Softmax,
}

pub fn softmax(v: &[f64]) -> Vec<f64> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

/// Element-wise mean of per-clip score vectors.
pub fn video_prediction(clip_scores: &[Vec<f64>], avg: PredictionAverage) -> Result<Vec<f64>> {
    let first = clip_scores
        .first()
        .ok_or_else(|| Error::invalid("no clip predictions"))?;
    let c = first.len();
    if clip_scores.iter().any(|v| v.len() != c) {
        return Err(Error::shape("clip predictions have different lengths"));
    }
    let mut out = vec![0.0; c];
    for v in clip_scores {
        let v = match avg {
            PredictionAverage::Logits => v.clone(),
            PredictionAverage::Softmax => softmax(v),
        };
        for (o, x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    let n = clip_scores.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    Ok(out)
}

/// Index of the largest score; ties go to the lower index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
