//! Procedural test videos.
//!
//! Each frame is a 3×3 grid of tiles. Every tile carries a linear ramp at a
//! multiple of 22.5° or a flat fill; away from seams all its census codes
//! land in one folded bin. These 17 textures reach 13 distinct bins, and a
//! tile picks its bin uniformly. Content is defined in continuous
//! 112-unit coordinates and can be rendered at any resolution.

use std::collections::BTreeSet;

use rand::Rng;

use super::frames::{Frame, FrameSource, GrayFrame};
use crate::error::{Error, Result};
use crate::rng;

const GRID: usize = 3;
const UNIT: f64 = 112.0;
const SLOPE: f64 = 4.0;
const FLAT: usize = 16;

/// Textures grouped by folded census bin. Ramp `t` runs at `t × 22.5°`
/// (image y pointing down); `FLAT` is a constant fill.
const BIN_TEXTURES: [&[usize]; 13] = [
    &[FLAT],
    &[12],
    &[13, 14],
    &[0, 15],
    &[2],
    &[1],
    &[4],
    &[3],
    &[10],
    &[11],
    &[8, 9],
    &[6, 7],
    &[5],
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticVideo {
    pub seed: u64,
    /// Content index of the first frame.
    pub start: usize,
    pub frames: usize,
    pub fps: f64,
    pub side: usize,
}

impl SyntheticVideo {
    pub fn new(seed: u64, frames: usize, fps: f64, side: usize) -> Self {
        Self {
            seed,
            start: 0,
            frames,
            fps,
            side,
        }
    }

    /// Frames `start..start + len` of this video.
    pub fn crop(&self, start: usize, len: usize) -> Self {
        Self {
            start: self.start + start,
            frames: len.min(self.frames.saturating_sub(start)),
            ..self.clone()
        }
    }

    pub fn rescaled(&self, side: usize) -> Self {
        Self { side, ..self.clone() }
    }

    fn textures(&self, content: usize) -> [usize; GRID * GRID] {
        let mut r = rng::substream(self.seed, &format!("frame:{content}"));
        std::array::from_fn(|_| {
            let group = BIN_TEXTURES[r.random_range(0..BIN_TEXTURES.len())];
            group[r.random_range(0..group.len())]
        })
    }

    pub fn render(&self, index: usize) -> GrayFrame {
        self.render_textures(&self.textures(self.start + index))
    }

    fn render_textures(&self, tex: &[usize; GRID * GRID]) -> GrayFrame {
        let tile = UNIT / GRID as f64;
        let scale = UNIT / self.side as f64;
        GrayFrame::from_fn(self.side, self.side, |x, y| {
            let u = (x as f64 + 0.5) * scale;
            let v = (y as f64 + 0.5) * scale;
            let col = ((u / tile) as usize).min(GRID - 1);
            let row = ((v / tile) as usize).min(GRID - 1);
            let t = tex[row * GRID + col];
            if t == FLAT {
                return 128;
            }
            let theta = t as f64 * std::f64::consts::PI / 8.0;
            let (du, dv) = (u - (col as f64 + 0.5) * tile, v - (row as f64 + 0.5) * tile);
            let z = 128.0 + SLOPE * (du * theta.cos() + dv * theta.sin());
            z.round().clamp(0.0, 255.0) as u8
        })
    }
}

impl FrameSource for SyntheticVideo {
    fn fps(&self) -> f64 {
        self.fps
    }

    fn frame_count(&self) -> usize {
        self.frames
    }

    fn frame(&self, index: usize) -> Result<Frame> {
        if index >= self.frames {
            return Err(Error::invalid(format!("frame {index} out of range")));
        }
        Ok(Frame::Gray(self.render(index)))
    }
}

/// Sources, targets and the ground-truth duplicate pairs.
#[derive(Debug, Clone)]
pub struct InjectedCorpus {
    pub sources: Vec<(String, SyntheticVideo)>,
    pub targets: Vec<(String, SyntheticVideo)>,
    pub duplicates: BTreeSet<(String, String)>,
}

/// `n_sources` source videos of which the first `n_dups` are copies of
/// targets rendered at twice the resolution and cropped to the middle half.
pub fn injected_corpus(seed: u64, n_sources: usize, n_targets: usize, n_dups: usize, frames: usize) -> InjectedCorpus {
    assert!(n_dups <= n_sources && n_dups <= n_targets);
    let targets: Vec<_> = (0..n_targets)
        .map(|i| {
            let s = rng::derive_seed(seed, &format!("target:{i}"));
            (format!("t{i:04}"), SyntheticVideo::new(s, frames, 16.0, 112))
        })
        .collect();
    let mut duplicates = BTreeSet::new();
    let sources = (0..n_sources)
        .map(|i| {
            let id = format!("s{i:04}");
            let video = if i < n_dups {
                duplicates.insert((id.clone(), targets[i].0.clone()));
                targets[i].1.rescaled(224).crop(frames / 4, frames / 2)
            } else {
                SyntheticVideo::new(rng::derive_seed(seed, &format!("source:{i}")), frames, 16.0, 112)
            };
            (id, video)
        })
        .collect();
    InjectedCorpus {
        sources,
        targets,
        duplicates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dedup::census::{census_signature, cosine};
    use crate::dedup::frames::{decode_frames, TARGET_FPS};

    #[test]
    fn deterministic() {
        let v = SyntheticVideo::new(5, 4, 16.0, 112);
        assert_eq!(v.render(2), v.render(2));
        assert_eq!(v.crop(1, 2).render(1), v.render(2));
    }

    #[test]
    fn tiles_are_single_bin() {
        let one = SyntheticVideo::new(0, 1, 16.0, 112);
        let s = census_signature(&one.render(0)).unwrap();
        // Nine tiles, three of them possibly equal, plus seams.
        assert!(s.iter().filter(|&&v| v > 0.02).count() <= 9);
    }

    #[test]
    fn bin_groups() {
        let mut seen = std::collections::BTreeSet::new();
        for group in BIN_TEXTURES {
            let bins: std::collections::BTreeSet<usize> = group
                .iter()
                .map(|&t| {
                    let v = SyntheticVideo::new(0, 1, 16.0, 112);
                    let tex = [t; 9];
                    let f = v.render_textures(&tex);
                    let s = census_signature(&f).unwrap();
                    (0..64).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap()
                })
                .collect();
            assert_eq!(bins.len(), 1, "{group:?}");
            assert!(seen.insert(*bins.first().unwrap()));
        }
    }

    #[test]
    fn rescale_robust() {
        let v = SyntheticVideo::new(21, 16, 16.0, 112);
        let a = decode_frames("a", &v, TARGET_FPS, 112).unwrap();
        let b = decode_frames("b", &v.rescaled(224), TARGET_FPS, 112).unwrap();
        for (x, y) in a.frames.iter().zip(&b.frames) {
            assert!(cosine(x, y) >= 0.95, "{}", cosine(x, y));
        }
    }

    #[test]
    fn injected_layout() {
        let c = injected_corpus(1, 10, 4, 2, 32);
        assert_eq!(c.sources.len(), 10);
        assert_eq!(c.duplicates.len(), 2);
        assert_eq!(c.sources[0].1.frames, 16);
        assert_eq!(c.sources[0].1.start, 8);
        assert_eq!(c.sources[0].1.side, 224);
    }
}
