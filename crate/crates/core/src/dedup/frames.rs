//! Frame sources, decoding to signature sequences, and the raw-frames file.
//!
//! Raw-frames file (`.cfvd`), little-endian:
//! `"CFVD" | u32 width | u32 height | u32 frame count | f32 fps | frames`,
//! each frame row-major u8 grayscale.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::census::{census_signature, Signature, SIGNATURE_SIDE};
use crate::error::{Error, Result};

pub const TARGET_FPS: f64 = 16.0;
pub const RAW_MAGIC: &[u8; 4] = b"CFVD";
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    pub width: usize,
    pub height: usize,
    data: Vec<u8>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::shape(format!(
                "{width}x{height} frame cannot hold {} pixels",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Bilinear resize with half-pixel centres, rounded back to u8.
    pub fn resize(&self, width: usize, height: usize) -> GrayFrame {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let axis = |n_out: usize, n_in: usize| -> Vec<(usize, usize, f64)> {
            let scale = n_in as f64 / n_out as f64;
            (0..n_out)
                .map(|o| {
                    let s = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (n_in - 1) as f64);
                    let i0 = s.floor() as usize;
                    let i1 = (i0 + 1).min(n_in - 1);
                    (i0, i1, s - i0 as f64)
                })
                .collect()
        };
        let xs = axis(width, self.width);
        let ys = axis(height, self.height);
        let px = |x: usize, y: usize| f64::from(self.data[y * self.width + x]);
        let mut data = Vec::with_capacity(width * height);
        for &(y0, y1, fy) in &ys {
            for &(x0, x1, fx) in &xs {
                let top = px(x0, y0) * (1.0 - fx) + px(x1, y0) * fx;
                let bot = px(x0, y1) * (1.0 - fx) + px(x1, y1) * fx;
                data.push((top * (1.0 - fy) + bot * fy).round().clamp(0.0, 255.0) as u8);
            }
        }
        GrayFrame { width, height, data }
    }
}

/// Interleaved 8-bit RGB frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl RgbFrame {
    pub fn to_gray(&self) -> Result<GrayFrame> {
        if self.data.len() != self.width * self.height * 3 {
            return Err(Error::shape("rgb frame size does not match its dimensions"));
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| {
                let y: f64 = p.iter().zip(LUMA).map(|(&c, w)| f64::from(c) * w).sum();
                y.round().clamp(0.0, 255.0) as u8
            })
            .collect();
        GrayFrame::new(self.width, self.height, data)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    Gray(GrayFrame),
    Rgb(RgbFrame),
}

impl Frame {
    pub fn into_gray(self) -> Result<GrayFrame> {
        match self {
            Frame::Gray(g) => Ok(g),
            Frame::Rgb(c) => c.to_gray(),
        }
    }
}

/// Anything that can hand out decoded frames by index.
pub trait FrameSource: Sync {
    fn fps(&self) -> f64;
    fn frame_count(&self) -> usize;
    fn frame(&self, index: usize) -> Result<Frame>;
}

/// Per-frame signatures of one video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureSequence {
    pub video_id: String,
    #[serde(with = "signature_serde")]
    pub frames: Vec<Signature>,
}

mod signature_serde {
    use super::Signature;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Signature], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|f| f.as_slice()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Signature>, D::Error> {
        Vec::<Vec<f64>>::deserialize(d)?
            .into_iter()
            .map(|f| Signature::try_from(f.as_slice()).map_err(|_| D::Error::custom("signature must have 64 entries")))
            .collect()
    }
}

/// Source indices picked by nearest-timestamp resampling to `target_fps`.
pub fn resample_indices(frame_count: usize, fps: f64, target_fps: f64) -> Vec<usize> {
    if frame_count == 0 {
        return Vec::new();
    }
    let out = ((frame_count as f64 / fps * target_fps).round() as usize).max(1);
    (0..out)
        .map(|j| ((j as f64 * fps / target_fps).round() as usize).min(frame_count - 1))
        .collect()
}

/// Resample to `target_fps`, convert to gray, resize to `side`×`side` and
/// take the census signature of every frame.
pub fn decode_frames(
    video_id: &str,
    video: &dyn FrameSource,
    target_fps: f64,
    side: usize,
) -> Result<SignatureSequence> {
    if side != SIGNATURE_SIDE {
        return Err(Error::invalid(format!("signature side must be {SIGNATURE_SIDE}, got {side}")));
    }
    let fps = video.fps();
    if !(fps > 0.0 && fps.is_finite()) || !(target_fps > 0.0 && target_fps.is_finite()) {
        return Err(Error::invalid(format!("frame rates must be positive, got {fps} -> {target_fps}")));
    }
    let n = video.frame_count();
    if n == 0 {
        return Err(Error::invalid(format!("video {video_id} has no frames")));
    }
    let frames = resample_indices(n, fps, target_fps)
        .into_iter()
        .map(|i| {
            let gray = video.frame(i)?.into_gray()?;
            census_signature(&gray.resize(side, side))
        })
        .collect::<Result<_>>()?;
    Ok(SignatureSequence {
        video_id: video_id.to_string(),
        frames,
    })
}

/// Decode many videos in parallel, keeping input order.
pub fn decode_all<S: FrameSource + Send>(videos: &[(String, S)]) -> Result<Vec<SignatureSequence>> {
    use rayon::prelude::*;
    videos
        .par_iter()
        .map(|(id, v)| decode_frames(id, v, TARGET_FPS, SIGNATURE_SIDE))
        .collect()
}

/// A grayscale clip held in memory, as stored in a raw-frames file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawVideo {
    pub width: usize,
    pub height: usize,
    pub fps: f32,
    frames: Vec<u8>,
}

impl RawVideo {
    pub fn new(width: usize, height: usize, fps: f32, frames: Vec<u8>) -> Result<Self> {
        let size = width * height;
        if size == 0 || !frames.len().is_multiple_of(size) {
            return Err(Error::shape(format!(
                "{} bytes is not a whole number of {width}x{height} frames",
                frames.len()
            )));
        }
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(Error::invalid(format!("fps must be positive, got {fps}")));
        }
        Ok(Self {
            width,
            height,
            fps,
            frames,
        })
    }

    pub fn from_source(video: &dyn FrameSource) -> Result<Self> {
        let mut frames = Vec::new();
        let (mut w, mut h) = (0, 0);
        for i in 0..video.frame_count() {
            let g = video.frame(i)?.into_gray()?;
            if i == 0 {
                (w, h) = (g.width, g.height);
            } else if (g.width, g.height) != (w, h) {
                return Err(Error::shape("frames of one video must share dimensions"));
            }
            frames.extend_from_slice(g.data());
        }
        Self::new(w.max(1), h.max(1), video.fps() as f32, frames)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + self.frames.len());
        out.extend_from_slice(RAW_MAGIC);
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        out.extend_from_slice(&(self.frame_count() as u32).to_le_bytes());
        out.extend_from_slice(&self.fps.to_le_bytes());
        out.extend_from_slice(&self.frames);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 20 || &bytes[..4] != RAW_MAGIC {
            return Err(Error::Format("not a CFVD raw-frames file".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let (w, h, n) = (u32_at(4), u32_at(8), u32_at(12));
        let fps = f32::from_le_bytes(bytes[16..20].try_into().unwrap());
        let expected = w
            .checked_mul(h)
            .and_then(|s| s.checked_mul(n))
            .ok_or_else(|| Error::Format("frame payload size overflows".into()))?;
        if bytes.len() - 20 != expected {
            return Err(Error::Format(format!(
                "expected {expected} payload bytes for {n} frames of {w}x{h}, got {}",
                bytes.len() - 20
            )));
        }
        Self::new(w, h, fps, bytes[20..].to_vec())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }
}

impl FrameSource for RawVideo {
    fn fps(&self) -> f64 {
        f64::from(self.fps)
    }

    fn frame_count(&self) -> usize {
        self.frames.len() / (self.width * self.height)
    }

    fn frame(&self, index: usize) -> Result<Frame> {
        let size = self.width * self.height;
        let bytes = self
            .frames
            .get(index * size..(index + 1) * size)
            .ok_or_else(|| Error::invalid(format!("frame {index} out of range")))?;
        Ok(Frame::Gray(GrayFrame::new(self.width, self.height, bytes.to_vec())?))
    }
}
