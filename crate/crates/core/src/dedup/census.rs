//! Census-transform frame signatures.
//!
//! Neighbour order for the 8-bit code, clockwise from the top-left:
//!
//! ```text
//!  bit0 bit1 bit2
//!  bit7  c   bit3
//!  bit6 bit5 bit4
//! ```
//!
//! Bit `i` is set iff neighbour `i` is strictly greater than the centre.

use super::frames::GrayFrame;
use crate::error::{Error, Result};

pub const SIGNATURE_SIDE: usize = 112;
pub const SIGNATURE_DIM: usize = 64;

pub type Signature = [f64; SIGNATURE_DIM];

/// `(dx, dy)` offsets indexed by bit.
pub const NEIGHBOURS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

/// Census code of the pixel at `(x, y)`; both must be interior.
#[inline]
pub fn census_code(frame: &GrayFrame, x: usize, y: usize) -> u8 {
    let w = frame.width;
    let px = frame.data();
    let c = px[y * w + x];
    let mut code = 0u8;
    for (bit, &(dx, dy)) in NEIGHBOURS.iter().enumerate() {
        let nx = (x as isize + dx) as usize;
        let ny = (y as isize + dy) as usize;
        if px[ny * w + nx] > c {
            code |= 1 << bit;
        }
    }
    code
}

/// 256-bin histogram of census codes over interior pixels.
pub fn census_histogram(frame: &GrayFrame) -> [u64; 256] {
    let mut hist = [0u64; 256];
    if frame.width < 3 || frame.height < 3 {
        return hist;
    }
    for y in 1..frame.height - 1 {
        for x in 1..frame.width - 1 {
            hist[census_code(frame, x, y) as usize] += 1;
        }
    }
    hist
}

/// Folded (`code / 4`) and L1-normalized census histogram of a 112×112 frame.
pub fn census_signature(frame: &GrayFrame) -> Result<Signature> {
    if frame.width != SIGNATURE_SIDE || frame.height != SIGNATURE_SIDE {
        return Err(Error::shape(format!(
            "census signature needs a {SIGNATURE_SIDE}x{SIGNATURE_SIDE} frame, got {}x{}",
            frame.width, frame.height
        )));
    }
    let hist = census_histogram(frame);
    let total: u64 = hist.iter().sum();
    let mut sig = [0.0; SIGNATURE_DIM];
    for (code, &n) in hist.iter().enumerate() {
        sig[code / 4] += n as f64;
    }
    for v in &mut sig {
        *v /= total as f64;
    }
    Ok(sig)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    if a == b && a.iter().any(|&x| x != 0.0) {
        return 1.0;
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}
