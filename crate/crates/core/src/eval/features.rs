//! Binary feature files consumed by the linear probe.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "CFFT" | u32 n | u32 d | n*d f32 row-major
//!        | u8 kind (0 = multi-class, 1 = multi-label)
//!        | kind 0: n u32 class indices
//!        | kind 1: u32 L, then n*L u8 (0 or 1)
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::probe::ProbeTargets;

pub const FEATURES_MAGIC: &[u8; 4] = b"CFFT";

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub features: Vec<Vec<f64>>,
    pub targets: ProbeTargets,
}

pub fn encode(set: &FeatureSet) -> Result<Vec<u8>> {
    let n = set.features.len();
    let d = set.features.first().map_or(0, Vec::len);
    if set.targets.len() != n || set.features.iter().any(|r| r.len() != d) {
        return Err(Error::shape("feature rows and targets disagree"));
    }
    let mut out = Vec::with_capacity(12 + n * d * 4 + n * 4);
    out.extend_from_slice(FEATURES_MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(d as u32).to_le_bytes());
    for x in set.features.iter().flatten() {
        out.extend_from_slice(&(*x as f32).to_le_bytes());
    }
    match &set.targets {
        ProbeTargets::Multiclass { labels, .. } => {
            out.push(0);
            for &y in labels {
                out.extend_from_slice(&(y as u32).to_le_bytes());
            }
        }
        ProbeTargets::Multilabel(m) => {
            out.push(1);
            let l = set.targets.outputs();
            out.extend_from_slice(&(l as u32).to_le_bytes());
            for row in m {
                out.extend(row.iter().map(|&b| u8::from(b)));
            }
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::Format(format!("truncated feature file at byte {}", self.pos))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<FeatureSet> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != FEATURES_MAGIC {
        return Err(Error::Format("bad feature file magic".into()));
    }
    let n = r.u32()? as usize;
    let d = r.u32()? as usize;
    let mut features = Vec::with_capacity(n);
    for _ in 0..n {
        let row = r.take(d * 4)?;
        features.push(
            row.chunks_exact(4)
                .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
                .collect(),
        );
    }
    let targets = match r.take(1)?[0] {
        0 => {
            let labels: Vec<usize> = (0..n).map(|_| r.u32().map(|v| v as usize)).collect::<Result<_>>()?;
            let classes = labels.iter().max().map_or(0, |m| m + 1);
            ProbeTargets::Multiclass { labels, classes }
        }
        1 => {
            let l = r.u32()? as usize;
            let mut m = Vec::with_capacity(n);
            for _ in 0..n {
                m.push(r.take(l)?.iter().map(|&b| b != 0).collect());
            }
            ProbeTargets::Multilabel(m)
        }
        k => return Err(Error::Format(format!("unknown label kind {k}"))),
    };
    if r.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after labels".into()));
    }
    Ok(FeatureSet { features, targets })
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureSet> {
    let path = path.as_ref();
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn write_features(set: &FeatureSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(set)?).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiclass_roundtrip() {
        let set = FeatureSet {
            features: vec![vec![0.5, -1.0], vec![2.0, 0.25], vec![0.0, 1.0]],
            targets: ProbeTargets::Multiclass { labels: vec![0, 2, 1], classes: 3 },
        };
        let bytes = encode(&set).unwrap();
        assert_eq!(&bytes[..4], b"CFFT");
        assert_eq!(decode(&bytes).unwrap(), set);
    }

    #[test]
    fn multilabel_roundtrip() {
        let set = FeatureSet {
            features: vec![vec![1.0], vec![2.0]],
            targets: ProbeTargets::Multilabel(vec![vec![true, false, true], vec![false, false, true]]),
        };
        assert_eq!(decode(&encode(&set).unwrap()).unwrap(), set);
    }

    #[test]
    fn truncated_is_rejected() {
        let set = FeatureSet {
            features: vec![vec![1.0]],
            targets: ProbeTargets::Multiclass { labels: vec![0], classes: 1 },
        };
        let bytes = encode(&set).unwrap();
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode(b"XXXX").is_err());
    }
}
