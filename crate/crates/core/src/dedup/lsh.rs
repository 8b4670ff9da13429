//! Random-hyperplane LSH over frame signatures.

use std::collections::HashMap;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::census::{cosine, Signature, SIGNATURE_DIM};
use super::frames::SignatureSequence;
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_BANDS: usize = 16;
pub const DEFAULT_BITS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LshParams {
    pub bands: usize,
    pub bits: usize,
}

impl Default for LshParams {
    fn default() -> Self {
        Self {
            bands: DEFAULT_BANDS,
            bits: DEFAULT_BITS,
        }
    }
}

/// How candidates are produced before the exact cosine filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Search {
    #[default]
    Lsh,
    /// Every stored frame is a candidate.
    Exhaustive,
}

#[derive(Debug, Clone)]
pub struct LshIndex {
    params: LshParams,
    planes: Vec<Signature>,
    tables: Vec<HashMap<u32, Vec<u32>>>,
    search: Search,
    ids: Vec<String>,
    /// `(video, frame)` of every stored vector.
    owners: Vec<(u32, u32)>,
    vectors: Vec<Signature>,
}

impl LshIndex {
    pub fn new(params: LshParams, seed: u64) -> Result<Self> {
        if params.bands == 0 || params.bits == 0 || params.bits > 32 {
            return Err(Error::invalid(format!(
                "need bands >= 1 and 1 <= bits <= 32, got {params:?}"
            )));
        }
        let mut r = rng::substream(seed, "lsh-planes");
        let planes = (0..params.bands * params.bits)
            .map(|_| loop {
                let mut p = [0.0; SIGNATURE_DIM];
                for x in &mut p {
                    *x = StandardNormal.sample(&mut r);
                }
                let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    break p.map(|x| x / norm);
                }
            })
            .collect();
        Ok(Self {
            params,
            planes,
            tables: vec![HashMap::new(); params.bands],
            search: Search::Lsh,
            ids: Vec::new(),
            owners: Vec::new(),
            vectors: Vec::new(),
        })
    }

    pub fn with_search(mut self, search: Search) -> Self {
        self.search = search;
        self
    }

    pub fn params(&self) -> LshParams {
        self.params
    }

    pub fn video_count(&self) -> usize {
        self.ids.len()
    }

    pub fn video_id(&self, video: usize) -> &str {
        &self.ids[video]
    }

    pub fn frame_count(&self) -> usize {
        self.vectors.len()
    }

    /// `r`-bit key of `v` in `band`: bit `j` is the sign of its dot product
    /// with the band's `j`-th hyperplane.
    pub fn key(&self, band: usize, v: &Signature) -> u32 {
        let bits = self.params.bits;
        self.planes[band * bits..(band + 1) * bits]
            .iter()
            .enumerate()
            .filter(|(_, p)| p.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() > 0.0)
            .fold(0, |k, (j, _)| k | (1 << j))
    }

    pub fn insert(&mut self, sig: &SignatureSequence) -> usize {
        let video = self.ids.len();
        self.ids.push(sig.video_id.clone());
        for (f, v) in sig.frames.iter().enumerate() {
            let entry = self.vectors.len() as u32;
            for band in 0..self.params.bands {
                let k = self.key(band, v);
                self.tables[band].entry(k).or_default().push(entry);
            }
            self.owners.push((video as u32, f as u32));
            self.vectors.push(*v);
        }
        video
    }

    /// Stored entries sharing at least one band key with `v`, ascending.
    pub fn candidates(&self, v: &Signature) -> Vec<usize> {
        if self.search == Search::Exhaustive {
            return (0..self.vectors.len()).collect();
        }
        let mut out: Vec<usize> = (0..self.params.bands)
            .filter_map(|band| self.tables[band].get(&self.key(band, v)))
            .flatten()
            .map(|&e| e as usize)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Candidate entries with cosine similarity at least `tau`, as
    /// `(video index, frame index)`.
    pub fn matches(&self, v: &Signature, tau: f64) -> Vec<(usize, usize)> {
        self.candidates(v)
            .into_iter()
            .filter(|&e| cosine(&self.vectors[e], v) >= tau)
            .map(|e| {
                let (video, frame) = self.owners[e];
                (video as usize, frame as usize)
            })
            .collect()
    }

    pub fn frame_match(&self, v: &Signature, tau: f64) -> Vec<(&str, usize)> {
        self.matches(v, tau)
            .into_iter()
            .map(|(video, frame)| (self.ids[video].as_str(), frame))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_sig(r: &mut impl Rng) -> Signature {
        let mut v = [0.0; 64];
        for x in &mut v {
            *x = r.random::<f64>();
        }
        let s: f64 = v.iter().sum();
        v.map(|x| x / s)
    }

    fn seq(id: &str, frames: Vec<Signature>) -> SignatureSequence {
        SignatureSequence {
            video_id: id.into(),
            frames,
        }
    }

    #[test]
    fn empty_index() {
        let idx = LshIndex::new(LshParams::default(), 1).unwrap();
        let mut r = rng::seeded(0);
        assert!(idx.frame_match(&random_sig(&mut r), 0.0).is_empty());
    }

    #[test]
    fn stored_vector_found() {
        let mut r = rng::seeded(3);
        let mut idx = LshIndex::new(LshParams::default(), 1).unwrap();
        let frames: Vec<_> = (0..20).map(|_| random_sig(&mut r)).collect();
        idx.insert(&seq("a", frames.clone()));
        for (i, f) in frames.iter().enumerate() {
            assert!(idx.candidates(f).contains(&i));
            assert!(idx.frame_match(f, 1.0).contains(&("a", i)));
        }
    }

    #[test]
    fn perturbed_misses_at_tau_one() {
        let mut r = rng::seeded(4);
        let v = random_sig(&mut r);
        let mut w = v;
        w[0] += 0.01;
        let mut idx = LshIndex::new(LshParams::default(), 1).unwrap();
        idx.insert(&seq("a", vec![v]));
        assert!(idx.frame_match(&w, 1.0).is_empty());
        assert_eq!(idx.frame_match(&w, 0.9), vec![("a", 0)]);
    }

    #[test]
    fn keys_reproducible() {
        let a = LshIndex::new(LshParams::default(), 9).unwrap();
        let b = LshIndex::new(LshParams::default(), 9).unwrap();
        let v = random_sig(&mut rng::seeded(1));
        for band in 0..16 {
            assert_eq!(a.key(band, &v), b.key(band, &v));
            assert!(a.key(band, &v) < 256);
        }
    }

    #[test]
    fn bad_params() {
        assert!(LshIndex::new(LshParams { bands: 0, bits: 8 }, 0).is_err());
        assert!(LshIndex::new(LshParams { bands: 1, bits: 33 }, 0).is_err());
    }
}
