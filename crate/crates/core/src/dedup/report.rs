use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::frames::SignatureSequence;
use super::lsh::{LshIndex, LshParams, Search};
use crate::error::{Error, Result};

pub const DEFAULT_TAU: f64 = 0.9;
pub const DEFAULT_THRESHOLD_PCT: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DedupParams {
    pub tau: f64,
    pub threshold_pct: f64,
    pub lsh: LshParams,
    pub seed: u64,
}

impl Default for DedupParams {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            threshold_pct: DEFAULT_THRESHOLD_PCT,
            lsh: LshParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapPair {
    pub source_id: String,
    pub target_id: String,
    pub overlap_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub pairs: Vec<OverlapPair>,
    pub threshold_pct: f64,
    pub flagged: Vec<OverlapPair>,
}

impl OverlapReport {
    pub fn flagged_sources(&self) -> BTreeSet<&str> {
        self.flagged.iter().map(|p| p.source_id.as_str()).collect()
    }

    /// Source ids that survive deduplication, in the given order.
    pub fn filter_sources<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
        let flagged = self.flagged_sources();
        ids.into_iter().filter(|id| !flagged.contains(id)).collect()
    }
}

/// Percentage of `source` frames matched in each indexed video, in index order.
pub fn overlap(source: &SignatureSequence, idx: &LshIndex, tau: f64) -> Result<Vec<(String, f64)>> {
    if source.frames.is_empty() {
        return Err(Error::invalid(format!("source {} has no frames", source.video_id)));
    }
    let mut hits = vec![0usize; idx.video_count()];
    for v in &source.frames {
        let videos: BTreeSet<usize> = idx.matches(v, tau).into_iter().map(|(video, _)| video).collect();
        for video in videos {
            hits[video] += 1;
        }
    }
    let n = source.frames.len();
    Ok(hits
        .into_iter()
        .enumerate()
        .map(|(video, h)| {
            let pct = if h == n { 100.0 } else { 100.0 * h as f64 / n as f64 };
            (idx.video_id(video).to_string(), pct)
        })
        .collect())
}

pub fn build_index(targets: &[SignatureSequence], params: &DedupParams, search: Search) -> Result<LshIndex> {
    let mut idx = LshIndex::new(params.lsh, params.seed)?.with_search(search);
    for t in targets {
        idx.insert(t);
    }
    Ok(idx)
}

pub fn dedup_report(
    sources: &[SignatureSequence],
    targets: &[SignatureSequence],
    params: &DedupParams,
) -> Result<OverlapReport> {
    dedup_report_with(sources, targets, params, Search::Lsh)
}

pub fn dedup_report_with(
    sources: &[SignatureSequence],
    targets: &[SignatureSequence],
    params: &DedupParams,
    search: Search,
) -> Result<OverlapReport> {
    if !(0.0..=100.0).contains(&params.threshold_pct) {
        return Err(Error::invalid(format!(
            "threshold must be within [0, 100], got {}",
            params.threshold_pct
        )));
    }
    if !(-1.0..=1.0).contains(&params.tau) {
        return Err(Error::invalid(format!("tau must be within [-1, 1], got {}", params.tau)));
    }
    let idx = build_index(targets, params, search)?;
    let per_source = sources
        .par_iter()
        .map(|s| {
            Ok(overlap(s, &idx, params.tau)?
                .into_iter()
                .filter(|&(_, pct)| pct > 0.0)
                .map(|(target_id, overlap_pct)| OverlapPair {
                    source_id: s.video_id.clone(),
                    target_id,
                    overlap_pct,
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<OverlapPair> = per_source.into_iter().flatten().collect();
    let flagged = pairs
        .iter()
        .filter(|p| p.overlap_pct >= params.threshold_pct)
        .cloned()
        .collect();
    Ok(OverlapReport {
        pairs,
        threshold_pct: params.threshold_pct,
        flagged,
    })
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    params: &'a DedupParams,
    sources: usize,
    targets: usize,
    pairs: usize,
    flagged: usize,
    flagged_sources: usize,
}

/// Write `pairs.jsonl`, `flagged.jsonl`, `summary.json` and the surviving
/// source ids (`filtered_sources.txt`) into `dir`.
pub fn write_report(
    dir: impl AsRef<Path>,
    report: &OverlapReport,
    params: &DedupParams,
    source_ids: &[String],
    target_count: usize,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let jsonl = |rows: &[OverlapPair]| -> Result<String> {
        let mut s = String::new();
        for r in rows {
            s.push_str(&serde_json::to_string(r).map_err(|e| Error::Format(e.to_string()))?);
            s.push('\n');
        }
        Ok(s)
    };
    let write = |name: &str, body: String| {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(p, e))
    };
    write("pairs.jsonl", jsonl(&report.pairs)?)?;
    write("flagged.jsonl", jsonl(&report.flagged)?)?;
    let summary = Summary {
        params,
        sources: source_ids.len(),
        targets: target_count,
        pairs: report.pairs.len(),
        flagged: report.flagged.len(),
        flagged_sources: report.flagged_sources().len(),
    };
    let mut body = serde_json::to_string_pretty(&summary).map_err(|e| Error::Format(e.to_string()))?;
    body.push('\n');
    write("summary.json", body)?;
    let mut kept = String::new();
    for id in report.filter_sources(source_ids.iter().map(String::as_str)) {
        kept.push_str(id);
        kept.push('\n');
    }
    write("filtered_sources.txt", kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dedup::census::cosine;
    use crate::dedup::frames::{decode_frames, TARGET_FPS};
    use crate::dedup::synthetic::{injected_corpus, SyntheticVideo};

    fn sig(id: &str, v: &SyntheticVideo) -> SignatureSequence {
        decode_frames(id, v, TARGET_FPS, 112).unwrap()
    }

    fn index(targets: &[SignatureSequence]) -> LshIndex {
        build_index(targets, &DedupParams::default(), Search::Lsh).unwrap()
    }

    fn max_cross_cosine(a: &SignatureSequence, b: &SignatureSequence) -> f64 {
        a.frames
            .iter()
            .flat_map(|x| b.frames.iter().map(move |y| cosine(x, y)))
            .fold(f64::MIN, f64::max)
    }

    #[test]
    fn self_overlap_is_full() {
        let s = sig("a", &SyntheticVideo::new(1, 24, 16.0, 112));
        let idx = index(std::slice::from_ref(&s));
        assert_eq!(overlap(&s, &idx, 0.9).unwrap(), vec![("a".to_string(), 100.0)]);
        assert_eq!(overlap(&s, &idx, 1.0).unwrap()[0].1, 100.0);
    }

    #[test]
    fn middle_half() {
        let v = SyntheticVideo::new(8, 32, 16.0, 112);
        let src = sig("src", &v);
        let tgt = sig("tgt", &v.crop(8, 16));
        let idx = index(&[tgt]);
        let pct = overlap(&src, &idx, 0.9).unwrap()[0].1;
        assert!((pct - 50.0).abs() <= 100.0 / 32.0 + 1e-9, "{pct}");
    }

    #[test]
    fn disjoint_content() {
        let a = sig("a", &SyntheticVideo::new(100, 16, 16.0, 112));
        // Content is random, so pick a partner the exact oracle calls disjoint.
        let b = (200..220)
            .map(|s| sig("b", &SyntheticVideo::new(s, 16, 16.0, 112)))
            .find(|b| max_cross_cosine(&a, b) < 0.9)
            .expect("no disjoint partner among 20 seeds");
        let idx = index(&[b]);
        assert_eq!(overlap(&a, &idx, 0.9).unwrap()[0].1, 0.0);
    }

    #[test]
    fn empty_source_rejected() {
        let s = SignatureSequence {
            video_id: "x".into(),
            frames: vec![],
        };
        assert!(overlap(&s, &index(&[]), 0.9).is_err());
    }

    #[test]
    fn threshold_semantics() {
        let c = injected_corpus(2, 12, 6, 3, 32);
        let src: Vec<_> = c.sources.iter().map(|(id, v)| sig(id, v)).collect();
        let tgt: Vec<_> = c.targets.iter().map(|(id, v)| sig(id, v)).collect();
        let zero = DedupParams {
            threshold_pct: 0.0,
            ..Default::default()
        };
        let r = dedup_report(&src, &tgt, &zero).unwrap();
        assert_eq!(r.flagged, r.pairs);
        assert!(r.pairs.iter().all(|p| p.overlap_pct > 0.0 && p.overlap_pct <= 100.0));
        let d = dedup_report(&src, &tgt, &DedupParams::default()).unwrap();
        let found: BTreeSet<_> = d
            .flagged
            .iter()
            .map(|p| (p.source_id.clone(), p.target_id.clone()))
            .collect();
        assert!(c.duplicates.is_subset(&found));
    }

    #[test]
    fn no_shared_content() {
        let sources: Vec<_> = (0..6).map(|i| sig(&format!("s{i}"), &SyntheticVideo::new(1000 + i, 16, 16.0, 112))).collect();
        let targets: Vec<_> = (0..6).map(|i| sig(&format!("t{i}"), &SyntheticVideo::new(2000 + i, 16, 16.0, 112))).collect();
        let r = dedup_report(&sources, &targets, &DedupParams::default()).unwrap();
        assert!(r.flagged.is_empty(), "{:?}", r.flagged);
    }

    #[test]
    fn lowering_tau_is_monotone() {
        let v = SyntheticVideo::new(4, 32, 16.0, 112);
        let src = sig("s", &v.rescaled(224));
        let tgt = sig("t", &v.crop(4, 20));
        let idx = index(&[tgt]);
        let mut last = -1.0;
        for tau in [1.0, 0.99, 0.95, 0.9, 0.8, 0.5] {
            let pct = overlap(&src, &idx, tau).unwrap()[0].1;
            assert!(pct >= last);
            last = pct;
        }
    }

    #[test]
    fn report_files() {
        let c = injected_corpus(5, 4, 2, 1, 16);
        let src: Vec<_> = c.sources.iter().map(|(id, v)| sig(id, v)).collect();
        let tgt: Vec<_> = c.targets.iter().map(|(id, v)| sig(id, v)).collect();
        let p = DedupParams::default();
        let r = dedup_report(&src, &tgt, &p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let ids: Vec<String> = c.sources.iter().map(|(id, _)| id.clone()).collect();
        write_report(dir.path(), &r, &p, &ids, tgt.len()).unwrap();
        let kept = fs::read_to_string(dir.path().join("filtered_sources.txt")).unwrap();
        assert!(!kept.lines().any(|l| l == "s0000"));
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["flagged"], r.flagged.len());
        let lines = fs::read_to_string(dir.path().join("pairs.jsonl")).unwrap();
        assert_eq!(lines.lines().count(), r.pairs.len());
    }
}
