//! Dataset manifests: the ordered (video, label, clip window) rows passed
//! between pipeline stages, persisted as canonical JSONL.
//!
//! Line 1 is a header object `{"format":..,"seed":..,"provenance":{..}}`;
//! every following line is one row. Floats are written in fixed notation with
//! six decimals, so equal manifests always serialize to equal bytes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::corpus::{LabelSpace, VideoRecord};
use crate::error::{Error, Result};

pub const MANIFEST_FORMAT: &str = "corpusforge-manifest-v1";

/// Slack allowed when checking a clip window against its video duration.
const CONTAINMENT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub video_id: String,
    pub label: String,
    pub clip_start_s: f64,
    pub clip_len_s: f64,
}

impl ManifestRow {
    pub fn new(video_id: impl Into<String>, label: impl Into<String>, start: f64, len: f64) -> Self {
        Self {
            video_id: video_id.into(),
            label: label.into(),
            clip_start_s: start,
            clip_len_s: len,
        }
    }

    pub fn clip_end_s(&self) -> f64 {
        self.clip_start_s + self.clip_len_s
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub rows: Vec<ManifestRow>,
    /// Builder name to its parameter string.
    pub provenance: BTreeMap<String, String>,
    pub seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLine {
    format: String,
    seed: u64,
    provenance: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RowLine {
    video_id: String,
    label: String,
    clip_start_s: f64,
    clip_len_s: f64,
}

fn fmt_float(x: f64) -> String {
    // Collapse -0.0 so that it does not print as "-0.000000".
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.6}")
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

impl DatasetManifest {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct video ids in row order.
    pub fn video_ids(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.rows
            .iter()
            .map(|r| r.video_id.as_str())
            .filter(|id| seen.insert(*id))
            .collect()
    }

    /// Corpus records referenced by this manifest, in corpus order.
    pub fn select_videos(&self, corpus: &[VideoRecord]) -> Vec<VideoRecord> {
        let ids: HashSet<&str> = self.rows.iter().map(|r| r.video_id.as_str()).collect();
        corpus.iter().filter(|v| ids.contains(v.id.as_str())).cloned().collect()
    }

    pub fn with_provenance(mut self, builder: impl Into<String>, params: impl Into<String>) -> Self {
        self.provenance.insert(builder.into(), params.into());
        self
    }

    /// Checks the row-local invariants: non-negative starts, positive lengths,
    /// finite values and no duplicate `(video_id, clip_start_s)` pair.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            check_row(r).map_err(|m| Error::validation(format!("row {}: {m}", i + 1)))?;
            if !seen.insert((r.video_id.as_str(), fmt_float(r.clip_start_s))) {
                return Err(Error::validation(format!(
                    "row {}: duplicate (video_id, clip_start_s) = ({}, {})",
                    i + 1,
                    r.video_id,
                    fmt_float(r.clip_start_s)
                )));
            }
        }
        Ok(())
    }

    /// Checks rows against the corpus they reference (ids exist, windows fit
    /// inside the video) and, when given, that every label is in `space`.
    pub fn validate_against(&self, corpus: &[VideoRecord], space: Option<&LabelSpace>) -> Result<()> {
        self.validate()?;
        let by_id: HashMap<&str, &VideoRecord> = corpus.iter().map(|v| (v.id.as_str(), v)).collect();
        for (i, r) in self.rows.iter().enumerate() {
            let v = by_id.get(r.video_id.as_str()).ok_or_else(|| {
                Error::validation(format!("row {}: unknown video id {}", i + 1, r.video_id))
            })?;
            if r.clip_end_s() > v.duration_s + CONTAINMENT_EPS {
                return Err(Error::validation(format!(
                    "row {}: clip [{}, {}] exceeds duration {} of {}",
                    i + 1,
                    r.clip_start_s,
                    r.clip_end_s(),
                    v.duration_s,
                    v.id
                )));
            }
            if let Some(space) = space {
                if !space.contains_label(&r.label) {
                    return Err(Error::validation(format!(
                        "row {}: label {:?} not in label space {}",
                        i + 1,
                        r.label,
                        space.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> Result<String> {
        self.validate()?;
        let mut out = String::new();
        out.push_str("{\"format\":");
        out.push_str(&json_str(MANIFEST_FORMAT));
        write!(out, ",\"seed\":{},\"provenance\":{{", self.seed).unwrap();
        for (i, (k, v)) in self.provenance.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{}:{}", json_str(k), json_str(v)).unwrap();
        }
        out.push_str("}}\n");
        for r in &self.rows {
            writeln!(
                out,
                "{{\"video_id\":{},\"label\":{},\"clip_start_s\":{},\"clip_len_s\":{}}}",
                json_str(&r.video_id),
                json_str(&r.label),
                fmt_float(r.clip_start_s),
                fmt_float(r.clip_len_s)
            )
            .unwrap();
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let Some((hi, header)) = lines.next() else {
            return Ok(Self::default());
        };
        let header: HeaderLine = serde_json::from_str(header).map_err(|e| Error::Parse {
            line: hi + 1,
            message: e.to_string(),
        })?;
        if header.format != MANIFEST_FORMAT {
            return Err(Error::Parse {
                line: hi + 1,
                message: format!("unsupported manifest format {:?}", header.format),
            });
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let r: RowLine = serde_json::from_str(line).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            rows.push(ManifestRow {
                video_id: r.video_id,
                label: r.label,
                clip_start_s: r.clip_start_s,
                clip_len_s: r.clip_len_s,
            });
        }
        let m = Self {
            rows,
            provenance: header.provenance,
            seed: header.seed,
        };
        m.validate()?;
        Ok(m)
    }
}

fn check_row(r: &ManifestRow) -> std::result::Result<(), String> {
    if r.video_id.is_empty() {
        return Err("empty video_id".into());
    }
    if r.label.is_empty() {
        return Err("empty label".into());
    }
    if !(r.clip_start_s.is_finite() && r.clip_start_s >= 0.0) {
        return Err(format!("clip_start_s must be >= 0, got {}", r.clip_start_s));
    }
    if !(r.clip_len_s.is_finite() && r.clip_len_s > 0.0) {
        return Err(format!("clip_len_s must be > 0, got {}", r.clip_len_s));
    }
    Ok(())
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DatasetManifest::from_jsonl(&text)
}

/// Writes the canonical JSONL form. Invariant violations abort before the
/// file is touched.
pub fn save_manifest(m: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = m.to_jsonl()?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// As [`save_manifest`], additionally checking every row against `corpus`.
pub fn save_manifest_checked(
    m: &DatasetManifest,
    corpus: &[VideoRecord],
    path: impl AsRef<Path>,
) -> Result<()> {
    m.validate_against(corpus, None)?;
    save_manifest(m, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> DatasetManifest {
        let mut m = DatasetManifest::new(42).with_provenance("sample", "strategy=sqrt budget=2");
        m.rows.push(ManifestRow::new("v1", "catching fish", 0.0, 3.5));
        m.rows.push(ManifestRow::new("v\"2", "burn candle", 1.25, 2.0));
        m
    }

    #[test]
    fn empty_file_is_empty_manifest() {
        let m = DatasetManifest::from_jsonl("").unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn zero_rows_writes_only_header() {
        let text = DatasetManifest::new(3).to_jsonl().unwrap();
        assert_eq!(
            text,
            "{\"format\":\"corpusforge-manifest-v1\",\"seed\":3,\"provenance\":{}}\n"
        );
    }

    #[test]
    fn golden_bytes() {
        let text = sample().to_jsonl().unwrap();
        let expected = concat!(
            "{\"format\":\"corpusforge-manifest-v1\",\"seed\":42,\"provenance\":{\"sample\":\"strategy=sqrt budget=2\"}}\n",
            "{\"video_id\":\"v1\",\"label\":\"catching fish\",\"clip_start_s\":0.000000,\"clip_len_s\":3.500000}\n",
            "{\"video_id\":\"v\\\"2\",\"label\":\"burn candle\",\"clip_start_s\":1.250000,\"clip_len_s\":2.000000}\n",
        );
        assert_eq!(text, expected);
    }

    #[test]
    fn file_roundtrip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        let q = dir.path().join("m2.jsonl");
        save_manifest(&sample(), &p).unwrap();
        let loaded = load_manifest(&p).unwrap();
        assert_eq!(loaded, sample());
        save_manifest(&loaded, &q).unwrap();
        assert_eq!(fs::read(&p).unwrap(), fs::read(&q).unwrap());
    }

    #[test]
    fn negative_start_rejected_on_load() {
        let text = concat!(
            "{\"format\":\"corpusforge-manifest-v1\",\"seed\":1,\"provenance\":{}}\n",
            "{\"video_id\":\"a\",\"label\":\"x\",\"clip_start_s\":-1.0,\"clip_len_s\":2.0}\n",
        );
        assert!(matches!(DatasetManifest::from_jsonl(text), Err(Error::Validation(_))));
    }

    #[test]
    fn duplicate_rows_rejected() {
        let mut m = sample();
        m.rows.push(ManifestRow::new("v1", "other", 0.0, 1.0));
        assert!(matches!(m.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn parse_error_reports_line() {
        let text = concat!(
            "{\"format\":\"corpusforge-manifest-v1\",\"seed\":1,\"provenance\":{}}\n",
            "{\"video_id\":\"a\",\"label\":\"x\",\"clip_start_s\":0.0,\"clip_len_s\":2.0}\n",
            "{\"video_id\":\"b\",\"label\":\"x\",\"clip_start_s\":0.0,\"clip_len_s\":2.0,\"extra\":true}\n",
        );
        match DatasetManifest::from_jsonl(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_video_rejected_when_corpus_supplied() {
        let corpus = vec![VideoRecord::new("v1", 10.0, ["x"])];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        let err = save_manifest_checked(&sample(), &corpus, &p).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(!p.exists());
    }

    #[test]
    fn window_must_fit_video() {
        let corpus = vec![VideoRecord::new("a", 2.0, ["x"])];
        let mut m = DatasetManifest::new(0);
        m.rows.push(ManifestRow::new("a", "x", 1.0, 1.5));
        assert!(m.validate_against(&corpus, None).is_err());
        m.rows[0].clip_len_s = 1.0;
        assert!(m.validate_against(&corpus, None).is_ok());
    }

    fn arb_manifest() -> impl Strategy<Value = DatasetManifest> {
        let row = ("[a-z0-9_]{1,8}", "[a-z ]{1,12}", 0u64..100_000_000, 1u64..100_000_000);
        (
            proptest::collection::vec(row, 0..20),
            proptest::collection::btree_map("[a-z]{1,6}", "[ -~]{0,16}", 0..4),
            any::<u64>(),
        )
            .prop_map(|(rows, provenance, seed)| {
                let mut seen = HashSet::new();
                let rows = rows
                    .into_iter()
                    .filter(|(id, _, s, _)| seen.insert((id.clone(), *s)))
                    .map(|(id, label, s, l)| {
                        ManifestRow::new(id, label, s as f64 / 1e6, l as f64 / 1e6)
                    })
                    .collect();
                DatasetManifest {
                    rows,
                    provenance,
                    seed,
                }
            })
    }

    proptest! {
        #[test]
        fn roundtrip_structural_and_byte_stable(m in arb_manifest()) {
            let text = m.to_jsonl().unwrap();
            let back = DatasetManifest::from_jsonl(&text).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(back.to_jsonl().unwrap(), text);
        }
    }
}
