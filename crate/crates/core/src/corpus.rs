//! Videos, label spaces and label statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FRAME_RATE: f64 = 16.0;
pub const DEFAULT_MIN_COUNT: usize = 50;

fn default_frame_rate() -> f64 {
    DEFAULT_FRAME_RATE
}

/// One corpus video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VideoRecord {
    pub id: String,
    pub duration_s: f64,
    pub hashtags: BTreeSet<String>,
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_uri: Option<String>,
}

impl VideoRecord {
    pub fn new<I, S>(id: impl Into<String>, duration_s: f64, hashtags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            id: id.into(),
            duration_s,
            hashtags: hashtags.into_iter().map(|h| normalize_hashtag(h.as_ref())).collect(),
            frame_rate: DEFAULT_FRAME_RATE,
            source_uri: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::validation("video id is empty"));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::validation(format!(
                "video {}: duration_s must be positive, got {}",
                self.id, self.duration_s
            )));
        }
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(Error::validation(format!(
                "video {}: frame_rate must be positive",
                self.id
            )));
        }
        Ok(())
    }
}

/// Lowercases a hashtag and drops a leading `#`.
pub fn normalize_hashtag(tag: &str) -> String {
    tag.trim().trim_start_matches('#').to_lowercase()
}

pub fn validate_corpus(corpus: &[VideoRecord]) -> Result<()> {
    let mut seen = HashSet::with_capacity(corpus.len());
    for v in corpus {
        v.validate()?;
        if !seen.insert(v.id.as_str()) {
            return Err(Error::validation(format!("duplicate video id {}", v.id)));
        }
    }
    Ok(())
}

/// Reads a corpus JSONL file, one [`VideoRecord`] per line.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<VideoRecord>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut rec: VideoRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        rec.hashtags = rec.hashtags.iter().map(|h| normalize_hashtag(h)).collect();
        out.push(rec);
    }
    validate_corpus(&out)?;
    Ok(out)
}

pub fn save_corpus(corpus: &[VideoRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    validate_corpus(corpus)?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for v in corpus {
        let line = serde_json::to_string(v).expect("video record serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Which of the four label-space families a space belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Seed,
    Verb,
    Noun,
    VerbNoun,
}

impl std::str::FromStr for LabelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "seed" => Ok(LabelKind::Seed),
            "verb" => Ok(LabelKind::Verb),
            "noun" => Ok(LabelKind::Noun),
            "verbnoun" | "verb+noun" | "verb-noun" => Ok(LabelKind::VerbNoun),
            other => Err(Error::invalid(format!("unknown label kind {other:?}"))),
        }
    }
}

/// Labels and the hashtags that select videos for them.
///
/// Fields are declared in alphabetical order so the JSON form has sorted keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelSpace {
    pub entries: BTreeMap<String, BTreeSet<String>>,
    pub kind: LabelKind,
    pub min_count: usize,
    pub name: String,
}

impl LabelSpace {
    pub fn new(name: impl Into<String>, kind: LabelKind, min_count: usize) -> Self {
        Self {
            entries: BTreeMap::new(),
            kind,
            min_count,
            name: name.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn contains_label(&self, label: &str) -> bool {
        self.entries.contains_key(label)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_count == 0 {
            return Err(Error::validation("min_count must be at least 1"));
        }
        for (label, tags) in &self.entries {
            if tags.is_empty() {
                return Err(Error::validation(format!("label {label:?} has no hashtags")));
            }
            if let Some(bad) = tags
                .iter()
                .find(|t| t.is_empty() || **t != normalize_hashtag(t) || t.chars().any(char::is_whitespace))
            {
                return Err(Error::validation(format!(
                    "label {label:?} has malformed hashtag {bad:?}"
                )));
            }
        }
        Ok(())
    }

    /// Inverted index from hashtag to the labels it selects.
    pub fn hashtag_index(&self) -> HashMap<&str, Vec<&str>> {
        let mut idx: HashMap<&str, Vec<&str>> = HashMap::new();
        for (label, tags) in &self.entries {
            for t in tags {
                idx.entry(t.as_str()).or_default().push(label.as_str());
            }
        }
        idx
    }

    /// Labels whose hashtag set intersects the video's hashtags, sorted.
    pub fn matched_labels(&self, video: &VideoRecord) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .entries
            .iter()
            .filter(|(_, tags)| video.hashtags.iter().any(|h| tags.contains(h)))
            .map(|(l, _)| l.as_str())
            .collect();
        out.sort_unstable();
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let space: LabelSpace = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        space.validate()?;
        Ok(space)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.validate()?;
        let mut text = serde_json::to_string_pretty(self).expect("label space serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Videos per label. Multi-label videos count once toward each matched label.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelHistogram {
    pub counts: BTreeMap<String, u64>,
}

impl LabelHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, label: &str) -> u64 {
        self.counts.get(label).copied().unwrap_or(0)
    }

    /// Labels sorted ascending by count, ties by label string.
    pub fn ascending(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<(&str, u64)> = self.counts.iter().map(|(l, &c)| (l.as_str(), c)).collect();
        v.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(b.0)));
        v
    }
}

/// Counts, for every label in `space`, the videos whose hashtags intersect it.
pub fn label_histogram(corpus: &[VideoRecord], space: &LabelSpace) -> LabelHistogram {
    let index = space.hashtag_index();
    let mut counts: BTreeMap<String, u64> = space.labels().map(|l| (l.to_string(), 0)).collect();
    let mut hit: Vec<&str> = Vec::new();
    for video in corpus {
        hit.clear();
        for h in &video.hashtags {
            if let Some(labels) = index.get(h.as_str()) {
                hit.extend(labels.iter().copied());
            }
        }
        hit.sort_unstable();
        hit.dedup();
        for l in &hit {
            *counts.get_mut(*l).expect("label from index") += 1;
        }
    }
    LabelHistogram { counts }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(entries: &[(&str, &[&str])]) -> LabelSpace {
        let mut s = LabelSpace::new("t", LabelKind::Seed, 1);
        for (l, tags) in entries {
            s.entries
                .insert(l.to_string(), tags.iter().map(|t| t.to_string()).collect());
        }
        s
    }

    #[test]
    fn single_matching_hashtag_counts_every_video() {
        let s = space(&[("A", &["a1", "a2"]), ("B", &["b"])]);
        let corpus: Vec<_> = (0..7)
            .map(|i| VideoRecord::new(format!("v{i}"), 3.0, [if i % 2 == 0 { "a1" } else { "a2" }]))
            .collect();
        let h = label_histogram(&corpus, &s);
        assert_eq!(h.get("A"), 7);
        assert_eq!(h.get("B"), 0);
        assert_eq!(h.total(), 7);
    }

    #[test]
    fn multi_label_video_counts_toward_each() {
        let s = space(&[("A", &["a", "x"]), ("B", &["b", "x"])]);
        let corpus = vec![VideoRecord::new("v", 2.0, ["x", "a"])];
        let h = label_histogram(&corpus, &s);
        assert_eq!(h.get("A"), 1);
        assert_eq!(h.get("B"), 1);
        assert_eq!(s.matched_labels(&corpus[0]), vec!["A", "B"]);
    }

    #[test]
    fn hashtags_are_normalized() {
        let v = VideoRecord::new("v", 1.0, ["#CatchFish"]);
        assert!(v.hashtags.contains("catchfish"));
    }

    #[test]
    fn corpus_validation() {
        let mut v = VideoRecord::new("v", 0.0, ["a"]);
        assert!(v.validate().is_err());
        v.duration_s = 1.0;
        assert!(v.validate().is_ok());
        assert!(validate_corpus(&[v.clone(), v]).is_err());
    }

    #[test]
    fn label_space_json_has_sorted_keys() {
        let s = space(&[("b", &["y"]), ("a", &["x"])]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"{"entries":{"a":["x"],"b":["y"]},"kind":"seed","min_count":1,"name":"t"}"#
        );
    }

    #[test]
    fn label_space_rejects_malformed_hashtags() {
        assert!(space(&[("a", &["has space"])]).validate().is_err());
        assert!(space(&[("a", &["#tag"])]).validate().is_err());
        assert!(space(&[("a", &[])]).validate().is_err());
    }

    #[test]
    fn corpus_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        let corpus = vec![
            VideoRecord::new("a", 2.5, ["x", "y"]),
            VideoRecord {
                source_uri: Some("s3://bucket/a.mp4".into()),
                ..VideoRecord::new("b", 1.0, ["z"])
            },
        ];
        save_corpus(&corpus, &p).unwrap();
        assert_eq!(load_corpus(&p).unwrap(), corpus);
    }

    #[test]
    fn corpus_rejects_unknown_fields() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        fs::write(&p, "{\"id\":\"a\",\"duration_s\":1.0,\"hashtags\":[],\"extra\":1}\n").unwrap();
        assert!(matches!(load_corpus(&p), Err(Error::Parse { line: 1, .. })));
    }
}
