//! Relevant-hashtag generation from seed action labels.
//!
//! A seed phrase such as `"catching a fish"` is split into words, each word
//! is canonicalized (a small suffix stripper, see [`stem`]), and the hashtag
//! set is every concatenation of one variant per content word, in original and
//! reversed word order, plus the literal phrase with spaces removed.
//!
//! Stemming rules, applied to the lowercased letters of a word:
//!
//! | suffix | condition                          | result                     |
//! |--------|------------------------------------|----------------------------|
//! | `ing`  | remaining stem has a vowel, len ≥ 3 | strip, then tidy           |
//! | `ed`   | remaining stem has a vowel, len ≥ 3 | strip, then tidy           |
//! | `sses` |                                    | `ss`                       |
//! | `ies`  | len > 4                            | `y`                        |
//! | `ss`   |                                    | unchanged                  |
//! | `s`    | len > 3, not `us`/`is`             | strip                      |
//!
//! "Tidy" undoubles a final double consonant other than `l`, `s`, `z`
//! (`swimm` → `swim`), restores `e` after `at`/`bl`/`iz`, and restores `e`
//! on a one-syllable consonant-vowel-consonant stem (`bak` → `bake`).

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::corpus::{label_histogram, LabelKind, LabelSpace, VideoRecord};
use crate::error::{Error, Result};

pub const STOPWORDS: [&str; 8] = ["a", "an", "the", "of", "on", "in", "to", "with"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PosHint {
    Verb,
    Noun,
    Other,
    Stopword,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WordForm {
    pub surface: String,
    pub stem: String,
    pub pos_hint: PosHint,
}

impl WordForm {
    pub fn is_content(&self) -> bool {
        self.pos_hint != PosHint::Stopword
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedLabel {
    /// Label name as it will appear in the label space.
    pub text: String,
    pub words: Vec<WordForm>,
}

pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.contains(&word)
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Consonant test with the usual `y` rule: `y` after a consonant is a vowel.
fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        c if is_vowel(c) => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

fn has_vowel(w: &[u8]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

/// Number of vowel-consonant sequences in the word.
fn measure(w: &[u8]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..w.len() {
        let c = is_consonant(w, i);
        if c && prev_vowel {
            m += 1;
        }
        prev_vowel = !c;
    }
    m
}

/// Ends consonant-vowel-consonant with the last consonant not w, x or y.
fn ends_cvc(w: &[u8]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

fn ends_double_consonant(w: &[u8]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

fn tidy(mut w: Vec<u8>) -> Vec<u8> {
    if w.ends_with(b"at") || w.ends_with(b"bl") || w.ends_with(b"iz") {
        w.push(b'e');
    } else if ends_double_consonant(&w) && !matches!(w[w.len() - 1], b'l' | b's' | b'z') {
        w.pop();
    } else if measure(&w) == 1 && ends_cvc(&w) {
        w.push(b'e');
    }
    w
}

/// Suffix-stripping stem of a lowercase ASCII word.
pub fn stem(word: &str) -> String {
    let w = word.as_bytes();
    let n = w.len();
    let strip = |k: usize| -> Option<Vec<u8>> {
        let base = &w[..n - k];
        (base.len() >= 3 && has_vowel(base)).then(|| tidy(base.to_vec()))
    };
    let out = if word.ends_with("ing") {
        strip(3)
    } else if word.ends_with("ed") {
        strip(2)
    } else if word.ends_with("sses") {
        Some(w[..n - 2].to_vec())
    } else if word.ends_with("ies") && n > 4 {
        let mut b = w[..n - 3].to_vec();
        b.push(b'y');
        Some(b)
    } else if word.ends_with("ss") || word.ends_with("us") || word.ends_with("is") {
        None
    } else if word.ends_with('s') && n > 3 {
        Some(w[..n - 1].to_vec())
    } else {
        None
    };
    out.map(|b| String::from_utf8(b).expect("ascii"))
        .unwrap_or_else(|| word.to_string())
}

/// Lowercases, strips non-alphanumerics and stems `word`. Stopwords override the
/// supplied hint.
pub fn canonicalize(word: &str, pos_hint: PosHint) -> Result<WordForm> {
    let surface: String = word
        .chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect();
    if surface.is_empty() {
        return Err(Error::invalid(format!("word {word:?} has no letters or digits")));
    }
    if is_stopword(&surface) {
        return Ok(WordForm {
            stem: surface.clone(),
            surface,
            pos_hint: PosHint::Stopword,
        });
    }
    Ok(WordForm {
        stem: stem(&surface),
        surface,
        pos_hint,
    })
}

/// Present participle of a stem: `make` → `making`, `swim` → `swimming`.
pub fn ing_form(stem: &str) -> String {
    let w = stem.as_bytes();
    if stem.ends_with("ing") {
        return stem.to_string();
    }
    if stem.len() > 2 && stem.ends_with('e') && !stem.ends_with("ee") && !stem.ends_with("ye") {
        return format!("{}ing", &stem[..stem.len() - 1]);
    }
    if measure(w) == 1 && ends_cvc(w) {
        let last = w[w.len() - 1] as char;
        return format!("{stem}{last}ing");
    }
    format!("{stem}ing")
}

/// Plural of a noun stem: `candle` → `candles`, `fish` → `fishes`.
pub fn plural_form(stem: &str) -> String {
    if ["s", "x", "z", "ch", "sh"].iter().any(|s| stem.ends_with(s)) {
        format!("{stem}es")
    } else {
        format!("{stem}s")
    }
}

/// Surface forms a word may take inside a hashtag.
pub fn word_variants(w: &WordForm) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    out.insert(w.surface.clone());
    out.insert(w.stem.clone());
    match w.pos_hint {
        PosHint::Noun => {
            out.insert(plural_form(&w.stem));
        }
        PosHint::Verb => {
            out.insert(ing_form(&w.stem));
        }
        PosHint::Other | PosHint::Stopword => {}
    }
    out
}

impl SeedLabel {
    /// Builds a seed label from a phrase. Each whitespace-separated token may
    /// carry a part-of-speech suffix: `word/v`, `word/n`, `word|verb` or
    /// `word|noun`. Untagged tokens take `default_hint`.
    pub fn parse(phrase: &str, default_hint: PosHint) -> Result<Self> {
        let mut words = Vec::new();
        let mut names = Vec::new();
        for token in phrase.split_whitespace() {
            let (word, hint) = split_pos(token, default_hint)?;
            let form = canonicalize(word, hint)?;
            names.push(form.surface.clone());
            words.push(form);
        }
        if words.is_empty() {
            return Err(Error::invalid("seed label is empty"));
        }
        Ok(Self {
            text: names.join(" "),
            words,
        })
    }

    pub fn content_words(&self) -> impl Iterator<Item = &WordForm> {
        self.words.iter().filter(|w| w.is_content())
    }
}

fn split_pos(token: &str, default_hint: PosHint) -> Result<(&str, PosHint)> {
    let Some(pos) = token.rfind(['/', '|']) else {
        return Ok((token, default_hint));
    };
    let hint = match token[pos + 1..].to_ascii_lowercase().as_str() {
        "v" | "verb" => PosHint::Verb,
        "n" | "noun" => PosHint::Noun,
        "o" | "other" => PosHint::Other,
        other => return Err(Error::invalid(format!("unknown part-of-speech tag {other:?}"))),
    };
    Ok((&token[..pos], hint))
}

/// Reads a seed file: one phrase per line, blank lines and `#` comments
/// skipped.
pub fn load_seeds(path: impl AsRef<Path>, default_hint: PosHint) -> Result<Vec<SeedLabel>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_seeds(&text, default_hint)
}

pub fn parse_seeds(text: &str, default_hint: PosHint) -> Result<Vec<SeedLabel>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            SeedLabel::parse(l, default_hint).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum WordOrders {
    /// Original content-word order and its reversal.
    #[default]
    ForwardReverse,
    /// Every permutation of the content words.
    All,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Hashtags associated with a seed label.
pub fn relevant_hashtags(label: &SeedLabel, orders: WordOrders) -> Result<BTreeSet<String>> {
    let content: Vec<Vec<String>> = label
        .content_words()
        .map(|w| word_variants(w).into_iter().collect())
        .collect();
    if content.is_empty() {
        return Err(Error::invalid(format!(
            "seed label {:?} has only stopwords",
            label.text
        )));
    }
    let mut out = BTreeSet::new();
    out.insert(label.words.iter().map(|w| w.surface.as_str()).collect::<String>());

    let n = content.len();
    let orderings: Vec<Vec<usize>> = match orders {
        WordOrders::ForwardReverse => {
            let fwd: Vec<usize> = (0..n).collect();
            let rev: Vec<usize> = (0..n).rev().collect();
            if n > 1 {
                vec![fwd, rev]
            } else {
                vec![fwd]
            }
        }
        WordOrders::All => permutations(n),
    };
    // Odometer over one variant choice per content word.
    let mut choice = vec![0usize; n];
    loop {
        for order in &orderings {
            let tag: String = order.iter().map(|&i| content[i][choice[i]].as_str()).collect();
            out.insert(tag);
        }
        let mut i = 0;
        while i < n {
            choice[i] += 1;
            if choice[i] < content[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    Ok(out)
}

/// Cross product of verb and noun seeds. Each combined label is named by the
/// canonical (stemmed) forms of its content words, verbs first.
pub fn verb_noun_seeds(verbs: &[SeedLabel], nouns: &[SeedLabel]) -> Vec<SeedLabel> {
    let mut out = Vec::with_capacity(verbs.len() * nouns.len());
    for v in verbs {
        for n in nouns {
            let words: Vec<WordForm> = v.words.iter().chain(&n.words).cloned().collect();
            let text = words
                .iter()
                .filter(|w| w.is_content())
                .map(|w| w.stem.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            out.push(SeedLabel { text, words });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub name: String,
    pub kind: LabelKind,
    pub min_count: usize,
    pub orders: WordOrders,
}

impl BuildOptions {
    pub fn new(name: impl Into<String>, kind: LabelKind, min_count: usize) -> Self {
        Self {
            name: name.into(),
            kind,
            min_count,
            orders: WordOrders::default(),
        }
    }
}

/// Builds a label space from seeds, keeping only labels matched by at least
/// `min_count` corpus videos. Seeds with identical names are merged.
///
/// For [`LabelKind::VerbNoun`] pass the output of [`verb_noun_seeds`].
pub fn build_label_space(
    seeds: &[SeedLabel],
    corpus: &[VideoRecord],
    opts: &BuildOptions,
) -> Result<LabelSpace> {
    if seeds.is_empty() {
        return Err(Error::invalid("no seed labels"));
    }
    if opts.min_count == 0 {
        return Err(Error::invalid("min_count must be at least 1"));
    }
    let mut candidate = LabelSpace::new(opts.name.clone(), opts.kind, opts.min_count);
    for seed in seeds {
        let tags = relevant_hashtags(seed, opts.orders)?;
        candidate.entries.entry(seed.text.clone()).or_default().extend(tags);
    }
    let hist = label_histogram(corpus, &candidate);
    let total = candidate.len();
    candidate
        .entries
        .retain(|label, _| hist.get(label) >= opts.min_count as u64);
    if candidate.is_empty() {
        return Err(Error::EmptyLabelSpace(format!(
            "none of {total} labels reached {} matched videos",
            opts.min_count
        )));
    }
    Ok(candidate)
}

/// Matched-video counts for every candidate label before filtering.
pub fn candidate_counts(
    seeds: &[SeedLabel],
    corpus: &[VideoRecord],
    orders: WordOrders,
) -> Result<HashMap<String, u64>> {
    let mut space = LabelSpace::new("candidates", LabelKind::Seed, 1);
    for seed in seeds {
        space
            .entries
            .entry(seed.text.clone())
            .or_default()
            .extend(relevant_hashtags(seed, orders)?);
    }
    Ok(label_histogram(corpus, &space).counts.into_iter().collect())
}
