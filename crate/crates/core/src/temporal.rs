//! Clip-window planning: temporal jittering, length-class subsets and
//! fixed-count / fixed-duration budget planners.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{LabelSpace, VideoRecord};
use crate::error::{Error, Result};
use crate::eval::assign_single_label;
use crate::manifest::{DatasetManifest, ManifestRow};
use crate::rng;

pub const SHORT_RANGE_S: (f64, f64) = (1.0, 5.0);
pub const LONG_RANGE_S: (f64, f64) = (55.0, 60.0);
pub const CENTER_WINDOW_S: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipSpec {
    pub start_s: f64,
    pub len_s: f64,
}

impl ClipSpec {
    pub fn end_s(&self) -> f64 {
        self.start_s + self.len_s
    }
}

/// Uniformly random clip start inside `window` (or the whole video).
pub fn jitter_clip_with<R: Rng + ?Sized>(
    rng: &mut R,
    duration_s: f64,
    clip_len_s: f64,
    window: Option<(f64, f64)>,
) -> Result<ClipSpec> {
    if !(clip_len_s > 0.0 && clip_len_s <= duration_s) {
        return Err(Error::invalid(format!(
            "clip of {clip_len_s} s does not fit a {duration_s} s video"
        )));
    }
    let (lo, hi) = window.unwrap_or((0.0, duration_s));
    if lo < 0.0 || hi > duration_s || hi - lo < clip_len_s {
        return Err(Error::invalid(format!(
            "window [{lo}, {hi}] cannot hold a {clip_len_s} s clip in a {duration_s} s video"
        )));
    }
    let last = hi - clip_len_s;
    let start_s = if last > lo { rng.random_range(lo..=last) } else { lo };
    Ok(ClipSpec {
        start_s,
        len_s: clip_len_s,
    })
}

pub fn jitter_clip(duration_s: f64, clip_len_s: f64, window: Option<(f64, f64)>, seed: u64) -> Result<ClipSpec> {
    jitter_clip_with(&mut rng::substream(seed, "jitter"), duration_s, clip_len_s, window)
}

/// The 4 s window centered on the middle of the video.
pub fn center_window(duration_s: f64) -> Result<(f64, f64)> {
    if duration_s < CENTER_WINDOW_S {
        return Err(Error::invalid(format!(
            "{duration_s} s video is shorter than the center window"
        )));
    }
    let mid = duration_s / 2.0;
    Ok((mid - CENTER_WINDOW_S / 2.0, mid + CENTER_WINDOW_S / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthClass {
    /// 1 to 5 s videos.
    Short,
    /// 55 to 60 s videos.
    Long,
    /// The center 4 s of 55 to 60 s videos.
    LongCenter,
}

impl LengthClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LengthClass::Short => "short",
            LengthClass::Long => "long",
            LengthClass::LongCenter => "long-center",
        }
    }

    pub fn admits(self, duration_s: f64) -> bool {
        let (lo, hi) = match self {
            LengthClass::Short => SHORT_RANGE_S,
            LengthClass::Long | LengthClass::LongCenter => LONG_RANGE_S,
        };
        (lo..=hi).contains(&duration_s)
    }

    /// Clip window emitted for a video of this class.
    pub fn clip_for(self, duration_s: f64) -> Result<ClipSpec> {
        match self {
            LengthClass::Short | LengthClass::Long => Ok(ClipSpec {
                start_s: 0.0,
                len_s: duration_s,
            }),
            LengthClass::LongCenter => {
                let (lo, hi) = center_window(duration_s)?;
                Ok(ClipSpec {
                    start_s: lo,
                    len_s: hi - lo,
                })
            }
        }
    }
}

impl std::str::FromStr for LengthClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "short" => Ok(LengthClass::Short),
            "long" => Ok(LengthClass::Long),
            "long-center" | "longcenter" => Ok(LengthClass::LongCenter),
            other => Err(Error::invalid(format!("unknown length class {other:?}"))),
        }
    }
}

pub fn build_length_class(corpus: &[VideoRecord], class: LengthClass) -> Result<Vec<VideoRecord>> {
    let out: Vec<VideoRecord> = corpus
        .iter()
        .filter(|v| class.admits(v.duration_s))
        .cloned()
        .collect();
    if out.is_empty() {
        let short = corpus.iter().filter(|v| LengthClass::Short.admits(v.duration_s)).count();
        let long = corpus.iter().filter(|v| LengthClass::Long.admits(v.duration_s)).count();
        return Err(Error::Insufficient(format!(
            "no {} videos (short: {short}, long: {long}, other: {})",
            class.as_str(),
            corpus.len() - short - long
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    /// A fixed number of videos.
    FixedCount(usize),
    /// A fixed total clip duration in minutes.
    FixedDuration { total_minutes: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetPlan {
    pub budget: Budget,
    pub length_class: LengthClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetOutcome {
    pub manifest: DatasetManifest,
    pub achieved_minutes: f64,
}

struct Strata<'a> {
    /// label -> shuffled (video, clip) list
    by_label: BTreeMap<String, Vec<(&'a VideoRecord, ClipSpec)>>,
}

fn stratify<'a>(subset: &'a [VideoRecord], plan: &BudgetPlan, space: &LabelSpace, seed: u64) -> Result<Strata<'a>> {
    let mut by_label: BTreeMap<String, Vec<(&VideoRecord, ClipSpec)>> = BTreeMap::new();
    for v in subset {
        if !plan.length_class.admits(v.duration_s) {
            return Err(Error::invalid(format!(
                "video {} ({} s) is outside class {}",
                v.id,
                v.duration_s,
                plan.length_class.as_str()
            )));
        }
        if space.matched_labels(v).is_empty() {
            continue;
        }
        let label = assign_single_label(v, space, seed)?;
        by_label
            .entry(label)
            .or_default()
            .push((v, plan.length_class.clip_for(v.duration_s)?));
    }
    for (label, list) in by_label.iter_mut() {
        list.shuffle(&mut rng::substream(seed, &format!("plan:{label}")));
    }
    Ok(Strata { by_label })
}

/// Largest-remainder apportionment of `count` over the strata sizes; ties in
/// the remainder go to the earlier label.
fn apportion(sizes: &BTreeMap<String, usize>, count: usize) -> BTreeMap<String, usize> {
    let total: usize = sizes.values().sum();
    let mut quotas: BTreeMap<String, usize> = BTreeMap::new();
    let mut rems: Vec<(usize, &str)> = Vec::new();
    let mut assigned = 0;
    for (label, &n) in sizes {
        let exact = count * n;
        quotas.insert(label.clone(), exact / total);
        assigned += exact / total;
        rems.push((exact % total, label.as_str()));
    }
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
    for (_, label) in rems.into_iter().take(count - assigned) {
        *quotas.get_mut(label).unwrap() += 1;
    }
    quotas
}

/// Builds a manifest meeting `plan.budget` from a length-class subset.
///
/// Fixed-count budgets sample exactly `count` videos, stratified so that each
/// label keeps its share of the subset. Fixed-duration budgets visit labels
/// round-robin in ascending size order and stop at the first clip that would
/// overshoot the total.
pub fn plan_budget(subset: &[VideoRecord], plan: &BudgetPlan, space: &LabelSpace, seed: u64) -> Result<BudgetOutcome> {
    let strata = stratify(subset, plan, space, seed)?;
    let available: usize = strata.by_label.values().map(Vec::len).sum();
    let mut manifest = DatasetManifest::new(seed).with_provenance("labelspace", space.name.clone());
    let mut rows = Vec::new();
    match plan.budget {
        Budget::FixedCount(count) => {
            if count == 0 || count > available {
                return Err(Error::Insufficient(format!(
                    "cannot select {count} of {available} labeled videos"
                )));
            }
            let sizes = strata.by_label.iter().map(|(l, v)| (l.clone(), v.len())).collect();
            let quotas = apportion(&sizes, count);
            for (label, list) in &strata.by_label {
                for (v, clip) in &list[..quotas[label]] {
                    rows.push(ManifestRow::new(v.id.clone(), label.clone(), clip.start_s, clip.len_s));
                }
            }
            manifest = manifest.with_provenance(
                "select",
                format!("class={} mode=f1 count={count} seed={seed}", plan.length_class.as_str()),
            );
        }
        Budget::FixedDuration { total_minutes } => {
            if !(total_minutes.is_finite() && total_minutes > 0.0) {
                return Err(Error::invalid("duration budget must be positive"));
            }
            let budget_s = total_minutes * 60.0;
            let supply: f64 = strata.by_label.values().flatten().map(|(_, c)| c.len_s).sum();
            if supply < budget_s {
                return Err(Error::Insufficient(format!(
                    "subset holds {supply} s, budget is {budget_s} s"
                )));
            }
            let mut order: Vec<(&String, &Vec<(&VideoRecord, ClipSpec)>)> = strata.by_label.iter().collect();
            order.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then(a.0.cmp(b.0)));
            let mut cursor = vec![0usize; order.len()];
            let mut total = 0.0;
            'fill: loop {
                let mut progressed = false;
                for (k, (label, list)) in order.iter().enumerate() {
                    let Some((v, clip)) = list.get(cursor[k]) else { continue };
                    if total + clip.len_s > budget_s {
                        break 'fill;
                    }
                    total += clip.len_s;
                    cursor[k] += 1;
                    progressed = true;
                    rows.push(ManifestRow::new(v.id.clone(), (*label).clone(), clip.start_s, clip.len_s));
                }
                if !progressed {
                    break;
                }
            }
            manifest = manifest.with_provenance(
                "select",
                format!(
                    "class={} mode=f2 minutes={total_minutes} seed={seed}",
                    plan.length_class.as_str()
                ),
            );
        }
    }
    let achieved_minutes = rows.iter().map(|r| r.clip_len_s).sum::<f64>() / 60.0;
    manifest.rows = rows;
    Ok(BudgetOutcome {
        manifest,
        achieved_minutes,
    })
}
