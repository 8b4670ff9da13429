//! Long-tail-aware subset selection over a labeled corpus.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{LabelHistogram, LabelSpace, VideoRecord};
use crate::error::{Error, Result};
use crate::eval::assign_single_label;
use crate::manifest::{DatasetManifest, ManifestRow};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Random,
    SquareRoot,
    TailPreserving,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::SquareRoot => "sqrt",
            Strategy::TailPreserving => "tail",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Strategy::Random),
            "sqrt" | "square-root" => Ok(Strategy::SquareRoot),
            "tail" | "tail-preserving" => Ok(Strategy::TailPreserving),
            other => Err(Error::invalid(format!("unknown sampling strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingPlan {
    pub strategy: Strategy,
    pub budget: usize,
    pub seed: u64,
}

impl SamplingPlan {
    pub fn new(strategy: Strategy, budget: usize, seed: u64) -> Self {
        Self {
            strategy,
            budget,
            seed,
        }
    }

    fn provenance(&self) -> String {
        format!(
            "strategy={} budget={} seed={}",
            self.strategy.as_str(),
            self.budget,
            self.seed
        )
    }
}

/// Label probabilities proportional to the square root of each label's count.
pub fn sqrt_weights(h: &LabelHistogram) -> Result<BTreeMap<String, f64>> {
    let norm: f64 = h.counts.values().map(|&c| (c as f64).sqrt()).sum();
    if norm == 0.0 {
        return Err(Error::invalid("histogram has no positive count"));
    }
    Ok(h.counts
        .iter()
        .map(|(l, &c)| (l.clone(), (c as f64).sqrt() / norm))
        .collect())
}

pub fn sample(corpus: &[VideoRecord], space: &LabelSpace, plan: &SamplingPlan) -> Result<DatasetManifest> {
    match plan.strategy {
        Strategy::Random => sample_random(corpus, space, plan),
        Strategy::SquareRoot => sample_square_root(corpus, space, plan),
        Strategy::TailPreserving => sample_tail_preserving(corpus, space, plan),
    }
}

fn whole_video_row(v: &VideoRecord, label: &str) -> ManifestRow {
    ManifestRow::new(v.id.clone(), label, 0.0, v.duration_s)
}

fn new_manifest(space: &LabelSpace, plan: &SamplingPlan) -> DatasetManifest {
    DatasetManifest::new(plan.seed)
        .with_provenance("labelspace", space.name.clone())
        .with_provenance("sample", plan.provenance())
}

fn check_budget(plan: &SamplingPlan, available: usize) -> Result<()> {
    if plan.budget == 0 {
        return Err(Error::invalid("budget must be at least 1"));
    }
    if plan.budget > available {
        return Err(Error::Insufficient(format!(
            "budget {} exceeds the {available} videos matching the label space",
            plan.budget
        )));
    }
    Ok(())
}

/// Uniform sample without replacement over videos that match any label; each
/// kept video gets one of its matched labels via [`assign_single_label`].
pub fn sample_random(corpus: &[VideoRecord], space: &LabelSpace, plan: &SamplingPlan) -> Result<DatasetManifest> {
    let mut matched: Vec<usize> = (0..corpus.len())
        .filter(|&i| !space.matched_labels(&corpus[i]).is_empty())
        .collect();
    check_budget(plan, matched.len())?;
    let mut rng = rng::substream(plan.seed, "sample:random");
    matched.shuffle(&mut rng);
    let mut m = new_manifest(space, plan);
    for &i in &matched[..plan.budget] {
        let label = assign_single_label(&corpus[i], space, plan.seed)?;
        m.rows.push(whole_video_row(&corpus[i], &label));
    }
    Ok(m)
}

/// Square-root sampling. Each draw picks a label with probability
/// proportional to `sqrt(count)` among labels that still have untaken videos,
/// then a uniformly random untaken video of that label.
pub fn sample_square_root(
    corpus: &[VideoRecord],
    space: &LabelSpace,
    plan: &SamplingPlan,
) -> Result<DatasetManifest> {
    let labels: Vec<&str> = space.labels().collect();
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); labels.len()];
    let mut matched = 0;
    for (i, v) in corpus.iter().enumerate() {
        let hits = space.matched_labels(v);
        if !hits.is_empty() {
            matched += 1;
        }
        for h in hits {
            let li = labels.binary_search(&h).expect("label from space");
            pools[li].push(i);
        }
    }
    check_budget(plan, matched)?;

    let weights: Vec<f64> = pools.iter().map(|p| (p.len() as f64).sqrt()).collect();
    let mut active: Vec<usize> = (0..labels.len()).filter(|&l| !pools[l].is_empty()).collect();
    let mut taken = vec![false; corpus.len()];
    let mut rng = rng::substream(plan.seed, "sample:sqrt");
    let mut m = new_manifest(space, plan);

    let mut dist = WeightedIndex::new(active.iter().map(|&l| weights[l])).expect("positive weights");
    while m.rows.len() < plan.budget {
        let slot = dist.sample(&mut rng);
        let l = active[slot];
        let pool = &mut pools[l];
        let mut picked = None;
        while !pool.is_empty() {
            let j = rng.random_range(0..pool.len());
            let vi = pool.swap_remove(j);
            if !taken[vi] {
                picked = Some(vi);
                break;
            }
        }
        match picked {
            Some(vi) => {
                taken[vi] = true;
                m.rows.push(whole_video_row(&corpus[vi], labels[l]));
            }
            None => {
                // Exhausted; renormalize over the remaining labels.
                active.remove(slot);
                dist = WeightedIndex::new(active.iter().map(|&l| weights[l]))
                    .map_err(|_| Error::Insufficient("all labels exhausted".into()))?;
            }
        }
    }
    Ok(m)
}

/// Water-filling quotas. Labels are visited ascending by count (ties by name);
/// a label is kept whole while its count fits the equal share of the budget
/// still unassigned. The remaining head labels split what is left evenly, the
/// first `remainder` of them in name order taking one extra.
pub fn tail_preserving_quotas(counts: &BTreeMap<String, usize>, budget: usize) -> Result<BTreeMap<String, usize>> {
    let mut order: Vec<(&str, usize)> = counts
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(l, &c)| (l.as_str(), c))
        .collect();
    let total: usize = order.iter().map(|(_, c)| c).sum();
    if budget > total {
        return Err(Error::Insufficient(format!(
            "budget {budget} exceeds corpus size {total}"
        )));
    }
    if budget < order.len() {
        return Err(Error::invalid(format!(
            "budget {budget} is smaller than the number of labels {}",
            order.len()
        )));
    }
    order.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(b.0)));

    let mut quotas = BTreeMap::new();
    let mut rem_budget = budget;
    let mut rem_labels = order.len();
    let mut split = order.len();
    for (i, &(label, c)) in order.iter().enumerate() {
        if c * rem_labels <= rem_budget {
            quotas.insert(label.to_string(), c);
            rem_budget -= c;
            rem_labels -= 1;
        } else {
            split = i;
            break;
        }
    }
    let mut head: Vec<&str> = order[split..].iter().map(|(l, _)| *l).collect();
    if !head.is_empty() {
        head.sort_unstable();
        let share = rem_budget / head.len();
        let extra = rem_budget % head.len();
        for (i, label) in head.into_iter().enumerate() {
            quotas.insert(label.to_string(), share + usize::from(i < extra));
        }
    }
    Ok(quotas)
}

/// Keeps every video of tail labels and subsamples head labels so that the
/// output has exactly `budget` rows. Multi-label videos are first collapsed
/// to one label with [`assign_single_label`].
pub fn sample_tail_preserving(
    corpus: &[VideoRecord],
    space: &LabelSpace,
    plan: &SamplingPlan,
) -> Result<DatasetManifest> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, v) in corpus.iter().enumerate() {
        if space.matched_labels(v).is_empty() {
            continue;
        }
        groups.entry(assign_single_label(v, space, plan.seed)?).or_default().push(i);
    }
    let counts: BTreeMap<String, usize> = groups.iter().map(|(l, g)| (l.clone(), g.len())).collect();
    if plan.budget == 0 {
        return Err(Error::invalid("budget must be at least 1"));
    }
    let quotas = tail_preserving_quotas(&counts, plan.budget)?;
    let mut m = new_manifest(space, plan);
    for (label, mut members) in groups {
        let q = quotas[&label];
        let mut rng = rng::substream(plan.seed, &format!("sample:tail:{label}"));
        members.shuffle(&mut rng);
        for &i in &members[..q] {
            m.rows.push(whole_video_row(&corpus[i], &label));
        }
    }
    Ok(m)
}

/// A uniformly random `k`-subset of the labels. Subsets for the same seed are
/// nested: they are prefixes of one seeded permutation.
pub fn subset_labels(space: &LabelSpace, k: usize, seed: u64) -> Result<LabelSpace> {
    if k == 0 || k > space.len() {
        return Err(Error::invalid(format!(
            "k = {k} outside 1..={}",
            space.len()
        )));
    }
    let mut labels: Vec<&String> = space.entries.keys().collect();
    labels.shuffle(&mut rng::substream(seed, "subset_labels"));
    let mut out = LabelSpace::new(space.name.clone(), space.kind, space.min_count);
    for l in labels.into_iter().take(k) {
        out.entries.insert(l.clone(), space.entries[l].clone());
    }
    Ok(out)
}

/// Per-label row counts of a manifest.
pub fn manifest_label_counts(m: &DatasetManifest) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for r in &m.rows {
        *out.entry(r.label.clone()).or_default() += 1;
    }
    out
}
