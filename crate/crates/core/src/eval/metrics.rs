//! Top-k accuracy and mean average precision.

use serde::Serialize;

use crate::error::{Error, Result};

/// Fraction of samples whose true class is among the `k` highest scores.
/// Equal scores rank the lower class index first.
pub fn accuracy_topk(preds: &[Vec<f64>], labels: &[usize], k: usize) -> Result<f64> {
    if preds.len() != labels.len() {
        return Err(Error::shape(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::invalid("no predictions"));
    }
    let classes = preds[0].len();
    if preds.iter().any(|p| p.len() != classes) {
        return Err(Error::shape("ragged prediction rows"));
    }
    if k == 0 || k > classes {
        return Err(Error::invalid(format!("k = {k} outside 1..={classes}")));
    }
    let mut hits = 0usize;
    for (p, &t) in preds.iter().zip(labels) {
        if t >= classes {
            return Err(Error::invalid(format!("label {t} out of range")));
        }
        let st = p[t];
        let ahead = p
            .iter()
            .enumerate()
            .filter(|&(j, &s)| s > st || (s == st && j < t))
            .count();
        if ahead < k {
            hits += 1;
        }
    }
    Ok(hits as f64 / preds.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapReport {
    pub map: f64,
    /// Average precision per label; `None` for labels without positives.
    pub per_label: Vec<Option<f64>>,
    pub skipped: Vec<usize>,
}

/// Non-interpolated average precision of one ranking.
pub fn average_precision(scores: &[f64], truth: &[bool]) -> Option<f64> {
    let positives = truth.iter().filter(|&&t| t).count();
    if positives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut found = 0usize;
    let mut sum = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if truth[i] {
            found += 1;
            sum += found as f64 / (rank + 1) as f64;
        }
    }
    Some(sum / positives as f64)
}

/// Unweighted mean of per-label average precision over labels that have at
/// least one positive.
pub fn mean_average_precision(scores: &[Vec<f64>], truth: &[Vec<bool>]) -> Result<MapReport> {
    if scores.is_empty() || truth.is_empty() {
        return Err(Error::invalid("empty truth"));
    }
    if scores.len() != truth.len() {
        return Err(Error::shape("scores and truth have different row counts"));
    }
    let labels = truth[0].len();
    if scores.iter().any(|r| r.len() != labels)
        || truth.iter().any(|r| r.len() != labels)
    {
        return Err(Error::shape("ragged score or truth rows"));
    }
    let mut per_label = Vec::with_capacity(labels);
    let mut skipped = Vec::new();
    for l in 0..labels {
        let s: Vec<f64> = scores.iter().map(|r| r[l]).collect();
        let t: Vec<bool> = truth.iter().map(|r| r[l]).collect();
        let ap = average_precision(&s, &t);
        if ap.is_none() {
            skipped.push(l);
        }
        per_label.push(ap);
    }
    let valid: Vec<f64> = per_label.iter().flatten().copied().collect();
    if valid.is_empty() {
        return Err(Error::invalid("no label has a positive example"));
    }
    Ok(MapReport {
        map: valid.iter().sum::<f64>() / valid.len() as f64,
        per_label,
        skipped,
    })
}
