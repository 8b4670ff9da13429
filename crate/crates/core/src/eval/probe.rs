//! Linear probe on frozen features: an L2-regularized softmax regressor for
//! multi-class targets or per-label sigmoid regressors for multi-label ones,
//! trained by full-batch gradient descent from zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::clips::softmax;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeMode {
    Softmax,
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeTargets {
    /// One class index per sample.
    Multiclass { labels: Vec<usize>, classes: usize },
    /// `n × L` binary matrix.
    Multilabel(Vec<Vec<bool>>),
}

impl ProbeTargets {
    pub fn len(&self) -> usize {
        match self {
            ProbeTargets::Multiclass { labels, .. } => labels.len(),
            ProbeTargets::Multilabel(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn outputs(&self) -> usize {
        match self {
            ProbeTargets::Multiclass { classes, .. } => *classes,
            ProbeTargets::Multilabel(m) => m.first().map_or(0, Vec::len),
        }
    }

    pub fn mode(&self) -> ProbeMode {
        match self {
            ProbeTargets::Multiclass { .. } => ProbeMode::Softmax,
            ProbeTargets::Multilabel(_) => ProbeMode::Sigmoid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub l2_lambda: f64,
    pub iters: usize,
    pub step: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            l2_lambda: 1e-4,
            iters: 1000,
            step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeModel {
    pub mode: ProbeMode,
    pub outputs: usize,
    pub dim: usize,
    /// Row-major `outputs × dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub l2_lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeFit {
    pub model: ProbeModel,
    /// Loss before each update, then the loss of the final parameters.
    pub losses: Vec<f64>,
}

impl ProbeFit {
    pub fn final_loss(&self) -> f64 {
        *self.losses.last().expect("at least one loss")
    }
}

impl ProbeModel {
    pub fn zeros(mode: ProbeMode, outputs: usize, dim: usize, l2_lambda: f64) -> Self {
        Self {
            mode,
            outputs,
            dim,
            weights: vec![0.0; outputs * dim],
            bias: vec![0.0; outputs],
            l2_lambda,
        }
    }

    /// Raw scores `W x + b`.
    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.dim..(o + 1) * self.dim];
                row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias[o]
            })
            .collect()
    }

    /// Class probabilities (softmax) or per-label probabilities (sigmoid).
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let z = self.logits(x);
        match self.mode {
            ProbeMode::Softmax => softmax(&z),
            ProbeMode::Sigmoid => z.into_iter().map(sigmoid).collect(),
        }
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Regularized loss and its gradient with respect to weights and bias.
pub fn loss_and_grad(
    model: &ProbeModel,
    features: &[Vec<f64>],
    targets: &ProbeTargets,
) -> (f64, Vec<f64>, Vec<f64>) {
    let n = features.len() as f64;
    let (k, d) = (model.outputs, model.dim);
    let mut loss = 0.0;
    let mut gw = vec![0.0; k * d];
    let mut gb = vec![0.0; k];
    for (i, x) in features.iter().enumerate() {
        let z = model.logits(x);
        let mut dz = vec![0.0; k];
        match targets {
            ProbeTargets::Multiclass { labels, .. } => {
                let y = labels[i];
                loss += log_sum_exp(&z) - z[y];
                let p = softmax(&z);
                for o in 0..k {
                    dz[o] = p[o] - if o == y { 1.0 } else { 0.0 };
                }
            }
            ProbeTargets::Multilabel(m) => {
                for o in 0..k {
                    let y = if m[i][o] { 1.0 } else { 0.0 };
                    loss += softplus(z[o]) - y * z[o];
                    dz[o] = sigmoid(z[o]) - y;
                }
            }
        }
        for o in 0..k {
            let g = dz[o] / n;
            gb[o] += g;
            for (gwj, xj) in gw[o * d..(o + 1) * d].iter_mut().zip(x) {
                *gwj += g * xj;
            }
        }
    }
    loss /= n;
    let lam = model.l2_lambda;
    loss += 0.5 * lam * model.weights.iter().map(|w| w * w).sum::<f64>();
    for (g, w) in gw.iter_mut().zip(&model.weights) {
        *g += lam * w;
    }
    (loss, gw, gb)
}

fn check_inputs(features: &[Vec<f64>], targets: &ProbeTargets) -> Result<usize> {
    if features.is_empty() || features.len() != targets.len() {
        return Err(Error::shape(format!(
            "{} feature rows for {} targets",
            features.len(),
            targets.len()
        )));
    }
    let d = features[0].len();
    if d == 0 || features.iter().any(|r| r.len() != d) {
        return Err(Error::shape("feature rows must be non-empty and equal length"));
    }
    if features.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("features contain non-finite values"));
    }
    match targets {
        ProbeTargets::Multiclass { labels, classes } => {
            if *classes < 2 {
                return Err(Error::invalid("need at least two classes"));
            }
            if features.len() < *classes {
                return Err(Error::invalid("fewer samples than classes"));
            }
            if let Some(bad) = labels.iter().find(|&&y| y >= *classes) {
                return Err(Error::invalid(format!("label {bad} out of range")));
            }
        }
        ProbeTargets::Multilabel(m) => {
            let l = targets.outputs();
            if l == 0 || m.iter().any(|r| r.len() != l) {
                return Err(Error::shape("ragged multi-label targets"));
            }
        }
    }
    Ok(d)
}

pub fn train_probe(features: &[Vec<f64>], targets: &ProbeTargets, cfg: &ProbeConfig) -> Result<ProbeFit> {
    let dim = check_inputs(features, targets)?;
    if !(cfg.step.is_finite() && cfg.step > 0.0) || !(cfg.l2_lambda >= 0.0) {
        return Err(Error::invalid("step must be positive and lambda non-negative"));
    }
    let mut model = ProbeModel::zeros(targets.mode(), targets.outputs(), dim, cfg.l2_lambda);
    let mut losses = Vec::with_capacity(cfg.iters + 1);
    for it in 0..=cfg.iters {
        let (loss, gw, gb) = loss_and_grad(&model, features, targets);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { iteration: it });
        }
        losses.push(loss);
        if it == cfg.iters {
            break;
        }
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= cfg.step * g;
        }
        for (b, g) in model.bias.iter_mut().zip(&gb) {
            *b -= cfg.step * g;
        }
    }
    Ok(ProbeFit { model, losses })
}
