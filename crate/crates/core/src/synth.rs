//! Synthetic corpora with known label histograms, for tests, benches and
//! the CLI's demo data.

use std::collections::BTreeMap;

use rand::Rng;

use crate::corpus::{LabelKind, LabelSpace, VideoRecord};
use crate::rng;
use crate::tensor::{Conv2d, Dense, Layer, NetSpec, Tensor};

/// Zipf-shaped counts: label `i` gets `round(head / (i + 1)^exponent)`, at least 1.
pub fn zipf_counts(labels: usize, head: usize, exponent: f64) -> Vec<usize> {
    (0..labels)
        .map(|i| ((head as f64 / ((i + 1) as f64).powf(exponent)).round() as usize).max(1))
        .collect()
}

/// Label names `l000`, `l001`, ...
pub fn label_name(i: usize) -> String {
    format!("l{i:03}")
}

/// One single-label video per count unit. Each label `x` is selected by the
/// hashtag `x`; durations are uniform in `duration_range` at millisecond
/// resolution.
pub fn labelled_corpus(
    counts: &BTreeMap<String, usize>,
    duration_range: (f64, f64),
    seed: u64,
) -> (Vec<VideoRecord>, LabelSpace) {
    let mut r = rng::substream(seed, "synth-corpus");
    let mut space = LabelSpace::new("synthetic", LabelKind::Seed, 1);
    let mut corpus = Vec::with_capacity(counts.values().sum());
    let (lo, hi) = duration_range;
    for (label, &n) in counts {
        space.entries.insert(label.clone(), [label.clone()].into());
        for j in 0..n {
            let d = if hi > lo { r.random_range(lo..hi) } else { lo };
            let d = (d * 1000.0).round() / 1000.0;
            corpus.push(VideoRecord::new(format!("{label}-{j:06}"), d.max(0.001), [label.as_str()]));
        }
    }
    (corpus, space)
}

/// [`labelled_corpus`] over Zipf counts.
pub fn zipf_corpus(labels: usize, head: usize, exponent: f64, seed: u64) -> (Vec<VideoRecord>, LabelSpace) {
    let counts = zipf_counts(labels, head, exponent)
        .into_iter()
        .enumerate()
        .map(|(i, n)| (label_name(i), n))
        .collect();
    labelled_corpus(&counts, (5.0, 60.0), seed)
}

/// A random BN-free 2D network and the input shape it was sized for.
#[derive(Debug, Clone)]
pub struct RandomNet {
    pub net: NetSpec,
    /// `(channels, side, side)`
    pub input: [usize; 3],
}

/// Random 2D network of `depth` convolutions on a `side`×`side` input:
/// kernels 1 to 5, stride 1 or 2, same or valid padding, an optional ReLU
/// after each convolution, then global pooling, a dense head and sometimes a
/// softmax. Weights are uniform in `±1/sqrt(fan_in)`.
pub fn random_net(seed: u64, depth: usize, side: usize) -> RandomNet {
    assert!(depth >= 1 && side >= 1);
    let mut r = rng::substream(seed, "random-net");
    let in_channels = r.random_range(1..=3);
    let mut channels = in_channels;
    let mut cur = side;
    let mut layers = Vec::new();
    let uniform = |r: &mut rng::StreamRng, dims: Vec<usize>, fan_in: usize| {
        let a = 1.0 / (fan_in as f64).sqrt();
        Tensor::from_fn(dims, |_| r.random_range(-a..a))
    };
    for _ in 0..depth {
        let out = r.random_range(1..=4);
        let k = r.random_range(1..=5usize.min(cur));
        let stride = r.random_range(1..=2);
        let same_padding = r.random_bool(0.5);
        cur = if same_padding {
            cur.div_ceil(stride)
        } else {
            (cur - k) / stride + 1
        };
        let weight = uniform(&mut r, vec![out, channels, k, k], channels * k * k);
        let bias = (0..out).map(|_| r.random_range(-0.5..0.5)).collect();
        layers.push(Layer::Conv2d(Conv2d {
            weight,
            bias,
            stride,
            same_padding,
        }));
        if r.random_bool(0.7) {
            layers.push(Layer::Relu);
        }
        channels = out;
    }
    let classes = r.random_range(2..=5);
    layers.push(Layer::GlobalAvgPool);
    layers.push(Layer::Dense(Dense {
        weight: uniform(&mut r, vec![classes, channels], channels),
        bias: (0..classes).map(|_| r.random_range(-0.5..0.5)).collect(),
    }));
    if r.random_bool(0.3) {
        layers.push(Layer::Softmax);
    }
    RandomNet {
        net: NetSpec::new(layers).expect("generated network is well formed"),
        input: [in_channels, side, side],
    }
}

/// Uniform `[-1, 1)` tensor of the given shape.
pub fn random_input(seed: u64, dims: &[usize]) -> Tensor {
    let mut r = rng::substream(seed, "random-input");
    Tensor::from_fn(dims.to_vec(), |_| r.random_range(-1.0..1.0))
}
