//! 2D to 3D filter inflation and the fully-convolutional transform.
//!
//! An `N × N` filter becomes `k × N × N` by repeating it `k` times along time
//! and dividing by `k`. On an input that is constant in time the inflated
//! filter then reproduces the 2D response, as long as the temporal receptive
//! field stays inside the clip. [`inflation_equivalence`] checks exactly that.

use super::net::{Conv2d, Conv3d, Dense, Layer, NetSpec};
use super::Tensor;
use crate::error::{Error, Result};

/// Inflates `(o, i, h, w)` weights to `(o, i, k, h, w)`, each slice `w / k`.
pub fn inflate(w2d: &Tensor, k: usize) -> Result<Tensor> {
    inflate_with(w2d, k, true)
}

/// As [`inflate`]; with `normalize = false` the slices are plain copies.
pub fn inflate_with(w2d: &Tensor, k: usize, normalize: bool) -> Result<Tensor> {
    if k < 1 {
        return Err(Error::invalid("temporal extent k must be at least 1"));
    }
    let &[o, i, h, w] = w2d.dims() else {
        return Err(Error::shape(format!("expected (o, i, h, w) weights, got {:?}", w2d.dims())));
    };
    let scale = if normalize { 1.0 / k as f64 } else { 1.0 };
    let hw = h * w;
    let mut data = Vec::with_capacity(w2d.len() * k);
    for filter in w2d.data().chunks_exact(hw) {
        for _ in 0..k {
            data.extend(filter.iter().map(|v| v * scale));
        }
    }
    Tensor::new(vec![o, i, k, h, w], data)
}

pub fn inflate_net(net2d: &NetSpec, k: usize) -> Result<NetSpec> {
    inflate_net_with(net2d, k, true)
}

/// Every 2D convolution becomes a `k`-deep 3D convolution with temporal
/// stride 1 and same padding in time. Pooling is spatio-temporal by
/// construction; dense, ReLU and softmax layers are unchanged.
pub fn inflate_net_with(net2d: &NetSpec, k: usize, normalize: bool) -> Result<NetSpec> {
    let mut layers = Vec::with_capacity(net2d.layers().len());
    for layer in net2d.layers() {
        layers.push(match layer {
            Layer::Conv2d(c) => Layer::Conv3d(Conv3d {
                weight: inflate_with(&c.weight, k, normalize)?,
                bias: c.bias.clone(),
                stride: [1, c.stride, c.stride],
                same_padding: [true, c.same_padding, c.same_padding],
            }),
            Layer::Conv3d(_) => {
                return Err(Error::invalid("cannot inflate a network that already has 3D convolutions"))
            }
            other => other.clone(),
        });
    }
    NetSpec::new(layers)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivalence {
    pub max_deviation: f64,
    pub within_tolerance: bool,
    /// Frames in the replicated clip.
    pub frames: usize,
}

/// Replicates `x2d (c, h, w)` along time, runs the inflated network, and
/// compares it with the 2D network.
///
/// The clip holds `L (k - 1) + 1` frames for `L` convolutions so that the
/// central position sees no temporal padding. The 3D network is evaluated up
/// to its first pooling layer, the central frame is kept (the only temporally
/// valid position), and the remaining layers run on that frame.
pub fn inflation_equivalence(net2d: &NetSpec, k: usize, x2d: &Tensor, tol: f64) -> Result<Equivalence> {
    inflation_equivalence_with(net2d, k, x2d, tol, true)
}

pub fn inflation_equivalence_with(
    net2d: &NetSpec,
    k: usize,
    x2d: &Tensor,
    tol: f64,
    normalize: bool,
) -> Result<Equivalence> {
    let net3d = inflate_net_with(net2d, k, normalize)?;
    let &[c, h, w] = x2d.dims() else {
        return Err(Error::shape(format!("expected (c, h, w) input, got {:?}", x2d.dims())));
    };
    let convs = net2d.conv_count();
    let frames = convs * (k - 1) + 1;
    let center = convs * ((k - 1) / 2);
    let hw = h * w;
    let mut data = Vec::with_capacity(c * frames * hw);
    for plane in x2d.data().chunks_exact(hw) {
        for _ in 0..frames {
            data.extend_from_slice(plane);
        }
    }
    let x3d = Tensor::new(vec![c, frames, h, w], data)?;

    let n = net3d.layers().len();
    let split = net3d
        .layers()
        .iter()
        .position(|l| matches!(l, Layer::GlobalAvgPool))
        .unwrap_or(n);
    let map = net3d.forward_range(&x3d, 0..split)?;
    let (mc, mt, mh, mw) = match *map.dims() {
        [a, b, c2, d] => (a, b, c2, d),
        _ => return Err(Error::shape(format!("unexpected feature map {:?}", map.dims()))),
    };
    debug_assert_eq!(mt, frames);
    let mhw = mh * mw;
    let mut slice = Vec::with_capacity(mc * mhw);
    for ch in map.data().chunks_exact(mt * mhw) {
        slice.extend_from_slice(&ch[center * mhw..(center + 1) * mhw]);
    }
    let central = Tensor::new(vec![mc, 1, mh, mw], slice)?;
    let y3 = net3d.forward_range(&central, split..n)?;
    let y2 = net2d.forward(x2d)?;
    let max_deviation = y3.max_abs_diff(&y2)?;
    Ok(Equivalence {
        max_deviation,
        within_tolerance: max_deviation <= tol,
        frames,
    })
}

/// Replaces the terminal `GlobalAvgPool → Dense` pair with a 1×1(×1)
/// convolution carrying the dense weights, followed by the pooling. The
/// network then accepts inputs larger than its training size and averages
/// per-position logits.
pub fn fcn_transform(net: &NetSpec) -> Result<NetSpec> {
    let layers = net.layers();
    let d = layers
        .iter()
        .position(|l| matches!(l, Layer::Dense(_)))
        .ok_or_else(|| Error::invalid("network has no dense layer"))?;
    if d == 0 || !matches!(layers[d - 1], Layer::GlobalAvgPool) {
        return Err(Error::invalid("dense layer must directly follow global average pooling"));
    }
    let Layer::Dense(Dense { weight, bias }) = &layers[d] else { unreachable!() };
    let &[o, i] = weight.dims() else { unreachable!() };
    let volumetric = match layers[..d - 1].iter().rev().find(|l| matches!(l, Layer::Conv2d(_) | Layer::Conv3d(_))) {
        Some(Layer::Conv3d(_)) => true,
        Some(_) => false,
        None => return Err(Error::invalid("no convolution precedes the pooling layer")),
    };
    let conv = if volumetric {
        Layer::Conv3d(Conv3d {
            weight: weight.clone().reshape(vec![o, i, 1, 1, 1])?,
            bias: bias.clone(),
            stride: [1, 1, 1],
            same_padding: [false; 3],
        })
    } else {
        Layer::Conv2d(Conv2d {
            weight: weight.clone().reshape(vec![o, i, 1, 1])?,
            bias: bias.clone(),
            stride: 1,
            same_padding: false,
        })
    };
    let mut out: Vec<Layer> = layers[..d - 1].to_vec();
    out.push(conv);
    out.push(Layer::GlobalAvgPool);
    out.extend_from_slice(&layers[d + 1..]);
    NetSpec::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn rand_tensor(dims: Vec<usize>, r: &mut impl Rng) -> Tensor {
        Tensor::from_fn(dims, |_| r.random_range(-1.0..1.0))
    }

    fn conv2d(o: usize, i: usize, kk: usize, r: &mut impl Rng) -> Layer {
        Layer::Conv2d(Conv2d {
            weight: rand_tensor(vec![o, i, kk, kk], r),
            bias: (0..o).map(|_| r.random_range(-0.5..0.5)).collect(),
            stride: 1,
            same_padding: true,
        })
    }

    #[test]
    fn k1_keeps_values() {
        let mut r = rng::seeded(1);
        let w = rand_tensor(vec![2, 3, 3, 3], &mut r);
        let w3 = inflate(&w, 1).unwrap();
        assert_eq!(w3.dims(), &[2, 3, 1, 3, 3]);
        assert_eq!(w3.data(), w.data());
        assert!(inflate(&w, 0).is_err());
    }

    #[test]
    fn ones_kernel_k3() {
        let w = Tensor::from_fn(vec![1, 1, 3, 3], |_| 1.0);
        let w3 = inflate(&w, 3).unwrap();
        assert_eq!(w3.dims(), &[1, 1, 3, 3, 3]);
        assert!(w3.data().iter().all(|&v| v == 1.0 / 3.0));
    }

    #[test]
    fn temporal_sums_restore_2d_weights() {
        let mut r = rng::seeded(2);
        let w = rand_tensor(vec![3, 2, 3, 3], &mut r);
        for k in [1, 2, 3, 5, 7] {
            let w3 = inflate(&w, k).unwrap();
            for (f, filt) in w.data().chunks_exact(9).enumerate() {
                for p in 0..9 {
                    let s: f64 = (0..k).map(|t| w3.data()[(f * k + t) * 9 + p]).sum();
                    assert!((s - filt[p]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn structure_is_preserved() {
        let mut r = rng::seeded(3);
        let net = NetSpec::new(vec![
            conv2d(4, 3, 3, &mut r),
            Layer::Relu,
            Layer::GlobalAvgPool,
            Layer::Dense(Dense {
                weight: rand_tensor(vec![5, 4], &mut r),
                bias: vec![0.0; 5],
            }),
        ])
        .unwrap();
        let n3 = inflate_net(&net, 3).unwrap();
        assert_eq!(n3.layers().len(), net.layers().len());
        assert!(matches!(n3.layers()[0], Layer::Conv3d(_)));
        assert_eq!(n3.layers()[3], net.layers()[3]);
        assert!(inflate_net(&n3, 3).is_err());
    }

    #[test]
    fn k1_has_zero_deviation() {
        let mut r = rng::seeded(4);
        let net = NetSpec::new(vec![conv2d(3, 2, 3, &mut r), Layer::Relu, conv2d(2, 3, 3, &mut r)]).unwrap();
        let x = rand_tensor(vec![2, 6, 6], &mut r);
        let eq = inflation_equivalence(&net, 1, &x, 0.0).unwrap();
        assert_eq!(eq.max_deviation, 0.0);
    }

    #[test]
    fn two_conv_net_k3() {
        let mut r = rng::seeded(5);
        let net = NetSpec::new(vec![conv2d(3, 2, 3, &mut r), Layer::Relu, conv2d(2, 3, 3, &mut r)]).unwrap();
        let x = rand_tensor(vec![2, 7, 7], &mut r);
        let eq = inflation_equivalence(&net, 3, &x, 1e-5).unwrap();
        assert!(eq.within_tolerance, "{}", eq.max_deviation);
        assert_eq!(eq.frames, 5);
    }

    #[test]
    fn unnormalized_single_conv_scales_by_k() {
        let mut r = rng::seeded(6);
        let Layer::Conv2d(mut c) = conv2d(2, 2, 3, &mut r) else { unreachable!() };
        c.bias = vec![0.0; 2];
        let net = NetSpec::new(vec![Layer::Conv2d(c)]).unwrap();
        let x = rand_tensor(vec![2, 5, 5], &mut r);
        let k = 3;
        let y = net.forward(&x).unwrap();
        let eq = inflation_equivalence_with(&net, k, &x, 1e-5, false).unwrap();
        assert!(!eq.within_tolerance);
        let max_out = y.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((eq.max_deviation - (k - 1) as f64 * max_out).abs() < 1e-9);
    }

    #[test]
    fn fcn_transform_structure_and_exactness() {
        let mut r = rng::seeded(7);
        let net = NetSpec::new(vec![
            conv2d(4, 3, 3, &mut r),
            Layer::Relu,
            Layer::GlobalAvgPool,
            Layer::Dense(Dense {
                weight: rand_tensor(vec![5, 4], &mut r),
                bias: (0..5).map(|_| r.random_range(-1.0..1.0)).collect(),
            }),
        ])
        .unwrap();
        let fcn = fcn_transform(&net).unwrap();
        assert!(matches!(fcn.layers()[2], Layer::Conv2d(_)));
        assert!(matches!(fcn.layers()[3], Layer::GlobalAvgPool));
        let x = rand_tensor(vec![3, 8, 8], &mut r);
        let dev = net.forward(&x).unwrap().max_abs_diff(&fcn.forward(&x).unwrap()).unwrap();
        assert!(dev <= 1e-6);
        let big = rand_tensor(vec![3, 12, 17], &mut r);
        let y = fcn.forward(&big).unwrap();
        assert_eq!(y.dims(), &[5]);
        assert!(y.data().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn fcn_on_unit_spatial_map_is_relabeling() {
        let mut r = rng::seeded(8);
        let net3 = inflate_net(
            &NetSpec::new(vec![
                conv2d(4, 2, 1, &mut r),
                Layer::GlobalAvgPool,
                Layer::Dense(Dense {
                    weight: rand_tensor(vec![3, 4], &mut r),
                    bias: vec![0.1, 0.2, 0.3],
                }),
            ])
            .unwrap(),
            1,
        )
        .unwrap();
        let fcn = fcn_transform(&net3).unwrap();
        let Layer::Conv3d(c) = &fcn.layers()[1] else { panic!("expected conv3d") };
        assert_eq!(c.weight.dims(), &[3, 4, 1, 1, 1]);
        let x = rand_tensor(vec![2, 1, 1, 1], &mut r);
        let dev = net3.forward(&x).unwrap().max_abs_diff(&fcn.forward(&x).unwrap()).unwrap();
        assert!(dev <= 1e-12);
    }

    #[test]
    fn fcn_requires_dense_after_pool() {
        let mut r = rng::seeded(9);
        let net = NetSpec::new(vec![conv2d(2, 2, 3, &mut r)]).unwrap();
        assert!(fcn_transform(&net).is_err());
    }
}
