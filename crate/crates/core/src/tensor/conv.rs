//! Direct-sum convolution (cross-correlation, no kernel flip).

use rayon::prelude::*;

use super::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    Valid,
    /// Zero padding giving `ceil(n / stride)` outputs; any odd padding
    /// element goes after the data.
    Same,
}

impl Padding {
    fn amounts(self, k: usize) -> (usize, usize) {
        match self {
            Padding::Valid => (0, 0),
            Padding::Same => ((k - 1) / 2, k - 1 - (k - 1) / 2),
        }
    }
}

/// Spatio-temporal convolution of `x (c, t, h, w)` with `w (o, c, kt, kh, kw)`.
/// Axes are `[t, h, w]` in `stride` and `pad`.
fn conv_core(
    x: &Tensor,
    w: &Tensor,
    bias: &[f64],
    stride: [usize; 3],
    pad: [Padding; 3],
) -> Result<Tensor> {
    let &[c, t, h, wd] = x.dims() else {
        return Err(Error::shape(format!("input dims {:?}", x.dims())));
    };
    let &[o, ci, kt, kh, kw] = w.dims() else {
        return Err(Error::shape(format!("kernel dims {:?}", w.dims())));
    };
    if ci != c {
        return Err(Error::shape(format!("kernel expects {ci} channels, input has {c}")));
    }
    if bias.len() != o {
        return Err(Error::shape(format!("{} biases for {o} output channels", bias.len())));
    }
    if stride.contains(&0) {
        return Err(Error::shape("stride must be positive"));
    }
    let sizes = [t, h, wd];
    let ks = [kt, kh, kw];
    let mut pads = [(0, 0); 3];
    let mut outs = [0; 3];
    for a in 0..3 {
        pads[a] = pad[a].amounts(ks[a]);
        let padded = sizes[a] + pads[a].0 + pads[a].1;
        if padded < ks[a] {
            return Err(Error::shape(format!(
                "kernel extent {} exceeds padded input {padded} on axis {a}",
                ks[a]
            )));
        }
        outs[a] = (padded - ks[a]) / stride[a] + 1;
    }
    let [ot, oh, ow] = outs;
    let plane = ot * oh * ow;
    let xs = x.data();
    let ws = w.data();
    let mut out = vec![0.0; o * plane];
    out.par_chunks_mut(plane).enumerate().for_each(|(oc, dst)| {
        for pt in 0..ot {
            for ph in 0..oh {
                for pw in 0..ow {
                    let mut acc = bias[oc];
                    for ic in 0..c {
                        for a in 0..kt {
                            let ti = (pt * stride[0] + a) as isize - pads[0].0 as isize;
                            if ti < 0 || ti >= t as isize {
                                continue;
                            }
                            for b in 0..kh {
                                let hi = (ph * stride[1] + b) as isize - pads[1].0 as isize;
                                if hi < 0 || hi >= h as isize {
                                    continue;
                                }
                                let xrow = ((ic * t + ti as usize) * h + hi as usize) * wd;
                                let wrow = (((oc * c + ic) * kt + a) * kh + b) * kw;
                                for d in 0..kw {
                                    let wi = (pw * stride[2] + d) as isize - pads[2].0 as isize;
                                    if wi < 0 || wi >= wd as isize {
                                        continue;
                                    }
                                    acc += xs[xrow + wi as usize] * ws[wrow + d];
                                }
                            }
                        }
                    }
                    dst[(pt * oh + ph) * ow + pw] = acc;
                }
            }
        }
    });
    Tensor::new(vec![o, ot, oh, ow], out)
}

/// 2D convolution of `x (c, h, w)` with `w (o, c, kh, kw)`.
pub fn conv2d_forward(x: &Tensor, w: &Tensor, bias: &[f64], stride: usize, pad: Padding) -> Result<Tensor> {
    let &[c, h, wd] = x.dims() else {
        return Err(Error::shape(format!("conv2d input must be (c, h, w), got {:?}", x.dims())));
    };
    let &[o, ci, kh, kw] = w.dims() else {
        return Err(Error::shape(format!("conv2d kernel must be (o, c, h, w), got {:?}", w.dims())));
    };
    let x3 = x.clone().reshape(vec![c, 1, h, wd])?;
    let w3 = w.clone().reshape(vec![o, ci, 1, kh, kw])?;
    let y = conv_core(&x3, &w3, bias, [1, stride, stride], [Padding::Valid, pad, pad])?;
    let d = y.dims().to_vec();
    y.reshape(vec![d[0], d[2], d[3]])
}

/// 3D convolution of `x (c, t, h, w)` with `w (o, c, kt, kh, kw)`; `stride`
/// and `pad` are given per axis as `[t, h, w]`.
pub fn conv3d_forward(
    x: &Tensor,
    w: &Tensor,
    bias: &[f64],
    stride: [usize; 3],
    pad: [Padding; 3],
) -> Result<Tensor> {
    conv_core(x, w, bias, stride, pad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn random(dims: Vec<usize>, seed: u64) -> Tensor {
        let mut r = rng::seeded(seed);
        Tensor::from_fn(dims, |_| r.random_range(-1.0..1.0))
    }

    /// Independent reference: explicit loops with padded-index bookkeeping.
    fn naive_conv2d(x: &Tensor, w: &Tensor, bias: &[f64], s: usize, same: bool) -> Vec<f64> {
        let (c, h, wd) = (x.dims()[0], x.dims()[1], x.dims()[2]);
        let (o, kh, kw) = (w.dims()[0], w.dims()[2], w.dims()[3]);
        let (ph, pw) = if same { ((kh - 1) / 2, (kw - 1) / 2) } else { (0, 0) };
        let (eh, ew) = if same { (kh - 1 - ph, kw - 1 - pw) } else { (0, 0) };
        let oh = (h + ph + eh - kh) / s + 1;
        let ow = (wd + pw + ew - kw) / s + 1;
        let get = |ci: usize, y: i64, xx: i64| -> f64 {
            if y < 0 || xx < 0 || y >= h as i64 || xx >= wd as i64 {
                0.0
            } else {
                x.data()[(ci * h + y as usize) * wd + xx as usize]
            }
        };
        let mut out = Vec::new();
        for oc in 0..o {
            for i in 0..oh {
                for j in 0..ow {
                    let mut acc = bias[oc];
                    for ci in 0..c {
                        for a in 0..kh {
                            for b in 0..kw {
                                let y = (i * s + a) as i64 - ph as i64;
                                let xx = (j * s + b) as i64 - pw as i64;
                                acc += get(ci, y, xx) * w.data()[((oc * c + ci) * kh + a) * kw + b];
                            }
                        }
                    }
                    out.push(acc);
                }
            }
        }
        out
    }

    #[test]
    fn identity_kernel() {
        let x = random(vec![1, 5, 6], 1);
        let w = Tensor::new(vec![1, 1, 1, 1], vec![1.0]).unwrap();
        let y = conv2d_forward(&x, &w, &[0.0], 1, Padding::Valid).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn ones_kernel_sums_window() {
        let x = Tensor::from_fn(vec![1, 5, 5], |_| 1.0);
        let w = Tensor::from_fn(vec![1, 1, 3, 3], |_| 1.0);
        let y = conv2d_forward(&x, &w, &[0.0], 1, Padding::Valid).unwrap();
        assert_eq!(y.dims(), &[1, 3, 3]);
        assert!(y.data().iter().all(|&v| v == 9.0));
    }

    #[test]
    fn random_case_matches_oracle() {
        let x = random(vec![2, 4, 4], 2);
        let w = random(vec![3, 2, 3, 3], 3);
        let b = [0.1, -0.2, 0.3];
        for same in [false, true] {
            let pad = if same { Padding::Same } else { Padding::Valid };
            let y = conv2d_forward(&x, &w, &b, 1, pad).unwrap();
            let r = naive_conv2d(&x, &w, &b, 1, same);
            let dev = y.data().iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dev <= 1e-6, "dev {dev}");
        }
    }

    #[test]
    fn depth_one_kernel_equals_2d() {
        let x2 = random(vec![2, 6, 5], 4);
        let w2 = random(vec![3, 2, 3, 3], 5);
        let b = [0.0, 1.0, -1.0];
        let y2 = conv2d_forward(&x2, &w2, &b, 1, Padding::Same).unwrap();
        let x3 = x2.clone().reshape(vec![2, 1, 6, 5]).unwrap();
        let w3 = w2.clone().reshape(vec![3, 2, 1, 3, 3]).unwrap();
        let y3 = conv3d_forward(&x3, &w3, &b, [1, 1, 1], [Padding::Same; 3]).unwrap();
        assert_eq!(y3.data(), y2.data());
    }

    #[test]
    fn constant_in_time_stays_constant_away_from_borders() {
        let frame = random(vec![2, 1, 5, 5], 6);
        let t = 9;
        let x = Tensor::from_fn(vec![2, t, 5, 5], |i| {
            let per_c = t * 25;
            let (ci, rest) = (i / per_c, i % per_c);
            frame.data()[ci * 25 + rest % 25]
        });
        let w = random(vec![2, 2, 3, 3, 3], 7);
        let y = conv3d_forward(&x, &w, &[0.0, 0.0], [1, 1, 1], [Padding::Same; 3]).unwrap();
        let per_t = 25;
        for oc in 0..2 {
            let base = &y.data()[(oc * t + 1) * per_t..(oc * t + 2) * per_t];
            for ti in 2..t - 1 {
                let cur = &y.data()[(oc * t + ti) * per_t..(oc * t + ti + 1) * per_t];
                assert_eq!(cur, base);
            }
        }
    }

    #[test]
    fn shape_errors() {
        let x = random(vec![2, 4, 4], 1);
        let w = random(vec![3, 1, 3, 3], 1);
        assert!(conv2d_forward(&x, &w, &[0.0; 3], 1, Padding::Valid).is_err());
        let w = random(vec![3, 2, 5, 5], 1);
        assert!(conv2d_forward(&x, &w, &[0.0; 3], 1, Padding::Valid).is_err());
        let w = random(vec![3, 2, 3, 3], 1);
        assert!(conv2d_forward(&x, &w, &[0.0; 2], 1, Padding::Valid).is_err());
    }
}
