//! Minimal layer stack: convolutions, ReLU, global average pooling, one
//! terminal dense layer and an optional softmax.

use super::conv::{conv2d_forward, conv3d_forward, Padding};
use super::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    /// `(out, in, kh, kw)`
    pub weight: Tensor,
    pub bias: Vec<f64>,
    pub stride: usize,
    pub same_padding: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conv3d {
    /// `(out, in, kt, kh, kw)`
    pub weight: Tensor,
    pub bias: Vec<f64>,
    /// `[t, h, w]`
    pub stride: [usize; 3],
    /// `[t, h, w]`
    pub same_padding: [bool; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `(out, in)`
    pub weight: Tensor,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv2d(Conv2d),
    Conv3d(Conv3d),
    Relu,
    GlobalAvgPool,
    Dense(Dense),
    Softmax,
}

impl Layer {
    pub fn name(&self) -> &'static str {
        match self {
            Layer::Conv2d(_) => "conv2d",
            Layer::Conv3d(_) => "conv3d",
            Layer::Relu => "relu",
            Layer::GlobalAvgPool => "global_avg_pool",
            Layer::Dense(_) => "dense",
            Layer::Softmax => "softmax",
        }
    }

    fn is_conv(&self) -> bool {
        matches!(self, Layer::Conv2d(_) | Layer::Conv3d(_))
    }
}

fn pad(same: bool) -> Padding {
    if same {
        Padding::Same
    } else {
        Padding::Valid
    }
}

impl Conv2d {
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        conv2d_forward(x, &self.weight, &self.bias, self.stride, pad(self.same_padding))
    }

    fn channels(&self) -> (usize, usize) {
        (self.weight.dims()[1], self.weight.dims()[0])
    }
}

impl Conv3d {
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        conv3d_forward(x, &self.weight, &self.bias, self.stride, self.same_padding.map(pad))
    }

    fn channels(&self) -> (usize, usize) {
        (self.weight.dims()[1], self.weight.dims()[0])
    }
}

impl Dense {
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let &[o, i] = self.weight.dims() else {
            return Err(Error::shape("dense weight must be (out, in)"));
        };
        if x.rank() != 1 || x.len() != i {
            return Err(Error::shape(format!("dense expects ({i},), got {:?}", x.dims())));
        }
        let w = self.weight.data();
        let out = (0..o)
            .map(|r| {
                w[r * i..(r + 1) * i]
                    .iter()
                    .zip(x.data())
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    + self.bias[r]
            })
            .collect();
        Tensor::new(vec![o], out)
    }
}

/// Averages every non-channel position: `(c, ...)` to `(c,)`.
pub fn global_avg_pool(x: &Tensor) -> Result<Tensor> {
    if x.rank() < 2 {
        return Err(Error::shape(format!("pooling needs (c, ...), got {:?}", x.dims())));
    }
    let c = x.dims()[0];
    let per = x.len() / c;
    let out = x
        .data()
        .chunks_exact(per)
        .map(|ch| ch.iter().sum::<f64>() / per as f64)
        .collect();
    Tensor::new(vec![c], out)
}

pub fn softmax(x: &Tensor) -> Result<Tensor> {
    if x.rank() != 1 {
        return Err(Error::shape("softmax expects a vector"));
    }
    Tensor::new(vec![x.len()], crate::eval::clips::softmax(x.data()))
}

/// An ordered layer stack with compatible channel counts.
#[derive(Debug, Clone, PartialEq)]
pub struct NetSpec {
    layers: Vec<Layer>,
}

impl NetSpec {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let net = Self { layers };
        net.validate()?;
        Ok(net)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Layer> {
        self.layers
    }

    pub fn conv_count(&self) -> usize {
        self.layers.iter().filter(|l| l.is_conv()).count()
    }

    fn validate(&self) -> Result<()> {
        let mut channels: Option<usize> = None;
        let mut pooled = false;
        let mut dense_at = None;
        for (i, layer) in self.layers.iter().enumerate() {
            if dense_at.is_some() && !matches!(layer, Layer::Softmax) {
                return Err(Error::shape(format!(
                    "layer {i} ({}) follows the terminal dense layer",
                    layer.name()
                )));
            }
            let io = match layer {
                Layer::Conv2d(c) => {
                    check_bias(&c.weight, &c.bias, 4)?;
                    if c.stride == 0 {
                        return Err(Error::shape("stride must be positive"));
                    }
                    Some(c.channels())
                }
                Layer::Conv3d(c) => {
                    check_bias(&c.weight, &c.bias, 5)?;
                    if c.stride.contains(&0) {
                        return Err(Error::shape("stride must be positive"));
                    }
                    Some(c.channels())
                }
                Layer::Dense(d) => {
                    check_bias(&d.weight, &d.bias, 2)?;
                    dense_at = Some(i);
                    let &[o, inp] = d.weight.dims() else { unreachable!() };
                    Some((inp, o))
                }
                Layer::GlobalAvgPool => {
                    pooled = true;
                    None
                }
                Layer::Relu | Layer::Softmax => None,
            };
            if let Some((inp, out)) = io {
                if pooled && layer.is_conv() {
                    return Err(Error::shape(format!("convolution at layer {i} after pooling")));
                }
                if let Some(c) = channels {
                    if c != inp {
                        return Err(Error::shape(format!(
                            "layer {i} ({}) expects {inp} channels, previous layer gives {c}",
                            layer.name()
                        )));
                    }
                }
                channels = Some(out);
            }
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.forward_range(x, 0..self.layers.len())
    }

    /// Runs layers `range` only.
    pub fn forward_range(&self, x: &Tensor, range: std::ops::Range<usize>) -> Result<Tensor> {
        let mut cur = x.clone();
        for layer in &self.layers[range] {
            cur = match layer {
                Layer::Conv2d(c) => c.forward(&cur)?,
                Layer::Conv3d(c) => c.forward(&cur)?,
                Layer::Relu => cur.map(|v| v.max(0.0)),
                Layer::GlobalAvgPool => global_avg_pool(&cur)?,
                Layer::Dense(d) => d.forward(&cur)?,
                Layer::Softmax => softmax(&cur)?,
            };
        }
        Ok(cur)
    }
}

fn check_bias(w: &Tensor, bias: &[f64], rank: usize) -> Result<()> {
    if w.rank() != rank {
        return Err(Error::shape(format!("expected rank-{rank} weight, got {:?}", w.dims())));
    }
    if bias.len() != w.dims()[0] {
        return Err(Error::shape(format!(
            "{} biases for {} outputs",
            bias.len(),
            w.dims()[0]
        )));
    }
    if bias.iter().any(|b| !b.is_finite()) {
        return Err(Error::invalid("non-finite bias"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv(o: usize, i: usize) -> Layer {
        Layer::Conv2d(Conv2d {
            weight: Tensor::zeros(vec![o, i, 3, 3]),
            bias: vec![0.0; o],
            stride: 1,
            same_padding: true,
        })
    }

    fn dense(o: usize, i: usize) -> Layer {
        Layer::Dense(Dense {
            weight: Tensor::zeros(vec![o, i]),
            bias: vec![0.0; o],
        })
    }

    #[test]
    fn validates_channel_chain() {
        assert!(NetSpec::new(vec![conv(4, 3), Layer::Relu, conv(2, 4)]).is_ok());
        assert!(NetSpec::new(vec![conv(4, 3), conv(2, 5)]).is_err());
        assert!(NetSpec::new(vec![conv(4, 3), Layer::GlobalAvgPool, dense(5, 4), Layer::Softmax]).is_ok());
        assert!(NetSpec::new(vec![conv(4, 3), Layer::GlobalAvgPool, dense(5, 3)]).is_err());
        assert!(NetSpec::new(vec![dense(5, 4), Layer::Relu]).is_err());
        assert!(NetSpec::new(vec![dense(5, 4), dense(5, 5)]).is_err());
    }

    #[test]
    fn pooling_averages_positions() {
        let x = Tensor::new(vec![2, 2, 1], vec![1.0, 3.0, -1.0, 5.0]).unwrap();
        assert_eq!(global_avg_pool(&x).unwrap().data(), &[2.0, 2.0]);
    }

    #[test]
    fn forward_shapes() {
        let net = NetSpec::new(vec![conv(4, 3), Layer::Relu, Layer::GlobalAvgPool, dense(5, 4), Layer::Softmax])
            .unwrap();
        let y = net.forward(&Tensor::zeros(vec![3, 8, 8])).unwrap();
        assert_eq!(y.dims(), &[5]);
        assert!((y.data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
