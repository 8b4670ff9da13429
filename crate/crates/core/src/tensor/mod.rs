//! A small forward-only tensor and convolution engine, enough to perform and
//! check 2D to 3D filter inflation and the fully-convolutional transform.
//!
//! Values are held as `f64`; weight files store `f32`.

pub mod conv;
pub mod inflate;
pub mod io;
pub mod net;
pub mod scale;

pub use conv::{conv2d_forward, conv3d_forward, Padding};
pub use inflate::{fcn_transform, inflate, inflate_net, inflation_equivalence, Equivalence};
pub use net::{Conv2d, Conv3d, Dense, Layer, NetSpec};
pub use scale::{center_crop_window, scale_shortest_edge};

use crate::error::{Error, Result};

/// How a weight tensor's dimensions are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// `(out, in, h, w)`
    Conv2d,
    /// `(out, in, t, h, w)`
    Conv3d,
    /// `(out, in)`
    Dense,
    Vector,
}

impl Layout {
    pub fn of_rank(rank: usize) -> Option<Self> {
        match rank {
            1 => Some(Layout::Vector),
            2 => Some(Layout::Dense),
            4 => Some(Layout::Conv2d),
            5 => Some(Layout::Conv3d),
            _ => None,
        }
    }
}

/// Dense row-major tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::shape(format!("dims {dims:?} must be non-empty and positive")));
        }
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(Error::shape(format!(
                "dims {dims:?} hold {n} values, got {}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("tensor contains non-finite values"));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self {
            dims,
            data: vec![0.0; n],
        }
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(usize) -> f64) -> Self {
        let n: usize = dims.iter().product();
        Self {
            dims,
            data: (0..n).map(&mut f).collect(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn layout(&self) -> Option<Layout> {
        Layout::of_rank(self.rank())
    }

    pub fn reshape(self, dims: Vec<usize>) -> Result<Self> {
        if dims.iter().product::<usize>() != self.data.len() {
            return Err(Error::shape(format!("cannot reshape {:?} to {dims:?}", self.dims)));
        }
        Ok(Self {
            dims,
            data: self.data,
        })
    }

    pub fn map(mut self, f: impl Fn(f64) -> f64) -> Self {
        self.data.iter_mut().for_each(|x| *x = f(*x));
        self
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> Result<f64> {
        if self.data.len() != other.data.len() {
            return Err(Error::shape(format!(
                "cannot compare {:?} with {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::new(vec![2, 0], vec![]).is_err());
        assert!(Tensor::new(vec![1], vec![f64::NAN]).is_err());
        assert_eq!(Tensor::zeros(vec![2, 3, 4, 5]).layout(), Some(Layout::Conv2d));
    }
}
