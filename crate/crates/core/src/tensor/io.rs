//! Weight files.
//!
//! A tensor record is
//! `"WTSR" | u16 version = 1 | u8 dtype (0 = f32) | u8 ndim | ndim × u64 dims | f32 payload`,
//! little-endian, row-major.
//!
//! A network file is `"WTNT" | u16 version = 1 | u32 layer count` followed by
//! one entry per layer: a `u8` tag, the layer's scalar parameters, then its
//! weight and bias as tensor records.
//!
//! | tag | layer           | parameters                                |
//! |-----|-----------------|-------------------------------------------|
//! | 0   | conv2d          | u32 stride, u8 same                       |
//! | 1   | conv3d          | 3 × u32 stride (t, h, w), 3 × u8 same     |
//! | 2   | relu            |                                           |
//! | 3   | global avg pool |                                           |
//! | 4   | dense           |                                           |
//! | 5   | softmax         |                                           |

use std::fs;
use std::path::Path;

use super::net::{Conv2d, Conv3d, Dense, Layer, NetSpec};
use super::Tensor;
use crate::error::{Error, Result};

pub const TENSOR_MAGIC: &[u8; 4] = b"WTSR";
pub const NET_MAGIC: &[u8; 4] = b"WTNT";
pub const VERSION: u16 = 1;
const DTYPE_F32: u8 = 0;

/// Either a bare tensor or a whole network.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFile {
    Tensor(Tensor),
    Net(NetSpec),
}

pub fn write_tensor(out: &mut Vec<u8>, t: &Tensor) -> Result<()> {
    let ndim = u8::try_from(t.rank()).map_err(|_| Error::shape("too many dimensions"))?;
    out.extend_from_slice(TENSOR_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(DTYPE_F32);
    out.push(ndim);
    for &d in t.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &v in t.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format(format!("truncated weight file at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn flag(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(Error::Format(format!("invalid flag byte {v}"))),
        }
    }

    fn version(&mut self) -> Result<()> {
        match self.u16()? {
            VERSION => Ok(()),
            v => Err(Error::Format(format!("unsupported weight file version {v}"))),
        }
    }

    fn tensor(&mut self) -> Result<Tensor> {
        if self.take(4)? != TENSOR_MAGIC {
            return Err(Error::Format("expected WTSR tensor record".into()));
        }
        self.version()?;
        let dtype = self.u8()?;
        if dtype != DTYPE_F32 {
            return Err(Error::Format(format!("unsupported dtype {dtype}")));
        }
        let ndim = self.u8()? as usize;
        let dims: Vec<usize> = (0..ndim)
            .map(|_| self.u64().map(|d| d as usize))
            .collect::<Result<_>>()?;
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::Format("tensor size overflows".into()))?;
        let payload = self.take(n)?;
        let data = payload
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect();
        Tensor::new(dims, data)
    }

    fn vector(&mut self) -> Result<Vec<f64>> {
        let t = self.tensor()?;
        if t.rank() != 1 {
            return Err(Error::Format(format!("bias must be a vector, got {:?}", t.dims())));
        }
        Ok(t.into_data())
    }
}

fn bias_tensor(b: &[f64]) -> Result<Tensor> {
    Tensor::new(vec![b.len()], b.to_vec())
}

pub fn encode_tensor(t: &Tensor) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_tensor(&mut out, t)?;
    Ok(out)
}

pub fn encode_net(net: &NetSpec) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(NET_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(net.layers().len() as u32).to_le_bytes());
    for layer in net.layers() {
        match layer {
            Layer::Conv2d(c) => {
                out.push(0);
                out.extend_from_slice(&(c.stride as u32).to_le_bytes());
                out.push(u8::from(c.same_padding));
                write_tensor(&mut out, &c.weight)?;
                write_tensor(&mut out, &bias_tensor(&c.bias)?)?;
            }
            Layer::Conv3d(c) => {
                out.push(1);
                for s in c.stride {
                    out.extend_from_slice(&(s as u32).to_le_bytes());
                }
                out.extend(c.same_padding.iter().map(|&b| u8::from(b)));
                write_tensor(&mut out, &c.weight)?;
                write_tensor(&mut out, &bias_tensor(&c.bias)?)?;
            }
            Layer::Relu => out.push(2),
            Layer::GlobalAvgPool => out.push(3),
            Layer::Dense(d) => {
                out.push(4);
                write_tensor(&mut out, &d.weight)?;
                write_tensor(&mut out, &bias_tensor(&d.bias)?)?;
            }
            Layer::Softmax => out.push(5),
        }
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<WeightFile> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    let out = match bytes.get(..4) {
        Some(m) if m == TENSOR_MAGIC => WeightFile::Tensor(c.tensor()?),
        Some(m) if m == NET_MAGIC => {
            c.take(4)?;
            c.version()?;
            let n = c.u32()? as usize;
            let mut layers = Vec::with_capacity(n.min(1024));
            for _ in 0..n {
                layers.push(match c.u8()? {
                    0 => {
                        let stride = c.u32()? as usize;
                        let same_padding = c.flag()?;
                        let weight = c.tensor()?;
                        let bias = c.vector()?;
                        Layer::Conv2d(Conv2d {
                            weight,
                            bias,
                            stride,
                            same_padding,
                        })
                    }
                    1 => {
                        let stride = [c.u32()? as usize, c.u32()? as usize, c.u32()? as usize];
                        let same_padding = [c.flag()?, c.flag()?, c.flag()?];
                        let weight = c.tensor()?;
                        let bias = c.vector()?;
                        Layer::Conv3d(Conv3d {
                            weight,
                            bias,
                            stride,
                            same_padding,
                        })
                    }
                    2 => Layer::Relu,
                    3 => Layer::GlobalAvgPool,
                    4 => {
                        let weight = c.tensor()?;
                        let bias = c.vector()?;
                        Layer::Dense(Dense { weight, bias })
                    }
                    5 => Layer::Softmax,
                    tag => return Err(Error::Format(format!("unknown layer tag {tag}"))),
                });
            }
            WeightFile::Net(NetSpec::new(layers)?)
        }
        _ => return Err(Error::Format("not a WTSR or WTNT weight file".into())),
    };
    if c.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    Ok(out)
}

pub fn encode(file: &WeightFile) -> Result<Vec<u8>> {
    match file {
        WeightFile::Tensor(t) => encode_tensor(t),
        WeightFile::Net(n) => encode_net(n),
    }
}

pub fn read_weights(path: impl AsRef<Path>) -> Result<WeightFile> {
    let path = path.as_ref();
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn write_weights(file: &WeightFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(file)?).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tensor_header_layout() {
        let t = Tensor::new(vec![2, 1], vec![1.0, -2.5]).unwrap();
        let b = encode_tensor(&t).unwrap();
        let mut expected = b"WTSR".to_vec();
        expected.extend_from_slice(&[1, 0, 0, 2]);
        expected.extend_from_slice(&2u64.to_le_bytes());
        expected.extend_from_slice(&1u64.to_le_bytes());
        expected.extend_from_slice(&1.0f32.to_le_bytes());
        expected.extend_from_slice(&(-2.5f32).to_le_bytes());
        assert_eq!(b, expected);
    }

    #[test]
    fn net_roundtrip() {
        let net = NetSpec::new(vec![
            Layer::Conv2d(Conv2d {
                weight: Tensor::from_fn(vec![2, 1, 3, 3], |i| i as f64 * 0.25),
                bias: vec![0.5, -0.5],
                stride: 2,
                same_padding: true,
            }),
            Layer::Relu,
            Layer::GlobalAvgPool,
            Layer::Dense(Dense {
                weight: Tensor::from_fn(vec![3, 2], |i| i as f64),
                bias: vec![0.0, 1.0, 2.0],
            }),
            Layer::Softmax,
        ])
        .unwrap();
        let bytes = encode_net(&net).unwrap();
        let back = decode(&bytes).unwrap();
        assert_eq!(back, WeightFile::Net(net));
        assert_eq!(encode(&back).unwrap(), bytes);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode(b"nope").is_err());
        let t = Tensor::new(vec![2], vec![1.0, 2.0]).unwrap();
        let mut b = encode_tensor(&t).unwrap();
        b.push(0);
        assert!(decode(&b).is_err());
        b.truncate(b.len() - 2);
        assert!(decode(&b).is_err());
    }

    proptest! {
        #[test]
        fn tensor_roundtrip_bit_exact(dims in proptest::collection::vec(1usize..5, 1..6), seed in any::<u32>()) {
            let n: usize = dims.iter().product();
            let data: Vec<f64> = (0..n)
                .map(|i| f64::from(f32::from_bits((seed.wrapping_mul(2654435761).wrapping_add(i as u32 * 97)) & 0x3fff_ffff)))
                .collect();
            let t = Tensor::new(dims, data).unwrap();
            let bytes = encode_tensor(&t).unwrap();
            let back = decode(&bytes).unwrap();
            prop_assert_eq!(&back, &WeightFile::Tensor(t));
            prop_assert_eq!(encode(&back).unwrap(), bytes);
        }
    }
}
