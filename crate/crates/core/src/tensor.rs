//! Dense channel-major `f32` images and their `TEN1` binary encoding.
//!
//! `TEN1` layout (little-endian): magic `"TEN1"`, `u32` channels, `u32`
//! height, `u32` width, then `channels * height * width` `f32` values,
//! channel-major then row-major.

use std::io::Write;

use crate::codec::{checked_u32, put_f32s, put_u32, ByteReader};
use crate::error::{invalid, Result};

pub const TEN1_MAGIC: &[u8; 4] = b"TEN1";

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        let len = channels
            .checked_mul(height)
            .and_then(|n| n.checked_mul(width))
            .ok_or_else(|| invalid("tensor dimensions overflow"))?;
        if data.len() != len {
            return Err(invalid(format!(
                "tensor {channels}x{height}x{width} needs {len} values, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite tensor value at index {i}")));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f32) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![value; channels * height * width],
        }
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::filled(channels, height, width, 0.0)
    }

    /// Builds a tensor by evaluating `f(channel, row, col)` everywhere.
    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Self {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self {
            channels,
            height,
            width,
            data,
        }
    }

    /// Caller guarantees the length matches and values are finite.
    pub(crate) fn from_parts(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), channels * height * width);
        Self {
            channels,
            height,
            width,
            data,
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn set(&mut self, c: usize, y: usize, x: usize, value: f32) {
        self.data[(c * self.height + y) * self.width + x] = value;
    }

    pub fn min_max(&self) -> Option<(f32, f32)> {
        self.data.iter().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    /// Columns rotated right by `shift`: output column `x` holds input
    /// column `x - shift` (mod width).
    pub fn roll_columns(&self, shift: isize) -> Tensor {
        let w = self.width as isize;
        Tensor::from_fn(self.channels, self.height, self.width, |c, y, x| {
            let src = (x as isize - shift).rem_euclid(w) as usize;
            self.get(c, y, src)
        })
    }

    /// Largest absolute element-wise difference. Panics if dims differ.
    pub fn max_abs_diff(&self, other: &Tensor) -> f32 {
        assert_eq!(self.dims(), other.dims(), "tensor dims differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.data.len() * 4);
        out.extend_from_slice(TEN1_MAGIC);
        put_u32(&mut out, self.channels);
        put_u32(&mut out, self.height);
        put_u32(&mut out, self.width);
        put_f32s(&mut out, &self.data);
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for d in [self.channels, self.height, self.width] {
            checked_u32("TEN1", d)?;
        }
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new("TEN1", buf);
        r.expect_magic(TEN1_MAGIC)?;
        let channels = r.u32_as_usize()?;
        let height = r.u32_as_usize()?;
        let width = r.u32_as_usize()?;
        let n = channels
            .checked_mul(height)
            .and_then(|n| n.checked_mul(width))
            .ok_or_else(|| crate::error::malformed("TEN1", "dimensions overflow"))?;
        let data = r.f32_vec(n)?;
        r.finish()?;
        Ok(Self::from_parts(channels, height, width, data))
    }
}
