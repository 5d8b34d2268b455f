//! Direct stride-equals-kernel convolution, plus a gather-and-dot oracle that
//! computes the same spherical convolution straight from the original image.
//!
//! `WGT1` layout (little-endian): magic `"WGT1"`, `u32` out, `u32` in,
//! `u32` kh, `u32` kw, `u8` has_bias, three zero bytes, `f32` weights
//! row-major `(out, in, kh, kw)`, then `f32 bias[out]` when present.

use std::io::Write;

use rayon::prelude::*;

use crate::codec::{checked_u32, put_f32s, put_u32, ByteReader};
use crate::error::{invalid, malformed, Result};
use crate::geometry::ProjectionConfig;
use crate::kernel::{build_lut, KernelSpec, SamplingLut, SpacingMode};
use crate::resample::{check_matches_lut, resample};
use crate::tensor::Tensor;

pub const WGT1_MAGIC: &[u8; 4] = b"WGT1";

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    out_channels: usize,
    in_channels: usize,
    kernel: usize,
    data: Vec<f32>,
    bias: Option<Vec<f32>>,
}

impl WeightSet {
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        kernel_h: usize,
        kernel_w: usize,
        data: Vec<f32>,
        bias: Option<Vec<f32>>,
    ) -> Result<Self> {
        if kernel_h != kernel_w || !matches!(kernel_h, 2 | 4 | 7) {
            return Err(invalid(format!(
                "kernel must be square with size 2, 4 or 7, got {kernel_h}x{kernel_w}"
            )));
        }
        if out_channels == 0 || in_channels == 0 {
            return Err(invalid(
                "weights need at least one input and output channel",
            ));
        }
        let len = out_channels * in_channels * kernel_h * kernel_w;
        if data.len() != len {
            return Err(invalid(format!(
                "expected {len} weights, got {}",
                data.len()
            )));
        }
        if let Some(b) = &bias {
            if b.len() != out_channels {
                return Err(invalid(format!(
                    "expected {out_channels} bias values, got {}",
                    b.len()
                )));
            }
        }
        let all_finite = data
            .iter()
            .chain(bias.iter().flatten())
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(invalid("weights contain non-finite values"));
        }
        Ok(Self {
            out_channels,
            in_channels,
            kernel: kernel_h,
            data,
            bias,
        })
    }

    pub fn from_fn(
        out_channels: usize,
        in_channels: usize,
        kernel: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(out_channels * in_channels * kernel * kernel);
        for o in 0..out_channels {
            for i in 0..in_channels {
                for a in 0..kernel {
                    for b in 0..kernel {
                        data.push(f(o, i, a, b));
                    }
                }
            }
        }
        Self::new(out_channels, in_channels, kernel, kernel, data, None)
    }

    pub fn with_bias(mut self, bias: Vec<f32>) -> Result<Self> {
        if bias.len() != self.out_channels || bias.iter().any(|v| !v.is_finite()) {
            return Err(invalid(
                "bias must have one finite value per output channel",
            ));
        }
        self.bias = Some(bias);
        Ok(self)
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn bias(&self) -> Option<&[f32]> {
        self.bias.as_deref()
    }

    fn bias_of(&self, o: usize) -> f64 {
        self.bias.as_ref().map_or(0.0, |b| b[o] as f64)
    }

    /// Weights of output channel `o`, row-major `(in, kh, kw)`.
    fn filter(&self, o: usize) -> &[f32] {
        let n = self.in_channels * self.kernel * self.kernel;
        &self.data[o * n..(o + 1) * n]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 4 * self.data.len());
        out.extend_from_slice(WGT1_MAGIC);
        put_u32(&mut out, self.out_channels);
        put_u32(&mut out, self.in_channels);
        put_u32(&mut out, self.kernel);
        put_u32(&mut out, self.kernel);
        out.push(self.bias.is_some() as u8);
        out.extend_from_slice(&[0u8; 3]);
        put_f32s(&mut out, &self.data);
        if let Some(b) = &self.bias {
            put_f32s(&mut out, b);
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        checked_u32("WGT1", self.out_channels)?;
        checked_u32("WGT1", self.in_channels)?;
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        const KIND: &str = "WGT1";
        let mut r = ByteReader::new(KIND, buf);
        r.expect_magic(WGT1_MAGIC)?;
        let out_c = r.u32_as_usize()?;
        let in_c = r.u32_as_usize()?;
        let kh = r.u32_as_usize()?;
        let kw = r.u32_as_usize()?;
        let has_bias = match r.u8()? {
            0 => false,
            1 => true,
            b => return Err(malformed(KIND, format!("has_bias flag {b} is not 0 or 1"))),
        };
        r.zeros(3)?;
        let n = out_c
            .checked_mul(in_c)
            .and_then(|n| n.checked_mul(kh))
            .and_then(|n| n.checked_mul(kw))
            .ok_or_else(|| malformed(KIND, "dimensions overflow"))?;
        let data = r.f32_vec(n)?;
        let bias = if has_bias {
            Some(r.f32_vec(out_c)?)
        } else {
            None
        };
        r.finish()?;
        Self::new(out_c, in_c, kh, kw, data, bias).map_err(|e| malformed(KIND, e.to_string()))
    }
}

/// Non-overlapping convolution with `stride == kernel` and no padding.
///
/// `out(c, I, J) = bias(c) + sum w(c, ci, a, b) * in(ci, s*I + a, s*J + b)`,
/// accumulated in `f64` in a fixed order.
pub fn conv2d_strided(input: &Tensor, w: &WeightSet, stride: usize) -> Result<Tensor> {
    let k = w.kernel();
    if stride != k {
        return Err(invalid(format!(
            "stride {stride} must equal kernel size {k}"
        )));
    }
    if input.channels() != w.in_channels() {
        return Err(invalid(format!(
            "input has {} channels, weights expect {}",
            input.channels(),
            w.in_channels()
        )));
    }
    if !input.height().is_multiple_of(stride)
        || !input.width().is_multiple_of(stride)
        || input.is_empty()
    {
        return Err(invalid(format!(
            "input {}x{} is not divisible by stride {stride}",
            input.height(),
            input.width()
        )));
    }
    let out_h = input.height() / stride;
    let out_w = input.width() / stride;
    let in_c = input.channels();
    let mut data = vec![0f32; w.out_channels() * out_h * out_w];

    data.par_chunks_mut(out_w)
        .enumerate()
        .for_each(|(idx, row)| {
            let (o, i) = (idx / out_h, idx % out_h);
            let filter = w.filter(o);
            for (j, out) in row.iter_mut().enumerate() {
                let mut acc = w.bias_of(o);
                for ci in 0..in_c {
                    for a in 0..k {
                        let taps = &filter[(ci * k + a) * k..(ci * k + a + 1) * k];
                        let y = stride * i + a;
                        for (b, &wt) in taps.iter().enumerate() {
                            acc += wt as f64 * input.get(ci, y, stride * j + b) as f64;
                        }
                    }
                }
                *out = acc as f32;
            }
        });

    Ok(Tensor::from_parts(w.out_channels(), out_h, out_w, data))
}

/// Four-weight bilinear interpolation kept separate from the resampler:
/// columns wrap, rows clamp, result stays in `f64`.
fn oracle_bilinear(plane: &[f32], width: usize, height: usize, u: f64, v: f64) -> f64 {
    let floor = |x: f64| {
        let t = x as i64;
        if (t as f64) > x {
            t - 1
        } else {
            t
        }
    };
    let (x0, y0) = (floor(u), floor(v));
    let (ax, ay) = (u - x0 as f64, v - y0 as f64);
    let mut acc = 0.0;
    for (dy, wy) in [(0i64, 1.0 - ay), (1, ay)] {
        let row = (y0 + dy).clamp(0, height as i64 - 1) as usize;
        for (dx, wx) in [(0i64, 1.0 - ax), (1, ax)] {
            let col = (x0 + dx).rem_euclid(width as i64) as usize;
            acc += wy * wx * plane[row * width + col] as f64;
        }
    }
    acc
}

/// Spherical convolution evaluated by gathering every tap from the original
/// image through the LUT and dotting with the weights. Never materializes
/// the resampled image.
pub fn gather_dot_oracle(img: &Tensor, lut: &SamplingLut, w: &WeightSet) -> Result<Tensor> {
    check_matches_lut(img, lut)?;
    let k = lut.k();
    if w.kernel() != k {
        return Err(invalid(format!(
            "weights are {}x{} but the LUT kernel is {k}x{k}",
            w.kernel(),
            w.kernel()
        )));
    }
    if img.channels() != w.in_channels() {
        return Err(invalid(format!(
            "image has {} channels, weights expect {}",
            img.channels(),
            w.in_channels()
        )));
    }
    let (out_h, out_w) = (lut.out_h(), lut.out_w());
    let (width, height) = (img.width(), img.height());
    let in_c = img.channels();
    let out_c = w.out_channels();
    let taps = k * k;

    let rows: Vec<Vec<f32>> = (0..out_h)
        .into_par_iter()
        .map(|i| {
            let mut gathered = vec![0f64; in_c * taps];
            let mut row = vec![0f32; out_c * out_w];
            for j in 0..out_w {
                let position = lut.position(i, j);
                for ci in 0..in_c {
                    let plane = img.channel(ci);
                    for (t, &[u, v]) in position.iter().enumerate() {
                        gathered[ci * taps + t] =
                            oracle_bilinear(plane, width, height, u as f64, v as f64);
                    }
                }
                for o in 0..out_c {
                    let dot: f64 = w
                        .filter(o)
                        .iter()
                        .zip(&gathered)
                        .map(|(&wt, &x)| wt as f64 * x)
                        .sum();
                    row[o * out_w + j] = (w.bias_of(o) + dot) as f32;
                }
            }
            row
        })
        .collect();

    let mut data = vec![0f32; out_c * out_h * out_w];
    for (i, row) in rows.iter().enumerate() {
        for o in 0..out_c {
            let dst = (o * out_h + i) * out_w;
            data[dst..dst + out_w].copy_from_slice(&row[o * out_w..(o + 1) * out_w]);
        }
    }
    Ok(Tensor::from_parts(out_c, out_h, out_w, data))
}

/// Spherical LUT resample followed by the stride-`k` convolution.
pub fn spherical_conv(img: &Tensor, lut: &SamplingLut, w: &WeightSet) -> Result<Tensor> {
    conv2d_strided(&resample(img, lut)?, w, lut.k())
}

/// Runs a 4x4 stem followed by 2x2 downsampling stages, each through a LUT
/// rebuilt for that stage's resolution. Returns every stage's features.
pub fn cascade_downsample(
    img: &Tensor,
    cfg: &ProjectionConfig,
    weights: &[WeightSet],
    spacing: SpacingMode,
) -> Result<Vec<Tensor>> {
    if img.width() != cfg.width() || img.height() != cfg.height() {
        return Err(invalid("image dims do not match the projection config"));
    }
    if weights.is_empty() {
        return Err(invalid("cascade needs at least one stage"));
    }
    for (s, w) in weights.iter().enumerate() {
        let expect = if s == 0 { 4 } else { 2 };
        if w.kernel() != expect {
            return Err(invalid(format!(
                "stage {s} must use a {expect}x{expect} kernel, got {}",
                w.kernel()
            )));
        }
        let in_c = if s == 0 {
            img.channels()
        } else {
            weights[s - 1].out_channels()
        };
        if w.in_channels() != in_c {
            return Err(invalid(format!(
                "stage {s} expects {} input channels but receives {in_c}",
                w.in_channels()
            )));
        }
    }

    let mut features = Vec::with_capacity(weights.len());
    let mut current = img.clone();
    for w in weights {
        let stage_cfg = ProjectionConfig::new(current.width(), current.height())?;
        let lut = build_lut(&stage_cfg, &KernelSpec::new(w.kernel(), spacing)?)?;
        current = spherical_conv(&current, &lut, w)?;
        features.push(current.clone());
    }
    Ok(features)
}
