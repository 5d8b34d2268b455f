//! Applies a [`SamplingLut`] to a panorama.
//!
//! Output pixel `(k*I + a, k*J + b)` is the bilinear sample of the input at
//! the LUT coordinate of tap `(a, b)` of output position `(I, J)`, so each
//! `k x k` block of the result holds one spherical kernel footprint.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::kernel::SamplingLut;
use crate::tensor::Tensor;

/// Bilinear lookup in one `height x width` plane. Columns wrap around the
/// seam; rows are clamped to `[0, height - 1]` after the fractional split.
///
/// Uses the `a + t * (b - a)` form so that equal neighbours reproduce their
/// value exactly.
#[inline]
pub(crate) fn sample_plane(plane: &[f32], width: usize, height: usize, u: f64, v: f64) -> f32 {
    let w = width as f64;
    let u = if (0.0..w).contains(&u) {
        u
    } else {
        u.rem_euclid(w)
    };
    // `u` is non-negative here, so truncation is the floor.
    let c0 = (u as i64 as usize).min(width - 1);
    let fu = u - c0 as f64;
    let c1 = if c0 + 1 == width { 0 } else { c0 + 1 };

    let y0 = if v >= 0.0 { v as i64 } else { v.floor() as i64 };
    let fv = v - y0 as f64;
    let last = height as i64 - 1;
    let r0 = y0.clamp(0, last) as usize;
    let r1 = (y0 + 1).clamp(0, last) as usize;

    let px = |r: usize, c: usize| plane[r * width + c] as f64;
    let top = px(r0, c0) + fu * (px(r0, c1) - px(r0, c0));
    let bottom = px(r1, c0) + fu * (px(r1, c1) - px(r1, c0));
    (top + fv * (bottom - top)) as f32
}

pub fn bilinear_sample(img: &Tensor, channel: usize, u: f64, v: f64) -> Result<f32> {
    if img.is_empty() {
        return Err(invalid("cannot sample an empty image"));
    }
    if channel >= img.channels() {
        return Err(invalid(format!(
            "channel {channel} out of range for {}-channel image",
            img.channels()
        )));
    }
    if !u.is_finite() || !v.is_finite() {
        return Err(invalid(format!("non-finite sample position ({u}, {v})")));
    }
    Ok(sample_plane(
        img.channel(channel),
        img.width(),
        img.height(),
        u,
        v,
    ))
}

pub(crate) fn check_matches_lut(img: &Tensor, lut: &SamplingLut) -> Result<()> {
    let cfg = lut.config();
    if img.width() != cfg.width() || img.height() != cfg.height() {
        return Err(invalid(format!(
            "image is {}x{} but the LUT was built for {}x{}",
            img.height(),
            img.width(),
            cfg.height(),
            cfg.width()
        )));
    }
    if img.channels() == 0 {
        return Err(invalid("image has no channels"));
    }
    Ok(())
}

/// Rearranges (k = 2, 4) or expands (k = 7) the image so that a planar
/// convolution with stride `k` samples spherical footprints.
pub fn resample(img: &Tensor, lut: &SamplingLut) -> Result<Tensor> {
    check_matches_lut(img, lut)?;
    let k = lut.k();
    let out_h = lut.out_h() * k;
    let out_w = lut.out_w() * k;
    let (w, h) = (img.width(), img.height());
    let mut data = vec![0f32; img.channels() * out_h * out_w];

    data.par_chunks_mut(out_w)
        .enumerate()
        .for_each(|(global_row, row)| {
            let c = global_row / out_h;
            let y = global_row % out_h;
            let (block_row, a) = (y / k, y % k);
            let plane = img.channel(c);
            for (block_col, block) in row.chunks_exact_mut(k).enumerate() {
                let taps = &lut.position(block_row, block_col)[a * k..(a + 1) * k];
                for (out, &[u, v]) in block.iter_mut().zip(taps) {
                    *out = sample_plane(plane, w, h, u as f64, v as f64);
                }
            }
        });

    Ok(Tensor::from_parts(img.channels(), out_h, out_w, data))
}
