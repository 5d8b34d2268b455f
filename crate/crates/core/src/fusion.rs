//! Per-channel mask-attention fusion of coarse segmentation scores.
//!
//! Each score channel is re-weighted by its own attention heatmap and
//! rectified: `out = max(0, sem + sem * mask)`. Masks are not range-limited;
//! a negative mask can suppress its channel.

use crate::error::{invalid, Result};
use crate::pnm;
use crate::tensor::Tensor;

#[derive(Clone, Debug)]
pub struct FusionInput {
    sem: Tensor,
    masks: Tensor,
}

impl FusionInput {
    pub fn new(sem: Tensor, masks: Tensor) -> Result<Self> {
        if sem.dims() != masks.dims() {
            return Err(invalid(format!(
                "scores are {:?} but masks are {:?}",
                sem.dims(),
                masks.dims()
            )));
        }
        Ok(Self { sem, masks })
    }

    pub fn sem(&self) -> &Tensor {
        &self.sem
    }

    pub fn masks(&self) -> &Tensor {
        &self.masks
    }
}

#[inline]
pub fn fuse_value(sem: f32, mask: f32) -> f32 {
    (sem + sem * mask).max(0.0)
}

pub fn fuse(inp: &FusionInput) -> Tensor {
    let (c, h, w) = inp.sem.dims();
    let data = inp
        .sem
        .data()
        .iter()
        .zip(inp.masks.data())
        .map(|(&s, &m)| fuse_value(s, m))
        .collect();
    Tensor::from_parts(c, h, w, data)
}

/// Per-pixel class indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    pub height: usize,
    pub width: usize,
    pub labels: Vec<u32>,
}

impl LabelMap {
    pub fn get(&self, y: usize, x: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// PGM with the label index as gray level (saturating at 255).
    pub fn to_pgm(&self) -> Result<Vec<u8>> {
        let levels: Vec<u8> = self.labels.iter().map(|&l| l.min(255) as u8).collect();
        pnm::encode_gray_u8(self.width, self.height, &levels)
    }
}

/// Index of the highest-scoring channel per pixel; ties go to the lowest
/// index.
pub fn argmax_labels(sem: &Tensor) -> Result<LabelMap> {
    let (c, h, w) = sem.dims();
    if c == 0 {
        return Err(invalid("argmax needs at least one channel"));
    }
    let plane = h * w;
    let labels = (0..plane)
        .map(|p| {
            let mut best = 0;
            let mut best_val = sem.data()[p];
            for ch in 1..c {
                let v = sem.data()[ch * plane + p];
                if v > best_val {
                    best = ch;
                    best_val = v;
                }
            }
            best as u32
        })
        .collect();
    Ok(LabelMap {
        height: h,
        width: w,
        labels,
    })
}
