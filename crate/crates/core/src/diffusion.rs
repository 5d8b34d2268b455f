//! Pole-diffusion demo: repeated spherical downsampling spreads features
//! along the top rows, because a coarse top row still gets sampled as if it
//! were a single point at the pole.

use crate::conv::{cascade_downsample, WeightSet};
use crate::error::{invalid, Result};
use crate::geometry::{pixel_to_dir, ProjectionConfig, UnitVec};
use crate::kernel::SpacingMode;
use crate::rng::SeededRng;
use crate::tensor::Tensor;

pub const DEMO_STAGES: usize = 4;
pub const DEMO_CHANNELS: usize = 4;

/// Values below this fraction of a stage's peak magnitude count as empty.
pub const SUPPORT_THRESHOLD: f32 = 1e-6;

/// Single-channel image that is 1 inside the spherical cap of angular
/// `radius` around `center` and 0 elsewhere.
pub fn polar_disc(cfg: &ProjectionConfig, center: &UnitVec, radius: f64) -> Tensor {
    Tensor::from_fn(1, cfg.height(), cfg.width(), |_, y, x| {
        let d = pixel_to_dir(cfg, y as f64, x as f64).expect("finite pixel");
        (d.angle_to(center) <= radius) as u8 as f32
    })
}

/// A stem (4x4) and three 2x2 stages with non-negative weights drawn from
/// the seeded generator. Non-negative weights keep every stage free of
/// cancellation so support can be compared across stages.
pub fn demo_weights(seed: u64, in_channels: usize) -> Vec<WeightSet> {
    let mut rng = SeededRng::new(seed);
    let mut draw = |o, i, k| {
        WeightSet::from_fn(o, i, k, |_, _, _, _| rng.unit_f32()).expect("valid kernel size")
    };
    let mut weights = vec![draw(DEMO_CHANNELS, in_channels, 4)];
    for _ in 1..DEMO_STAGES {
        weights.push(draw(DEMO_CHANNELS, DEMO_CHANNELS, 2));
    }
    weights
}

/// Checks the demo preconditions and runs the cascade.
pub fn run_demo(img: &Tensor, seed: u64, spacing: SpacingMode) -> Result<Vec<Tensor>> {
    let cfg = ProjectionConfig::new(img.width(), img.height())?;
    if cfg.width() % 32 != 0 || cfg.height() % 16 != 0 {
        return Err(invalid(format!(
            "diffusion demo needs dimensions divisible by 32x16, got {}x{}",
            cfg.width(),
            cfg.height()
        )));
    }
    cascade_downsample(img, &cfg, &demo_weights(seed, img.channels()), spacing)
}

/// Fraction of columns in the top row of `channel` whose magnitude exceeds
/// [`SUPPORT_THRESHOLD`] times the channel's peak.
pub fn top_row_support(t: &Tensor, channel: usize) -> f64 {
    let plane = t.channel(channel);
    let peak = plane.iter().fold(0f32, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let row = &plane[..t.width()];
    let hits = row
        .iter()
        .filter(|v| v.abs() > SUPPORT_THRESHOLD * peak)
        .count();
    hits as f64 / t.width() as f64
}

/// Min-max normalizes one channel to gray levels. A constant channel maps
/// to all zeros.
pub fn normalized_gray(t: &Tensor, channel: usize) -> Vec<u8> {
    let plane = t.channel(channel);
    let (lo, hi) = plane
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return vec![0; plane.len()];
    }
    let scale = 255.0 / (hi as f64 - lo as f64);
    plane
        .iter()
        .map(|&v| ((v as f64 - lo as f64) * scale).round().clamp(0.0, 255.0) as u8)
        .collect()
}
