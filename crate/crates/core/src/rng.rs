//! Reproducible random instances for verification and demos.
//!
//! The generator is xoshiro256++ whose 256-bit state is expanded from the
//! 64-bit seed with SplitMix64. A float in `[lo, hi)` is drawn as
//! `lo + (hi - lo) * (next_u64() >> 40) / 2^24`, so every value is an exact
//! multiple of `2^-24` of the range and any implementation of the same
//! generator reproduces the same instances.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::conv::WeightSet;
use crate::tensor::Tensor;

pub struct SeededRng(Xoshiro256PlusPlus);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn unit_f32(&mut self) -> f32 {
        (self.next_u64() >> 40) as f32 * (1.0 / (1u32 << 24) as f32)
    }

    pub fn uniform_f32(&mut self, lo: f32, hi: f32) -> f32 {
        lo + (hi - lo) * self.unit_f32()
    }

    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Tensor with entries uniform in `[-1, 1)`.
    pub fn tensor(&mut self, channels: usize, height: usize, width: usize) -> Tensor {
        Tensor::from_fn(channels, height, width, |_, _, _| {
            self.uniform_f32(-1.0, 1.0)
        })
    }

    /// Weights (and bias when requested) uniform in `[-1, 1)`.
    pub fn weights(&mut self, out_c: usize, in_c: usize, kernel: usize, bias: bool) -> WeightSet {
        let w = WeightSet::from_fn(out_c, in_c, kernel, |_, _, _, _| {
            self.uniform_f32(-1.0, 1.0)
        })
        .expect("valid kernel size");
        if bias {
            let b = (0..out_c).map(|_| self.uniform_f32(-1.0, 1.0)).collect();
            w.with_bias(b).expect("one bias per channel")
        } else {
            w
        }
    }
}
