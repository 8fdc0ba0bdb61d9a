//! Reproducible pseudorandom test images.
//!
//! The generator is the 64-bit linear congruential generator
//! `state = state * 6364136223846793005 + 1442695040888963407 (mod 2^64)`,
//! seeded with `state = seed`. Each sample advances the state once and takes
//! the top 53 bits as a fraction in `[0, 1)`. Images are filled in row-major
//! order. This is simple enough to reimplement bit-exactly in any language.

use crate::image::{ImagePlane, Precision, Samples};

const MULTIPLIER: u64 = 6364136223846793005;
const INCREMENT: u64 = 1442695040888963407;

#[derive(Clone, Debug)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT);
        self.state
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// `width x height` plane of uniform `[0, 1)` samples.
pub fn random_image(width: usize, height: usize, seed: u64, precision: Precision) -> ImagePlane {
    let mut rng = Lcg64::new(seed);
    let n = width * height;
    let samples = match precision {
        Precision::F64 => Samples::F64((0..n).map(|_| rng.next_f64()).collect()),
        Precision::F32 => Samples::F32((0..n).map(|_| rng.next_f64() as f32).collect()),
    };
    ImagePlane::new(width, height, samples).expect("sized")
}
