//! Deterministic synthetic hosts and watermark used by the test-suite and the
//! `gen-fixtures` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imagecodec::{RgbImage, WatermarkBits};

pub const FIXTURE_SIZE: usize = 256;
pub const DEFAULT_SEED: u64 = 0x5eed_0601;

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Smooth diagonal color ramp.
pub fn gradient(size: usize) -> RgbImage {
    let s = size as f64;
    RgbImage::from_fn(size, size, |r, c| {
        let (x, y) = (c as f64 / s, r as f64 / s);
        [
            to_u8(30.0 + 190.0 * x),
            to_u8(40.0 + 170.0 * y),
            to_u8(130.0 + 70.0 * (std::f64::consts::PI * (x + y)).sin()),
        ]
    })
    .expect("non-empty")
}

/// Colored Gaussian blobs over a mid-tone background.
pub fn blobs(size: usize, seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = size as f64;
    let blobs: Vec<([f64; 2], f64, [f64; 3])> = (0..12)
        .map(|_| {
            let center = [rng.random_range(0.0..s), rng.random_range(0.0..s)];
            let radius = rng.random_range(0.06..0.22) * s;
            let color = [
                rng.random_range(-90.0..90.0),
                rng.random_range(-90.0..90.0),
                rng.random_range(-90.0..90.0),
            ];
            (center, radius, color)
        })
        .collect();
    RgbImage::from_fn(size, size, |r, c| {
        let mut px = [120.0, 110.0, 100.0];
        for (center, radius, color) in &blobs {
            let d2 = (r as f64 - center[0]).powi(2) + (c as f64 - center[1]).powi(2);
            let w = (-d2 / (2.0 * radius * radius)).exp();
            for k in 0..3 {
                px[k] += w * color[k];
            }
        }
        px.map(to_u8)
    })
    .expect("non-empty")
}

/// Random low-frequency waves plus fine grain.
pub fn texture(size: usize, seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e47_04e5);
    let s = size as f64;
    let waves: Vec<(f64, f64, f64, [f64; 3])> = (0..10)
        .map(|_| {
            let fx = rng.random_range(1.0..12.0);
            let fy = rng.random_range(1.0..12.0);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let amp = [
                rng.random_range(4.0..16.0),
                rng.random_range(4.0..16.0),
                rng.random_range(4.0..16.0),
            ];
            (fx, fy, phase, amp)
        })
        .collect();
    RgbImage::from_fn(size, size, |r, c| {
        let (x, y) = (c as f64 / s, r as f64 / s);
        let mut px = [128.0, 118.0, 108.0];
        for &(fx, fy, phase, amp) in &waves {
            let v = (std::f64::consts::TAU * (fx * x + fy * y) + phase).sin();
            for k in 0..3 {
                px[k] += amp[k] * v;
            }
        }
        let grain = rng.random_range(-8.0..8.0);
        px.map(|v| to_u8(v + grain))
    })
    .expect("non-empty")
}

/// The three standard hosts, labelled.
pub fn hosts(seed: u64) -> Vec<(&'static str, RgbImage)> {
    vec![
        ("gradient", gradient(FIXTURE_SIZE)),
        ("blobs", blobs(FIXTURE_SIZE, seed)),
        ("texture", texture(FIXTURE_SIZE, seed)),
    ]
}

/// A 30×30 binary logo: a frame, a ring and a diagonal bar.
pub fn logo_watermark() -> WatermarkBits {
    let n = 30;
    let bits = (0..n * n)
        .map(|i| {
            let (r, c) = ((i / n) as f64, (i % n) as f64);
            let frame = r < 2.0 || c < 2.0 || r > 27.0 || c > 27.0;
            let d = ((r - 14.5).powi(2) + (c - 14.5).powi(2)).sqrt();
            let ring = (7.0..10.0).contains(&d);
            let bar = (r - c).abs() < 1.5 && (6.0..24.0).contains(&r);
            frame || ring || bar
        })
        .collect();
    WatermarkBits::new(n, n, bits).expect("logo has set bits")
}
