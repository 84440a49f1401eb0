//! Fidelity and watermark-similarity measures.
//!
//! Color images are compared over all `3·m·n` samples.

use crate::error::{Error, Result};
use crate::imagecodec::{RgbImage, WatermarkBits};

const PEAK: f64 = 255.0;

fn samples(image: &RgbImage) -> impl Iterator<Item = f64> + '_ {
    image.channels().into_iter().flat_map(|c| c.iter().map(|&v| v as f64))
}

pub fn mse(a: &RgbImage, b: &RgbImage) -> Result<f64> {
    a.same_dims(b)?;
    let n = 3 * a.width() * a.height();
    let sum: f64 = samples(a).zip(samples(b)).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / n as f64)
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    }
}

/// Peak signal-to-noise ratio in dB; `+inf` for identical images.
pub fn psnr(a: &RgbImage, b: &RgbImage) -> Result<f64> {
    mse(a, b).map(psnr_from_mse)
}

/// Pearson correlation coefficient of the flattened samples.
pub fn correlation(a: &RgbImage, b: &RgbImage) -> Result<f64> {
    a.same_dims(b)?;
    let n = (3 * a.width() * a.height()) as f64;
    let mean_a = samples(a).sum::<f64>() / n;
    let mean_b = samples(b).sum::<f64>() / n;
    let (mut cross, mut var_a, mut var_b) = (0.0, 0.0, 0.0);
    for (x, y) in samples(a).zip(samples(b)) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        cross += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(cross / (var_a.sqrt() * var_b.sqrt()))
}

/// `Σ w·w' / Σ w²` with `original` as the reference.
pub fn normalized_correlation(original: &WatermarkBits, extracted: &WatermarkBits) -> Result<f64> {
    original.same_dims(extracted)?;
    let ones = original.ones();
    if ones == 0 {
        return Err(Error::BlankWatermark);
    }
    let hits = original
        .bits()
        .iter()
        .zip(extracted.bits())
        .filter(|(&w, &v)| w && v)
        .count();
    Ok(hits as f64 / ones as f64)
}

/// Hamming distance.
pub fn error_bits(a: &WatermarkBits, b: &WatermarkBits) -> Result<usize> {
    a.same_dims(b)?;
    Ok(a.bits().iter().zip(b.bits()).filter(|(x, y)| x != y).count())
}

/// Share of the subband's 4-bit-per-coefficient capacity used by the payload.
pub fn payload_percent(wm_bits: usize, subband_w: usize, subband_h: usize) -> f64 {
    let capacity = 4 * subband_w * subband_h;
    if capacity == 0 {
        return 0.0;
    }
    100.0 * wm_bits as f64 / capacity as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub corr: f64,
    pub nc: f64,
    pub error_bits: usize,
    pub payload_percent: f64,
}

impl MetricReport {
    /// Compares host to a (possibly attacked) watermarked image, and the
    /// embedded watermark to the recovered one.
    pub fn compute(
        host: &RgbImage,
        marked: &RgbImage,
        original: &WatermarkBits,
        extracted: &WatermarkBits,
        payload_percent: f64,
    ) -> Result<Self> {
        Ok(Self {
            psnr_db: psnr(host, marked)?,
            corr: correlation(host, marked)?,
            nc: normalized_correlation(original, extracted)?,
            error_bits: error_bits(original, extracted)?,
            payload_percent,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(v: u8) -> RgbImage {
        RgbImage::from_fn(4, 4, |_, _| [v; 3]).unwrap()
    }

    fn ramp() -> RgbImage {
        RgbImage::from_fn(4, 4, |r, c| [(r * 40 + c) as u8, (c * 50) as u8, 7]).unwrap()
    }

    fn bits(w: usize, h: usize, v: &[u8]) -> WatermarkBits {
        WatermarkBits::unchecked(w, h, v.iter().map(|&b| b == 1).collect()).unwrap()
    }

    #[test]
    fn mse_cases() {
        assert_eq!(mse(&ramp(), &ramp()).unwrap(), 0.0);
        assert_eq!(mse(&flat(10), &flat(11)).unwrap(), 1.0);
        assert_eq!(mse(&flat(0), &flat(255)).unwrap(), 65025.0);
        let other = RgbImage::from_fn(2, 4, |_, _| [0; 3]).unwrap();
        assert!(matches!(mse(&flat(0), &other), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn psnr_cases() {
        assert_eq!(psnr(&ramp(), &ramp()).unwrap(), f64::INFINITY);
        assert!((psnr(&flat(10), &flat(11)).unwrap() - 48.1308).abs() < 1e-4);
        assert_eq!(psnr(&flat(0), &flat(255)).unwrap(), 0.0);
    }

    #[test]
    fn correlation_cases() {
        let a = ramp();
        assert!((correlation(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let inv = RgbImage::from_fn(4, 4, |r, c| a.pixel(r, c).map(|v| 255 - v)).unwrap();
        assert!((correlation(&a, &inv).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(correlation(&flat(3), &a), Err(Error::ZeroVariance)));
    }

    #[test]
    fn nc_cases() {
        let w = bits(2, 2, &[1, 0, 0, 1]);
        assert_eq!(normalized_correlation(&w, &w).unwrap(), 1.0);
        assert_eq!(normalized_correlation(&w, &bits(2, 2, &[0, 0, 0, 0])).unwrap(), 0.0);
        assert_eq!(normalized_correlation(&w, &bits(2, 2, &[1, 1, 1, 1])).unwrap(), 1.0);
    }

    #[test]
    fn error_bit_cases() {
        let w: Vec<u8> = (0..900).map(|i| (i % 7 == 0) as u8).collect();
        let comp: Vec<u8> = w.iter().map(|b| 1 - b).collect();
        let mut one = w.clone();
        one[17] ^= 1;
        let a = bits(30, 30, &w);
        assert_eq!(error_bits(&a, &a).unwrap(), 0);
        assert_eq!(error_bits(&a, &bits(30, 30, &comp)).unwrap(), 900);
        assert_eq!(error_bits(&a, &bits(30, 30, &one)).unwrap(), 1);
    }

    #[test]
    fn payload_cases() {
        assert!((payload_percent(900, 32, 32) - 21.97).abs() < 0.01);
        assert_eq!(payload_percent(4096, 32, 32), 100.0);
        assert_eq!(payload_percent(0, 32, 32), 0.0);
    }
}
