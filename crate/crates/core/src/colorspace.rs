//! BT.601 (CCIR 601) RGB <-> YCbCr.
//!
//! The forward transform works on RGB normalized to `[0, 1]` and yields Y in
//! `[16, 235]` and Cb/Cr in `[16, 240]`. The backward transform uses the exact
//! numeric inverse of the forward matrix, so every 8-bit triple survives a
//! round trip unchanged.

use crate::error::{Error, Result};
use crate::imagecodec::RgbImage;
use crate::plane::Plane;

const OFFSET: [f64; 3] = [16.0, 128.0, 128.0];

const FORWARD: [[f64; 3]; 3] = [
    [65.481, 128.553, 24.966],
    [-37.797, -74.203, 112.0],
    [112.0, -93.786, -18.214],
];

const BACKWARD: [[f64; 3]; 3] = invert(FORWARD);

const fn invert(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    [
        [
            c00 / det,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det,
        ],
        [
            c01 / det,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det,
        ],
        [
            c02 / det,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det,
        ],
    ]
}

/// Real-valued Y, Cb, Cr planes.
#[derive(Debug, Clone, PartialEq)]
pub struct YCbCrImage {
    pub y: Plane,
    pub cb: Plane,
    pub cr: Plane,
}

impl YCbCrImage {
    pub fn new(y: Plane, cb: Plane, cr: Plane) -> Result<Self> {
        for p in [&cb, &cr] {
            if !p.same_shape(&y) {
                return Err(Error::DimensionMismatch {
                    left_w: y.width(),
                    left_h: y.height(),
                    right_w: p.width(),
                    right_h: p.height(),
                });
            }
        }
        if [&y, &cb, &cr].iter().any(|p| p.data().iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidConfig("non-finite YCbCr sample".into()));
        }
        Ok(Self { y, cb, cr })
    }

    pub fn width(&self) -> usize {
        self.y.width()
    }

    pub fn height(&self) -> usize {
        self.y.height()
    }
}

#[inline]
pub fn rgb_to_ycbcr_pixel(rgb: [u8; 3]) -> [f64; 3] {
    let n = rgb.map(|v| v as f64 / 255.0);
    let mut out = OFFSET;
    for (o, row) in out.iter_mut().zip(FORWARD) {
        *o += row[0] * n[0] + row[1] * n[1] + row[2] * n[2];
    }
    out
}

/// Inverse transform without rounding: RGB on the 0..255 scale.
#[inline]
pub fn ycbcr_to_rgb_real(ycc: [f64; 3]) -> [f64; 3] {
    let c = [ycc[0] - OFFSET[0], ycc[1] - OFFSET[1], ycc[2] - OFFSET[2]];
    BACKWARD.map(|row| 255.0 * (row[0] * c[0] + row[1] * c[1] + row[2] * c[2]))
}

/// Rounds half away from zero, then clamps to `[0, 255]`.
#[inline]
pub fn quantize_sample(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[inline]
pub fn ycbcr_to_rgb_pixel(ycc: [f64; 3]) -> [u8; 3] {
    ycbcr_to_rgb_real(ycc).map(quantize_sample)
}

pub fn rgb_to_ycbcr(image: &RgbImage) -> YCbCrImage {
    let (w, h) = (image.width(), image.height());
    let mut y = Plane::zeros(w, h);
    let mut cb = Plane::zeros(w, h);
    let mut cr = Plane::zeros(w, h);
    let [r, g, b] = image.channels();
    for i in 0..w * h {
        let [py, pb, pr] = rgb_to_ycbcr_pixel([r[i], g[i], b[i]]);
        y.data_mut()[i] = py;
        cb.data_mut()[i] = pb;
        cr.data_mut()[i] = pr;
    }
    YCbCrImage { y, cb, cr }
}

pub fn ycbcr_to_rgb(image: &YCbCrImage) -> RgbImage {
    let (w, h) = (image.width(), image.height());
    let (y, cb, cr) = (image.y.data(), image.cb.data(), image.cr.data());
    let n = w * h;
    let (mut r, mut g, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let [pr, pg, pb] = ycbcr_to_rgb_pixel([y[i], cb[i], cr[i]]);
        r.push(pr);
        g.push(pg);
        b.push(pb);
    }
    RgbImage::new(w, h, r, g, b).expect("planes share dimensions")
}
