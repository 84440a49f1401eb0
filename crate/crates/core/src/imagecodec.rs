//! Raster, watermark and key persistence.
//!
//! Only lossless formats are accepted: PNG (8-bit per channel) and binary
//! PPM (P6) / PGM (P5). Keys are stored as a single JSON object.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavelet::check_divisible;

/// An 8-bit RGB raster stored as three row-major planes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    r: Vec<u8>,
    g: Vec<u8>,
    b: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, r: Vec<u8>, g: Vec<u8>, b: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        for plane in [&r, &g, &b] {
            if plane.len() != width * height {
                return Err(Error::SampleCount {
                    what: "image plane",
                    expected: width * height,
                    actual: plane.len(),
                });
            }
        }
        Ok(Self { width, height, r, g, b })
    }

    /// Builds an image from a per-pixel function of `(row, col)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Result<Self> {
        let n = width * height;
        let (mut r, mut g, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for row in 0..height {
            for col in 0..width {
                let [pr, pg, pb] = f(row, col);
                r.push(pr);
                g.push(pg);
                b.push(pb);
            }
        }
        Self::new(width, height, r, g, b)
    }

    /// Interleaved RGB bytes, as produced by most codecs.
    pub fn from_interleaved(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != 3 * width * height {
            return Err(Error::SampleCount {
                what: "interleaved rgb",
                expected: 3 * width * height,
                actual: rgb.len(),
            });
        }
        let r = rgb.iter().step_by(3).copied().collect();
        let g = rgb.iter().skip(1).step_by(3).copied().collect();
        let b = rgb.iter().skip(2).step_by(3).copied().collect();
        Self::new(width, height, r, g, b)
    }

    pub fn to_interleaved(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(3 * self.r.len());
        for i in 0..self.r.len() {
            out.extend_from_slice(&[self.r[i], self.g[i], self.b[i]]);
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let i = row * self.width + col;
        [self.r[i], self.g[i], self.b[i]]
    }

    pub fn set_pixel(&mut self, row: usize, col: usize, rgb: [u8; 3]) {
        let i = row * self.width + col;
        self.r[i] = rgb[0];
        self.g[i] = rgb[1];
        self.b[i] = rgb[2];
    }

    /// Plane `0`, `1` or `2` (R, G, B).
    pub fn channel(&self, index: usize) -> &[u8] {
        match index {
            0 => &self.r,
            1 => &self.g,
            2 => &self.b,
            _ => panic!("channel index {index} out of range"),
        }
    }

    pub fn channels(&self) -> [&[u8]; 3] {
        [&self.r, &self.g, &self.b]
    }

    pub(crate) fn channels_mut(&mut self) -> [&mut Vec<u8>; 3] {
        [&mut self.r, &mut self.g, &mut self.b]
    }

    pub fn same_dims(&self, other: &RgbImage) -> Result<()> {
        if self.width == other.width && self.height == other.height {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            })
        }
    }
}

/// A binary matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WatermarkBits {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl WatermarkBits {
    /// A watermark to embed: must contain at least one set bit.
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        let wm = Self::unchecked(width, height, bits)?;
        if !wm.bits.iter().any(|&b| b) {
            return Err(Error::BlankWatermark);
        }
        Ok(wm)
    }

    /// A recovered bit matrix; may be blank.
    pub fn unchecked(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if bits.len() != width * height {
            return Err(Error::SampleCount {
                what: "watermark",
                expected: width * height,
                actual: bits.len(),
            });
        }
        Ok(Self { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub(crate) fn same_dims(&self, other: &WatermarkBits) -> Result<()> {
        if self.width == other.width && self.height == other.height {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorMode {
    /// Embed in the luma plane only.
    Ycbcr,
    /// Embed the same payload in each of R, G and B.
    Rgb,
}

impl fmt::Display for ColorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColorMode::Ycbcr => "ycbcr",
            ColorMode::Rgb => "rgb",
        })
    }
}

impl FromStr for ColorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ycbcr" => Ok(ColorMode::Ycbcr),
            "rgb" => Ok(ColorMode::Rgb),
            other => Err(Error::InvalidConfig(format!("unknown color mode {other:?}"))),
        }
    }
}

pub const KEY_FORMAT_VERSION: u32 = 1;

/// Everything blind extraction needs: which subband was used, where, and how
/// it was quantized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuthKey {
    pub format_version: u32,
    pub color_mode: ColorMode,
    pub levels: u32,
    pub subband_id: String,
    pub host_width: usize,
    pub host_height: usize,
    pub wm_width: usize,
    pub wm_height: usize,
    pub quant_step: f64,
    /// `(row, col)` inside the target subband, in embedding order.
    pub site_indices: Vec<(usize, usize)>,
}

impl AuthKey {
    pub fn subband_label(levels: u32) -> String {
        format!("LL{levels}")
    }

    pub fn subband_dims(&self) -> (usize, usize) {
        (self.host_width >> self.levels, self.host_height >> self.levels)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != KEY_FORMAT_VERSION {
            return Err(Error::KeyVersion {
                found: self.format_version,
                expected: KEY_FORMAT_VERSION,
            });
        }
        check_divisible(self.host_width, self.host_height, self.levels)
            .map_err(|e| Error::InvalidKey(e.to_string()))?;
        if self.subband_id != Self::subband_label(self.levels) {
            return Err(Error::InvalidKey(format!(
                "subband {:?} does not match {} levels",
                self.subband_id, self.levels
            )));
        }
        if !(self.quant_step.is_finite() && self.quant_step > 0.0) {
            return Err(Error::InvalidKey(format!(
                "quant_step {} must be positive",
                self.quant_step
            )));
        }
        if self.wm_width == 0 || self.wm_height == 0 {
            return Err(Error::InvalidKey("empty watermark geometry".into()));
        }
        let needed = (self.wm_width * self.wm_height).div_ceil(4);
        if self.site_indices.len() != needed {
            return Err(Error::InvalidKey(format!(
                "{} site indices for a {}x{} watermark (needs {needed})",
                self.site_indices.len(),
                self.wm_width,
                self.wm_height
            )));
        }
        let (sw, sh) = self.subband_dims();
        let mut seen = HashSet::with_capacity(needed);
        for &(row, col) in &self.site_indices {
            if row >= sh || col >= sw {
                return Err(Error::InvalidKey(format!(
                    "site ({row}, {col}) outside {sw}x{sh} subband"
                )));
            }
            if !seen.insert((row, col)) {
                return Err(Error::InvalidKey(format!("duplicate site ({row}, {col})")));
            }
        }
        Ok(())
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn decode(path: &Path) -> Result<image::DynamicImage> {
    let bytes = read_bytes(path)?;
    let format = image::guess_format(&bytes).map_err(|_| Error::UnsupportedFormat { path: path.into() })?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Pnm) {
        return Err(Error::UnsupportedFormat { path: path.into() });
    }
    let img = ImageReader::with_format(std::io::Cursor::new(bytes), format)
        .decode()
        .map_err(|e| Error::Decode {
            path: path.into(),
            reason: e.to_string(),
        })?;
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::EmptyImage {
            width: img.width() as usize,
            height: img.height() as usize,
        });
    }
    Ok(img)
}

/// Loads a PNG or PPM/PGM file. Gray sources are replicated across R, G, B.
pub fn load_rgb_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let rgb = decode(path)?.to_rgb8();
    RgbImage::from_interleaved(rgb.width() as usize, rgb.height() as usize, rgb.as_raw())
}

enum Container {
    Png,
    Ppm,
    Pgm,
}

fn container_for(path: &Path) -> Result<Container> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("png") => Ok(Container::Png),
        Some("ppm") | Some("pnm") => Ok(Container::Ppm),
        Some("pgm") => Ok(Container::Pgm),
        _ => Err(Error::UnsupportedFormat { path: path.into() }),
    }
}

fn write_raster(path: &Path, width: usize, height: usize, data: &[u8], gray: bool) -> Result<()> {
    let container = container_for(path)?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let writer = std::io::BufWriter::new(file);
    let encode_err = |e: image::ImageError| Error::Encode {
        path: path.into(),
        reason: e.to_string(),
    };
    let (w, h) = (width as u32, height as u32);
    let color = if gray {
        ExtendedColorType::L8
    } else {
        ExtendedColorType::Rgb8
    };
    match container {
        Container::Png => image::codecs::png::PngEncoder::new(writer)
            .write_image(data, w, h, color)
            .map_err(encode_err),
        Container::Ppm | Container::Pgm => {
            let subtype = if gray {
                PnmSubtype::Graymap(SampleEncoding::Binary)
            } else {
                PnmSubtype::Pixmap(SampleEncoding::Binary)
            };
            PnmEncoder::new(writer)
                .with_subtype(subtype)
                .write_image(data, w, h, color)
                .map_err(encode_err)
        }
    }
}

/// Writes PNG (`.png`) or binary PPM (`.ppm`/`.pnm`); the container follows
/// the file extension. `.pgm` is accepted only for gray images.
pub fn save_rgb_image(image: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if matches!(container_for(path)?, Container::Pgm) {
        if image.r != image.g || image.g != image.b {
            return Err(Error::UnsupportedFormat { path: path.into() });
        }
        return write_raster(path, image.width, image.height, &image.r, true);
    }
    write_raster(path, image.width, image.height, &image.to_interleaved(), false)
}

/// Loads a binary watermark: pixels with luma ≥ 128 become 1.
pub fn load_watermark(path: impl AsRef<Path>) -> Result<WatermarkBits> {
    let luma = decode(path.as_ref())?.to_luma8();
    let bits = luma.as_raw().iter().map(|&v| v >= 128).collect();
    WatermarkBits::new(luma.width() as usize, luma.height() as usize, bits)
}

/// Writes a watermark as a black/white gray image.
pub fn save_watermark(wm: &WatermarkBits, path: impl AsRef<Path>) -> Result<()> {
    let data: Vec<u8> = wm.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
    let path = path.as_ref();
    match container_for(path)? {
        Container::Ppm => {
            let rgb: Vec<u8> = data.iter().flat_map(|&v| [v, v, v]).collect();
            write_raster(path, wm.width, wm.height, &rgb, false)
        }
        _ => write_raster(path, wm.width, wm.height, &data, true),
    }
}

pub fn save_key(key: &AuthKey, path: impl AsRef<Path>) -> Result<()> {
    key.validate()?;
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(key).map_err(|e| Error::MalformedKey(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_key(path: impl AsRef<Path>) -> Result<AuthKey> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_key(&text)
}

/// Parses and validates key JSON.
pub fn parse_key(text: &str) -> Result<AuthKey> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::MalformedKey(e.to_string()))?;
    match value.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == KEY_FORMAT_VERSION as u64 => {}
        Some(v) => {
            return Err(Error::KeyVersion {
                found: v.min(u32::MAX as u64) as u32,
                expected: KEY_FORMAT_VERSION,
            })
        }
        None => return Err(Error::MalformedKey("missing format_version".into())),
    }
    let key: AuthKey = serde_json::from_value(value).map_err(|e| Error::MalformedKey(e.to_string()))?;
    key.validate()?;
    Ok(key)
}
