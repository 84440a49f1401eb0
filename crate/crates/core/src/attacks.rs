//! Attack simulators: hard-threshold wavelet compression and cropping.

use std::fmt;
use std::str::FromStr;

use crate::colorspace::quantize_sample;
use crate::error::{Error, Result};
use crate::imagecodec::RgbImage;
use crate::plane::Plane;
use crate::wavelet::{forward_2d, inverse_2d, FilterPair};

/// Zeroes every detail coefficient with magnitude below `threshold` in each
/// of R, G and B; the approximation band is left alone.
pub fn wavelet_compress(image: &RgbImage, threshold: f64, levels: u32) -> Result<RgbImage> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "threshold must be non-negative, got {threshold}"
        )));
    }
    let filters = FilterPair::cdf97();
    let (w, h) = (image.width(), image.height());
    let mut out = image.clone();
    for channel in out.channels_mut() {
        let plane = Plane::from_vec(w, h, channel.iter().map(|&v| v as f64).collect())?;
        let mut pyr = forward_2d(&plane, levels, &filters)?;
        for bands in pyr.details.iter_mut() {
            for band in bands.planes_mut() {
                for c in band.data_mut() {
                    if c.abs() < threshold {
                        *c = 0.0;
                    }
                }
            }
        }
        let restored = inverse_2d(&pyr, &filters)?;
        for (dst, &v) in channel.iter_mut().zip(restored.data()) {
            *dst = quantize_sample(v);
        }
    }
    Ok(out)
}

/// Rectangle blanked out by [`crop`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropRect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    pub fill: u8,
}

impl CropRect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h, fill: 0 }
    }

    pub fn contains_rect(&self, other: &CropRect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.x + other.w <= self.x + self.w
            && other.y + other.h <= self.y + self.h
    }
}

impl fmt::Display for CropRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},{}", self.x, self.y, self.w, self.h, self.fill)
    }
}

/// `X,Y,W,H[,FILL]`
impl FromStr for CropRect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("bad crop rectangle {s:?}, expected X,Y,W,H[,FILL]"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(bad());
        }
        let num = |p: &str| p.parse::<usize>().map_err(|_| bad());
        let fill = match parts.get(4) {
            Some(p) => p.parse::<u8>().map_err(|_| bad())?,
            None => 0,
        };
        Ok(Self {
            x: num(parts[0])?,
            y: num(parts[1])?,
            w: num(parts[2])?,
            h: num(parts[3])?,
            fill,
        })
    }
}

/// Replaces the pixels inside `rect` with its fill value.
pub fn crop(image: &RgbImage, rect: &CropRect) -> Result<RgbImage> {
    let (width, height) = (image.width(), image.height());
    let fits = rect.x.checked_add(rect.w).is_some_and(|e| e <= width)
        && rect.y.checked_add(rect.h).is_some_and(|e| e <= height);
    if !fits {
        return Err(Error::RectOutOfBounds {
            x: rect.x,
            y: rect.y,
            w: rect.w,
            h: rect.h,
            width,
            height,
        });
    }
    let mut out = image.clone();
    for row in rect.y..rect.y + rect.h {
        for col in rect.x..rect.x + rect.w {
            out.set_pixel(row, col, [rect.fill; 3]);
        }
    }
    Ok(out)
}

/// A parsed attack, as accepted on the command line:
/// `compress:<threshold>` or `crop:<x>,<y>,<w>,<h>[,fill]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Attack {
    Compress { threshold: f64 },
    Crop(CropRect),
}

impl Attack {
    pub fn apply(&self, image: &RgbImage, levels: u32) -> Result<RgbImage> {
        match self {
            Attack::Compress { threshold } => wavelet_compress(image, *threshold, levels),
            Attack::Crop(rect) => crop(image, rect),
        }
    }
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attack::Compress { threshold } => write!(f, "compress t={threshold:.1}"),
            Attack::Crop(r) => write!(f, "crop {}", r),
        }
    }
}

impl FromStr for Attack {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidConfig(format!("bad attack {s:?}")))?;
        match kind.trim() {
            "compress" => {
                let threshold: f64 = arg
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad threshold {arg:?}")))?;
                if !(threshold >= 0.0 && threshold.is_finite()) {
                    return Err(Error::InvalidConfig(format!("bad threshold {arg:?}")));
                }
                Ok(Attack::Compress { threshold })
            }
            "crop" => arg.parse().map(Attack::Crop),
            other => Err(Error::InvalidConfig(format!("unknown attack {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn zero_threshold_only_rounds() {
        let img = fixtures::texture(64, 1);
        let out = wavelet_compress(&img, 0.0, 3).unwrap();
        for (a, b) in img.channels().iter().zip(out.channels()) {
            assert!(a.iter().zip(b.iter()).all(|(x, y)| x.abs_diff(*y) <= 1));
        }
    }

    #[test]
    fn huge_threshold_keeps_only_approximation() {
        let img = fixtures::texture(64, 1);
        let out = wavelet_compress(&img, 1e9, 3).unwrap();
        let filters = FilterPair::cdf97();
        let plane = Plane::from_vec(64, 64, img.channel(0).iter().map(|&v| v as f64).collect()).unwrap();
        let mut pyr = forward_2d(&plane, 3, &filters).unwrap();
        for bands in pyr.details.iter_mut() {
            for band in bands.planes_mut() {
                *band = band.map(|_| 0.0);
            }
        }
        let blurred = inverse_2d(&pyr, &filters).unwrap();
        let expect: Vec<u8> = blurred.data().iter().map(|&v| quantize_sample(v)).collect();
        assert_eq!(out.channel(0), expect.as_slice());
    }

    #[test]
    fn negative_threshold_rejected() {
        assert!(wavelet_compress(&fixtures::gradient(64), -1.0, 3).is_err());
    }

    #[test]
    fn crop_cases() {
        let img = fixtures::blobs(64, 4);
        assert_eq!(crop(&img, &CropRect::new(5, 5, 0, 0)).unwrap(), img);
        let black = crop(&img, &CropRect::new(0, 0, 64, 64)).unwrap();
        assert!(black.channels().iter().all(|c| c.iter().all(|&v| v == 0)));
        let once = crop(
            &img,
            &CropRect {
                fill: 200,
                ..CropRect::new(3, 4, 10, 12)
            },
        )
        .unwrap();
        assert_eq!(once.pixel(4, 3), [200; 3]);
        assert_eq!(once.pixel(3, 3), img.pixel(3, 3));
        assert_eq!(
            crop(
                &once,
                &CropRect {
                    fill: 200,
                    ..CropRect::new(3, 4, 10, 12)
                }
            )
            .unwrap(),
            once
        );
        assert!(matches!(
            crop(&img, &CropRect::new(60, 0, 8, 8)),
            Err(Error::RectOutOfBounds { .. })
        ));
        assert!(crop(&img, &CropRect::new(usize::MAX, 0, 2, 2)).is_err());
    }

    #[test]
    fn attack_parsing() {
        assert_eq!(
            "compress:6.0".parse::<Attack>().unwrap(),
            Attack::Compress { threshold: 6.0 }
        );
        assert_eq!(
            "crop:1,2,3,4".parse::<Attack>().unwrap(),
            Attack::Crop(CropRect::new(1, 2, 3, 4))
        );
        assert_eq!(
            "crop:1,2,3,4,255".parse::<Attack>().unwrap(),
            Attack::Crop(CropRect {
                fill: 255,
                ..CropRect::new(1, 2, 3, 4)
            })
        );
        for bad in [
            "compress:x",
            "compress:-1",
            "crop:1,2,3",
            "blur:3",
            "crop:1,2,3,4,256",
            "nonsense",
        ] {
            assert!(bad.parse::<Attack>().is_err(), "{bad}");
        }
    }
}
