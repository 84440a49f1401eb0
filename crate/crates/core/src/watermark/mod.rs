//! Blind watermark embedding in the coarsest approximation subband.
//!
//! Each embedding site carries one nibble of the payload: the magnitude of the
//! subband coefficient is quantized, its four low bits are replaced by the
//! nibble (picking the nearest admissible value), and the original sign is
//! restored. In `ycbcr` mode the luma plane carries the payload; in `rgb`
//! mode each of R, G and B carries a full copy and extraction takes a per-bit
//! majority vote.

mod refine;

use crate::colorspace::{quantize_sample, rgb_to_ycbcr, ycbcr_to_rgb_real, YCbCrImage};
use crate::error::{Error, Result};
use crate::imagecodec::{AuthKey, ColorMode, RgbImage, WatermarkBits, KEY_FORMAT_VERSION};
use crate::plane::Plane;
use crate::wavelet::{check_divisible, forward_2d, inverse_2d, FilterPair, WaveletPyramid};
use refine::Refiner;

pub const BITS_PER_SITE: usize = 4;

/// Full re-measure / touch-up cycles after rendering to 8 bits.
const REFINE_ROUNDS: usize = 4;

/// Distance from target, in quantizer steps, that every site is brought within.
const REFINE_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedConfig {
    pub color_mode: ColorMode,
    pub levels: u32,
    pub quant_step: f64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            color_mode: ColorMode::Ycbcr,
            levels: 3,
            quant_step: 1.0,
        }
    }
}

impl EmbedConfig {
    pub fn new(color_mode: ColorMode) -> Self {
        Self {
            color_mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.levels > 16 {
            return Err(Error::InvalidConfig(format!(
                "levels must be in 1..=16, got {}",
                self.levels
            )));
        }
        if !(self.quant_step.is_finite() && self.quant_step > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "quant_step must be positive, got {}",
                self.quant_step
            )));
        }
        Ok(())
    }
}

/// Signs of a subband, +1 for non-negative coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    width: usize,
    height: usize,
    negative: Vec<bool>,
}

impl SignMatrix {
    pub fn of(plane: &Plane) -> Self {
        Self {
            width: plane.width(),
            height: plane.height(),
            negative: plane.data().iter().map(|&v| v < 0.0).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn sign(&self, row: usize, col: usize) -> f64 {
        if self.negative[row * self.width + col] {
            -1.0
        } else {
            1.0
        }
    }
}

/// First `ceil(n_bits / 4)` positions of a `width`×`height` subband in raster
/// order.
pub fn select_sites(width: usize, height: usize, n_bits: usize) -> Result<Vec<(usize, usize)>> {
    let needed = n_bits.div_ceil(BITS_PER_SITE);
    let available = width * height;
    if needed > available {
        return Err(Error::Capacity { needed, available });
    }
    Ok((0..needed).map(|i| (i / width, i % width)).collect())
}

/// Groups bits four at a time, first bit most significant; the last group is
/// padded with zeros.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    bits.chunks(BITS_PER_SITE)
        .map(|chunk| {
            chunk
                .iter()
                .chain(std::iter::repeat(&false))
                .take(BITS_PER_SITE)
                .fold(0u8, |acc, &b| (acc << 1) | b as u8)
        })
        .collect()
}

pub fn pack_nibbles(wm: &WatermarkBits) -> Vec<u8> {
    pack_bits(wm.bits())
}

/// Inverse of [`pack_bits`], truncated to `n_bits`.
pub fn unpack_nibbles(nibbles: &[u8], n_bits: usize) -> Vec<bool> {
    nibbles
        .iter()
        .flat_map(|&n| (0..BITS_PER_SITE).rev().map(move |i| (n >> i) & 1 == 1))
        .take(n_bits)
        .collect()
}

/// The value nearest to `q` whose low four bits equal `nibble`, never
/// negative; ties go to the larger candidate.
pub fn embed_nibble(q: u64, nibble: u8) -> u64 {
    let nibble = (nibble & 0xf) as u64;
    let base = (q & !0xf) | nibble;
    let mut best = base;
    for cand in [base.checked_sub(16), Some(base + 16)].into_iter().flatten() {
        let (d_best, d_cand) = (best.abs_diff(q), cand.abs_diff(q));
        if d_cand < d_best || (d_cand == d_best && cand > best) {
            best = cand;
        }
    }
    best
}

#[inline]
fn quantize(coefficient: f64, step: f64) -> u64 {
    (coefficient.abs() / step).round() as u64
}

/// The planes that carry the payload for a given mode.
struct Carriers {
    planes: Vec<Plane>,
    chroma: Option<(Plane, Plane)>,
}

impl Carriers {
    fn of(image: &RgbImage, mode: ColorMode) -> Self {
        match mode {
            ColorMode::Ycbcr => {
                let YCbCrImage { y, cb, cr } = rgb_to_ycbcr(image);
                Self {
                    planes: vec![y],
                    chroma: Some((cb, cr)),
                }
            }
            ColorMode::Rgb => Self {
                planes: image
                    .channels()
                    .iter()
                    .map(|c| {
                        Plane::from_vec(image.width(), image.height(), c.iter().map(|&v| v as f64).collect())
                            .expect("channel matches dimensions")
                    })
                    .collect(),
                chroma: None,
            },
        }
    }

    /// Unrounded RGB planes for the given carrier planes.
    fn ideal_rgb(&self, planes: &[Plane]) -> [Vec<f64>; 3] {
        match &self.chroma {
            Some((cb, cr)) => {
                let n = cb.data().len();
                let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
                for i in 0..n {
                    let rgb = ycbcr_to_rgb_real([planes[0].data()[i], cb.data()[i], cr.data()[i]]);
                    for (ch, v) in out.iter_mut().zip(rgb) {
                        ch[i] = v;
                    }
                }
                out
            }
            None => [0, 1, 2].map(|k| planes[k].data().to_vec()),
        }
    }
}

fn render(ideal: &[Vec<f64>; 3], width: usize, height: usize) -> RgbImage {
    let [r, g, b] = ideal.clone().map(|ch| ch.into_iter().map(quantize_sample).collect());
    RgbImage::new(width, height, r, g, b).expect("planes share dimensions")
}

/// Target subband of each carrier plane of `image`.
fn carrier_subbands(image: &RgbImage, mode: ColorMode, levels: u32, filters: &FilterPair) -> Result<Vec<Plane>> {
    Carriers::of(image, mode)
        .planes
        .iter()
        .map(|p| forward_2d(p, levels, filters).map(|pyr| pyr.ll))
        .collect()
}

/// Writes the nibbles into the approximation band of `pyramid` and returns the
/// target coefficient of every site.
fn modulate(pyramid: &mut WaveletPyramid, sites: &[(usize, usize)], nibbles: &[u8], step: f64) -> Vec<f64> {
    let signs = SignMatrix::of(&pyramid.ll);
    sites
        .iter()
        .zip(nibbles)
        .map(|(&(row, col), &nibble)| {
            let q = quantize(pyramid.ll.get(row, col), step);
            let target = signs.sign(row, col) * embed_nibble(q, nibble) as f64 * step;
            pyramid.ll.set(row, col, target);
            target
        })
        .collect()
}

/// Embeds `wm` into `host`, returning the 8-bit watermarked image and the key
/// needed to extract it.
///
/// The modulated subbands are synthesized with every detail subband untouched
/// and rounded to 8 bits; a final integer touch-up then pulls every site back
/// near its target (see `refine`).
pub fn embed(host: &RgbImage, wm: &WatermarkBits, cfg: &EmbedConfig) -> Result<(RgbImage, AuthKey)> {
    cfg.validate()?;
    check_divisible(host.width(), host.height(), cfg.levels)?;
    if wm.ones() == 0 {
        return Err(Error::BlankWatermark);
    }
    let filters = FilterPair::cdf97();
    let (sw, sh) = (host.width() >> cfg.levels, host.height() >> cfg.levels);
    let sites = select_sites(sw, sh, wm.len())?;
    let nibbles = pack_nibbles(wm);
    let step = cfg.quant_step;

    let carriers = Carriers::of(host, cfg.color_mode);
    let mut pyramids = Vec::with_capacity(carriers.planes.len());
    let mut targets = Vec::with_capacity(carriers.planes.len());
    for plane in &carriers.planes {
        let mut pyr = forward_2d(plane, cfg.levels, &filters)?;
        targets.push(modulate(&mut pyr, &sites, &nibbles, step));
        pyramids.push(pyr);
    }

    let planes = pyramids
        .iter()
        .map(|p| inverse_2d(p, &filters))
        .collect::<Result<Vec<_>>>()?;
    let ideal = carriers.ideal_rgb(&planes);
    let mut image = render(&ideal, host.width(), host.height());

    let tolerance = REFINE_TOLERANCE * step;
    let refiner = Refiner::new(host.width(), host.height(), cfg.levels, &filters);
    for _ in 0..REFINE_ROUNDS {
        let measured = carrier_subbands(&image, cfg.color_mode, cfg.levels, &filters)?;
        let settled = measured.iter().zip(&targets).all(|(ll, target)| {
            sites
                .iter()
                .zip(target)
                .all(|(&(r, c), &t)| (t - ll.get(r, c)).abs() <= tolerance + 1e-9)
        });
        if settled {
            break;
        }
        refiner.refine(
            &mut image,
            &ideal,
            cfg.color_mode,
            &sites,
            &targets,
            &measured,
            tolerance,
            step,
        );
    }

    let key = AuthKey {
        format_version: KEY_FORMAT_VERSION,
        color_mode: cfg.color_mode,
        levels: cfg.levels,
        subband_id: AuthKey::subband_label(cfg.levels),
        host_width: host.width(),
        host_height: host.height(),
        wm_width: wm.width(),
        wm_height: wm.height(),
        quant_step: step,
        site_indices: sites,
    };
    Ok((image, key))
}

/// Recovers the watermark from `image` using only `key`.
pub fn extract(image: &RgbImage, key: &AuthKey) -> Result<WatermarkBits> {
    key.validate()?;
    if image.width() != key.host_width || image.height() != key.host_height {
        return Err(Error::DimensionMismatch {
            left_w: image.width(),
            left_h: image.height(),
            right_w: key.host_width,
            right_h: key.host_height,
        });
    }
    let filters = FilterPair::cdf97();
    let n_bits = key.wm_width * key.wm_height;
    let streams: Vec<Vec<bool>> = carrier_subbands(image, key.color_mode, key.levels, &filters)?
        .iter()
        .map(|ll| {
            let nibbles: Vec<u8> = key
                .site_indices
                .iter()
                .map(|&(row, col)| (quantize(ll.get(row, col), key.quant_step) & 0xf) as u8)
                .collect();
            unpack_nibbles(&nibbles, n_bits)
        })
        .collect();
    let bits = (0..n_bits)
        .map(|i| 2 * streams.iter().filter(|s| s[i]).count() > streams.len())
        .collect();
    WatermarkBits::unchecked(key.wm_width, key.wm_height, bits)
}

/// Largest watermark, in bits, that a `width`×`height` host can carry.
pub fn capacity_bits(width: usize, height: usize, levels: u32) -> usize {
    BITS_PER_SITE * (width >> levels) * (height >> levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    /// Exhaustive minimizer over all admissible candidates.
    fn brute_force_nibble(q: u64, nibble: u8) -> u64 {
        (0..=(q / 16 + 2))
            .map(|k| 16 * k + nibble as u64)
            .min_by(|a, b| a.abs_diff(q).cmp(&b.abs_diff(q)).then(b.cmp(a)))
            .unwrap()
    }

    #[test]
    fn embed_nibble_examples() {
        assert_eq!(embed_nibble(100, 5), 101);
        assert_eq!(embed_nibble(7, 7), 7);
        assert_eq!(embed_nibble(8, 0), 16);
        assert_eq!(embed_nibble(3, 12), 12);
        assert_eq!(embed_nibble(0, 15), 15);
    }

    #[test]
    fn embed_nibble_matches_brute_force() {
        for q in 0..4096 {
            for n in 0..16 {
                assert_eq!(embed_nibble(q, n), brute_force_nibble(q, n), "q={q} n={n}");
            }
        }
    }

    #[test]
    fn site_selection() {
        let sites = select_sites(32, 32, 900).unwrap();
        assert_eq!(sites.len(), 225);
        assert_eq!(sites[31], (0, 31));
        assert_eq!(sites[32], (1, 0));
        assert_eq!(*sites.last().unwrap(), (7, 0));
        assert_eq!(select_sites(32, 32, 4096).unwrap().len(), 1024);
        assert!(matches!(
            select_sites(32, 32, 4100),
            Err(Error::Capacity {
                needed: 1025,
                available: 1024
            })
        ));
    }

    #[test]
    fn nibble_packing() {
        assert_eq!(pack_bits(&[true, false, true, true]), vec![11]);
        assert_eq!(pack_bits(&[true; 5]), vec![15, 8]);
        assert_eq!(pack_nibbles(&fixtures::logo_watermark()).len(), 225);
        let bits: Vec<bool> = (0..13).map(|i| i % 3 == 0).collect();
        assert_eq!(unpack_nibbles(&pack_bits(&bits), 13), bits);
    }

    #[test]
    fn sign_matrix() {
        let p = Plane::from_vec(2, 2, vec![1.0, -2.0, 0.0, -0.0]).unwrap();
        let s = SignMatrix::of(&p);
        assert_eq!(
            [s.sign(0, 0), s.sign(0, 1), s.sign(1, 0), s.sign(1, 1)],
            [1.0, -1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn modulation_leaves_details_bit_identical() {
        let host = fixtures::blobs(64, 9);
        let filters = FilterPair::cdf97();
        let y = rgb_to_ycbcr(&host).y;
        let original = forward_2d(&y, 3, &filters).unwrap();
        let mut modified = original.clone();
        let sites = select_sites(8, 8, 40).unwrap();
        let nibbles: Vec<u8> = (0..sites.len() as u8).collect();
        let targets = modulate(&mut modified, &sites, &nibbles, 1.0);
        assert_eq!(modified.details, original.details);
        for (&(r, c), (&t, &n)) in sites.iter().zip(targets.iter().zip(&nibbles)) {
            assert_eq!(modified.ll.get(r, c), t);
            assert_eq!(quantize(t, 1.0) & 0xf, n as u64);
        }
        // non-site coefficients pass through
        assert_eq!(modified.ll.get(7, 7), original.ll.get(7, 7));
    }

    #[test]
    fn round_trip_both_modes() {
        let host = fixtures::texture(64, 2);
        let wm = WatermarkBits::new(8, 8, (0..64).map(|i| i % 5 < 2).collect()).unwrap();
        for mode in [ColorMode::Ycbcr, ColorMode::Rgb] {
            let (marked, key) = embed(&host, &wm, &EmbedConfig::new(mode)).unwrap();
            assert_eq!(key.site_indices.len(), 16);
            assert_eq!(extract(&marked, &key).unwrap(), wm, "{mode}");
        }
    }

    #[test]
    fn capacity_and_dimension_errors() {
        let wm = fixtures::logo_watermark();
        let small = RgbImage::from_fn(16, 16, |_, _| [100; 3]).unwrap();
        assert!(matches!(
            embed(&small, &wm, &EmbedConfig::default()),
            Err(Error::Capacity {
                needed: 225,
                available: 4
            })
        ));
        let odd = RgbImage::from_fn(100, 100, |_, _| [100; 3]).unwrap();
        assert!(matches!(
            embed(&odd, &wm, &EmbedConfig::default()),
            Err(Error::Indivisible { .. })
        ));
        assert_eq!(capacity_bits(16, 16, 3), 16);
    }

    #[test]
    fn extraction_is_total() {
        let wm = fixtures::logo_watermark();
        let (_, key) = embed(&fixtures::gradient(256), &wm, &EmbedConfig::default()).unwrap();
        let flat = RgbImage::from_fn(256, 256, |_, _| [90, 90, 90]).unwrap();
        let a = extract(&flat, &key).unwrap();
        assert_eq!(a, extract(&flat, &key).unwrap());
        assert_eq!(a.len(), 900);
        let wrong = RgbImage::from_fn(128, 256, |_, _| [0; 3]).unwrap();
        assert!(matches!(extract(&wrong, &key), Err(Error::DimensionMismatch { .. })));
    }
}
