//! Separable multilevel 2-D DWT with the CDF 9/7 biorthogonal filter bank.
//!
//! Filtering is plain convolution under whole-sample symmetric extension
//! (`... x2 x1 | x0 x1 x2 ... xN-1 | xN-2 xN-3 ...`), which keeps the
//! odd-length symmetric 9/7 pair perfectly invertible on even-length input.
//! Lowpass outputs sit on even sample positions, highpass on odd ones.

use crate::error::{Error, Result};
use crate::plane::Plane;

// CDF 9/7 lifting steps. The convolution taps are derived from these so the
// four filters are biorthogonal to working precision.
const LIFT_ALPHA: f64 = -1.586_134_342_059_924;
const LIFT_BETA: f64 = -0.052_980_118_572_961;
const LIFT_GAMMA: f64 = 0.882_911_075_530_934;
const LIFT_DELTA: f64 = 0.443_506_852_043_971;

/// Analysis and synthesis filters of a two-channel filter bank.
///
/// Every filter has odd length and is stored centered: tap `i` applies at
/// offset `i - len / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    pub analysis_low: Vec<f64>,
    pub analysis_high: Vec<f64>,
    pub synthesis_low: Vec<f64>,
    pub synthesis_high: Vec<f64>,
}

impl FilterPair {
    /// Cohen-Daubechies-Feauveau 9/7, normalized so the analysis lowpass has
    /// DC gain √2 and the analysis highpass mirrors the synthesis lowpass.
    pub fn cdf97() -> Self {
        const N: usize = 32;
        const K: usize = N / 4;

        let unit = |pos: usize| {
            let mut v = vec![0.0; N];
            v[pos] = 1.0;
            v
        };

        let mut h0: Vec<f64> = (-4i64..=4)
            .map(|t| lifting_analysis(&unit((2 * K as i64 + t) as usize)).0[K])
            .collect();
        let mut h1: Vec<f64> = (-3i64..=3)
            .map(|t| lifting_analysis(&unit((2 * K as i64 + 1 + t) as usize)).1[K])
            .collect();
        let low_impulse = lifting_synthesis(&unit(K)[..N / 2], &[0.0; N / 2]);
        let high_impulse = lifting_synthesis(&[0.0; N / 2], &unit(K)[..N / 2]);
        let mut g0: Vec<f64> = (-3i64..=3).map(|t| low_impulse[(2 * K as i64 + t) as usize]).collect();
        let mut g1: Vec<f64> = (-4i64..=4)
            .map(|t| high_impulse[(2 * K as i64 + 1 + t) as usize])
            .collect();

        let low_scale = std::f64::consts::SQRT_2 / h0.iter().sum::<f64>();
        h0.iter_mut().for_each(|v| *v *= low_scale);
        g0.iter_mut().for_each(|v| *v /= low_scale);
        let high_scale = g0[3].abs() / h1[3].abs();
        h1.iter_mut().for_each(|v| *v *= high_scale);
        g1.iter_mut().for_each(|v| *v /= high_scale);

        Self {
            analysis_low: h0,
            analysis_high: h1,
            synthesis_low: g0,
            synthesis_high: g1,
        }
    }
}

impl Default for FilterPair {
    fn default() -> Self {
        Self::cdf97()
    }
}

// Unscaled lifting with zero extension, only used to read off impulse
// responses away from the borders.
fn lifting_analysis(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let half = x.len() / 2;
    let mut s: Vec<f64> = (0..half).map(|n| x[2 * n]).collect();
    let mut d: Vec<f64> = (0..half).map(|n| x[2 * n + 1]).collect();
    let at = |v: &[f64], i: i64| {
        if i < 0 || i as usize >= v.len() {
            0.0
        } else {
            v[i as usize]
        }
    };
    for (predict, update) in [(LIFT_ALPHA, LIFT_BETA), (LIFT_GAMMA, LIFT_DELTA)] {
        for n in 0..half {
            d[n] += predict * (s[n] + at(&s, n as i64 + 1));
        }
        for n in 0..half {
            s[n] += update * (at(&d, n as i64 - 1) + d[n]);
        }
    }
    (s, d)
}

fn lifting_synthesis(s: &[f64], d: &[f64]) -> Vec<f64> {
    let half = s.len();
    let mut s = s.to_vec();
    let mut d = d.to_vec();
    let at = |v: &[f64], i: i64| {
        if i < 0 || i as usize >= v.len() {
            0.0
        } else {
            v[i as usize]
        }
    };
    for (predict, update) in [(LIFT_GAMMA, LIFT_DELTA), (LIFT_ALPHA, LIFT_BETA)] {
        for n in 0..half {
            s[n] -= update * (at(&d, n as i64 - 1) + d[n]);
        }
        for n in 0..half {
            d[n] -= predict * (s[n] + at(&s, n as i64 + 1));
        }
    }
    let mut x = vec![0.0; 2 * half];
    for n in 0..half {
        x[2 * n] = s[n];
        x[2 * n + 1] = d[n];
    }
    x
}

/// Whole-sample symmetric reflection of `i` into `0..n`.
#[inline]
fn reflect(i: i64, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as i64 - 1);
    let r = i.rem_euclid(period);
    if r >= n as i64 {
        (period - r) as usize
    } else {
        r as usize
    }
}

#[inline]
fn convolve_at(signal: &[f64], taps: &[f64], pos: i64) -> f64 {
    let center = (taps.len() / 2) as i64;
    let n = signal.len();
    let mut acc = 0.0;
    for (i, &tap) in taps.iter().enumerate() {
        acc += tap * signal[reflect(pos - (i as i64 - center), n)];
    }
    acc
}

/// One analysis step: returns `(approx, detail)`, each half the input length.
pub fn analyze_1d(signal: &[f64], filters: &FilterPair) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = signal.len();
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::OddLength(n));
    }
    let half = n / 2;
    let approx = (0..half)
        .map(|k| convolve_at(signal, &filters.analysis_low, 2 * k as i64))
        .collect();
    let detail = (0..half)
        .map(|k| convolve_at(signal, &filters.analysis_high, 2 * k as i64 + 1))
        .collect();
    Ok((approx, detail))
}

/// Inverse of [`analyze_1d`].
pub fn synthesize_1d(approx: &[f64], detail: &[f64], filters: &FilterPair) -> Result<Vec<f64>> {
    if approx.len() != detail.len() || approx.is_empty() {
        return Err(Error::LengthMismatch {
            approx: approx.len(),
            detail: detail.len(),
        });
    }
    let n = 2 * approx.len();
    let mut low = vec![0.0; n];
    let mut high = vec![0.0; n];
    for k in 0..approx.len() {
        low[2 * k] = approx[k];
        high[2 * k + 1] = detail[k];
    }
    Ok((0..n as i64)
        .map(|j| convolve_at(&low, &filters.synthesis_low, j) + convolve_at(&high, &filters.synthesis_high, j))
        .collect())
}

/// The three detail subbands produced at one decomposition level.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailBands {
    /// Lowpass along rows, highpass along columns (horizontal detail).
    pub lh: Plane,
    /// Highpass along rows, lowpass along columns (vertical detail).
    pub hl: Plane,
    /// Highpass in both directions (diagonal detail).
    pub hh: Plane,
}

impl DetailBands {
    pub fn planes(&self) -> [&Plane; 3] {
        [&self.lh, &self.hl, &self.hh]
    }

    pub fn planes_mut(&mut self) -> [&mut Plane; 3] {
        [&mut self.lh, &mut self.hl, &mut self.hh]
    }
}

/// Multilevel subband decomposition of one plane.
///
/// `details[0]` holds the finest level (level 1), `details[levels - 1]` the
/// coarsest; `ll` is the approximation left after the last level.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    pub width: usize,
    pub height: usize,
    pub ll: Plane,
    pub details: Vec<DetailBands>,
}

impl WaveletPyramid {
    pub fn levels(&self) -> u32 {
        self.details.len() as u32
    }

    pub fn subband_count(&self) -> usize {
        3 * self.details.len() + 1
    }

    fn validate(&self) -> Result<()> {
        let levels = self.levels();
        check_divisible(self.width, self.height, levels)?;
        let expect = |p: &Plane, k: u32| {
            let (w, h) = (self.width >> k, self.height >> k);
            if p.width() == w && p.height() == h {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    left_w: p.width(),
                    left_h: p.height(),
                    right_w: w,
                    right_h: h,
                })
            }
        };
        expect(&self.ll, levels)?;
        for (i, bands) in self.details.iter().enumerate() {
            for p in bands.planes() {
                expect(p, i as u32 + 1)?;
            }
        }
        Ok(())
    }
}

pub(crate) fn check_divisible(width: usize, height: usize, levels: u32) -> Result<()> {
    let block = 1usize.checked_shl(levels).unwrap_or(0);
    if levels == 0
        || block == 0
        || width == 0
        || height == 0
        || !width.is_multiple_of(block)
        || !height.is_multiple_of(block)
    {
        return Err(Error::Indivisible { width, height, levels });
    }
    Ok(())
}

fn analyze_rows(plane: &Plane, filters: &FilterPair) -> (Plane, Plane) {
    let (w, h) = (plane.width() / 2, plane.height());
    let mut low = Plane::zeros(w, h);
    let mut high = Plane::zeros(w, h);
    for r in 0..h {
        let (a, d) = analyze_1d(plane.row(r), filters).expect("even row length");
        low.data_mut()[r * w..(r + 1) * w].copy_from_slice(&a);
        high.data_mut()[r * w..(r + 1) * w].copy_from_slice(&d);
    }
    (low, high)
}

fn analyze_cols(plane: &Plane, filters: &FilterPair) -> (Plane, Plane) {
    let (w, h) = (plane.width(), plane.height() / 2);
    let mut low = Plane::zeros(w, h);
    let mut high = Plane::zeros(w, h);
    for c in 0..w {
        let (a, d) = analyze_1d(&plane.column(c), filters).expect("even column length");
        for r in 0..h {
            low.set(r, c, a[r]);
            high.set(r, c, d[r]);
        }
    }
    (low, high)
}

fn synthesize_rows(low: &Plane, high: &Plane, filters: &FilterPair) -> Plane {
    let (w, h) = (low.width() * 2, low.height());
    let mut out = Plane::zeros(w, h);
    for r in 0..h {
        let x = synthesize_1d(low.row(r), high.row(r), filters).expect("matched rows");
        out.data_mut()[r * w..(r + 1) * w].copy_from_slice(&x);
    }
    out
}

fn synthesize_cols(low: &Plane, high: &Plane, filters: &FilterPair) -> Plane {
    let (w, h) = (low.width(), low.height() * 2);
    let mut out = Plane::zeros(w, h);
    for c in 0..w {
        let x = synthesize_1d(&low.column(c), &high.column(c), filters).expect("matched columns");
        for (r, v) in x.into_iter().enumerate() {
            out.set(r, c, v);
        }
    }
    out
}

/// One 2-D level: returns `(ll, bands)`.
fn split_level(plane: &Plane, filters: &FilterPair, rows_first: bool) -> (Plane, DetailBands) {
    if rows_first {
        let (l, h) = analyze_rows(plane, filters);
        let (ll, lh) = analyze_cols(&l, filters);
        let (hl, hh) = analyze_cols(&h, filters);
        (ll, DetailBands { lh, hl, hh })
    } else {
        let (l, h) = analyze_cols(plane, filters);
        let (ll, hl) = analyze_rows(&l, filters);
        let (lh, hh) = analyze_rows(&h, filters);
        (ll, DetailBands { lh, hl, hh })
    }
}

fn merge_level(ll: &Plane, bands: &DetailBands, filters: &FilterPair) -> Plane {
    let l = synthesize_cols(ll, &bands.lh, filters);
    let h = synthesize_cols(&bands.hl, &bands.hh, filters);
    synthesize_rows(&l, &h, filters)
}

/// Decompose `plane` into `levels` levels, recursively splitting the
/// approximation band.
pub fn forward_2d(plane: &Plane, levels: u32, filters: &FilterPair) -> Result<WaveletPyramid> {
    check_divisible(plane.width(), plane.height(), levels)?;
    let mut current = plane.clone();
    let mut details = Vec::with_capacity(levels as usize);
    for _ in 0..levels {
        let (ll, bands) = split_level(&current, filters, true);
        details.push(bands);
        current = ll;
    }
    Ok(WaveletPyramid {
        width: plane.width(),
        height: plane.height(),
        ll: current,
        details,
    })
}

pub fn inverse_2d(pyramid: &WaveletPyramid, filters: &FilterPair) -> Result<Plane> {
    pyramid.validate()?;
    let mut current = pyramid.ll.clone();
    for bands in pyramid.details.iter().rev() {
        current = merge_level(&current, bands, filters);
    }
    Ok(current)
}
