//! Integer touch-up of a rendered watermarked image.
//!
//! Rounding the synthesized planes to 8 bits perturbs the approximation
//! coefficients by up to a few quantizer steps, because the rounding error of
//! a smooth change is itself smooth and adds up coherently under the lowpass
//! analysis. This pass nudges individual pixels by ±1 until every embedding
//! site sits within a tolerance of its target again, preferring pixels whose
//! rounding already leaned the needed way.
//!
//! The approximation band is a separable linear map of the plane, so the effect
//! of a pixel change on every site is known exactly from the 1-D cascades.

use crate::imagecodec::{ColorMode, RgbImage};
use crate::plane::Plane;
use crate::wavelet::{analyze_1d, FilterPair};

const MAX_PASSES: usize = 64;
const MAX_MOVES_PER_VISIT: usize = 64;
/// Only the strongest pixels of a site are tried.
const MAX_CANDIDATES: usize = 96;
/// Weight of pixel distortion against squared residual (per step²).
const DISTORTION_PENALTY: f64 = 1e-3;
/// Pixels whose weight falls below this share of the site's peak weight are
/// not used as candidates.
const MIN_RELATIVE_WEIGHT: f64 = 0.02;

/// Row `i` holds the weights of approximation sample `i` over the input
/// after `levels` lowpass analysis steps.
fn lowpass_cascade(n: usize, levels: u32, filters: &FilterPair) -> Vec<Vec<f64>> {
    let out_len = n >> levels;
    let mut rows = vec![vec![0.0; n]; out_len];
    let mut unit = vec![0.0; n];
    for j in 0..n {
        unit[j] = 1.0;
        let mut signal = unit.clone();
        for _ in 0..levels {
            signal = analyze_1d(&signal, filters).expect("length divisible by 2^levels").0;
        }
        for (i, v) in signal.into_iter().enumerate() {
            rows[i][j] = v;
        }
        unit[j] = 0.0;
    }
    rows
}

struct Candidate {
    row: usize,
    col: usize,
    weight: f64,
}

/// A ±1 step on some channels of one pixel.
struct Move {
    channels: &'static [usize],
    /// Change of the carrier plane per unit pixel step.
    gain: f64,
}

/// Moves available for one carrier, tried in order of preference.
type MoveKind = &'static [Move];

const GRAY: Move = Move {
    channels: &[0, 1, 2],
    gain: 219.0 / 255.0,
};
// single-channel luma moves, used where a gray shift would clip
const LUMA_R: Move = Move {
    channels: &[0],
    gain: 65.481 / 255.0,
};
const LUMA_G: Move = Move {
    channels: &[1],
    gain: 128.553 / 255.0,
};
const LUMA_B: Move = Move {
    channels: &[2],
    gain: 24.966 / 255.0,
};

fn move_kinds(mode: ColorMode) -> Vec<MoveKind> {
    match mode {
        ColorMode::Ycbcr => vec![&[GRAY, LUMA_G, LUMA_R, LUMA_B]],
        ColorMode::Rgb => vec![
            &[Move {
                channels: &[0],
                gain: 1.0,
            }],
            &[Move {
                channels: &[1],
                gain: 1.0,
            }],
            &[Move {
                channels: &[2],
                gain: 1.0,
            }],
        ],
    }
}

pub(super) struct Refiner {
    rows: Vec<Vec<f64>>,
    cols: Vec<Vec<f64>>,
}

impl Refiner {
    pub(super) fn new(width: usize, height: usize, levels: u32, filters: &FilterPair) -> Self {
        Self {
            rows: lowpass_cascade(height, levels, filters),
            cols: lowpass_cascade(width, levels, filters),
        }
    }

    #[inline]
    fn weight(&self, site: (usize, usize), row: usize, col: usize) -> f64 {
        self.rows[site.0][row] * self.cols[site.1][col]
    }

    fn candidates(&self, site: (usize, usize)) -> Vec<Candidate> {
        let (wr, wc) = (&self.rows[site.0], &self.cols[site.1]);
        let peak = wr.iter().fold(0.0f64, |m, v| m.max(v.abs())) * wc.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut out = Vec::new();
        for (row, &a) in wr.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (col, &b) in wc.iter().enumerate() {
                let weight = a * b;
                if weight.abs() >= MIN_RELATIVE_WEIGHT * peak {
                    out.push(Candidate { row, col, weight });
                }
            }
        }
        out.sort_by(|x, y| y.weight.abs().total_cmp(&x.weight.abs()));
        out
    }

    /// Adjusts `image` so that every site's coefficient on every carrier is
    /// within `tolerance` of its target. `measured` holds the current
    /// approximation band of each carrier, `ideal` the unrounded RGB planes.
    ///
    /// Moves are chosen to decrease the summed squared residual over all
    /// sites, with the pixel's growth in distortion as a small penalty, so the
    /// search cannot cycle.
    #[allow(clippy::too_many_arguments)]
    pub(super) fn refine(
        &self,
        image: &mut RgbImage,
        ideal: &[Vec<f64>; 3],
        mode: ColorMode,
        sites: &[(usize, usize)],
        targets: &[Vec<f64>],
        measured: &[Plane],
        tolerance: f64,
        step: f64,
    ) {
        let width = image.width();
        let candidates: Vec<Vec<Candidate>> = sites.iter().map(|&s| self.candidates(s)).collect();
        let reach = self.reach();
        let neighbours: Vec<Vec<usize>> = sites
            .iter()
            .map(|&(r, c)| {
                sites
                    .iter()
                    .enumerate()
                    .filter(|(_, &(r2, c2))| r.abs_diff(r2) <= reach.0 && c.abs_diff(c2) <= reach.1)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let penalty = DISTORTION_PENALTY * step * step;

        for ((&kind, target), ll) in move_kinds(mode).iter().zip(targets).zip(measured) {
            let mut residual: Vec<f64> = sites.iter().zip(target).map(|(&(r, c), &t)| t - ll.get(r, c)).collect();

            for _ in 0..MAX_PASSES {
                let mut moved = false;
                for s in 0..sites.len() {
                    for _ in 0..MAX_MOVES_PER_VISIT {
                        if residual[s].abs() <= tolerance {
                            break;
                        }
                        let Some((row, col, delta, mv)) = self.best_move(
                            image,
                            ideal,
                            kind,
                            &candidates[s],
                            residual[s],
                            &neighbours[s],
                            sites,
                            &residual,
                            penalty,
                        ) else {
                            break;
                        };
                        for &ch in mv.channels {
                            let px = &mut image.channels_mut()[ch][row * width + col];
                            *px = (*px as i32 + delta) as u8;
                        }
                        let change = mv.gain * delta as f64;
                        for &n in &neighbours[s] {
                            residual[n] -= change * self.weight(sites[n], row, col);
                        }
                        moved = true;
                    }
                }
                if !moved || residual.iter().all(|r| r.abs() <= tolerance) {
                    break;
                }
            }
        }
    }

    /// Largest site distance, per axis, at which two sites share pixels.
    fn reach(&self) -> (usize, usize) {
        let span = |w: &Vec<Vec<f64>>| {
            let first = w
                .first()
                .map_or(0, |row| row.iter().rposition(|&v| v != 0.0).unwrap_or(0));
            let stride = w.len().max(1);
            let n = w.first().map_or(0, |row| row.len());
            // two sites overlap when their supports intersect
            2 * first / (n / stride).max(1) + 1
        };
        (span(&self.rows), span(&self.cols))
    }

    /// Most profitable ±1 pixel move among the site's candidates, if any
    /// lowers the objective.
    #[allow(clippy::too_many_arguments)]
    fn best_move(
        &self,
        image: &RgbImage,
        ideal: &[Vec<f64>; 3],
        kind: MoveKind,
        candidates: &[Candidate],
        need: f64,
        neighbours: &[usize],
        sites: &[(usize, usize)],
        residual: &[f64],
        penalty: f64,
    ) -> Option<(usize, usize, i32, &'static Move)> {
        let width = image.width();
        let mut best: Option<(usize, usize, i32, &'static Move, f64)> = None;
        for cand in candidates.iter().take(MAX_CANDIDATES) {
            let delta = if (need > 0.0) == (cand.weight > 0.0) { 1 } else { -1 };
            let idx = cand.row * width + cand.col;
            let Some(mv) = kind.iter().find(|mv| {
                mv.channels
                    .iter()
                    .all(|&ch| (0..=255).contains(&(image.channel(ch)[idx] as i32 + delta)))
            }) else {
                continue;
            };
            let mut cost = 0.0;
            for &ch in mv.channels {
                // growth of the squared distance to the unrounded value
                cost += 1.0 + 2.0 * delta as f64 * (image.channel(ch)[idx] as f64 - ideal[ch][idx]);
            }
            let change = mv.gain * delta as f64;
            let mut gain = 0.0;
            for &n in neighbours {
                let e = change * self.weight(sites[n], cand.row, cand.col);
                gain += e * e - 2.0 * e * residual[n];
            }
            let score = gain + penalty * cost;
            if score < 0.0 && best.as_ref().is_none_or(|b| score < b.4) {
                best = Some((cand.row, cand.col, delta, mv, score));
            }
        }
        best.map(|(r, c, d, mv, _)| (r, c, d, mv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::forward_2d;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cascade_weights_reproduce_forward_transform() {
        let filters = FilterPair::cdf97();
        let refiner = Refiner::new(32, 16, 2, &filters);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let plane = Plane::from_fn(32, 16, |_, _| rng.random_range(0.0..255.0));
        let ll = forward_2d(&plane, 2, &filters).unwrap().ll;
        for i in 0..4 {
            for j in 0..8 {
                let mut acc = 0.0;
                for r in 0..16 {
                    for c in 0..32 {
                        acc += refiner.weight((i, j), r, c) * plane.get(r, c);
                    }
                }
                assert!((acc - ll.get(i, j)).abs() < 1e-9);
            }
        }
    }
}
