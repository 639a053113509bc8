//! Stage 3: contrast-limited adaptive histogram equalization on luma.
//!
//! The plane splits into a tile grid; each tile gets a clipped histogram
//! whose CDF becomes that tile's value mapping, and every pixel blends
//! the mappings of the four nearest tile centers bilinearly. Clipping
//! redistributes the excess uniformly in a single pass, so a clip limit
//! of 1 flattens the histogram and the mapping approaches identity.
//!
//! Only the luma plane is equalized; chroma passes through untouched.

use crate::colorcast::{rgb_to_yuv, yuv_to_rgb, YuvPlanes};
use crate::image::{PlaneF, RgbF};
use crate::CoreError;

#[derive(Debug, Clone, PartialEq)]
pub struct ClaheParams {
    pub tiles_x: usize,
    pub tiles_y: usize,
    /// Clip threshold as a multiple of the uniform bin height;
    /// `f64::INFINITY` disables clipping.
    pub clip_limit: f64,
    pub bins: usize,
}

impl Default for ClaheParams {
    fn default() -> Self {
        Self {
            tiles_x: 8,
            tiles_y: 8,
            clip_limit: 2.0,
            bins: 256,
        }
    }
}

impl ClaheParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.tiles_x == 0 || self.tiles_y == 0 {
            return Err(CoreError::InvalidParam {
                name: "tiles",
                reason: format!(
                    "grid must be at least 1x1, got {}x{}",
                    self.tiles_x, self.tiles_y
                ),
            });
        }
        if self.bins < 2 {
            return Err(CoreError::InvalidParam {
                name: "bins",
                reason: format!("need at least 2 bins, got {}", self.bins),
            });
        }
        if self.clip_limit.is_nan() || self.clip_limit < 1.0 {
            return Err(CoreError::InvalidParam {
                name: "clip_limit",
                reason: format!("must be at least 1, got {}", self.clip_limit),
            });
        }
        Ok(())
    }
}

#[inline]
fn bin_of(v: f32, bins: usize) -> usize {
    ((v * bins as f32) as usize).min(bins - 1)
}

/// Tile index spans along one axis; the last tile absorbs the remainder.
fn spans(len: usize, tiles: usize) -> Vec<(usize, usize)> {
    let base = len / tiles;
    (0..tiles)
        .map(|i| {
            let start = i * base;
            let end = if i + 1 == tiles { len } else { start + base };
            (start, end)
        })
        .collect()
}

/// Per-pixel blend table along one axis: the two bracketing tile indices
/// and the weight of the second. Pixels outside the first or last tile
/// center stick to the single nearest mapping.
fn axis_blend(len: usize, spans: &[(usize, usize)]) -> Vec<(usize, usize, f32)> {
    let centers: Vec<f64> = spans
        .iter()
        .map(|&(s, e)| (s + e - 1) as f64 / 2.0)
        .collect();
    let last = spans.len() - 1;
    (0..len)
        .map(|p| {
            let x = p as f64;
            if x <= centers[0] {
                return (0, 0, 0.0);
            }
            if x >= centers[last] {
                return (last, last, 0.0);
            }
            let mut i = 0;
            while centers[i + 1] <= x {
                i += 1;
            }
            let w = (x - centers[i]) / (centers[i + 1] - centers[i]);
            (i, i + 1, w as f32)
        })
        .collect()
}

fn tile_lut(
    plane: &PlaneF,
    (x0, x1): (usize, usize),
    (y0, y1): (usize, usize),
    bins: usize,
    clip_limit: f64,
) -> Vec<f32> {
    let mut hist = vec![0.0f64; bins];
    for y in y0..y1 {
        for x in x0..x1 {
            hist[bin_of(plane.get(x, y), bins)] += 1.0;
        }
    }
    let pixels = ((x1 - x0) * (y1 - y0)) as f64;
    if clip_limit.is_finite() {
        let limit = clip_limit * pixels / bins as f64;
        let mut excess = 0.0;
        for h in hist.iter_mut() {
            if *h > limit {
                excess += *h - limit;
                *h = limit;
            }
        }
        let share = excess / bins as f64;
        for h in hist.iter_mut() {
            *h += share;
        }
    }
    let mut cdf = Vec::with_capacity(bins);
    let mut running = 0.0;
    for h in hist {
        running += h;
        cdf.push((running / pixels) as f32);
    }
    cdf
}

/// The per-tile value mappings `clahe` blends, row-major over a grid of
/// `tiles_y.min(height)` rows by `tiles_x.min(width)` columns. Each
/// mapping takes a bin index to an equalized value in `[0, 1]` and is
/// non-decreasing.
pub fn tile_mappings(plane: &PlaneF, params: &ClaheParams) -> Vec<Vec<f32>> {
    params.validate().expect("clahe params must be valid");
    let xs = spans(plane.width(), params.tiles_x.min(plane.width()));
    let ys = spans(plane.height(), params.tiles_y.min(plane.height()));
    let mut luts = Vec::with_capacity(xs.len() * ys.len());
    for &rows in &ys {
        for &cols in &xs {
            luts.push(tile_lut(plane, cols, rows, params.bins, params.clip_limit));
        }
    }
    luts
}

/// Equalizes a `[0, 1]` plane tile by tile. Output samples stay in
/// `[0, 1]`; a constant plane maps to a constant plane.
pub fn clahe(plane: &PlaneF, params: &ClaheParams) -> PlaneF {
    params.validate().expect("clahe params must be valid");
    let (w, h) = (plane.width(), plane.height());
    let tx = params.tiles_x.min(w);
    let ty = params.tiles_y.min(h);
    let xs = spans(w, tx);
    let ys = spans(h, ty);
    let mut luts = Vec::with_capacity(tx * ty);
    for &rows in &ys {
        for &cols in &xs {
            luts.push(tile_lut(plane, cols, rows, params.bins, params.clip_limit));
        }
    }
    let bx = axis_blend(w, &xs);
    let by = axis_blend(h, &ys);
    // nested lerps: when the four mappings agree the result is exactly
    // their common value, so constant regions cannot pick up noise
    let lerp = |a: f32, b: f32, w: f32| a + w * (b - a);
    PlaneF::from_fn(w, h, |x, y| {
        let b = bin_of(plane.get(x, y), params.bins);
        let (i0, i1, wx) = bx[x];
        let (j0, j1, wy) = by[y];
        let top = lerp(luts[j0 * tx + i0][b], luts[j0 * tx + i1][b], wx);
        let bottom = lerp(luts[j1 * tx + i0][b], luts[j1 * tx + i1][b], wx);
        lerp(top, bottom, wy)
    })
}

/// The full stage: equalize the luma plane, leave chroma alone, convert
/// back to RGB.
pub fn enhance_contrast(img: &RgbF, params: &ClaheParams) -> RgbF {
    let (y, u, v) = rgb_to_yuv(img).into_parts();
    let equalized = clahe(&y, params);
    yuv_to_rgb(&YuvPlanes::new(equalized, u, v).expect("clahe preserves dimensions"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng_plane(w: usize, h: usize, seed: u64) -> PlaneF {
        let mut state = seed | 1;
        PlaneF::from_fn(w, h, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 40) & 0xffff) as f32 / 65535.0
        })
    }

    fn single_tile() -> ClaheParams {
        ClaheParams {
            tiles_x: 1,
            tiles_y: 1,
            clip_limit: f64::INFINITY,
            bins: 256,
        }
    }

    fn global_equalization(plane: &PlaneF, bins: usize) -> Vec<f32> {
        let mut hist = vec![0u64; bins];
        for &v in plane.data() {
            hist[bin_of(v, bins)] += 1;
        }
        let total = plane.len() as f64;
        let mut cdf = Vec::with_capacity(bins);
        let mut run = 0u64;
        for c in hist {
            run += c;
            cdf.push((run as f64 / total) as f32);
        }
        plane.data().iter().map(|&v| cdf[bin_of(v, bins)]).collect()
    }

    #[test]
    fn constant_plane_maps_to_a_constant() {
        for clip in [1.0, 2.0, f64::INFINITY] {
            let p = PlaneF::filled(20, 14, 0.37);
            let out = clahe(
                &p,
                &ClaheParams {
                    clip_limit: clip,
                    ..ClaheParams::default()
                },
            );
            let first = out.get(0, 0);
            for &v in out.data() {
                assert_eq!(v, first);
            }
        }
    }

    #[test]
    fn single_tile_equals_global_equalization() {
        let p = rng_plane(33, 21, 11);
        let out = clahe(&p, &single_tile());
        let want = global_equalization(&p, 256);
        for (a, b) in out.data().iter().zip(&want) {
            assert!((a - b).abs() <= 1.0 / 256.0, "{a} vs {b}");
        }
    }

    #[test]
    fn two_level_plane_maps_to_cdf_steps() {
        let p = PlaneF::from_fn(8, 2, |x, _| if x % 2 == 0 { 0.2 } else { 0.8 });
        let out = clahe(&p, &single_tile());
        for y in 0..2 {
            for x in 0..8 {
                let want = if x % 2 == 0 { 0.5 } else { 1.0 };
                assert!((out.get(x, y) - want).abs() <= 1.0 / 256.0);
            }
        }
    }

    #[test]
    fn unit_clip_limit_passes_uniform_tiles_through() {
        // every tile hits every bin exactly once, so the histogram sits
        // at the clip ceiling and the mapping shifts by half a bin only
        let p = PlaneF::from_fn(32, 32, |x, y| {
            (((x % 16) + 16 * (y % 16)) as f32 + 0.5) / 256.0
        });
        let out = clahe(
            &p,
            &ClaheParams {
                tiles_x: 2,
                tiles_y: 2,
                clip_limit: 1.0,
                bins: 256,
            },
        );
        for (a, b) in out.data().iter().zip(p.data()) {
            assert!((a - b).abs() <= 0.6 / 256.0, "{a} vs {b}");
        }
    }

    #[test]
    fn mappings_are_monotone() {
        let p = rng_plane(40, 30, 77);
        for clip in [1.0, 2.0, 4.0, f64::INFINITY] {
            let params = ClaheParams {
                tiles_x: 4,
                tiles_y: 3,
                clip_limit: clip,
                bins: 64,
            };
            for lut in tile_mappings(&p, &params) {
                for pair in lut.windows(2) {
                    assert!(pair[0] <= pair[1]);
                }
                assert!(*lut.last().unwrap() <= 1.0 + 1e-6);
            }
        }
    }

    #[test]
    fn output_stays_in_unit_range() {
        let p = rng_plane(25, 19, 5);
        let out = clahe(&p, &ClaheParams::default());
        let (lo, hi) = out.min_max();
        assert!(lo >= 0.0 && hi <= 1.0);
    }

    #[test]
    fn low_contrast_ramp_spreads_out() {
        let p = PlaneF::from_fn(64, 64, |x, y| 0.4 + 0.2 * ((x + 64 * y) as f32 / 4095.0));
        let out = clahe(&p, &single_tile());
        let (lo, hi) = out.min_max();
        assert!(lo <= 0.05, "min {lo}");
        assert!(hi >= 0.95, "max {hi}");
    }

    #[test]
    fn degenerate_single_pixel_plane() {
        let p = PlaneF::filled(1, 1, 0.3);
        let out = clahe(&p, &ClaheParams::default());
        assert_eq!(out.len(), 1);
        assert!(out.get(0, 0) >= 0.0 && out.get(0, 0) <= 1.0);
    }

    #[test]
    fn tiles_clamp_to_tiny_planes() {
        let p = rng_plane(3, 2, 9);
        let out = clahe(
            &p,
            &ClaheParams {
                tiles_x: 8,
                tiles_y: 8,
                ..ClaheParams::default()
            },
        );
        assert_eq!((out.width(), out.height()), (3, 2));
    }

    #[test]
    fn gray_input_stays_gray() {
        let img = RgbF::from_fn(16, 16, |x, y| {
            let v = ((x * 13 + y * 7) % 17) as f32 / 16.0;
            [v, v, v]
        });
        let out = enhance_contrast(&img, &ClaheParams::default());
        for i in 0..out.r().len() {
            let r = out.r().data()[i];
            let g = out.g().data()[i];
            let b = out.b().data()[i];
            assert!((r - g).abs() < 2e-3 && (g - b).abs() < 2e-3, "{r} {g} {b}");
        }
    }

    #[test]
    fn constant_color_stays_constant() {
        let img = RgbF::from_fn(12, 12, |_, _| [0.6, 0.5, 0.3]);
        let out = enhance_contrast(&img, &ClaheParams::default());
        for ch in out.channels() {
            let first = ch.get(0, 0);
            for &v in ch.data() {
                assert!((v - first).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ClaheParams {
            tiles_x: 0,
            ..ClaheParams::default()
        }
        .validate()
        .is_err());
        assert!(ClaheParams {
            clip_limit: 0.5,
            ..ClaheParams::default()
        }
        .validate()
        .is_err());
        assert!(ClaheParams {
            bins: 1,
            ..ClaheParams::default()
        }
        .validate()
        .is_err());
    }
}
