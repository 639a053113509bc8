//! No-reference quality metrics for (degraded, restored) pairs.
//!
//! Three numbers summarize what a restoration did:
//!
//! * `e`: relative gain in visible edges,
//!   `(n_restored - n_original) / n_original`.
//! * `r_bar`: geometric mean, over the restored image's visible edges,
//!   of the gradient ratio restored / original.
//! * `sigma`: fraction of pixels newly saturated (all channels 0 or 255
//!   after 8-bit quantization) by the restoration.
//!
//! A pixel counts as a visible edge when its 3x3 Michelson-style contrast
//! `(max - min) / (max + min)` exceeds 0.05 and its Sobel magnitude
//! dominates the neighborhood: strictly above at least 6 of the 8
//! neighbors, or equal to the neighborhood maximum. Neighborhoods shrink
//! at the borders.

use thiserror::Error;

use crate::colorcast::luma;
use crate::image::{PlaneF, RgbF};

/// Michelson contrast a neighborhood must exceed to count as visible.
pub const VISIBILITY_THRESHOLD: f32 = 0.05;
/// Lower guard on the contrast denominator near black.
const CONTRAST_GUARD: f32 = 1e-6;
/// Lower guard on the original gradient in the ratio metric.
const GRADIENT_GUARD: f32 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("original image has no visible edges; edge gain is undefined")]
    NoOriginalEdges,
    #[error("restored image has no visible edges; gradient ratio is undefined")]
    NoRestoredEdges,
}

/// Visible-edge mask plus the Sobel magnitude it was derived from; both
/// share the source image's dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    pub visible: Vec<bool>,
    pub grad: PlaneF,
}

impl EdgeMap {
    pub fn width(&self) -> usize {
        self.grad.width()
    }

    pub fn height(&self) -> usize {
        self.grad.height()
    }

    pub fn count(&self) -> usize {
        self.visible.iter().filter(|&&v| v).count()
    }
}

/// Wall-clock stage costs in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageTimings {
    pub cast_ms: f64,
    pub dehaze_ms: f64,
    pub clahe_ms: f64,
    pub total_ms: f64,
}

/// Metrics for one (degraded, restored) pair. Undefined metrics are
/// `None` rather than an error: a blank frame should not abort a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    /// Visible-edge gain; `None` when the original has no visible edges.
    pub e: Option<f64>,
    /// Geometric-mean gradient ratio; `None` when the restored image has
    /// no visible edges.
    pub r_bar: Option<f64>,
    /// Newly saturated pixel fraction, in `[0, 1]`.
    pub sigma: f64,
    pub n_o: usize,
    pub n_r: usize,
    pub n_s: usize,
    /// Visible edges whose original gradient sat below the ratio guard.
    pub guard_hits: usize,
    pub timings: StageTimings,
}

/// 3x3 Sobel gradient magnitude; border samples replicate inward.
fn sobel_magnitude(l: &PlaneF) -> PlaneF {
    let (w, h) = (l.width(), l.height());
    PlaneF::from_fn(w, h, |x, y| {
        let xm = x.saturating_sub(1);
        let xp = (x + 1).min(w - 1);
        let ym = y.saturating_sub(1);
        let yp = (y + 1).min(h - 1);
        let tl = l.get(xm, ym);
        let tc = l.get(x, ym);
        let tr = l.get(xp, ym);
        let ml = l.get(xm, y);
        let mr = l.get(xp, y);
        let bl = l.get(xm, yp);
        let bc = l.get(x, yp);
        let br = l.get(xp, yp);
        let gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
        let gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
        (gx * gx + gy * gy).sqrt()
    })
}

/// Marks the visible edges of an image.
pub fn visible_edges(img: &RgbF) -> EdgeMap {
    let l = luma(img);
    let grad = sobel_magnitude(&l);
    let (w, h) = (l.width(), l.height());
    let mut visible = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let x0 = x.saturating_sub(1);
            let x1 = (x + 1).min(w - 1);
            let y0 = y.saturating_sub(1);
            let y1 = (y + 1).min(h - 1);

            let mut lmin = f32::INFINITY;
            let mut lmax = f32::NEG_INFINITY;
            for ny in y0..=y1 {
                for nx in x0..=x1 {
                    let v = l.get(nx, ny);
                    lmin = lmin.min(v);
                    lmax = lmax.max(v);
                }
            }
            let contrast = (lmax - lmin) / (lmax + lmin).max(CONTRAST_GUARD);
            if contrast <= VISIBILITY_THRESHOLD {
                continue;
            }

            let g = grad.get(x, y);
            if g <= 0.0 {
                continue;
            }
            let mut exceeded = 0;
            let mut neighbor_max = f32::NEG_INFINITY;
            for ny in y0..=y1 {
                for nx in x0..=x1 {
                    if (nx, ny) == (x, y) {
                        continue;
                    }
                    let ng = grad.get(nx, ny);
                    if g > ng {
                        exceeded += 1;
                    }
                    neighbor_max = neighbor_max.max(ng);
                }
            }
            if exceeded >= 6 || g >= neighbor_max {
                visible[y * w + x] = true;
            }
        }
    }
    EdgeMap { visible, grad }
}

/// Relative visible-edge gain between two edge maps.
pub fn rate_e(orig: &EdgeMap, restored: &EdgeMap) -> Result<f64, MetricError> {
    let n_o = orig.count();
    if n_o == 0 {
        return Err(MetricError::NoOriginalEdges);
    }
    let n_r = restored.count();
    Ok((n_r as f64 - n_o as f64) / n_o as f64)
}

fn ratio_detail(orig: &RgbF, restored_edges: &EdgeMap) -> Result<(f64, usize), MetricError> {
    let orig_grad = sobel_magnitude(&luma(orig));
    let mut log_sum = 0.0f64;
    let mut count = 0usize;
    let mut guard_hits = 0usize;
    for (i, &vis) in restored_edges.visible.iter().enumerate() {
        if !vis {
            continue;
        }
        let og = orig_grad.data()[i];
        if og < GRADIENT_GUARD {
            guard_hits += 1;
        }
        let r = restored_edges.grad.data()[i] / og.max(GRADIENT_GUARD);
        log_sum += (r as f64).ln();
        count += 1;
    }
    if count == 0 {
        return Err(MetricError::NoRestoredEdges);
    }
    Ok(((log_sum / count as f64).exp(), guard_hits))
}

/// Geometric-mean gradient ratio over the restored image's visible
/// edges. `restored_edges` must come from `restored`.
pub fn rate_rbar(
    orig: &RgbF,
    restored: &RgbF,
    restored_edges: &EdgeMap,
) -> Result<f64, MetricError> {
    assert_eq!(
        (orig.width(), orig.height()),
        (restored.width(), restored.height()),
        "metric inputs must share dimensions"
    );
    assert_eq!(
        (restored.width(), restored.height()),
        (restored_edges.width(), restored_edges.height()),
        "edge map must match the restored image"
    );
    ratio_detail(orig, restored_edges).map(|(r, _)| r)
}

fn saturation_detail(orig: &RgbF, restored: &RgbF) -> (usize, f64) {
    let is_saturated = |px: [u8; 3]| px == [0, 0, 0] || px == [255, 255, 255];
    let before = orig.to_raster();
    let after = restored.to_raster();
    let mut n_s = 0usize;
    for (a, b) in before
        .data()
        .chunks_exact(3)
        .zip(after.data().chunks_exact(3))
    {
        if is_saturated([b[0], b[1], b[2]]) && !is_saturated([a[0], a[1], a[2]]) {
            n_s += 1;
        }
    }
    (n_s, n_s as f64 / (orig.width() * orig.height()) as f64)
}

/// Fraction of pixels saturated by the restoration, in `[0, 1]`.
pub fn rate_sigma(orig: &RgbF, restored: &RgbF) -> f64 {
    assert_eq!(
        (orig.width(), orig.height()),
        (restored.width(), restored.height()),
        "metric inputs must share dimensions"
    );
    saturation_detail(orig, restored).1
}

/// Computes all three metrics plus their edge and saturation counts.
pub fn assess(orig: &RgbF, restored: &RgbF, timings: StageTimings) -> QualityReport {
    assert_eq!(
        (orig.width(), orig.height()),
        (restored.width(), restored.height()),
        "metric inputs must share dimensions"
    );
    let orig_edges = visible_edges(orig);
    let restored_edges = visible_edges(restored);
    let n_o = orig_edges.count();
    let n_r = restored_edges.count();
    let e = rate_e(&orig_edges, &restored_edges).ok();
    let (r_bar, guard_hits) = match ratio_detail(orig, &restored_edges) {
        Ok((r, hits)) => (Some(r), hits),
        Err(_) => (None, 0),
    };
    let (n_s, sigma) = saturation_detail(orig, restored);
    QualityReport {
        e,
        r_bar,
        sigma,
        n_o,
        n_r,
        n_s,
        guard_hits,
        timings,
    }
}
