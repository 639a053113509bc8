//! Box filtering over shrinking windows.
//!
//! The mean filter is backed by a summed-area table so its cost does not
//! depend on the radius. Sums accumulate in `f64`; differencing large
//! `f32` prefix sums would lose the low bits.

use crate::image::PlaneF;

/// Summed-area table with a zero border row and column.
pub(crate) struct Integral {
    width: usize,
    sums: Vec<f64>,
}

impl Integral {
    pub(crate) fn from_f32(data: &[f32], width: usize, height: usize) -> Self {
        Self::build(width, height, |i| data[i] as f64)
    }

    pub(crate) fn from_f64(data: &[f64], width: usize, height: usize) -> Self {
        Self::build(width, height, |i| data[i])
    }

    fn build(width: usize, height: usize, sample: impl Fn(usize) -> f64) -> Self {
        let stride = width + 1;
        let mut sums = vec![0.0; stride * (height + 1)];
        for y in 0..height {
            let mut row = 0.0;
            for x in 0..width {
                row += sample(y * width + x);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self { width, sums }
    }

    /// Sum over the inclusive pixel rectangle `[x0, x1] x [y0, y1]`.
    #[inline]
    pub(crate) fn window_sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        let s = self.width + 1;
        self.sums[(y1 + 1) * s + x1 + 1] + self.sums[y0 * s + x0]
            - self.sums[y0 * s + x1 + 1]
            - self.sums[(y1 + 1) * s + x0]
    }
}

/// Inclusive window bounds around `(x, y)`, shrunk to the plane.
#[inline]
pub(crate) fn window_bounds(
    x: usize,
    y: usize,
    radius: usize,
    width: usize,
    height: usize,
) -> (usize, usize, usize, usize) {
    (
        x.saturating_sub(radius),
        y.saturating_sub(radius),
        (x + radius).min(width - 1),
        (y + radius).min(height - 1),
    )
}

/// Mean over the `(2 * radius + 1)`-sided square window centered on each
/// sample. Windows shrink at the borders; `radius = 0` is the identity.
pub fn box_mean(src: &PlaneF, radius: usize) -> PlaneF {
    let (w, h) = (src.width(), src.height());
    let integral = Integral::from_f32(src.data(), w, h);
    PlaneF::from_fn(w, h, |x, y| {
        let (x0, y0, x1, y1) = window_bounds(x, y, radius, w, h);
        let count = ((x1 - x0 + 1) * (y1 - y0 + 1)) as f64;
        (integral.window_sum(x0, y0, x1, y1) / count) as f32
    })
}
