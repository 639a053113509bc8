//! Image buffers shared by every stage.
//!
//! [`Raster8`] is the interleaved 8-bit form images enter and leave in;
//! processing happens on [`PlaneF`] / [`RgbF`], row-major `f32` planes.
//! Plane-wide reductions accumulate in `f64` so means stay stable on
//! large images.

use crate::CoreError;

/// Interleaved 8-bit RGB raster, row-major, three samples per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster8 {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Raster8 {
    /// Wraps an interleaved RGB buffer. `data.len()` must equal
    /// `width * height * 3` and both dimensions must be at least 1.
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, CoreError> {
        let expected = checked_samples(width, height, 3)?;
        if data.len() != expected {
            return Err(CoreError::BufferSize {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Self {
        assert!(width >= 1 && height >= 1, "raster needs at least one pixel");
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Splits the raster into normalized float planes, sample / 255.
    pub fn to_planes(&self) -> RgbF {
        let n = self.width * self.height;
        let mut r = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for px in self.data.chunks_exact(3) {
            r.push(px[0] as f32 / 255.0);
            g.push(px[1] as f32 / 255.0);
            b.push(px[2] as f32 / 255.0);
        }
        RgbF {
            r: PlaneF::from_raw(self.width, self.height, r),
            g: PlaneF::from_raw(self.width, self.height, g),
            b: PlaneF::from_raw(self.width, self.height, b),
        }
    }
}

/// Single-channel row-major `f32` plane. Samples are finite after every
/// operation in this crate; most stages keep them inside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneF {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl PlaneF {
    /// Wraps a sample buffer, rejecting size mismatches and non-finite
    /// samples.
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self, CoreError> {
        let expected = checked_samples(width, height, 1)?;
        if data.len() != expected {
            return Err(CoreError::BufferSize {
                expected,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::NonFiniteSample { index });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Constant plane.
    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        assert!(width >= 1 && height >= 1, "plane needs at least one sample");
        assert!(value.is_finite());
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds a plane from a per-pixel closure. The closure must return
    /// finite values.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        assert!(width >= 1 && height >= 1, "plane needs at least one sample");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                debug_assert!(v.is_finite(), "non-finite sample at ({x}, {y})");
                data.push(v);
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> PlaneF {
        PlaneF::from_raw(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_map(&self, other: &PlaneF, f: impl Fn(f32, f32) -> f32) -> PlaneF {
        assert_eq!(
            (self.width, self.height),
            (other.width, other.height),
            "zip_map requires equally sized planes"
        );
        PlaneF::from_raw(
            self.width,
            self.height,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Arithmetic mean over all samples, accumulated in `f64` in row order.
    pub fn mean(&self) -> f64 {
        let sum: f64 = self.data.iter().map(|&v| v as f64).sum();
        sum / self.data.len() as f64
    }

    pub fn min_max(&self) -> (f32, f32) {
        let mut lo = f32::INFINITY;
        let mut hi = f32::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// Three equally sized float planes, one per RGB channel.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbF {
    r: PlaneF,
    g: PlaneF,
    b: PlaneF,
}

impl RgbF {
    pub fn new(r: PlaneF, g: PlaneF, b: PlaneF) -> Result<Self, CoreError> {
        for p in [&g, &b] {
            if (p.width, p.height) != (r.width, r.height) {
                return Err(CoreError::PlaneMismatch(
                    r.width, r.height, p.width, p.height,
                ));
            }
        }
        Ok(Self { r, g, b })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f32; 3],
    ) -> Self {
        let mut r = Vec::with_capacity(width * height);
        let mut g = Vec::with_capacity(width * height);
        let mut b = Vec::with_capacity(width * height);
        PlaneF::from_fn(width, height, |x, y| {
            let px = f(x, y);
            r.push(px[0]);
            g.push(px[1]);
            b.push(px[2]);
            0.0
        });
        Self {
            r: PlaneF::from_raw(width, height, r),
            g: PlaneF::from_raw(width, height, g),
            b: PlaneF::from_raw(width, height, b),
        }
    }

    pub fn width(&self) -> usize {
        self.r.width
    }

    pub fn height(&self) -> usize {
        self.r.height
    }

    pub fn r(&self) -> &PlaneF {
        &self.r
    }

    pub fn g(&self) -> &PlaneF {
        &self.g
    }

    pub fn b(&self) -> &PlaneF {
        &self.b
    }

    pub fn channels(&self) -> [&PlaneF; 3] {
        [&self.r, &self.g, &self.b]
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        [self.r.get(x, y), self.g.get(x, y), self.b.get(x, y)]
    }

    /// Quantizes back to 8 bits: clamp to `[0, 1]`, scale by 255, round
    /// half away from zero.
    pub fn to_raster(&self) -> Raster8 {
        let mut data = Vec::with_capacity(self.r.data.len() * 3);
        for i in 0..self.r.data.len() {
            for plane in [&self.r, &self.g, &self.b] {
                data.push((plane.data[i].clamp(0.0, 1.0) * 255.0).round() as u8);
            }
        }
        Raster8 {
            width: self.r.width,
            height: self.r.height,
            data,
        }
    }
}

fn checked_samples(width: usize, height: usize, channels: usize) -> Result<usize, CoreError> {
    if width == 0 || height == 0 {
        return Err(CoreError::EmptyImage { width, height });
    }
    width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .filter(|&n| n <= isize::MAX as usize)
        .ok_or(CoreError::DimensionOverflow { width, height })
}
