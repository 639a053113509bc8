//! Stage 1: color-cast removal in YUV space.
//!
//! Dust shifts both chroma planes away from zero while leaving luminance
//! structure intact, so the cast is removed by recentering U and V on
//! their own means. Y passes through bit-exactly.
//!
//! Chroma is kept signed (no +0.5 offset). The inverse gains below are
//! the usual broadcast constants, not the exact algebraic inverse of the
//! forward rows; a full round trip lands within 0.5% per channel.

use crate::image::{PlaneF, RgbF};
use crate::CoreError;

const Y_FROM_RGB: [f32; 3] = [0.299, 0.587, 0.114];
const U_FROM_RGB: [f32; 3] = [-0.168_736, -0.331_264, 0.5];
const V_FROM_RGB: [f32; 3] = [0.5, -0.418_688, -0.081_312];

const R_FROM_V: f32 = 1.402;
const G_FROM_U: f32 = -0.3456;
const G_FROM_V: f32 = -0.7145;
const B_FROM_U: f32 = 1.771;

/// Luma plane plus signed chroma planes, all equally sized.
#[derive(Debug, Clone, PartialEq)]
pub struct YuvPlanes {
    y: PlaneF,
    u: PlaneF,
    v: PlaneF,
}

impl YuvPlanes {
    pub fn new(y: PlaneF, u: PlaneF, v: PlaneF) -> Result<Self, CoreError> {
        for p in [&u, &v] {
            if (p.width(), p.height()) != (y.width(), y.height()) {
                return Err(CoreError::PlaneMismatch(
                    y.width(),
                    y.height(),
                    p.width(),
                    p.height(),
                ));
            }
        }
        Ok(Self { y, u, v })
    }

    pub fn y(&self) -> &PlaneF {
        &self.y
    }

    pub fn u(&self) -> &PlaneF {
        &self.u
    }

    pub fn v(&self) -> &PlaneF {
        &self.v
    }

    pub fn into_parts(self) -> (PlaneF, PlaneF, PlaneF) {
        (self.y, self.u, self.v)
    }
}

/// Weighted luma of an RGB image, the same weights the Y plane uses.
pub fn luma(img: &RgbF) -> PlaneF {
    img.r()
        .zip_map(img.g(), |r, g| Y_FROM_RGB[0] * r + Y_FROM_RGB[1] * g)
        .zip_map(img.b(), |rg, b| rg + Y_FROM_RGB[2] * b)
}

fn weighted(img: &RgbF, w: [f32; 3]) -> PlaneF {
    img.r()
        .zip_map(img.g(), move |r, g| w[0] * r + w[1] * g)
        .zip_map(img.b(), move |rg, b| rg + w[2] * b)
}

pub fn rgb_to_yuv(img: &RgbF) -> YuvPlanes {
    YuvPlanes {
        y: weighted(img, Y_FROM_RGB),
        u: weighted(img, U_FROM_RGB),
        v: weighted(img, V_FROM_RGB),
    }
}

/// Subtracts the plane mean from each chroma plane; Y is copied verbatim.
/// Idempotent, and the output chroma means are zero to within accumulation
/// noise.
pub fn correct_chroma(yuv: &YuvPlanes) -> YuvPlanes {
    let mu = yuv.u.mean() as f32;
    let mv = yuv.v.mean() as f32;
    YuvPlanes {
        y: yuv.y.clone(),
        u: yuv.u.map(|s| s - mu),
        v: yuv.v.map(|s| s - mv),
    }
}

/// Converts back to RGB and clamps each channel to `[0, 1]`.
pub fn yuv_to_rgb(yuv: &YuvPlanes) -> RgbF {
    let r = yuv
        .y
        .zip_map(&yuv.v, |y, v| (y + R_FROM_V * v).clamp(0.0, 1.0));
    let g = yuv
        .y
        .zip_map(&yuv.u, |y, u| y + G_FROM_U * u)
        .zip_map(&yuv.v, |yu, v| (yu + G_FROM_V * v).clamp(0.0, 1.0));
    let b = yuv
        .y
        .zip_map(&yuv.u, |y, u| (y + B_FROM_U * u).clamp(0.0, 1.0));
    RgbF::new(r, g, b).expect("channels derive from equally sized planes")
}

/// The full stage: RGB -> YUV, recenter chroma, YUV -> RGB.
pub fn correct_cast(img: &RgbF) -> RgbF {
    yuv_to_rgb(&correct_chroma(&rgb_to_yuv(img)))
}
