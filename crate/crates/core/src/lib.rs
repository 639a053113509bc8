//! Restoration of sand-dust degraded photographs.
//!
//! Dust scatters short wavelengths and buries scenes under a yellow-brown
//! veil; the pipeline here peels that back in three stages:
//!
//! 1. [`colorcast`] recenters the chroma planes in YUV space, removing the
//!    global color cast without touching luma.
//! 2. [`dehaze`] estimates a transmission map from the dark channel,
//!    refines it with a guided filter, and inverts the scattering model.
//! 3. [`contrast`] applies contrast-limited adaptive histogram
//!    equalization to the luma plane only.
//!
//! [`pipeline`] wires the stages together and times them; [`iqa`] scores a
//! (degraded, restored) pair with three no-reference metrics: visible-edge
//! gain, geometric-mean edge-contrast ratio, and the fraction of newly
//! saturated pixels. [`ppm`] reads and writes binary PPM, the interchange
//! format of the batch tool.
//!
//! All processing runs on `f32` planes normalized to `[0, 1]`; 8-bit
//! rasters exist only at the boundaries. Windowed operations shrink their
//! window at the borders rather than padding, and every operation is
//! deterministic: the same input and parameters produce bit-identical
//! output.

mod error;

pub mod colorcast;
pub mod contrast;
pub mod dehaze;
pub mod filter;
pub mod image;
pub mod iqa;
pub mod pipeline;
pub mod ppm;

pub use error::CoreError;
pub use image::{PlaneF, Raster8, RgbF};
