//! Stage 2: haze removal with the dark channel prior.
//!
//! Outdoor haze follows `I = J * t + A * (1 - t)`: the scene radiance `J`
//! decays with transmission `t` while airlight `A` fills in. Haze-free
//! patches contain at least one near-zero channel sample, so the windowed
//! minimum of the channel minima (the dark channel) estimates how much
//! airlight a patch carries. Transmission derived from it is refined with
//! an edge-preserving guided filter before the model is inverted.
//!
//! The windowed minimum runs as two monotonic-deque passes, so the patch
//! size does not affect cost.

use std::collections::VecDeque;

use crate::colorcast::luma;
use crate::filter::{window_bounds, Integral};
use crate::image::{PlaneF, RgbF};
use crate::CoreError;

/// Smallest admissible airlight component; keeps `I / A` bounded.
pub const LIGHT_FLOOR: f32 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct DehazeParams {
    /// Dark-channel window edge length in pixels, odd.
    pub patch: usize,
    /// Haze retention factor; 1 removes everything the model sees.
    pub omega: f32,
    /// Lower clamp on transmission, keeps recovery bounded.
    pub t_floor: f32,
    /// Guided-filter window radius.
    pub gf_radius: usize,
    /// Guided-filter regularizer.
    pub gf_eps: f32,
}

impl Default for DehazeParams {
    fn default() -> Self {
        Self {
            patch: 15,
            omega: 0.95,
            t_floor: 0.1,
            gf_radius: 60,
            gf_eps: 1e-3,
        }
    }
}

impl DehazeParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.patch == 0 || self.patch.is_multiple_of(2) {
            return Err(CoreError::InvalidParam {
                name: "patch",
                reason: format!("must be odd and positive, got {}", self.patch),
            });
        }
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(CoreError::InvalidParam {
                name: "omega",
                reason: format!("must be in [0, 1], got {}", self.omega),
            });
        }
        if !(self.t_floor > 0.0 && self.t_floor <= 1.0) {
            return Err(CoreError::InvalidParam {
                name: "t_floor",
                reason: format!("must be in (0, 1], got {}", self.t_floor),
            });
        }
        if self.gf_eps.is_nan() || self.gf_eps <= 0.0 {
            return Err(CoreError::InvalidParam {
                name: "gf_eps",
                reason: format!("must be positive, got {}", self.gf_eps),
            });
        }
        Ok(())
    }
}

/// Global airlight estimate, each component in `[LIGHT_FLOOR, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphericLight {
    r: f32,
    g: f32,
    b: f32,
}

impl AtmosphericLight {
    pub fn new(r: f32, g: f32, b: f32) -> Result<Self, CoreError> {
        for (i, c) in [r, g, b].into_iter().enumerate() {
            if !(c > 0.0 && c <= 1.0) || !c.is_finite() {
                return Err(CoreError::OutOfRange {
                    index: i,
                    value: c,
                    min: 0.0,
                    max: 1.0,
                });
            }
        }
        Ok(Self { r, g, b })
    }

    pub fn r(&self) -> f32 {
        self.r
    }

    pub fn g(&self) -> f32 {
        self.g
    }

    pub fn b(&self) -> f32 {
        self.b
    }

    pub fn as_array(&self) -> [f32; 3] {
        [self.r, self.g, self.b]
    }
}

/// Per-pixel transmission, every sample in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMap(PlaneF);

impl TransmissionMap {
    pub fn new(plane: PlaneF) -> Result<Self, CoreError> {
        if let Some(index) = plane.data().iter().position(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(CoreError::OutOfRange {
                index,
                value: plane.data()[index],
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(Self(plane))
    }

    pub fn plane(&self) -> &PlaneF {
        &self.0
    }

    pub fn into_plane(self) -> PlaneF {
        self.0
    }
}

/// Sliding-window minimum over one line, window `2 * radius + 1`, shrunk
/// at the ends. `line` and `out` share a length.
fn min_filter_line(line: &[f32], radius: usize, out: &mut [f32], deque: &mut VecDeque<usize>) {
    let n = line.len();
    deque.clear();
    for i in 0..n + radius {
        if i < n {
            while deque.back().is_some_and(|&b| line[b] >= line[i]) {
                deque.pop_back();
            }
            deque.push_back(i);
        }
        if i >= radius {
            let j = i - radius;
            while deque.front().is_some_and(|&f| f + radius < j) {
                deque.pop_front();
            }
            out[j] = line[deque[0]];
        }
    }
}

/// Windowed minimum of the per-pixel channel minimum. `patch` is the
/// window edge length and must be odd; windows shrink at the borders.
pub fn dark_channel(img: &RgbF, patch: usize) -> PlaneF {
    assert!(patch % 2 == 1 && patch > 0, "patch must be odd");
    let radius = patch / 2;
    let (w, h) = (img.width(), img.height());
    let [r, g, b] = img.channels();
    let mut min_c: Vec<f32> = Vec::with_capacity(w * h);
    for i in 0..w * h {
        min_c.push(r.data()[i].min(g.data()[i]).min(b.data()[i]));
    }

    let mut deque = VecDeque::new();
    // horizontal pass row by row, then vertical over scratch columns
    let mut rows = vec![0.0f32; w * h];
    for y in 0..h {
        min_filter_line(
            &min_c[y * w..(y + 1) * w],
            radius,
            &mut rows[y * w..(y + 1) * w],
            &mut deque,
        );
    }
    let mut col_in = vec![0.0f32; h];
    let mut col_out = vec![0.0f32; h];
    let mut out = vec![0.0f32; w * h];
    for x in 0..w {
        for y in 0..h {
            col_in[y] = rows[y * w + x];
        }
        min_filter_line(&col_in, radius, &mut col_out, &mut deque);
        for y in 0..h {
            out[y * w + x] = col_out[y];
        }
    }
    PlaneF::new(w, h, out).expect("minima of finite samples are finite")
}

/// Picks the airlight color from the brightest 0.1% of dark-channel
/// pixels (at least one): among them, the pixel with the largest R+G+B
/// wins, ties resolving to the smallest row-major index. Components are
/// floored at [`LIGHT_FLOOR`].
pub fn estimate_atmospheric_light(img: &RgbF, dark: &PlaneF) -> AtmosphericLight {
    assert_eq!(
        (img.width(), img.height()),
        (dark.width(), dark.height()),
        "dark channel must match the image"
    );
    let n = dark.len();
    let take = (n / 1000).max(1);
    let d = dark.data();
    let mut order: Vec<u32> = (0..n as u32).collect();
    let brighter_first = |a: &u32, b: &u32| {
        d[*b as usize]
            .partial_cmp(&d[*a as usize])
            .expect("dark channel is finite")
            .then_with(|| a.cmp(b))
    };
    if take < n {
        order.select_nth_unstable_by(take - 1, brighter_first);
    }

    let [r, g, b] = img.channels();
    let mut best_idx = usize::MAX;
    let mut best_sum = f64::NEG_INFINITY;
    for &i in &order[..take] {
        let i = i as usize;
        let sum = r.data()[i] as f64 + g.data()[i] as f64 + b.data()[i] as f64;
        if sum > best_sum || (sum == best_sum && i < best_idx) {
            best_sum = sum;
            best_idx = i;
        }
    }
    AtmosphericLight {
        r: r.data()[best_idx].max(LIGHT_FLOOR),
        g: g.data()[best_idx].max(LIGHT_FLOOR),
        b: b.data()[best_idx].max(LIGHT_FLOOR),
    }
}

/// Raw transmission: `1 - omega * dark_channel(I / A)`, clamped below at
/// `t_floor`.
pub fn estimate_transmission(
    img: &RgbF,
    light: &AtmosphericLight,
    params: &DehazeParams,
) -> TransmissionMap {
    let normalized = RgbF::new(
        img.r().map(|v| v / light.r),
        img.g().map(|v| v / light.g),
        img.b().map(|v| v / light.b),
    )
    .expect("per-channel maps keep dimensions");
    let dark = dark_channel(&normalized, params.patch);
    TransmissionMap(dark.map(|d| (1.0 - params.omega * d).max(params.t_floor)))
}

/// Edge-preserving smoothing of `src` steered by `guide`.
///
/// Each window gets a local linear model `a * guide + b` fit by ridge
/// regression with regularizer `eps`; the per-pixel coefficients are the
/// box means of the per-window fits. All window means shrink at the
/// borders exactly like [`box_mean`]. Intermediates stay in `f64`.
pub fn guided_filter(guide: &PlaneF, src: &PlaneF, radius: usize, eps: f32) -> PlaneF {
    assert_eq!(
        (guide.width(), guide.height()),
        (src.width(), src.height()),
        "guide and src must share dimensions"
    );
    let (w, h) = (guide.width(), guide.height());
    let n = w * h;
    let g: Vec<f64> = guide.data().iter().map(|&v| v as f64).collect();
    let s: Vec<f64> = src.data().iter().map(|&v| v as f64).collect();

    let ii_g = Integral::from_f64(&g, w, h);
    let ii_s = Integral::from_f64(&s, w, h);
    let gg: Vec<f64> = g.iter().map(|v| v * v).collect();
    let ii_gg = Integral::from_f64(&gg, w, h);
    drop(gg);
    let gs: Vec<f64> = g.iter().zip(&s).map(|(x, y)| x * y).collect();
    let ii_gs = Integral::from_f64(&gs, w, h);
    drop(gs);

    let eps = eps as f64;
    let mut a = vec![0.0f64; n];
    let mut b = vec![0.0f64; n];
    for y in 0..h {
        for x in 0..w {
            let (x0, y0, x1, y1) = window_bounds(x, y, radius, w, h);
            let count = ((x1 - x0 + 1) * (y1 - y0 + 1)) as f64;
            let mg = ii_g.window_sum(x0, y0, x1, y1) / count;
            let ms = ii_s.window_sum(x0, y0, x1, y1) / count;
            let var = ii_gg.window_sum(x0, y0, x1, y1) / count - mg * mg;
            let cov = ii_gs.window_sum(x0, y0, x1, y1) / count - mg * ms;
            let ak = cov / (var + eps);
            a[y * w + x] = ak;
            b[y * w + x] = ms - ak * mg;
        }
    }

    let ii_a = Integral::from_f64(&a, w, h);
    let ii_b = Integral::from_f64(&b, w, h);
    PlaneF::from_fn(w, h, |x, y| {
        let (x0, y0, x1, y1) = window_bounds(x, y, radius, w, h);
        let count = ((x1 - x0 + 1) * (y1 - y0 + 1)) as f64;
        let ma = ii_a.window_sum(x0, y0, x1, y1) / count;
        let mb = ii_b.window_sum(x0, y0, x1, y1) / count;
        (ma * g[y * w + x] + mb) as f32
    })
}

/// Inverts the scattering model: `J = (I - A) / max(t, t_floor) + A`,
/// clamped to `[0, 1]`. Pixels with `t = 1` carry no haze and pass
/// through untouched.
pub fn recover_radiance(
    img: &RgbF,
    t: &TransmissionMap,
    light: &AtmosphericLight,
    t_floor: f32,
) -> RgbF {
    let tp = t.plane();
    assert_eq!(
        (img.width(), img.height()),
        (tp.width(), tp.height()),
        "transmission must match the image"
    );
    let channel = |src: &PlaneF, a: f32| {
        src.zip_map(tp, move |i, t| {
            let t = t.max(t_floor);
            if t == 1.0 {
                i
            } else {
                ((i - a) / t + a).clamp(0.0, 1.0)
            }
        })
    };
    RgbF::new(
        channel(img.r(), light.r),
        channel(img.g(), light.g),
        channel(img.b(), light.b),
    )
    .expect("per-channel maps keep dimensions")
}

/// The full stage: dark channel, airlight, raw transmission, guided
/// refinement steered by the input's luma, then radiance recovery.
pub fn dehaze(img: &RgbF, params: &DehazeParams) -> RgbF {
    params.validate().expect("dehaze params must be valid");
    let dark = dark_channel(img, params.patch);
    let light = estimate_atmospheric_light(img, &dark);
    let raw = estimate_transmission(img, &light, params);
    let guide = luma(img);
    let refined = guided_filter(&guide, raw.plane(), params.gf_radius, params.gf_eps)
        .map(|t| t.clamp(params.t_floor, 1.0));
    let t = TransmissionMap::new(refined).expect("refined transmission is clamped into range");
    recover_radiance(img, &t, &light, params.t_floor)
}
