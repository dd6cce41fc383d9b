//! Synthetic scenes with an unambiguous upright orientation.
//!
//! Every scene is a pure function of its [`SceneSpec`]: a luminance gradient
//! that darkens toward the bottom, a horizon where the darker ground begins,
//! and style-dependent decoration. Rotated samples are produced with
//! [`crate::geometry::rotate_and_crop`].

mod dataset;
mod manifest;

pub use dataset::{build_splits, load_eval, Dataset, DatasetConfig, EvalItem, TrainScene};
pub use manifest::{Manifest, ManifestEntry, Split};

use crate::circmath::Angle;
use crate::error::{Error, Result};
use crate::geometry::rotate_and_crop;
use crate::raster::RasterImage;
use crate::seeding;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const MIN_SCENE_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneStyle {
    /// Column-constant vertical gradient with a horizon step.
    GradientHorizon,
    /// Gradient and horizon with seeded low-frequency texture.
    TexturedHorizon,
    /// Gradient background with an upward-pointing arrow.
    ArrowMarker,
}

impl SceneStyle {
    pub const ALL: [SceneStyle; 3] = [
        SceneStyle::GradientHorizon,
        SceneStyle::TexturedHorizon,
        SceneStyle::ArrowMarker,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SceneStyle::GradientHorizon => "gradient_horizon",
            SceneStyle::TexturedHorizon => "textured_horizon",
            SceneStyle::ArrowMarker => "arrow_marker",
        }
    }
}

impl fmt::Display for SceneStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SceneStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SceneStyle::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown scene style `{s}` (valid: gradient_horizon, textured_horizon, arrow_marker)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub seed: u64,
    pub size: usize,
    pub style: SceneStyle,
    pub noise_std: f64,
}

/// A rotated, cropped view of a scene with its ground-truth angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: RasterImage,
    pub true_angle: Angle,
    pub scene_seed: u64,
}

/// Seeded per-scene layout parameters.
struct Layout {
    top: f64,
    slope: f64,
    horizon: f64,
    step: f64,
}

impl Layout {
    fn draw(rng: &mut impl Rng) -> Self {
        Layout {
            top: rng.random_range(0.80..0.92),
            slope: rng.random_range(0.30..0.45),
            horizon: rng.random_range(0.40..0.65),
            step: rng.random_range(0.08..0.18),
        }
    }

    /// Luminance at normalized row `t ∈ [0, 1]`; strictly decreasing in `t`.
    fn luminance(&self, t: f64) -> f64 {
        let ground = if t >= self.horizon { self.step } else { 0.0 };
        self.top - self.slope * t - ground
    }
}

/// Renders the upright base image for `scene`.
pub fn render_base(scene: &SceneSpec) -> Result<RasterImage> {
    if scene.size < MIN_SCENE_SIZE {
        return Err(Error::InvalidParameter(format!(
            "scene size must be at least {MIN_SCENE_SIZE}, got {}",
            scene.size
        )));
    }
    if !(scene.noise_std.is_finite() && scene.noise_std >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise_std must be finite and >= 0, got {}",
            scene.noise_std
        )));
    }
    let n = scene.size;
    let mut layout_rng = seeding::rng(scene.seed, seeding::TAG_LAYOUT, 0);
    let layout = Layout::draw(&mut layout_rng);
    let row_t = |y: usize| y as f64 / (n - 1) as f64;

    let mut pixels: Vec<f64> = Vec::with_capacity(n * n);
    for y in 0..n {
        let v = layout.luminance(row_t(y));
        pixels.extend(std::iter::repeat_n(v, n));
    }

    match scene.style {
        SceneStyle::GradientHorizon => {}
        SceneStyle::TexturedHorizon => add_texture(&mut pixels, n, &layout, &mut layout_rng),
        SceneStyle::ArrowMarker => draw_arrow(&mut pixels, n, &mut layout_rng),
    }

    if scene.noise_std > 0.0 {
        let mut noise_rng = seeding::rng(scene.seed, seeding::TAG_NOISE, 0);
        let normal = Normal::new(0.0, scene.noise_std)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for p in &mut pixels {
            *p += normal.sample(&mut noise_rng);
        }
    }

    let data = pixels.into_iter().map(|v| v.clamp(0.0, 1.0) as f32).collect();
    RasterImage::new(n, n, 1, data)
}

/// Low-frequency value noise: a coarse random lattice, bilinearly upsampled.
/// Stronger below the horizon than above it.
fn add_texture(pixels: &mut [f64], n: usize, layout: &Layout, rng: &mut impl Rng) {
    const GRID: usize = 8;
    let lattice: Vec<f64> = (0..(GRID + 1) * (GRID + 1))
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let scale = GRID as f64 / n as f64;
    for y in 0..n {
        let gy = (y as f64 + 0.5) * scale;
        let (y0, fy) = (gy.floor() as usize, gy.fract());
        let amplitude = if (y as f64 / (n - 1) as f64) >= layout.horizon {
            0.06
        } else {
            0.025
        };
        for x in 0..n {
            let gx = (x as f64 + 0.5) * scale;
            let (x0, fx) = (gx.floor() as usize, gx.fract());
            let at = |i: usize, j: usize| lattice[j.min(GRID) * (GRID + 1) + i.min(GRID)];
            let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1, y0) * fx;
            let bottom = at(x0, y0 + 1) * (1.0 - fx) + at(x0 + 1, y0 + 1) * fx;
            pixels[y * n + x] += amplitude * (top * (1.0 - fy) + bottom * fy);
        }
    }
}

/// Bright upward arrow (shaft plus triangular head) near the image center.
fn draw_arrow(pixels: &mut [f64], n: usize, rng: &mut impl Rng) {
    let nf = n as f64;
    let cx = nf * rng.random_range(0.45..0.55);
    let head_top = nf * rng.random_range(0.22..0.30);
    let head_base = nf * rng.random_range(0.42..0.48);
    let head_half = nf * rng.random_range(0.14..0.18);
    let shaft_half = nf * rng.random_range(0.04..0.06);
    let shaft_bottom = nf * rng.random_range(0.72..0.80);
    let shade = rng.random_range(0.93..0.98);
    for y in 0..n {
        let py = y as f64 + 0.5;
        for x in 0..n {
            let px = x as f64 + 0.5;
            let in_head = py >= head_top
                && py <= head_base
                && (px - cx).abs() <= head_half * (py - head_top) / (head_base - head_top);
            let in_shaft = py > head_base && py <= shaft_bottom && (px - cx).abs() <= shaft_half;
            if in_head || in_shaft {
                pixels[y * n + x] = shade;
            }
        }
    }
}

/// Renders `scene`, rotates it by `theta` and crops it to `out_size`.
pub fn make_sample(scene: &SceneSpec, theta: Angle, out_size: usize) -> Result<Sample> {
    let base = render_base(scene)?;
    Ok(Sample {
        image: rotate_and_crop(&base, theta, out_size)?,
        true_angle: theta,
        scene_seed: scene.seed,
    })
}
