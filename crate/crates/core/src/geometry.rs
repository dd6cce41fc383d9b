//! Rotation, border-free cropping and resizing.
//!
//! Rotations are counter-clockwise as displayed (image `y` axis pointing
//! down). Coordinates are continuous with pixel `(i, j)` covering
//! `[i, i+1) × [j, j+1)` and sampled at its center `(i + 0.5, j + 0.5)`.

use crate::circmath::{sin_cos_deg, Angle};
use crate::error::{Error, Result};
use crate::raster::RasterImage;

/// Axis-aligned crop in the rotated-canvas frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropRect {
    pub center_x: f64,
    pub center_y: f64,
    pub crop_width: f64,
    pub crop_height: f64,
}

impl CropRect {
    pub fn area(&self) -> f64 {
        self.crop_width * self.crop_height
    }
}

const FOOTPRINT_EPS: f64 = 1e-7;

fn is_quarter_turn(theta: Angle) -> bool {
    theta.degrees() % 90.0 == 0.0
}

/// Size of the canvas that holds a `width × height` rectangle rotated by
/// `theta`.
pub fn rotated_canvas_size(width: usize, height: usize, theta: Angle) -> (usize, usize) {
    let (s, c) = theta.sin_cos();
    let (s, c) = (s.abs(), c.abs());
    let (w, h) = (width as f64, height as f64);
    let cw = (w * c + h * s - 1e-9).ceil().max(1.0) as usize;
    let ch = (w * s + h * c - 1e-9).ceil().max(1.0) as usize;
    (cw, ch)
}

/// Rotates `img` by `theta` onto a canvas just large enough to hold it.
///
/// Canvas pixels whose centers fall inside the rotated source rectangle are
/// bilinearly resampled (edge-clamped); all others are filled with 0.
pub fn rotate_image(img: &RasterImage, theta: Angle) -> Result<RasterImage> {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    if w == 0 || h == 0 {
        return Err(Error::Degenerate("cannot rotate an empty image"));
    }
    if theta.degrees() == 0.0 {
        return Ok(img.clone());
    }
    let (out_w, out_h) = rotated_canvas_size(w, h, theta);
    let (s, c) = theta.sin_cos();
    let (src_cx, src_cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let (dst_cx, dst_cy) = (out_w as f64 / 2.0, out_h as f64 / 2.0);
    let mut out = vec![0.0f32; out_w * out_h * ch];
    let mut px = [0.0f32; 3];

    for y in 0..out_h {
        let dy = y as f64 + 0.5 - dst_cy;
        for x in 0..out_w {
            let dx = x as f64 + 0.5 - dst_cx;
            let sx = src_cx + dx * c - dy * s;
            let sy = src_cy + dx * s + dy * c;
            if sx < -FOOTPRINT_EPS
                || sy < -FOOTPRINT_EPS
                || sx > w as f64 + FOOTPRINT_EPS
                || sy > h as f64 + FOOTPRINT_EPS
            {
                continue;
            }
            sample_bilinear(img, sx, sy, &mut px[..ch]);
            let base = (y * out_w + x) * ch;
            out[base..base + ch].copy_from_slice(&px[..ch]);
        }
    }
    Ok(RasterImage::from_raw_unchecked(out_w, out_h, ch, out))
}

/// Bilinear sample at continuous position `(x, y)`, clamping to the edge
/// pixels.
fn sample_bilinear(img: &RasterImage, x: f64, y: f64, out: &mut [f32]) {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let u = (x - 0.5).clamp(0.0, (w - 1) as f64);
    let v = (y - 0.5).clamp(0.0, (h - 1) as f64);
    let x0 = u.floor() as usize;
    let y0 = v.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = u - x0 as f64;
    let fy = v - y0 as f64;
    let data = img.data();
    for (k, o) in out.iter_mut().enumerate() {
        let p00 = data[(y0 * w + x0) * ch + k] as f64;
        let p10 = data[(y0 * w + x1) * ch + k] as f64;
        let p01 = data[(y1 * w + x0) * ch + k] as f64;
        let p11 = data[(y1 * w + x1) * ch + k] as f64;
        let top = p00 + (p10 - p00) * fx;
        let bottom = p01 + (p11 - p01) * fx;
        *o = (top + (bottom - top) * fy).clamp(0.0, 1.0) as f32;
    }
}

/// Maximum-area axis-aligned rectangle inside a `width × height` rectangle
/// rotated by `theta`, centered on the rotated canvas.
pub fn largest_inscribed_rect(width: f64, height: f64, theta: Angle) -> Result<CropRect> {
    if !(width.is_finite() && height.is_finite()) || width <= 0.0 || height <= 0.0 {
        return Err(Error::Degenerate("rectangle sides must be positive"));
    }
    // Fold θ into [0°, 90°]; the inscribed rectangle only depends on |sin|, |cos|.
    let folded = theta.degrees() % 180.0;
    let alpha = if folded > 90.0 { 180.0 - folded } else { folded };
    let (s, c) = sin_cos_deg(alpha);

    let width_is_longer = width >= height;
    let (long, short) = if width_is_longer {
        (width, height)
    } else {
        (height, width)
    };

    let (crop_w, crop_h) = if short <= 2.0 * s * c * long || (s - c).abs() < 1e-10 {
        // Two opposite corners of the crop touch the longer sides.
        let x = 0.5 * short;
        if width_is_longer {
            (x / s, x / c)
        } else {
            (x / c, x / s)
        }
    } else {
        // All four corners touch the rotated rectangle.
        let cos_2a = c * c - s * s;
        (
            (width * c - height * s) / cos_2a,
            (height * c - width * s) / cos_2a,
        )
    };

    let (bw, bh) = (width * c + height * s, width * s + height * c);
    // Canvas center of the pixel canvas produced by `rotate_image`.
    let (cw, chh) = if width.fract() == 0.0 && height.fract() == 0.0 {
        let (a, b) = rotated_canvas_size(width as usize, height as usize, theta);
        (a as f64, b as f64)
    } else {
        (bw, bh)
    };
    Ok(CropRect {
        center_x: cw / 2.0,
        center_y: chh / 2.0,
        crop_width: crop_w,
        crop_height: crop_h,
    })
}

/// Bilinear resize of the `src_w × src_h` window centered at
/// `(center_x, center_y)` of `img` to `out_w × out_h` pixels.
fn resample_window(
    img: &RasterImage,
    center_x: f64,
    center_y: f64,
    src_w: f64,
    src_h: f64,
    out_w: usize,
    out_h: usize,
) -> RasterImage {
    let ch = img.channels();
    let (left, top) = (center_x - src_w / 2.0, center_y - src_h / 2.0);
    let (step_x, step_y) = (src_w / out_w as f64, src_h / out_h as f64);
    let mut data = vec![0.0f32; out_w * out_h * ch];
    for y in 0..out_h {
        let sy = top + (y as f64 + 0.5) * step_y;
        for x in 0..out_w {
            let sx = left + (x as f64 + 0.5) * step_x;
            let base = (y * out_w + x) * ch;
            sample_bilinear(img, sx, sy, &mut data[base..base + ch]);
        }
    }
    RasterImage::from_raw_unchecked(out_w, out_h, ch, data)
}

/// Bilinear resize of the whole image.
pub fn resize(img: &RasterImage, out_w: usize, out_h: usize) -> Result<RasterImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::Degenerate("resize target has zero size"));
    }
    Ok(resample_window(
        img,
        img.width() as f64 / 2.0,
        img.height() as f64 / 2.0,
        img.width() as f64,
        img.height() as f64,
        out_w,
        out_h,
    ))
}

/// Rotates by `theta`, crops the centered square of the largest inscribed
/// rectangle and resizes it to `out_size × out_size`.
///
/// For angles that are not quarter turns the crop is shrunk by one pixel on
/// every side so that the bilinear resize never reads a canvas pixel outside
/// the rotated content.
pub fn rotate_and_crop(img: &RasterImage, theta: Angle, out_size: usize) -> Result<RasterImage> {
    if out_size == 0 {
        return Err(Error::Degenerate("output size must be positive"));
    }
    let rotated = rotate_image(img, theta)?;
    let rect = largest_inscribed_rect(img.width() as f64, img.height() as f64, theta)?;
    let margin = if is_quarter_turn(theta) { 0.0 } else { 2.0 };
    let side = rect.crop_width.min(rect.crop_height) - margin;
    if side.is_nan() || side < 2.0 {
        return Err(Error::Degenerate("crop smaller than 2x2 pixels"));
    }
    Ok(resample_window(
        &rotated,
        rect.center_x,
        rect.center_y,
        side,
        side,
        out_size,
        out_size,
    ))
}
