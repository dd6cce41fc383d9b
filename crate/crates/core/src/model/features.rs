use crate::error::{Error, Result};
use crate::raster::RasterImage;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// Flattened grayscale pixels, mean-subtracted.
    RawPixels,
    /// Per-cell histograms of signed gradient orientation over 360°,
    /// magnitude-weighted and linearly soft-binned, L2-normalized per cell.
    GradOrientationHistogram { cells: usize, bins: usize },
}

/// Fixed, parameter-free image-to-vector map used in front of the head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureExtractor {
    pub kind: FeatureKind,
    /// Expected (square) input size in pixels.
    pub image_size: usize,
}

impl FeatureExtractor {
    pub fn raw_pixels(image_size: usize) -> Self {
        FeatureExtractor {
            kind: FeatureKind::RawPixels,
            image_size,
        }
    }

    pub fn orientation_histogram(image_size: usize, cells: usize, bins: usize) -> Result<Self> {
        if cells == 0 || bins < 2 || image_size < cells {
            return Err(Error::InvalidParameter(format!(
                "bad histogram layout: {cells} cells, {bins} bins on {image_size} px"
            )));
        }
        Ok(FeatureExtractor {
            kind: FeatureKind::GradOrientationHistogram { cells, bins },
            image_size,
        })
    }

    /// 4×4 cells with 36 orientation bins.
    pub fn default_for(image_size: usize) -> Self {
        Self::orientation_histogram(image_size, 4, 36).expect("valid default layout")
    }

    pub fn out_dim(&self) -> usize {
        match self.kind {
            FeatureKind::RawPixels => self.image_size * self.image_size,
            FeatureKind::GradOrientationHistogram { cells, bins } => cells * cells * bins,
        }
    }

    pub fn extract(&self, img: &RasterImage) -> Result<Vec<f64>> {
        if img.width() != self.image_size || img.height() != self.image_size {
            return Err(Error::shape(
                "feature extractor input side",
                self.image_size,
                if img.width() != self.image_size {
                    img.width()
                } else {
                    img.height()
                },
            ));
        }
        let gray = img.to_gray();
        Ok(match self.kind {
            FeatureKind::RawPixels => {
                let mean = gray.mean();
                gray.data().iter().map(|&v| v as f64 - mean).collect()
            }
            FeatureKind::GradOrientationHistogram { cells, bins } => {
                orientation_histogram(&gray, cells, bins)
            }
        })
    }
}

fn orientation_histogram(gray: &RasterImage, cells: usize, bins: usize) -> Vec<f64> {
    let (w, h) = (gray.width(), gray.height());
    let px = |x: usize, y: usize| gray.get(x, y, 0) as f64;
    let bin_width = 360.0 / bins as f64;
    let mut hist = vec![0.0; cells * cells * bins];

    for y in 0..h {
        let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
        let cell_y = y * cells / h;
        for x in 0..w {
            let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let gx = px(xr, y) - px(xl, y);
            // Image rows grow downward; flip so orientations are counter-clockwise.
            let gy = px(x, yu) - px(x, yd);
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let deg = gy.atan2(gx).to_degrees().rem_euclid(360.0);
            // Bin k is centered at (k + 0.5)·width.
            let pos = deg / bin_width - 0.5;
            let lower = pos.floor();
            let frac = pos - lower;
            let k0 = (lower as i64).rem_euclid(bins as i64) as usize;
            let k1 = (k0 + 1) % bins;
            let cell = (cell_y * cells + x * cells / w) * bins;
            hist[cell + k0] += mag * (1.0 - frac);
            hist[cell + k1] += mag * frac;
        }
    }

    for cell in hist.chunks_exact_mut(bins) {
        let norm = cell.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            cell.iter_mut().for_each(|v| *v /= norm);
        }
    }
    hist
}

impl fmt::Display for FeatureExtractor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FeatureKind::RawPixels => write!(f, "raw:size={}", self.image_size),
            FeatureKind::GradOrientationHistogram { cells, bins } => {
                write!(f, "hog:size={},cells={cells},bins={bins}", self.image_size)
            }
        }
    }
}

impl FromStr for FeatureExtractor {
    type Err = Error;

    /// Parses the `Display` form, e.g. `hog:size=64,cells=4,bins=36`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format {
            what: "feature extractor descriptor",
            detail: s.to_string(),
        };
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let mut size = None;
        let mut cells = None;
        let mut bins = None;
        for kv in rest.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            let v: usize = v.parse().map_err(|_| bad())?;
            match k {
                "size" => size = Some(v),
                "cells" => cells = Some(v),
                "bins" => bins = Some(v),
                _ => return Err(bad()),
            }
        }
        let size = size.ok_or_else(bad)?;
        match kind {
            "raw" => Ok(Self::raw_pixels(size)),
            "hog" => Self::orientation_histogram(
                size,
                cells.ok_or_else(bad)?,
                bins.ok_or_else(bad)?,
            ),
            _ => Err(bad()),
        }
    }
}
