//! Angle arithmetic on the circle.
//!
//! Degrees are the external unit everywhere; radians only appear inside
//! trigonometric evaluation.

use crate::error::{Error, Result};
use std::fmt;

/// Full turn in degrees.
pub const FULL_TURN: f64 = 360.0;
/// Half turn in degrees; the largest possible circular distance.
pub const HALF_TURN: f64 = 180.0;

/// An orientation in degrees, always held in its canonical form `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Canonicalizes `raw` degrees. Fails on NaN or infinity.
    pub fn new(raw: f64) -> Result<Self> {
        normalize(raw)
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }

    /// `(sin, cos)` of the angle. Quarter turns are exact.
    pub fn sin_cos(self) -> (f64, f64) {
        sin_cos_deg(self.0)
    }

    /// Rotates by `delta` degrees and re-canonicalizes.
    pub fn offset(self, delta: f64) -> Result<Self> {
        normalize(self.0 + delta)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.0)
    }
}

impl TryFrom<f64> for Angle {
    type Error = Error;

    fn try_from(raw: f64) -> Result<Self> {
        normalize(raw)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

/// Maps any finite number of degrees onto `[0, 360)` using floored modulo.
pub fn normalize(raw: f64) -> Result<Angle> {
    if !raw.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    let mut r = raw.rem_euclid(FULL_TURN);
    // rem_euclid can round up to exactly 360 for tiny negative inputs.
    if r >= FULL_TURN {
        r = 0.0;
    }
    Ok(Angle(r))
}

/// Minimum angular separation between two angles, in `[0, 180]`.
pub fn circular_distance(a: Angle, b: Angle) -> f64 {
    let d = (a.0 - b.0).abs();
    d.min(FULL_TURN - d)
}

/// Signed shortest rotation from `from` to `to`, in `(-180, 180]`.
pub fn signed_difference(to: Angle, from: Angle) -> f64 {
    let d = (to.0 - from.0).rem_euclid(FULL_TURN);
    if d > HALF_TURN {
        d - FULL_TURN
    } else {
        d
    }
}

/// Recovers an angle from its sine and cosine parts (two-argument arctangent).
pub fn angle_from_components(sin_part: f64, cos_part: f64) -> Result<Angle> {
    if !sin_part.is_finite() || !cos_part.is_finite() {
        return Err(Error::NonFinite("angle components"));
    }
    if sin_part == 0.0 && cos_part == 0.0 {
        return Err(Error::Degenerate("zero vector has no direction"));
    }
    normalize(sin_part.atan2(cos_part).to_degrees())
}

/// `(sin, cos)` of an angle given in degrees, exact at multiples of 90°.
pub fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(FULL_TURN);
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == 90.0 {
        (1.0, 0.0)
    } else if r == 180.0 {
        (0.0, -1.0)
    } else if r == 270.0 {
        (-1.0, 0.0)
    } else {
        r.to_radians().sin_cos()
    }
}
