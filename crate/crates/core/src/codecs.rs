//! The five circular-aware angle representations.
//!
//! Every codec exposes the same three steps: [`CodecSpec::encode`] turns a
//! ground-truth angle into a training target, [`CodecSpec::loss_and_grad`]
//! scores a raw network output against that target (with the analytic
//! gradient with respect to the output), and [`CodecSpec::decode`] maps a raw
//! network output back to an angle.
//!
//! Binned codecs (classification and circular Gaussian) use `N` bins of width
//! `w = 360 / N`; bin `i` covers `[i·w, (i+1)·w)` and is represented by its
//! center `(i + 0.5)·w`. Their predictions are raw logits; softmax is applied
//! internally.

use crate::circmath::{self, circular_distance, Angle, FULL_TURN, HALF_TURN};
use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

pub const DEFAULT_UV_LAMBDA: f64 = 0.01;
pub const DEFAULT_PSC_PHASES: usize = 3;
pub const DEFAULT_PSC_OMEGA: f64 = 1.0;
pub const DEFAULT_BINS: usize = 360;
pub const DEFAULT_CGD_SIGMA: f64 = 6.0;

/// Method identifiers, keyed by their registry names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Direct angle regression with circular MAE.
    Da,
    /// Unit-vector `(cos, sin)` regression.
    Uv,
    /// Phase-shifting coder.
    Psc,
    /// Classification over angular bins.
    Cls,
    /// Circular Gaussian distribution over angular bins.
    Cgd,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Da, Method::Uv, Method::Psc, Method::Cls, Method::Cgd];

    pub fn name(self) -> &'static str {
        match self {
            Method::Da => "da",
            Method::Uv => "uv",
            Method::Psc => "psc",
            Method::Cls => "cls",
            Method::Cgd => "cgd",
        }
    }

    pub fn valid_names() -> String {
        Method::ALL
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownMethod {
                name: s.to_string(),
                valid: Method::valid_names(),
            })
    }
}

/// Loss used by the direct-angle codec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectLoss {
    /// `min(|θ̂−θ|, 360−|θ̂−θ|)`.
    Circular,
    /// Plain `|θ̂−θ|`, blind to the wrap-around. Only used as a comparison arm.
    NaiveL1,
}

/// A configured codec.
#[derive(Debug, Clone, PartialEq)]
pub enum CodecSpec {
    Direct { loss: DirectLoss },
    UnitVector { lambda: f64 },
    PhaseShift { phases: usize, omega: f64 },
    Classification { bins: usize },
    CircularGaussian { bins: usize, sigma: f64 },
}

/// Method-specific training target. Its length always equals the codec's
/// `output_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedTarget {
    pub values: Vec<f64>,
}

/// A loss value together with `∂loss/∂prediction`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub loss: f64,
    pub gradient: Vec<f64>,
}

impl CodecSpec {
    /// Default-parameter codec for a registry name (`da`, `uv`, `psc`, `cls`,
    /// `cgd`).
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(Self::default_for(name.parse()?))
    }

    pub fn default_for(method: Method) -> Self {
        match method {
            Method::Da => CodecSpec::Direct {
                loss: DirectLoss::Circular,
            },
            Method::Uv => CodecSpec::UnitVector {
                lambda: DEFAULT_UV_LAMBDA,
            },
            Method::Psc => CodecSpec::PhaseShift {
                phases: DEFAULT_PSC_PHASES,
                omega: DEFAULT_PSC_OMEGA,
            },
            Method::Cls => CodecSpec::Classification { bins: DEFAULT_BINS },
            Method::Cgd => CodecSpec::CircularGaussian {
                bins: DEFAULT_BINS,
                sigma: DEFAULT_CGD_SIGMA,
            },
        }
    }

    /// Direct-angle codec trained with the non-circular L1 loss.
    pub fn naive_direct() -> Self {
        CodecSpec::Direct {
            loss: DirectLoss::NaiveL1,
        }
    }

    pub fn method(&self) -> Method {
        match self {
            CodecSpec::Direct { .. } => Method::Da,
            CodecSpec::UnitVector { .. } => Method::Uv,
            CodecSpec::PhaseShift { .. } => Method::Psc,
            CodecSpec::Classification { .. } => Method::Cls,
            CodecSpec::CircularGaussian { .. } => Method::Cgd,
        }
    }

    /// Name used in reports; the naive direct arm is `da-naive`.
    pub fn label(&self) -> &'static str {
        match self {
            CodecSpec::Direct {
                loss: DirectLoss::NaiveL1,
            } => "da-naive",
            other => other.method().name(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match *self {
            CodecSpec::Direct { .. } => 1,
            CodecSpec::UnitVector { .. } => 2,
            CodecSpec::PhaseShift { phases, .. } => phases,
            CodecSpec::Classification { bins } | CodecSpec::CircularGaussian { bins, .. } => bins,
        }
    }

    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            CodecSpec::Direct { .. } => Ok(()),
            CodecSpec::UnitVector { lambda } => {
                if lambda.is_finite() && lambda >= 0.0 {
                    Ok(())
                } else {
                    bad(format!("unit-vector lambda must be finite and >= 0, got {lambda}"))
                }
            }
            CodecSpec::PhaseShift { phases, omega } => {
                if phases < 3 {
                    bad(format!("phase-shift coder needs at least 3 phases, got {phases}"))
                } else if omega != 1.0 {
                    bad(format!("only unit frequency is supported, got omega = {omega}"))
                } else {
                    Ok(())
                }
            }
            CodecSpec::Classification { bins } => {
                if bins >= 2 {
                    Ok(())
                } else {
                    bad(format!("need at least 2 bins, got {bins}"))
                }
            }
            CodecSpec::CircularGaussian { bins, sigma } => {
                if bins < 2 {
                    bad(format!("need at least 2 bins, got {bins}"))
                } else if !(sigma.is_finite() && sigma > 0.0) {
                    bad(format!("sigma must be positive, got {sigma}"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Builds the training target for `theta`.
    pub fn encode(&self, theta: Angle) -> EncodedTarget {
        let values = match *self {
            CodecSpec::Direct { .. } => vec![theta.degrees()],
            CodecSpec::UnitVector { .. } => {
                let (s, c) = theta.sin_cos();
                vec![c, s]
            }
            CodecSpec::PhaseShift { phases, omega } => (0..phases)
                .map(|n| (omega * theta.radians() + phase_offset(n, phases)).cos())
                .collect(),
            CodecSpec::Classification { bins } => {
                let mut v = vec![0.0; bins];
                v[bin_index(theta, bins)] = 1.0;
                v
            }
            CodecSpec::CircularGaussian { bins, sigma } => circular_gaussian(theta, bins, sigma),
        };
        EncodedTarget { values }
    }

    /// Maps a raw network output back to an angle.
    pub fn decode(&self, prediction: &[f64]) -> Result<Angle> {
        self.check_prediction(prediction)?;
        match *self {
            CodecSpec::Direct { .. } => circmath::normalize(prediction[0]),
            CodecSpec::UnitVector { .. } => {
                circmath::angle_from_components(prediction[1], prediction[0])
            }
            CodecSpec::PhaseShift { phases, omega } => {
                let (s_sin, s_cos) = phase_sums(prediction, phases);
                if s_sin == 0.0 && s_cos == 0.0 {
                    return Err(Error::Degenerate("phase-shift sums are both zero"));
                }
                circmath::normalize(-s_sin.atan2(s_cos).to_degrees() / omega)
            }
            CodecSpec::Classification { bins } | CodecSpec::CircularGaussian { bins, .. } => {
                Ok(bin_center(argmax(prediction), bins))
            }
        }
    }

    /// Loss of `prediction` against `target` and its gradient with respect to
    /// `prediction`.
    pub fn loss_and_grad(&self, prediction: &[f64], target: &EncodedTarget) -> Result<LossValue> {
        self.check_prediction(prediction)?;
        let dim = self.output_dim();
        if target.values.len() != dim {
            return Err(Error::shape("codec target", dim, target.values.len()));
        }
        let t = &target.values;
        let value = match *self {
            CodecSpec::Direct {
                loss: DirectLoss::Circular,
            } => {
                // Offset of the prediction ahead of the target, in [0, 360).
                let ahead = (prediction[0] - t[0]).rem_euclid(FULL_TURN);
                let ahead = if ahead >= FULL_TURN { 0.0 } else { ahead };
                let (loss, grad) = if ahead == 0.0 {
                    (0.0, 0.0)
                } else if ahead <= HALF_TURN {
                    // At exactly 180° both directions are equally short; take +1.
                    (ahead, 1.0)
                } else {
                    (FULL_TURN - ahead, -1.0)
                };
                LossValue {
                    loss,
                    gradient: vec![grad],
                }
            }
            CodecSpec::Direct {
                loss: DirectLoss::NaiveL1,
            } => {
                let diff = prediction[0] - t[0];
                LossValue {
                    loss: diff.abs(),
                    gradient: vec![sign(diff)],
                }
            }
            CodecSpec::UnitVector { lambda } => {
                let mut lv = mean_absolute(prediction, t);
                let norm = (prediction[0] * prediction[0] + prediction[1] * prediction[1]).sqrt();
                lv.loss += lambda * (norm - 1.0).powi(2);
                if norm > 0.0 {
                    let scale = 2.0 * lambda * (norm - 1.0) / norm;
                    lv.gradient[0] += scale * prediction[0];
                    lv.gradient[1] += scale * prediction[1];
                }
                lv
            }
            CodecSpec::PhaseShift { .. } => mean_absolute(prediction, t),
            CodecSpec::Classification { .. } => {
                let log_p = log_softmax(prediction);
                let hot = argmax(t);
                let gradient = log_p
                    .iter()
                    .zip(t)
                    .map(|(lp, ti)| lp.exp() - ti)
                    .collect();
                LossValue {
                    loss: -log_p[hot],
                    gradient,
                }
            }
            CodecSpec::CircularGaussian { .. } => {
                let log_p = log_softmax(prediction);
                let loss = t
                    .iter()
                    .zip(&log_p)
                    .filter(|(ti, _)| **ti > 0.0)
                    .map(|(ti, lp)| ti * (ti.ln() - lp))
                    .sum::<f64>()
                    .max(0.0);
                let gradient = log_p
                    .iter()
                    .zip(t)
                    .map(|(lp, ti)| lp.exp() - ti)
                    .collect();
                LossValue { loss, gradient }
            }
        };
        Ok(value)
    }

    fn check_prediction(&self, prediction: &[f64]) -> Result<()> {
        let dim = self.output_dim();
        if prediction.len() != dim {
            return Err(Error::shape("codec prediction", dim, prediction.len()));
        }
        if prediction.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("prediction"));
        }
        Ok(())
    }
}

impl fmt::Display for CodecSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CodecSpec::Direct { loss } => match loss {
                DirectLoss::Circular => write!(f, "da"),
                DirectLoss::NaiveL1 => write!(f, "da-naive"),
            },
            CodecSpec::UnitVector { lambda } => write!(f, "uv(lambda={lambda})"),
            CodecSpec::PhaseShift { phases, omega } => {
                write!(f, "psc(phases={phases},omega={omega})")
            }
            CodecSpec::Classification { bins } => write!(f, "cls(bins={bins})"),
            CodecSpec::CircularGaussian { bins, sigma } => {
                write!(f, "cgd(bins={bins},sigma={sigma})")
            }
        }
    }
}

/// `2πn/M` in radians.
fn phase_offset(n: usize, phases: usize) -> f64 {
    std::f64::consts::TAU * n as f64 / phases as f64
}

/// `(S_s, S_c) = (Σ m_n sin(2πn/M), Σ m_n cos(2πn/M))`.
pub fn phase_sums(m: &[f64], phases: usize) -> (f64, f64) {
    m.iter()
        .enumerate()
        .take(phases)
        .fold((0.0, 0.0), |(s, c), (n, &v)| {
            let (sn, cn) = phase_offset(n, phases).sin_cos();
            (s + v * sn, c + v * cn)
        })
}

pub fn bin_width(bins: usize) -> f64 {
    FULL_TURN / bins as f64
}

/// Index of the bin containing `theta`.
pub fn bin_index(theta: Angle, bins: usize) -> usize {
    let i = (theta.degrees() / bin_width(bins)).floor() as usize;
    i.min(bins - 1)
}

/// Center of bin `index`.
pub fn bin_center(index: usize, bins: usize) -> Angle {
    // (i + 0.5)·w < 360 for every valid index, so this is already canonical.
    circmath::normalize((index as f64 + 0.5) * bin_width(bins)).expect("finite bin center")
}

/// Normalized `exp(-d²/(2σ²))` over bin centers, `d` the circular distance.
pub fn circular_gaussian(theta: Angle, bins: usize, sigma: f64) -> Vec<f64> {
    let denom = 2.0 * sigma * sigma;
    let dists: Vec<f64> = (0..bins)
        .map(|i| circular_distance(bin_center(i, bins), theta))
        .collect();
    // Shift by the nearest center so the peak is exp(0) even when σ is far
    // narrower than a bin.
    let nearest = dists.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut v: Vec<f64> = dists
        .iter()
        .map(|d| (-(d * d - nearest * nearest) / denom).exp())
        .collect();
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// First index of the maximum.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).into_iter().map(f64::exp).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = logits.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    logits.iter().map(|x| x - max - lse).collect()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Componentwise mean absolute error with its subgradient (0 at ties).
fn mean_absolute(prediction: &[f64], target: &[f64]) -> LossValue {
    let n = prediction.len() as f64;
    let mut loss = 0.0;
    let gradient = prediction
        .iter()
        .zip(target)
        .map(|(p, t)| {
            loss += (p - t).abs();
            sign(p - t) / n
        })
        .collect();
    LossValue {
        loss: loss / n,
        gradient,
    }
}
