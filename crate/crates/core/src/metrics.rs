//! Evaluation over circular errors.
//!
//! Percentiles (and the median) interpolate linearly between order
//! statistics at position `p/100 · (n − 1)`. `AUC@k` is the area under the
//! cumulative accuracy curve `t ↦ Acc@t` on `[0, k]`, divided by `k`.

use crate::circmath::{circular_distance, Angle};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Thresholds (degrees) reported for `Acc@k` and `AUC@k`.
pub const THRESHOLDS: [u32; 3] = [2, 5, 10];

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    pub rmse: f64,
    pub median: f64,
    /// Keyed by threshold in degrees.
    pub acc_at: BTreeMap<u32, f64>,
    pub auc_at: BTreeMap<u32, f64>,
    pub p90: f64,
    pub p95: f64,
    pub n: usize,
}

/// Elementwise circular distances, order-preserving.
pub fn per_sample_errors(predictions: &[Angle], truths: &[Angle]) -> Result<Vec<f64>> {
    if predictions.len() != truths.len() {
        return Err(Error::shape("predictions vs truths", truths.len(), predictions.len()));
    }
    Ok(predictions
        .iter()
        .zip(truths)
        .map(|(&p, &t)| circular_distance(p, t))
        .collect())
}

pub fn evaluate(predictions: &[Angle], truths: &[Angle]) -> Result<MetricsReport> {
    if predictions.is_empty() && truths.is_empty() {
        return Err(Error::Degenerate("cannot evaluate an empty prediction set"));
    }
    report_from_errors(&per_sample_errors(predictions, truths)?)
}

/// Builds the report from precomputed circular errors in `[0, 180]`.
pub fn report_from_errors(errors: &[f64]) -> Result<MetricsReport> {
    if errors.is_empty() {
        return Err(Error::Degenerate("cannot evaluate an empty error set"));
    }
    if errors.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(Error::InvalidParameter(
            "errors must be finite and non-negative".into(),
        ));
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;

    let mae = sorted.iter().sum::<f64>() / n;
    let rmse = (sorted.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let acc_at = THRESHOLDS
        .iter()
        .map(|&k| (k, accuracy_at(&sorted, k as f64)))
        .collect();
    let auc_at = THRESHOLDS
        .iter()
        .map(|&k| (k, auc_at(&sorted, k as f64)))
        .collect();

    Ok(MetricsReport {
        mae,
        rmse,
        median: percentile(&sorted, 50.0),
        acc_at,
        auc_at,
        p90: percentile(&sorted, 90.0),
        p95: percentile(&sorted, 95.0),
        n: sorted.len(),
    })
}

/// Fraction of errors `≤ k` in an ascending error list.
pub fn accuracy_at(sorted: &[f64], k: f64) -> f64 {
    sorted.partition_point(|&e| e <= k) as f64 / sorted.len() as f64
}

/// `(1/k) ∫₀ᵏ Acc@t dt` over an ascending error list.
///
/// `Acc@t` is a step function that rises by `1/n` at every error, so the
/// integral is `(1/n) Σ max(0, k − eᵢ)`.
pub fn auc_at(sorted: &[f64], k: f64) -> f64 {
    let within = sorted.partition_point(|&e| e <= k);
    let area: f64 = sorted[..within].iter().map(|e| (k - e) / k).sum();
    area / sorted.len() as f64
}

/// Linear-interpolation percentile of an ascending list, `p ∈ [0, 100]`.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let (a, b) = (sorted[lo], sorted[hi]);
    (a + (b - a) * (pos - lo as f64)).clamp(a, b)
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("serializable report");
        value["schema_version"] = REPORT_SCHEMA_VERSION.into();
        serde_json::to_string_pretty(&value).expect("serializable report") + "\n"
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// Flat column names in the order used by [`MetricsReport::csv_values`].
    pub fn csv_header() -> Vec<String> {
        let mut cols = vec!["mae".to_string(), "rmse".into(), "median".into()];
        cols.extend(THRESHOLDS.iter().map(|k| format!("acc@{k}")));
        cols.extend(THRESHOLDS.iter().map(|k| format!("auc@{k}")));
        cols.extend(["p90".to_string(), "p95".into(), "n".into()]);
        cols
    }

    pub fn csv_values(&self) -> Vec<f64> {
        let mut v = vec![self.mae, self.rmse, self.median];
        v.extend(THRESHOLDS.iter().map(|k| self.acc_at[k]));
        v.extend(THRESHOLDS.iter().map(|k| self.auc_at[k]));
        v.extend([self.p90, self.p95, self.n as f64]);
        v
    }

    /// One header row and one value row.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(Self::csv_header())
            .map_err(|e| Error::csv(path, e))?;
        w.write_record(self.csv_values().iter().map(|v| v.to_string()))
            .map_err(|e| Error::csv(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Per-sample rows for error-distribution export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub path: String,
    pub true_deg: f64,
    pub pred_deg: f64,
    pub error_deg: f64,
}

pub fn write_error_csv(rows: &[ErrorRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_error_csv(path: impl AsRef<Path>) -> Result<Vec<ErrorRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::csv(path, e))
}
