//! Trains and evaluates several codecs on one dataset with shared seeds.

use crate::circmath::Angle;
use crate::codecs::CodecSpec;
use crate::error::{Error, Result};
use crate::metrics::{self, ErrorRow, MetricsReport};
use crate::model::{
    eval_features, predict_features, prediction_error, train, EpochLog, FeatureExtractor,
    HeadParams, TrainConfig,
};
use crate::synthdata::{Dataset, EvalItem};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct CompareConfig {
    /// Codecs to train, in table order.
    pub arms: Vec<CodecSpec>,
    /// Number of training runs per arm; run `r` trains with seed
    /// `train.seed + r` for every arm.
    pub runs: usize,
    pub train: TrainConfig,
    pub extractor: FeatureExtractor,
}

impl CompareConfig {
    /// The five default-parameter methods, optionally followed by the naive
    /// L1 direct-angle arm.
    pub fn default_arms(include_naive_da: bool) -> Vec<CodecSpec> {
        let mut arms: Vec<CodecSpec> = crate::codecs::Method::ALL
            .iter()
            .map(|&m| CodecSpec::default_for(m))
            .collect();
        if include_naive_da {
            arms.push(CodecSpec::naive_direct());
        }
        arms
    }

    pub fn run_seeds(&self) -> Vec<u64> {
        (0..self.runs as u64).map(|r| self.train.seed.wrapping_add(r)).collect()
    }
}

/// One trained and evaluated model.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    pub report: MetricsReport,
    pub errors: Vec<ErrorRow>,
    pub log: Vec<EpochLog>,
    pub best_epoch: usize,
    pub params: HeadParams,
}

#[derive(Debug, Clone)]
pub struct ArmResult {
    pub label: String,
    pub codec: CodecSpec,
    /// Every run, or the first failure message.
    pub runs: std::result::Result<Vec<RunResult>, String>,
}

/// Predicts every item and scores the predictions.
pub fn evaluate_params(
    codec: &CodecSpec,
    fx: &FeatureExtractor,
    params: &HeadParams,
    items: &[EvalItem],
) -> Result<(MetricsReport, Vec<ErrorRow>)> {
    let features = eval_features(fx, items)?;
    let preds = predict_features(codec, params, &features)?;
    let rows: Vec<ErrorRow> = items
        .iter()
        .zip(&preds)
        .map(|(item, &pred)| ErrorRow {
            path: item.path.clone(),
            true_deg: item.true_angle.degrees(),
            pred_deg: pred.map_or(f64::NAN, Angle::degrees),
            error_deg: prediction_error(pred, item.true_angle),
        })
        .collect();
    let errors: Vec<f64> = rows.iter().map(|r| r.error_deg).collect();
    Ok((metrics::report_from_errors(&errors)?, rows))
}

pub fn train_and_evaluate(
    ds: &Dataset,
    codec: &CodecSpec,
    fx: &FeatureExtractor,
    cfg: &TrainConfig,
) -> Result<RunResult> {
    let outcome = train(codec, fx, &ds.train, &ds.val, ds.config.out_size, cfg)?;
    let (report, errors) = evaluate_params(codec, fx, &outcome.params, &ds.test)?;
    Ok(RunResult {
        seed: cfg.seed,
        report,
        errors,
        log: outcome.log,
        best_epoch: outcome.best_epoch,
        params: outcome.params,
    })
}

/// Trains every `(arm, run)` pair. Pairs are independent and may run in
/// parallel; results come back in arm order. A failing arm is reported as
/// failed without stopping the others.
pub fn run_compare(ds: &Dataset, cfg: &CompareConfig) -> Result<Vec<ArmResult>> {
    if cfg.runs == 0 {
        return Err(Error::InvalidParameter("runs must be positive".into()));
    }
    if cfg.arms.is_empty() {
        return Err(Error::InvalidParameter("no methods selected".into()));
    }
    let seeds = cfg.run_seeds();
    let jobs: Vec<(usize, u64)> = (0..cfg.arms.len())
        .flat_map(|a| seeds.iter().map(move |&s| (a, s)))
        .collect();
    let outcomes: Vec<Result<RunResult>> = jobs
        .par_iter()
        .map(|&(a, seed)| {
            let train_cfg = TrainConfig {
                seed,
                ..cfg.train.clone()
            };
            train_and_evaluate(ds, &cfg.arms[a], &cfg.extractor, &train_cfg)
        })
        .collect();

    let mut outcomes = outcomes.into_iter();
    Ok(cfg
        .arms
        .iter()
        .map(|codec| {
            let runs: Vec<Result<RunResult>> = outcomes.by_ref().take(seeds.len()).collect();
            ArmResult {
                label: codec.label().to_string(),
                codec: codec.clone(),
                runs: runs
                    .into_iter()
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| e.to_string()),
            }
        })
        .collect())
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-column mean and sample standard deviation over the runs of one arm, in
/// [`MetricsReport::csv_header`] order.
pub fn aggregate(runs: &[RunResult]) -> Vec<(f64, f64)> {
    let rows: Vec<Vec<f64>> = runs.iter().map(|r| r.report.csv_values()).collect();
    (0..MetricsReport::csv_header().len())
        .map(|c| mean_std(&rows.iter().map(|r| r[c]).collect::<Vec<_>>()))
        .collect()
}

fn format_cell(column: &str, (mean, std): (f64, f64), runs: usize) -> String {
    if column == "n" {
        return format!("{}", mean.round() as u64);
    }
    if runs > 1 {
        format!("{mean:.4}({std:.4})")
    } else {
        format!("{mean:.4}")
    }
}

/// Table rows: header first, then one row per arm.
pub fn table_rows(results: &[ArmResult], runs: usize) -> Vec<Vec<String>> {
    let cols = MetricsReport::csv_header();
    let mut header = vec!["method".to_string(), "status".into()];
    header.extend(cols.iter().cloned());
    let mut rows = vec![header];
    for arm in results {
        let mut row = vec![arm.label.clone()];
        match &arm.runs {
            Ok(rs) => {
                row.push("ok".into());
                row.extend(
                    cols.iter()
                        .zip(aggregate(rs))
                        .map(|(c, ms)| format_cell(c, ms, runs)),
                );
            }
            Err(_) => {
                row.push("failed".into());
                row.extend(cols.iter().map(|_| String::new()));
            }
        }
        rows.push(row);
    }
    rows
}

pub fn render_csv(results: &[ArmResult], runs: usize) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in table_rows(results, runs) {
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

pub fn render_markdown(results: &[ArmResult], runs: usize) -> String {
    let rows = table_rows(results, runs);
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        out.push_str("| ");
        out.push_str(&row.join(" | "));
        out.push_str(" |\n");
        if i == 0 {
            out.push('|');
            out.push_str(&"---|".repeat(row.len()));
            out.push('\n');
        }
    }
    out
}

/// Metadata written next to the comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct CompareMeta {
    pub schema_version: u32,
    pub split_seed: u64,
    /// The one test seed every arm was evaluated with.
    pub test_seed: u64,
    pub train_seeds: Vec<u64>,
    pub runs: usize,
    pub extractor: String,
    pub arms: Vec<ArmMeta>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArmMeta {
    pub method: String,
    pub codec: String,
    pub test_seed: u64,
    pub status: String,
    pub error: Option<String>,
    pub best_epochs: Vec<usize>,
}

pub fn compare_meta(ds: &Dataset, cfg: &CompareConfig, results: &[ArmResult]) -> CompareMeta {
    CompareMeta {
        schema_version: 1,
        split_seed: ds.config.split_seed,
        test_seed: ds.config.test_seed,
        train_seeds: cfg.run_seeds(),
        runs: cfg.runs,
        extractor: cfg.extractor.to_string(),
        arms: results
            .iter()
            .map(|a| ArmMeta {
                method: a.label.clone(),
                codec: a.codec.to_string(),
                test_seed: ds.config.test_seed,
                status: if a.runs.is_ok() { "ok" } else { "failed" }.into(),
                error: a.runs.as_ref().err().cloned(),
                best_epochs: a
                    .runs
                    .as_ref()
                    .map(|rs| rs.iter().map(|r| r.best_epoch).collect())
                    .unwrap_or_default(),
            })
            .collect(),
    }
}
