use super::features::FeatureExtractor;
use super::mlp::{HeadGrads, HeadParams, DEFAULT_HIDDEN};
use super::optim::{Optimizer, OptimizerKind};
use crate::circmath::{circular_distance, Angle, HALF_TURN};
use crate::codecs::CodecSpec;
use crate::error::{Error, Result};
use crate::geometry::rotate_and_crop;
use crate::raster::RasterImage;
use crate::seeding;
use crate::synthdata::{EvalItem, TrainScene};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 32,
            max_epochs: 60,
            patience: 15,
            optimizer: OptimizerKind::AdamLike,
            seed: 0,
            hidden: DEFAULT_HIDDEN,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be finite and >= 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 || self.hidden == 0 {
            return Err(Error::InvalidParameter(
                "batch size, epochs, patience and hidden size must be positive".into(),
            ));
        }
        if self.patience > self.max_epochs {
            return Err(Error::InvalidParameter(format!(
                "patience ({}) exceeds max epochs ({})",
                self.patience, self.max_epochs
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    /// 0 is the untrained model.
    pub epoch: usize,
    /// Mean codec loss over the epoch's training draws. For epoch 0 this is
    /// the initial model on epoch 1's draws.
    pub train_loss: f64,
    pub val_mae: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest validation MAE.
    pub params: HeadParams,
    pub best_epoch: usize,
    pub best_val_mae: f64,
    pub log: Vec<EpochLog>,
}

/// Decodes the head output for `img`.
pub fn predict(
    codec: &CodecSpec,
    fx: &FeatureExtractor,
    params: &HeadParams,
    img: &RasterImage,
) -> Result<Angle> {
    let features = fx.extract(img)?;
    codec.decode(&params.forward(&features)?)
}

/// Predictions for precomputed feature vectors. Outputs with no defined
/// direction (e.g. a zero unit vector) yield `None`.
pub fn predict_features(
    codec: &CodecSpec,
    params: &HeadParams,
    features: &[Vec<f64>],
) -> Result<Vec<Option<Angle>>> {
    features
        .par_iter()
        .map(|f| match codec.decode(&params.forward(f)?) {
            Ok(a) => Ok(Some(a)),
            Err(Error::Degenerate(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Circular error of a prediction; an undefined prediction counts as the
/// maximum error of 180°.
pub fn prediction_error(pred: Option<Angle>, truth: Angle) -> f64 {
    pred.map_or(HALF_TURN, |p| circular_distance(p, truth))
}

fn extract_all(fx: &FeatureExtractor, images: &[&RasterImage]) -> Result<Vec<Vec<f64>>> {
    images.par_iter().map(|img| fx.extract(img)).collect()
}

pub fn eval_features(fx: &FeatureExtractor, items: &[EvalItem]) -> Result<Vec<Vec<f64>>> {
    extract_all(fx, &items.iter().map(|i| &i.image).collect::<Vec<_>>())
}

fn mean_error(codec: &CodecSpec, params: &HeadParams, features: &[Vec<f64>], truths: &[Angle]) -> Result<f64> {
    let preds = predict_features(codec, params, features)?;
    Ok(preds
        .iter()
        .zip(truths)
        .map(|(&p, &t)| prediction_error(p, t))
        .sum::<f64>()
        / truths.len() as f64)
}

/// Rotation of training scene `index` in `epoch`.
pub fn train_angle(seed: u64, epoch: usize, index: usize) -> Angle {
    let u: f64 = seeding::rng(seed, seeding::TAG_TRAIN_ANGLE, ((epoch as u64) << 32) | index as u64)
        .random();
    crate::circmath::normalize(u * 360.0).expect("finite")
}

/// Mini-batch training with a fresh rotation for every scene in every epoch
/// and early stopping on validation MAE.
pub fn train(
    codec: &CodecSpec,
    fx: &FeatureExtractor,
    train_set: &[TrainScene],
    val_set: &[EvalItem],
    out_size: usize,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    codec.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::InvalidParameter("train and validation sets must be non-empty".into()));
    }
    if fx.image_size != out_size {
        return Err(Error::shape("feature extractor size vs sample size", out_size, fx.image_size));
    }

    let mut params = HeadParams::init(fx.out_dim(), cfg.hidden, codec.output_dim(), cfg.seed)?;
    let mut optimizer = Optimizer::new(cfg.optimizer, cfg.learning_rate, &params);
    let val_features = eval_features(fx, val_set)?;
    let val_truths: Vec<Angle> = val_set.iter().map(|v| v.true_angle).collect();

    let mut log = Vec::new();
    let mut best = (params.clone(), 0usize, mean_error(codec, &params, &val_features, &val_truths)?);
    let mut since_best = 0;
    let mut grads = HeadGrads::zeros_like(&params);

    for epoch in 1..=cfg.max_epochs {
        let angles: Vec<Angle> = (0..train_set.len())
            .map(|i| train_angle(cfg.seed, epoch, i))
            .collect();
        let features = train_set
            .par_iter()
            .zip(&angles)
            .map(|(scene, &theta)| fx.extract(&rotate_and_crop(&scene.base, theta, out_size)?))
            .collect::<Result<Vec<_>>>()?;
        let targets: Vec<_> = angles.iter().map(|&a| codec.encode(a)).collect();

        if epoch == 1 {
            let initial_loss = features
                .par_iter()
                .zip(&targets)
                .map(|(f, t)| Ok(codec.loss_and_grad(&params.forward(f)?, t)?.loss))
                .collect::<Result<Vec<f64>>>()?
                .iter()
                .sum::<f64>()
                / features.len() as f64;
            log.push(EpochLog {
                epoch: 0,
                train_loss: initial_loss,
                val_mae: best.2,
            });
        }

        let mut order: Vec<usize> = (0..train_set.len()).collect();
        order.shuffle(&mut seeding::rng(cfg.seed, seeding::TAG_SHUFFLE, epoch as u64));

        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.clear();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let acts = params.forward_full(&features[i])?;
                let lv = codec.loss_and_grad(&acts.output, &targets[i])?;
                if !lv.loss.is_finite() {
                    return Err(Error::Diverged {
                        epoch,
                        detail: format!("non-finite loss on scene {}", train_set[i].path),
                    });
                }
                loss_sum += lv.loss;
                params.accumulate_grads(&features[i], &acts, &lv.gradient, scale, &mut grads)?;
            }
            optimizer.step(&mut params, &grads);
        }
        let train_loss = loss_sum / train_set.len() as f64;
        if !train_loss.is_finite() || !params.is_finite() {
            return Err(Error::Diverged {
                epoch,
                detail: "non-finite parameters".into(),
            });
        }

        let val_mae = mean_error(codec, &params, &val_features, &val_truths)?;
        log.push(EpochLog {
            epoch,
            train_loss,
            val_mae,
        });
        if val_mae < best.2 {
            best = (params.clone(), epoch, val_mae);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }

    Ok(TrainOutcome {
        params: best.0,
        best_epoch: best.1,
        best_val_mae: best.2,
        log,
    })
}

/// Writes the log as CSV `epoch,train_loss,val_mae`.
pub fn write_log_csv(log: &[EpochLog], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["epoch", "train_loss", "val_mae"])
        .map_err(|e| Error::csv(path, e))?;
    for row in log {
        w.write_record([
            row.epoch.to_string(),
            row.train_loss.to_string(),
            row.val_mae.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
