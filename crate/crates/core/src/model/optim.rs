use super::mlp::{HeadGrads, HeadParams};
use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    /// Heavy-ball momentum (0.9).
    SgdMomentum,
    /// Adam-style first/second moment estimates with bias correction.
    AdamLike,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::SgdMomentum => "sgd_momentum",
            OptimizerKind::AdamLike => "adam_like",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd_momentum" | "sgd" => Ok(OptimizerKind::SgdMomentum),
            "adam_like" | "adam" => Ok(OptimizerKind::AdamLike),
            _ => Err(Error::InvalidParameter(format!(
                "unknown optimizer `{s}` (valid: sgd_momentum, adam_like)"
            ))),
        }
    }
}

const MOMENTUM: f64 = 0.9;
const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    step: u64,
    first: [Vec<f64>; 4],
    second: [Vec<f64>; 4],
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, params: &HeadParams) -> Self {
        let zeros = || params.tensors().map(|t| vec![0.0; t.len()]);
        Optimizer {
            kind,
            lr,
            step: 0,
            first: zeros(),
            second: zeros(),
        }
    }

    /// Applies one update from (already batch-averaged) gradients.
    pub fn step(&mut self, params: &mut HeadParams, grads: &HeadGrads) {
        self.step += 1;
        let t = self.step as i32;
        let (bc1, bc2) = (1.0 - BETA1.powi(t), 1.0 - BETA2.powi(t));
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.first.iter_mut())
            .zip(self.second.iter_mut())
        {
            match self.kind {
                OptimizerKind::SgdMomentum => {
                    for ((p, g), m) in p.iter_mut().zip(g).zip(m.iter_mut()) {
                        *m = MOMENTUM * *m + g;
                        *p -= self.lr * *m;
                    }
                }
                OptimizerKind::AdamLike => {
                    for (((p, g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                        *m = BETA1 * *m + (1.0 - BETA1) * g;
                        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                        *p -= self.lr * (*m / bc1) / ((*v / bc2).sqrt() + EPS);
                    }
                }
            }
        }
    }
}
