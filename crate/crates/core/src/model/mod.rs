//! Framework-free predictor: a fixed feature extractor followed by a small
//! MLP head with hand-written backpropagation.

mod features;
mod io;
mod mlp;
mod optim;
mod train;

pub use features::{FeatureExtractor, FeatureKind};
pub use io::{read_params, write_params, ParamsFile, PARAMS_MAGIC, PARAMS_VERSION};
pub use mlp::{Activations, HeadGrads, HeadParams, DEFAULT_HIDDEN};
pub use optim::{Optimizer, OptimizerKind};
pub use train::{
    eval_features, predict, predict_features, prediction_error, train, train_angle,
    write_log_csv, EpochLog, TrainConfig, TrainOutcome,
};
