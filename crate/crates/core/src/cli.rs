//! `angleheads` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for runtime failures.

use crate::circmath::Angle;
use crate::codecs::{CodecSpec, Method};
use crate::harness::{self, CompareConfig};
use crate::metrics::{self, ErrorRow};
use crate::model::{
    read_params, train, write_log_csv, write_params, FeatureExtractor, OptimizerKind, ParamsFile,
    TrainConfig, DEFAULT_HIDDEN,
};
use crate::synthdata::{Dataset, DatasetConfig, Manifest, SceneStyle, Split};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

/// Environment variable that supplies the default output directory.
pub const OUT_DIR_ENV: &str = "ANGLEHEADS_OUT";

#[derive(Debug, Parser)]
#[command(name = "angleheads", version, about = "Circular-aware rotation angle estimation harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset (images, manifests, dataset.json).
    Synth(SynthArgs),
    /// Train one method on a dataset.
    Train(TrainArgs),
    /// Evaluate a trained model (or a predictions file) on the test split.
    Eval(EvalArgs),
    /// Train and evaluate every method with shared seeds.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scenes in the train pool (validation is carved out of it).
    #[arg(long = "train")]
    pub n_train: usize,
    #[arg(long = "test")]
    pub n_test: usize,
    #[arg(long, default_value_t = 0.1)]
    pub val_fraction: f64,
    #[arg(long)]
    pub split_seed: u64,
    #[arg(long)]
    pub test_seed: u64,
    #[arg(long, default_value = "gradient_horizon")]
    pub style: String,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Side of the upright base images.
    #[arg(long, default_value_t = 96)]
    pub scene_size: usize,
    /// Side of the rotated, cropped samples.
    #[arg(long, default_value_t = 64)]
    pub out_size: usize,
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct TrainOpts {
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 60)]
    pub epochs: usize,
    #[arg(long, default_value_t = 15)]
    pub patience: usize,
    #[arg(long, default_value = "adam_like")]
    pub optimizer: String,
    #[arg(long, default_value_t = DEFAULT_HIDDEN)]
    pub hidden: usize,
    /// `hog` (orientation histograms) or `raw` (pixels).
    #[arg(long, default_value = "hog")]
    pub features: String,
}

impl TrainOpts {
    fn train_config(&self, seed: u64) -> anyhow::Result<TrainConfig> {
        let optimizer: OptimizerKind = self.optimizer.parse().map_err(usage)?;
        let cfg = TrainConfig {
            learning_rate: self.lr,
            batch_size: self.batch,
            max_epochs: self.epochs,
            patience: self.patience.min(self.epochs),
            optimizer,
            seed,
            hidden: self.hidden,
        };
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }

    fn extractor(&self, image_size: usize) -> anyhow::Result<FeatureExtractor> {
        match self.features.as_str() {
            "hog" => Ok(FeatureExtractor::default_for(image_size)),
            "raw" => Ok(FeatureExtractor::raw_pixels(image_size)),
            other => Err(usage(format!("unknown feature extractor `{other}` (valid: hog, raw)"))),
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// One of: da, uv, psc, cls, cgd.
    #[arg(long)]
    pub method: String,
    /// Train the direct-angle head with the non-circular L1 loss.
    #[arg(long)]
    pub naive_l1: bool,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, env = OUT_DIR_ENV, default_value = "runs")]
    pub out: PathBuf,
    #[command(flatten)]
    pub opts: TrainOpts,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub method: String,
    #[arg(long)]
    pub naive_l1: bool,
    #[arg(long)]
    pub data: PathBuf,
    /// Parameter file written by `train`.
    #[arg(long, conflicts_with = "predictions", required_unless_present = "predictions")]
    pub model: Option<PathBuf>,
    /// CSV with columns `path,angle_deg` holding predicted angles for the
    /// test split (the test manifest itself evaluates ground truth).
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, default_value = "runs")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Training runs per method; cells report mean(std) when > 1.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Training seed of the first run; run r uses seed + r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Add the naive non-circular L1 direct-angle arm.
    #[arg(long)]
    pub include_naive_da: bool,
    /// Comma-separated subset of methods (default: all five).
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    #[arg(long, env = OUT_DIR_ENV, default_value = "runs")]
    pub out: PathBuf,
    #[command(flatten)]
    pub opts: TrainOpts,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl ToString) -> anyhow::Error {
    UsageError(msg.to_string()).into()
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}

pub fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Compare(a) => cmd_compare(&a),
    }
}

fn codec_for(method: &str, naive_l1: bool) -> anyhow::Result<CodecSpec> {
    let m: Method = method.parse().map_err(usage)?;
    if naive_l1 {
        if m != Method::Da {
            return Err(usage("--naive-l1 only applies to --method da"));
        }
        return Ok(CodecSpec::naive_direct());
    }
    Ok(CodecSpec::default_for(m))
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn cmd_synth(a: &SynthArgs) -> anyhow::Result<()> {
    if a.n_train == 0 || a.n_test == 0 {
        return Err(usage("--train and --test must be positive"));
    }
    let style: SceneStyle = a.style.parse().map_err(usage)?;
    let cfg = DatasetConfig {
        n_train: a.n_train,
        val_fraction: a.val_fraction,
        n_test: a.n_test,
        split_seed: a.split_seed,
        test_seed: a.test_seed,
        style,
        scene_size: a.scene_size,
        noise_std: a.noise,
        out_size: a.out_size,
    };
    // Parameter problems surface from build_splits / render_base.
    let ds = Dataset::render(&cfg).map_err(|e| match e {
        crate::Error::InvalidParameter(_) => usage(e),
        other => other.into(),
    })?;
    create_dir(&a.out)?;
    ds.write(&a.out)?;
    println!(
        "wrote {} train, {} val, {} test samples to {}",
        ds.train.len(),
        ds.val.len(),
        ds.test.len(),
        a.out.display()
    );
    Ok(())
}

pub fn cmd_train(a: &TrainArgs) -> anyhow::Result<()> {
    let codec = codec_for(&a.method, a.naive_l1)?;
    let cfg = a.opts.train_config(a.seed)?;
    let ds = Dataset::load(&a.data)?;
    let fx = a.opts.extractor(ds.config.out_size)?;
    let outcome = train(&codec, &fx, &ds.train, &ds.val, ds.config.out_size, &cfg)?;
    create_dir(&a.out)?;
    let label = codec.label();
    let model_path = a.out.join(format!("{label}.params"));
    write_params(
        &ParamsFile {
            codec_label: label.to_string(),
            extractor: fx,
            params: outcome.params,
        },
        &model_path,
    )?;
    write_log_csv(&outcome.log, a.out.join(format!("{label}_log.csv")))?;
    println!(
        "{label}: best val MAE {:.4} at epoch {} -> {}",
        outcome.best_val_mae,
        outcome.best_epoch,
        model_path.display()
    );
    Ok(())
}

#[derive(Debug, serde::Deserialize, serde::Serialize)]
struct PredictionRow {
    path: String,
    angle_deg: f64,
}

fn read_predictions(path: &Path) -> anyhow::Result<Vec<PredictionRow>> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read predictions {}", path.display()))?;
    r.deserialize()
        .collect::<Result<_, _>>()
        .with_context(|| format!("malformed predictions {}", path.display()))
}

pub fn cmd_eval(a: &EvalArgs) -> anyhow::Result<()> {
    let codec = codec_for(&a.method, a.naive_l1)?;
    let label = codec.label();
    let test = Manifest::read_csv(a.data.join("test.csv"), Split::Test)?;
    let truths: Vec<Angle> = test
        .entries
        .iter()
        .map(|e| Angle::new(e.angle_deg))
        .collect::<crate::Result<_>>()?;

    let (rows, report) = if let Some(pred_path) = &a.predictions {
        let preds = read_predictions(pred_path)?;
        let by_path: std::collections::HashMap<&str, f64> =
            preds.iter().map(|p| (p.path.as_str(), p.angle_deg)).collect();
        let mut rows = Vec::with_capacity(test.len());
        for (e, &t) in test.entries.iter().zip(&truths) {
            let Some(&p) = by_path.get(e.path.as_str()) else {
                bail!("no prediction for {}", e.path);
            };
            let p = Angle::new(p)?;
            rows.push(ErrorRow {
                path: e.path.clone(),
                true_deg: t.degrees(),
                pred_deg: p.degrees(),
                error_deg: crate::circmath::circular_distance(p, t),
            });
        }
        let errors: Vec<f64> = rows.iter().map(|r| r.error_deg).collect();
        let report = metrics::report_from_errors(&errors)?;
        (rows, report)
    } else {
        let model_path = a.model.as_ref().expect("clap enforces --model or --predictions");
        let file = read_params(model_path)?;
        if file.codec_label != label {
            bail!(
                "{} holds a `{}` model but --method selects `{label}`",
                model_path.display(),
                file.codec_label
            );
        }
        if file.params.output_dim != codec.output_dim() {
            bail!(
                "{}: output width {} does not match `{label}` ({})",
                model_path.display(),
                file.params.output_dim,
                codec.output_dim()
            );
        }
        let items = crate::synthdata::load_eval(&a.data, &test)?;
        let (report, rows) =
            harness::evaluate_params(&codec, &file.extractor, &file.params, &items)?;
        (rows, report)
    };

    create_dir(&a.out)?;
    report.write_json(a.out.join(format!("{label}_metrics.json")))?;
    report.write_csv(a.out.join(format!("{label}_metrics.csv")))?;
    metrics::write_error_csv(&rows, a.out.join(format!("{label}_errors.csv")))?;
    println!(
        "{label}: MAE {:.4}  median {:.4}  Acc@5 {:.4}  (n = {})",
        report.mae, report.median, report.acc_at[&5], report.n
    );
    Ok(())
}

pub fn cmd_compare(a: &CompareArgs) -> anyhow::Result<()> {
    if a.runs == 0 {
        return Err(usage("--runs must be positive"));
    }
    let mut arms = if a.methods.is_empty() {
        CompareConfig::default_arms(false)
    } else {
        a.methods
            .iter()
            .map(|m| codec_for(m, false))
            .collect::<anyhow::Result<Vec<_>>>()?
    };
    if a.include_naive_da {
        arms.push(CodecSpec::naive_direct());
    }
    let train_cfg = a.opts.train_config(a.seed)?;
    let ds = Dataset::load(&a.data)?;
    let cfg = CompareConfig {
        arms,
        runs: a.runs,
        train: train_cfg,
        extractor: a.opts.extractor(ds.config.out_size)?,
    };
    let results = harness::run_compare(&ds, &cfg)?;

    create_dir(&a.out)?;
    write_text(&a.out.join("compare.csv"), &harness::render_csv(&results, a.runs))?;
    write_text(&a.out.join("compare.md"), &harness::render_markdown(&results, a.runs))?;
    let meta = harness::compare_meta(&ds, &cfg, &results);
    write_text(
        &a.out.join("compare_meta.json"),
        &(serde_json::to_string_pretty(&meta)? + "\n"),
    )?;
    for arm in &results {
        if let Ok(runs) = &arm.runs {
            for (r, run) in runs.iter().enumerate() {
                metrics::write_error_csv(
                    &run.errors,
                    a.out.join(format!("errors_{}_run{r}.csv", arm.label)),
                )?;
                write_log_csv(&run.log, a.out.join(format!("log_{}_run{r}.csv", arm.label)))?;
            }
        }
    }

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    write!(out, "{}", harness::render_markdown(&results, a.runs))?;
    for arm in &results {
        if let Err(msg) = &arm.runs {
            writeln!(out, "{} failed: {msg}", arm.label)?;
        }
    }
    Ok(())
}
