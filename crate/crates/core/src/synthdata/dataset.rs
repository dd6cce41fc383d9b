use super::manifest::{Manifest, ManifestEntry, Split};
use super::{make_sample, render_base, SceneSpec, SceneStyle};
use crate::circmath::{self, Angle};
use crate::error::{Error, Result};
use crate::raster::RasterImage;
use crate::seeding;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs;
use std::path::Path;

pub const DATASET_FILE: &str = "dataset.json";

/// Everything needed to regenerate a dataset bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    /// Scenes in the train pool; `round(n_train · val_fraction)` of them are
    /// held out for validation.
    pub n_train: usize,
    pub val_fraction: f64,
    pub n_test: usize,
    pub split_seed: u64,
    pub test_seed: u64,
    pub style: SceneStyle,
    pub scene_size: usize,
    pub noise_std: f64,
    pub out_size: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            n_train: 2000,
            val_fraction: 0.1,
            n_test: 500,
            split_seed: 1,
            test_seed: 2,
            style: SceneStyle::GradientHorizon,
            scene_size: 96,
            noise_std: 0.0,
            out_size: 64,
        }
    }
}

impl DatasetConfig {
    pub fn n_val(&self) -> usize {
        (self.n_train as f64 * self.val_fraction).round() as usize
    }

    pub fn scene(&self, seed: u64) -> SceneSpec {
        SceneSpec {
            seed,
            size: self.scene_size,
            style: self.style,
            noise_std: self.noise_std,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_test == 0 {
            return Err(Error::InvalidParameter(
                "train and test counts must be positive".into(),
            ));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "validation fraction must lie in (0, 1), got {}",
                self.val_fraction
            )));
        }
        let n_val = self.n_val();
        if n_val == 0 || n_val >= self.n_train {
            return Err(Error::InvalidParameter(format!(
                "{} train scenes with fraction {} leave no room for both splits",
                self.n_train, self.val_fraction
            )));
        }
        if self.out_size == 0 {
            return Err(Error::InvalidParameter("out_size must be positive".into()));
        }
        Ok(())
    }
}

fn uniform_angle(seed: u64, tag: u64, index: u64) -> f64 {
    let u: f64 = seeding::rng(seed, tag, index).random();
    circmath::normalize(u * 360.0)
        .expect("finite")
        .degrees()
}

/// Unique scene seeds for one stream, skipping anything already taken.
fn scene_seeds(seed: u64, tag: u64, count: usize, taken: &mut HashSet<u64>) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut index = 0u64;
    while out.len() < count {
        let s = seeding::derive(seed, tag, index);
        if taken.insert(s) {
            out.push(s);
        }
        index += 1;
    }
    out
}

/// Train / validation / test manifests.
///
/// Scene seeds for all three splits come from `split_seed` and are disjoint;
/// the last `n_val` scenes of the train pool form the validation split.
/// Validation angles are fixed by `split_seed` and test angles by `test_seed`,
/// so changing only `test_seed` re-rotates the same test scenes.
pub fn build_splits(cfg: &DatasetConfig) -> Result<(Manifest, Manifest, Manifest)> {
    cfg.validate()?;
    let mut taken = HashSet::new();
    let pool = scene_seeds(cfg.split_seed, seeding::TAG_TRAIN_POOL, cfg.n_train, &mut taken);
    let test_scenes = scene_seeds(cfg.split_seed, seeding::TAG_TEST_SCENE, cfg.n_test, &mut taken);
    let n_fit = cfg.n_train - cfg.n_val();

    let train = Manifest {
        split: Split::Train,
        entries: pool[..n_fit]
            .iter()
            .enumerate()
            .map(|(i, &seed)| ManifestEntry {
                path: format!("train/{i:06}.png"),
                angle_deg: 0.0,
                scene_seed: seed,
            })
            .collect(),
    };
    let val = Manifest {
        split: Split::Val,
        entries: pool[n_fit..]
            .iter()
            .enumerate()
            .map(|(i, &seed)| ManifestEntry {
                path: format!("val/{i:06}.png"),
                angle_deg: uniform_angle(cfg.split_seed, seeding::TAG_VAL_ANGLE, i as u64),
                scene_seed: seed,
            })
            .collect(),
    };
    let test = Manifest {
        split: Split::Test,
        entries: test_scenes
            .iter()
            .enumerate()
            .map(|(i, &seed)| ManifestEntry {
                path: format!("test/{i:06}.png"),
                angle_deg: uniform_angle(cfg.test_seed, seeding::TAG_TEST_ANGLE, i as u64),
                scene_seed: seed,
            })
            .collect(),
    };
    Ok((train, val, test))
}

/// An upright training scene; rotations are drawn by the trainer.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainScene {
    pub path: String,
    pub scene_seed: u64,
    pub base: RasterImage,
}

/// A frozen, already rotated and cropped evaluation image.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalItem {
    pub path: String,
    pub scene_seed: u64,
    pub true_angle: Angle,
    pub image: RasterImage,
}

/// Materialized splits.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub config: DatasetConfig,
    pub train: Vec<TrainScene>,
    pub val: Vec<EvalItem>,
    pub test: Vec<EvalItem>,
}

impl Dataset {
    /// Renders every split in memory.
    pub fn render(cfg: &DatasetConfig) -> Result<Self> {
        let (train_m, val_m, test_m) = build_splits(cfg)?;
        let train = train_m
            .entries
            .par_iter()
            .map(|e| {
                Ok(TrainScene {
                    path: e.path.clone(),
                    scene_seed: e.scene_seed,
                    base: render_base(&cfg.scene(e.scene_seed))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let eval = |m: &Manifest| {
            m.entries
                .par_iter()
                .map(|e| {
                    let theta = Angle::new(e.angle_deg)?;
                    let sample = make_sample(&cfg.scene(e.scene_seed), theta, cfg.out_size)?;
                    Ok(EvalItem {
                        path: e.path.clone(),
                        scene_seed: e.scene_seed,
                        true_angle: theta,
                        image: sample.image,
                    })
                })
                .collect::<Result<Vec<_>>>()
        };
        Ok(Dataset {
            config: cfg.clone(),
            train,
            val: eval(&val_m)?,
            test: eval(&test_m)?,
        })
    }

    /// Writes PNG images under `train/`, `val/`, `test/`, the three manifests
    /// and `dataset.json`.
    pub fn write(&self, root: impl AsRef<Path>) -> Result<()> {
        let root = root.as_ref();
        for split in [Split::Train, Split::Val, Split::Test] {
            let dir = root.join(split.name());
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        self.train
            .par_iter()
            .try_for_each(|s| s.base.write_png(root.join(&s.path)))?;
        self.val
            .par_iter()
            .chain(self.test.par_iter())
            .try_for_each(|s| s.image.write_png(root.join(&s.path)))?;

        let (train_m, val_m, test_m) = self.manifests();
        train_m.write_csv(root.join("train.csv"))?;
        val_m.write_csv(root.join("val.csv"))?;
        test_m.write_csv(root.join("test.csv"))?;

        let cfg_path = root.join(DATASET_FILE);
        let json = serde_json::to_string_pretty(&self.config).expect("serializable config");
        fs::write(&cfg_path, json + "\n").map_err(|e| Error::io(&cfg_path, e))
    }

    pub fn manifests(&self) -> (Manifest, Manifest, Manifest) {
        let eval = |split, items: &[EvalItem]| Manifest {
            split,
            entries: items
                .iter()
                .map(|s| ManifestEntry {
                    path: s.path.clone(),
                    angle_deg: s.true_angle.degrees(),
                    scene_seed: s.scene_seed,
                })
                .collect(),
        };
        let train = Manifest {
            split: Split::Train,
            entries: self
                .train
                .iter()
                .map(|s| ManifestEntry {
                    path: s.path.clone(),
                    angle_deg: 0.0,
                    scene_seed: s.scene_seed,
                })
                .collect(),
        };
        (train, eval(Split::Val, &self.val), eval(Split::Test, &self.test))
    }

    pub fn read_config(root: impl AsRef<Path>) -> Result<DatasetConfig> {
        let path = root.as_ref().join(DATASET_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            what: "dataset.json",
            detail: e.to_string(),
        })
    }

    /// Loads a dataset written by [`Dataset::write`] (or laid out the same
    /// way) from disk.
    pub fn load(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref();
        let config = Self::read_config(root)?;
        let train_m = Manifest::read_csv(root.join("train.csv"), Split::Train)?;
        let val_m = Manifest::read_csv(root.join("val.csv"), Split::Val)?;
        let test_m = Manifest::read_csv(root.join("test.csv"), Split::Test)?;
        let train = train_m
            .entries
            .par_iter()
            .map(|e| {
                Ok(TrainScene {
                    path: e.path.clone(),
                    scene_seed: e.scene_seed,
                    base: RasterImage::read_png(root.join(&e.path))?.to_gray(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            config,
            train,
            val: load_eval(root, &val_m)?,
            test: load_eval(root, &test_m)?,
        })
    }
}

/// Reads the images referenced by an evaluation manifest.
pub fn load_eval(root: &Path, manifest: &Manifest) -> Result<Vec<EvalItem>> {
    manifest
        .entries
        .par_iter()
        .map(|e| {
            Ok(EvalItem {
                path: e.path.clone(),
                scene_seed: e.scene_seed,
                true_angle: Angle::new(e.angle_deg)?,
                image: RasterImage::read_png(root.join(&e.path))?.to_gray(),
            })
        })
        .collect()
}
