use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One manifest row. Paths are relative to the dataset root. Train rows point
/// at upright base images and carry angle 0; the trainer draws rotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub angle_deg: f64,
    pub scene_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub split: Split,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scene_seeds(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.scene_seed)
    }

    /// Angles in `[0, 360)` and unique paths.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !(e.angle_deg.is_finite() && (0.0..360.0).contains(&e.angle_deg)) {
                return Err(Error::Format {
                    what: "manifest",
                    detail: format!("angle {} of `{}` outside [0, 360)", e.angle_deg, e.path),
                });
            }
            if !seen.insert(e.path.as_str()) {
                return Err(Error::Format {
                    what: "manifest",
                    detail: format!("duplicate path `{}`", e.path),
                });
            }
        }
        Ok(())
    }

    /// Writes CSV with header `path,angle_deg,scene_seed`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        for e in &self.entries {
            w.serialize(e).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>, split: Split) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let headers = r.headers().map_err(|e| Error::csv(path, e))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["path", "angle_deg", "scene_seed"] {
            return Err(Error::Format {
                what: "manifest",
                detail: format!("{}: unexpected header {:?}", path.display(), headers),
            });
        }
        let entries = r
            .deserialize()
            .collect::<std::result::Result<Vec<ManifestEntry>, _>>()
            .map_err(|e| Error::csv(path, e))?;
        let m = Manifest { split, entries };
        m.validate()?;
        Ok(m)
    }
}
