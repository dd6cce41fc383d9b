//! Circular-aware rotation angle estimation.
//!
//! The crate bundles five angle representations ([`codecs`]) behind one
//! encode / loss / decode interface, together with everything needed to
//! compare them end to end at desk scale:
//!
//! - [`circmath`]: canonical angles and circular distance.
//! - [`geometry`]: rotation, largest-inscribed-rectangle cropping, resizing.
//! - [`synthdata`]: seeded synthetic scenes with a known upright direction.
//! - [`model`]: feature extraction and a small MLP head with backprop.
//! - [`metrics`]: MAE, RMSE, percentiles, `Acc@k` and `AUC@k` over circular errors.
//! - [`harness`]: training and evaluating every method on a shared dataset.
//! - [`cli`]: the `angleheads` command-line front end.

pub mod circmath;
pub mod cli;
pub mod codecs;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod raster;
pub mod seeding;
pub mod synthdata;

pub use circmath::Angle;
pub use codecs::{CodecSpec, Method};
pub use error::{Error, Result};
pub use raster::RasterImage;
