//! tactsim — synthetic rendering and perception for 3D-printed vision-based
//! tactile sensors.
//!
//! The crate is organised around the pipeline a tactile frame goes through:
//!
//! 1. **model** – sensor configurations, the five sensor presets and validation.
//! 2. **markers** – dot, double-layer, tessellated and coordinate marker layouts.
//! 3. **contact** – analytic indenters, penetration depth and surface displacement.
//! 4. **render** – intensity, marker, total-internal-reflection renders and lens texture.
//! 5. **ssim** – windowed structural similarity.
//! 6. **perception** – detection, matching, depth inversion, segmentation, pose, features, k-NN.
//! 7. **cost** – per-volume print metrics and batch amortisation.
//! 8. **dataset** – seeded recipes and manifests for recognition experiments.

pub mod color;
pub mod contact;
pub mod cost;
pub mod dataset;
pub mod error;
pub mod geom;
pub mod io;
pub mod markers;
pub mod model;
pub mod perception;
pub mod render;
pub mod ssim;
pub mod textfmt;

pub use color::Rgb;
pub use error::{Error, Result};
pub use model::{preset, validate_config, Mechanism, SensorConfig, SensorVariant, Severity, Violation};
