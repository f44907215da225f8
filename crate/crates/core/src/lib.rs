//! Zone co-presence from multi-sensor skeleton tracking.
//!
//! Geometry, transform and filter kernels are generic over [`Scalar`]; the
//! end-to-end pipeline works in `f64`. Aliases below name the common
//! instantiations.

pub mod ambulatogram;
pub mod evaluation;
pub mod filter;
pub mod format;
pub mod geometry;
pub mod ingestion;
pub mod pipeline;
pub mod scalar;
pub mod simulator;
pub mod track;
pub mod transform;
pub mod zones;

pub use ambulatogram::{Ambulatogram, PresenceInterval};
pub use evaluation::{evaluate, EvalReport};
pub use filter::{FilterConfig, FilterVerdict};
pub use geometry::{Point2, Vec3};
pub use ingestion::Detection;
pub use pipeline::{PipelineConfig, PipelineOutput};
pub use scalar::Scalar;
pub use track::{PersonKey, TrackSequence};
pub use transform::{Quaternion, RigidTransform, TransformTree};
pub use zones::{Zone, ZoneMap};

pub type Vec3d = Vec3<f64>;
pub type Vec3f = Vec3<f32>;
pub type Point2d = Point2<f64>;
pub type Point2f = Point2<f32>;
pub type Quatd = Quaternion<f64>;
pub type Quatf = Quaternion<f32>;
pub type RigidTransformd = RigidTransform<f64>;
pub type RigidTransformf = RigidTransform<f32>;
pub type TransformTreed = TransformTree<f64>;
