//! Rigid transforms and the frame tree used to project sensor-frame
//! detections into the apartment frame.

mod config;
mod rigid;
mod tree;

pub use config::{StaticEdgeSpec, TransformConfigError, TransformFile};
pub use rigid::{compose, transform_point, Quaternion, RigidTransform};
pub use tree::{interpolate, Retention, StampedTransform, TransformError, TransformTree, TreeConfig};

/// Root frame of the home.
pub const APARTMENT_FRAME: &str = "apartment";

/// Frame id of the k-th person slot seen by a sensor, e.g. `kinect1/user3`.
pub fn user_frame(sensor: &str, local_id: u32) -> String {
    format!("{sensor}/user{local_id}")
}
