//! JSON form of static transforms.
//!
//! ```json
//! { "transforms": [
//!     { "parent": "apartment", "child": "kinect1",
//!       "translation": [0.2, 7.8, 2.2], "yaw_deg": -45.0 },
//!     { "parent": "apartment", "child": "kinect2",
//!       "translation": [5.8, 7.8, 2.2], "quaternion": [0.92, 0.0, 0.0, -0.38] }
//! ] }
//! ```
//!
//! Rotation is given by at most one of `yaw_deg` (about +z) or `quaternion`
//! (w, x, y, z; renormalized on load). Neither means no rotation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rigid::{Quaternion, RigidTransform};
use super::tree::{TransformError, TransformTree};
use crate::geometry::Vec3;

#[derive(Debug, Error)]
pub enum TransformConfigError {
    #[error("reading transform file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing transform file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("edge `{parent}` -> `{child}` gives both yaw_deg and quaternion")]
    BothRotations { parent: String, child: String },
    #[error(transparent)]
    Tree(#[from] TransformError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticEdgeSpec {
    pub parent: String,
    pub child: String,
    #[serde(default)]
    pub translation: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yaw_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quaternion: Option<[f64; 4]>,
}

impl StaticEdgeSpec {
    pub fn to_transform(&self) -> Result<RigidTransform<f64>, TransformConfigError> {
        let rotation = match (self.yaw_deg, self.quaternion) {
            (Some(_), Some(_)) => {
                return Err(TransformConfigError::BothRotations { parent: self.parent.clone(), child: self.child.clone() })
            }
            (Some(yaw), None) => Quaternion::from_yaw(yaw.to_radians()),
            (None, Some([w, x, y, z])) => Quaternion::new(w, x, y, z),
            (None, None) => Quaternion::identity(),
        };
        let [x, y, z] = self.translation;
        Ok(RigidTransform::new(Vec3::new(x, y, z), rotation))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformFile {
    pub transforms: Vec<StaticEdgeSpec>,
}

impl TransformFile {
    pub fn from_json(text: &str) -> Result<Self, TransformConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, TransformConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn apply_to(&self, tree: &TransformTree<f64>) -> Result<(), TransformConfigError> {
        for e in &self.transforms {
            tree.set_static(&e.parent, &e.child, e.to_transform()?)?;
        }
        Ok(())
    }
}
