//! Depth-sensor placement and fields of view.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::geometry::{self, Point2};
use crate::transform::{RigidTransform, StaticEdgeSpec, TransformTree, APARTMENT_FRAME};
use crate::zones::ZoneMap;

pub const DEFAULT_SENSORS_JSON: &str = include_str!("../../data/sensors.json");

fn default_max_tracks() -> usize {
    6
}

/// One sensor as written in the sensors file. The pose maps sensor-frame
/// coordinates into the apartment frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub id: String,
    pub translation: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yaw_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quaternion: Option<[f64; 4]>,
    /// Floor regions seen by the sensor.
    pub fov: Vec<Vec<[f64; 2]>>,
    #[serde(default = "default_max_tracks")]
    pub max_tracks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorsFile {
    pub sensors: Vec<SensorSpec>,
}

/// A sensor ready for simulation and projection.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorConfig {
    pub id: String,
    pub pose: RigidTransform<f64>,
    pub fov: Vec<Vec<Point2<f64>>>,
    pub max_tracks: usize,
}

impl SensorConfig {
    pub fn sees(&self, p: Point2<f64>) -> bool {
        self.fov.iter().any(|poly| geometry::contains_closed(poly, p))
    }
}

impl SensorSpec {
    pub fn edge(&self) -> StaticEdgeSpec {
        StaticEdgeSpec {
            parent: APARTMENT_FRAME.to_string(),
            child: self.id.clone(),
            translation: self.translation,
            yaw_deg: self.yaw_deg,
            quaternion: self.quaternion,
        }
    }

    pub fn to_config(&self) -> Result<SensorConfig, SimError> {
        let pose = self.edge().to_transform().map_err(|e| SimError::Invalid(e.to_string()))?;
        if self.fov.iter().any(|p| p.len() < 3) {
            return Err(SimError::Invalid(format!("sensor `{}` has a field-of-view polygon with < 3 vertices", self.id)));
        }
        Ok(SensorConfig {
            id: self.id.clone(),
            pose,
            fov: self.fov.iter().map(|poly| poly.iter().map(|&v| Point2::from(v)).collect()).collect(),
            max_tracks: self.max_tracks,
        })
    }
}

impl SensorsFile {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Parse(format!("sensors: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn default_livinlab() -> Self {
        Self::from_json(DEFAULT_SENSORS_JSON).expect("bundled sensors parse")
    }

    pub fn configs(&self) -> Result<Vec<SensorConfig>, SimError> {
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.sensors {
            if !seen.insert(s.id.as_str()) {
                return Err(SimError::Invalid(format!("duplicate sensor id `{}`", s.id)));
            }
        }
        self.sensors.iter().map(SensorSpec::to_config).collect()
    }

    /// Static apartment -> sensor edges.
    pub fn build_tree(&self, tree: &TransformTree<f64>) -> Result<(), SimError> {
        for s in &self.sensors {
            let pose = s.edge().to_transform().map_err(|e| SimError::Invalid(e.to_string()))?;
            tree.set_static(APARTMENT_FRAME, &s.id, pose).map_err(|e| SimError::Invalid(e.to_string()))?;
        }
        Ok(())
    }
}

/// Places where field-of-view coverage and covered zones disagree, found by
/// probing a grid of `step` meters over the map's bounding box. Probe points
/// are offset by half a step so they avoid grid-aligned boundaries.
pub fn coverage_mismatches(sensors: &[SensorConfig], map: &ZoneMap, step: f64) -> Vec<Point2<f64>> {
    let pts = map.zones.iter().flat_map(|z| z.vertices.iter().copied());
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let mut out = Vec::new();
    if !x0.is_finite() {
        return out;
    }
    let nx = ((x1 - x0) / step).ceil() as usize;
    let ny = ((y1 - y0) / step).ceil() as usize;
    for i in 0..nx {
        for j in 0..ny {
            let p = Point2::new(x0 + (i as f64 + 0.5) * step, y0 + (j as f64 + 0.5) * step);
            let covered = map.classify_index(p).is_some_and(|z| map.zones[z].covered);
            if covered != sensors.iter().any(|s| s.sees(p)) {
                out.push(p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sensors_cover_exactly_the_covered_zones() {
        let sensors = SensorsFile::default_livinlab().configs().unwrap();
        assert_eq!(sensors.len(), 3);
        assert!(coverage_mismatches(&sensors, &ZoneMap::livinlab(), 0.1).is_empty());
    }

    #[test]
    fn tree_has_every_sensor() {
        let tree = TransformTree::default();
        SensorsFile::default_livinlab().build_tree(&tree).unwrap();
        for id in ["kinect1", "kinect2", "kinect3"] {
            assert!(tree.has_frame(id));
        }
    }
}
