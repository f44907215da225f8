//! Purpose-specific areas drawn on the apartment floor, independent of walls.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, Location, Point2};
use crate::scalar::Scalar;

/// Floor plan shipped with the crate: an 80 m² three-room layout. Geometry is
/// illustrative.
pub const DEFAULT_ZONES_JSON: &str = include_str!("../data/livinlab.zones.json");

#[derive(Debug, Error)]
pub enum ZoneError {
    #[error("reading zone file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing zone file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("zone map is invalid: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ZoneIssue>),
    #[error("unknown zone `{0}`")]
    UnknownZone(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone<T: Copy = f64> {
    pub name: String,
    pub covered: bool,
    #[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
    pub vertices: Vec<Point2<T>>,
}

impl<T: Scalar> Zone<T> {
    pub fn new(name: impl Into<String>, covered: bool, vertices: Vec<Point2<T>>) -> Self {
        Self { name: name.into(), covered, vertices }
    }

    pub fn contains(&self, p: Point2<T>) -> bool {
        geometry::contains_closed(&self.vertices, p)
    }

    pub fn area(&self) -> T {
        geometry::signed_area(&self.vertices).abs()
    }

    pub fn centroid(&self) -> Point2<T> {
        geometry::centroid(&self.vertices)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZoneIssue {
    pub severity: Severity,
    pub message: String,
}

impl std::fmt::Display for ZoneIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Ordered zones. Order is the classification priority.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZoneMap<T: Copy = f64> {
    #[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
    pub zones: Vec<Zone<T>>,
}

impl<T: Scalar> ZoneMap<T> {
    pub fn new(zones: Vec<Zone<T>>) -> Self {
        Self { zones }
    }

    /// First zone in list order whose closed polygon contains `p`.
    pub fn classify(&self, p: Point2<T>) -> Option<&str> {
        self.classify_index(p).map(|i| self.zones[i].name.as_str())
    }

    pub fn classify_index(&self, p: Point2<T>) -> Option<usize> {
        self.zones.iter().position(|z| z.contains(p))
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.zones.iter().position(|z| z.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&Zone<T>> {
        self.zones.iter().find(|z| z.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.zones.iter().map(|z| z.name.clone()).collect()
    }

    pub fn covered_names(&self) -> Vec<String> {
        self.zones.iter().filter(|z| z.covered).map(|z| z.name.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    /// Structural checks. Errors: fewer than three vertices, zero area,
    /// self-intersection, duplicate names. Warnings: covered zones whose
    /// interiors overlap.
    pub fn validate(&self) -> Vec<ZoneIssue> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for z in &self.zones {
            if !seen.insert(z.name.as_str()) {
                out.push(ZoneIssue { severity: Severity::Error, message: format!("duplicate zone name `{}`", z.name) });
            }
            if z.vertices.len() < 3 {
                out.push(ZoneIssue { severity: Severity::Error, message: format!("zone `{}` has fewer than 3 vertices", z.name) });
                continue;
            }
            if geometry::is_self_intersecting(&z.vertices) {
                out.push(ZoneIssue { severity: Severity::Error, message: format!("zone `{}` is self-intersecting", z.name) });
            } else if z.area() == T::zero() {
                out.push(ZoneIssue { severity: Severity::Error, message: format!("zone `{}` has zero area", z.name) });
            }
        }
        let covered: Vec<&Zone<T>> = self.zones.iter().filter(|z| z.covered && z.vertices.len() >= 3).collect();
        for (i, a) in covered.iter().enumerate() {
            for b in &covered[i + 1..] {
                if interiors_overlap(&a.vertices, &b.vertices) {
                    out.push(ZoneIssue {
                        severity: Severity::Warning,
                        message: format!("covered zones `{}` and `{}` overlap", a.name, b.name),
                    });
                }
            }
        }
        out
    }

    /// Runs [`validate`](Self::validate) and fails on any error, returning
    /// the remaining warnings.
    pub fn ensure_valid(&self) -> Result<Vec<ZoneIssue>, ZoneError> {
        let issues = self.validate();
        if issues.iter().any(|i| i.severity == Severity::Error) {
            return Err(ZoneError::Invalid(issues));
        }
        Ok(issues)
    }
}

impl ZoneMap<f64> {
    pub fn from_json(text: &str) -> Result<Self, ZoneError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ZoneError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn livinlab() -> Self {
        Self::from_json(DEFAULT_ZONES_JSON).expect("bundled zone file parses")
    }
}

fn interiors_overlap<T: Scalar>(a: &[Point2<T>], b: &[Point2<T>]) -> bool {
    let (na, nb) = (a.len(), b.len());
    for i in 0..na {
        for j in 0..nb {
            if geometry::segments_cross_properly(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb]) {
                return true;
            }
        }
    }
    let strictly_in = |poly: &[Point2<T>], p: Point2<T>| geometry::locate(poly, p) == Location::Inside;
    if a.iter().any(|&p| strictly_in(b, p)) || b.iter().any(|&p| strictly_in(a, p)) {
        return true;
    }
    // Coincident or nested-with-shared-boundary rings.
    let ca = geometry::centroid(a);
    let cb = geometry::centroid(b);
    (strictly_in(a, ca) && strictly_in(b, ca)) || (strictly_in(a, cb) && strictly_in(b, cb))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(name: &str, x0: f64, y0: f64, side: f64, covered: bool) -> Zone {
        Zone::new(
            name,
            covered,
            vec![
                Point2::new(x0, y0),
                Point2::new(x0 + side, y0),
                Point2::new(x0 + side, y0 + side),
                Point2::new(x0, y0 + side),
            ],
        )
    }

    #[test]
    fn classify_inside_outside() {
        let m = ZoneMap::new(vec![square("unit", 0.0, 0.0, 1.0, true)]);
        assert_eq!(m.classify(Point2::new(0.5, 0.5)), Some("unit"));
        assert_eq!(m.classify(Point2::new(10.0, 10.0)), None);
    }

    #[test]
    fn shared_edge_goes_to_first_zone() {
        let m = ZoneMap::new(vec![square("left", 0.0, 0.0, 1.0, true), square("right", 1.0, 0.0, 1.0, true)]);
        assert_eq!(m.classify(Point2::new(1.0, 0.5)), Some("left"));
        let swapped = ZoneMap::new(vec![square("right", 1.0, 0.0, 1.0, true), square("left", 0.0, 0.0, 1.0, true)]);
        assert_eq!(swapped.classify(Point2::new(1.0, 0.5)), Some("right"));
    }

    #[test]
    fn default_map_is_clean() {
        let m = ZoneMap::livinlab();
        assert!(m.validate().is_empty(), "{:?}", m.validate());
        assert_eq!(m.covered_names(), vec!["kitchen", "dining-room", "bedroom", "office"]);
        let uncovered: Vec<_> = m.zones.iter().filter(|z| !z.covered).map(|z| z.name.as_str()).collect();
        assert_eq!(uncovered, vec!["living-room", "bathroom", "outside"]);
        let indoor: f64 = m.zones.iter().filter(|z| z.name != "outside").map(|z| z.area()).sum();
        assert!((indoor - 80.0).abs() < 1e-9);
    }

    #[test]
    fn identical_squares_warn() {
        let m = ZoneMap::new(vec![square("a", 0.0, 0.0, 1.0, true), square("b", 0.0, 0.0, 1.0, true)]);
        let issues = m.validate();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].severity, Severity::Warning);
        assert!(m.ensure_valid().is_ok());
    }

    #[test]
    fn adjacent_squares_do_not_warn() {
        let m = ZoneMap::new(vec![square("a", 0.0, 0.0, 1.0, true), square("b", 1.0, 0.0, 1.0, true)]);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn bowtie_and_duplicates_are_errors() {
        let bowtie = Zone::new(
            "bow",
            true,
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
        );
        let m = ZoneMap::new(vec![bowtie]);
        assert!(m.validate().iter().any(|i| i.severity == Severity::Error && i.message.contains("self-intersecting")));
        assert!(m.ensure_valid().is_err());

        let dup = ZoneMap::new(vec![square("a", 0.0, 0.0, 1.0, false), square("a", 5.0, 0.0, 1.0, false)]);
        assert!(dup.validate().iter().any(|i| i.message.contains("duplicate")));
    }

    #[test]
    fn degenerate_polygons_rejected() {
        let line = Zone::new("line", false, vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)]);
        let two = Zone::new("two", false, vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]);
        let issues = ZoneMap::new(vec![line, two]).validate();
        assert_eq!(issues.iter().filter(|i| i.severity == Severity::Error).count(), 2);
    }

    #[test]
    fn json_round_trip_shape() {
        let m = ZoneMap::from_json(r#"[{"name":"k","covered":true,"vertices":[[0,0],[2,0],[2,2]]}]"#).unwrap();
        assert_eq!(m.zones[0].vertices[1], Point2::new(2.0, 0.0));
        let back = serde_json::to_string(&m).unwrap();
        assert!(back.contains("\"vertices\":[[0.0,0.0],[2.0,0.0],[2.0,2.0]]"));
    }
}
