//! Convex hull of floor positions and its perimeter.

use std::cmp::Ordering;

use thiserror::Error;

use crate::geometry::{orient, Point2};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HullError {
    #[error("convex hull of an empty point set")]
    Empty,
}

/// Andrew's monotone chain. Vertices come back counter-clockwise starting at
/// the lexicographically smallest point, without collinear boundary points.
/// Collinear input yields the two extreme points; a single distinct point
/// yields itself.
pub fn convex_hull<T: Scalar>(points: &[Point2<T>]) -> Result<Vec<Point2<T>>, HullError> {
    if points.is_empty() {
        return Err(HullError::Empty);
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts.dedup();
    if pts.len() < 3 {
        return Ok(pts);
    }

    let mut lower: Vec<Point2<T>> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) != Ordering::Greater {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2<T>> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) != Ordering::Greater {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Ok(lower)
}

/// Perimeter of the convex hull. A two-point hull counts the segment twice
/// (out and back) so a straight walk scores like a thin polygon.
pub fn hull_perimeter<T: Scalar>(points: &[Point2<T>]) -> Result<T, HullError> {
    Ok(ring_length(&convex_hull(points)?))
}

/// Closed-ring length of an ordered vertex list.
pub fn ring_length<T: Scalar>(ring: &[Point2<T>]) -> T {
    match ring.len() {
        0 | 1 => T::zero(),
        2 => T::two() * ring[0].distance(&ring[1]),
        n => (0..n).map(|i| ring[i].distance(&ring[(i + 1) % n])).sum(),
    }
}
