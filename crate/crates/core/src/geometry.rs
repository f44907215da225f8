//! Small vector types and planar predicates.
//!
//! Orientation tests run in floating point first and fall back to exact
//! rational arithmetic when the floating-point determinant is within its
//! rounding error bound, so boundary decisions never flicker.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn dot(&self, o: &Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, o: &Self) -> T {
        (*self - *o).norm()
    }

    /// Floor projection.
    pub fn xy(&self) -> Point2<T> {
        Point2::new(self.x, self.y)
    }

    pub fn lerp(&self, o: &Self, s: T) -> Self {
        *self + (*o - *self) * s
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
pub struct Point2<T: Copy> {
    pub x: T,
    pub y: T,
}

impl<T: Copy> From<[T; 2]> for Point2<T> {
    fn from(a: [T; 2]) -> Self {
        Self { x: a[0], y: a[1] }
    }
}

impl<T: Copy> From<Point2<T>> for [T; 2] {
    fn from(p: Point2<T>) -> Self {
        [p.x, p.y]
    }
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, o: &Self) -> T {
        (self.x - o.x).hypot(self.y - o.y)
    }

    /// Lexicographic (x, then y) ordering; NaN-free inputs assumed.
    pub fn lex_cmp(&self, o: &Self) -> Ordering {
        self.x
            .partial_cmp(&o.x)
            .unwrap_or(Ordering::Equal)
            .then(self.y.partial_cmp(&o.y).unwrap_or(Ordering::Equal))
    }
}

/// Sign of the turn a → b → c: `Greater` for counter-clockwise, `Less` for
/// clockwise, `Equal` for collinear. Exact for all finite inputs.
pub fn orient<T: Scalar>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> Ordering {
    let (ax, ay, bx, by, cx, cy) = (a.x.widen(), a.y.widen(), b.x.widen(), b.y.widen(), c.x.widen(), c.y.widen());
    let left = (bx - ax) * (cy - ay);
    let right = (by - ay) * (cx - ax);
    let det = left - right;
    // Shewchuk's ccwerrboundA.
    let bound = (3.0 + 16.0 * f64::EPSILON) * f64::EPSILON * (left.abs() + right.abs());
    if det > bound {
        return Ordering::Greater;
    }
    if -det > bound {
        return Ordering::Less;
    }
    orient_exact(ax, ay, bx, by, cx, cy)
}

fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()))
}

fn orient_exact(ax: f64, ay: f64, bx: f64, by: f64, cx: f64, cy: f64) -> Ordering {
    let (ax, ay, bx, by, cx, cy) = (rational(ax), rational(ay), rational(bx), rational(by), rational(cx), rational(cy));
    let det = (&bx - &ax) * (&cy - &ay) - (&by - &ay) * (&cx - &ax);
    if det.is_zero() {
        Ordering::Equal
    } else if det.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Closed-segment membership.
pub fn on_segment<T: Scalar>(a: Point2<T>, b: Point2<T>, p: Point2<T>) -> bool {
    orient(a, b, p) == Ordering::Equal && within_box(a, b, p)
}

fn within_box<T: Scalar>(a: Point2<T>, b: Point2<T>, p: Point2<T>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Whether closed segments [a,b] and [c,d] share at least one point.
pub fn segments_intersect<T: Scalar>(a: Point2<T>, b: Point2<T>, c: Point2<T>, d: Point2<T>) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 != o2 && o3 != o4 && o1 != Ordering::Equal && o2 != Ordering::Equal && o3 != Ordering::Equal && o4 != Ordering::Equal {
        return true;
    }
    (o1 == Ordering::Equal && within_box(a, b, c))
        || (o2 == Ordering::Equal && within_box(a, b, d))
        || (o3 == Ordering::Equal && within_box(c, d, a))
        || (o4 == Ordering::Equal && within_box(c, d, b))
}

/// Segments cross at a single point interior to both.
pub fn segments_cross_properly<T: Scalar>(a: Point2<T>, b: Point2<T>, c: Point2<T>, d: Point2<T>) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    [o1, o2, o3, o4].iter().all(|o| *o != Ordering::Equal) && o1 != o2 && o3 != o4
}

/// Where a point sits relative to a closed polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

/// Crossing-number point location. Boundary points are detected exactly
/// before the parity test; the parity test itself uses exact orientation.
pub fn locate<T: Scalar>(vertices: &[Point2<T>], p: Point2<T>) -> Location {
    let n = vertices.len();
    if n == 0 {
        return Location::Outside;
    }
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if on_segment(a, b, p) {
            return Location::Boundary;
        }
        if a.y <= p.y && b.y > p.y {
            if orient(a, b, p) == Ordering::Greater {
                inside = !inside;
            }
        } else if b.y <= p.y && a.y > p.y && orient(a, b, p) == Ordering::Less {
            inside = !inside;
        }
    }
    if inside {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// Boundary-inclusive containment.
pub fn contains_closed<T: Scalar>(vertices: &[Point2<T>], p: Point2<T>) -> bool {
    locate(vertices, p) != Location::Outside
}

/// Signed shoelace area; positive for counter-clockwise rings.
pub fn signed_area<T: Scalar>(vertices: &[Point2<T>]) -> T {
    let n = vertices.len();
    let mut acc = T::zero();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        acc = acc + (a.x * b.y - b.x * a.y);
    }
    acc * T::half()
}

/// Area centroid of a simple polygon. Falls back to the vertex mean for
/// degenerate rings.
pub fn centroid<T: Scalar>(vertices: &[Point2<T>]) -> Point2<T> {
    let n = vertices.len();
    let area = signed_area(vertices);
    if n == 0 {
        return Point2::new(T::zero(), T::zero());
    }
    if area == T::zero() {
        let k = T::from_usize(n).unwrap_or_else(T::one);
        let sx: T = vertices.iter().map(|p| p.x).sum();
        let sy: T = vertices.iter().map(|p| p.y).sum();
        return Point2::new(sx / k, sy / k);
    }
    let (mut cx, mut cy) = (T::zero(), T::zero());
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let cross = a.x * b.y - b.x * a.y;
        cx = cx + (a.x + b.x) * cross;
        cy = cy + (a.y + b.y) * cross;
    }
    let six = T::lit(6.0) * area;
    Point2::new(cx / six, cy / six)
}

/// True when any two non-adjacent edges touch, or adjacent edges overlap
/// beyond their shared vertex.
pub fn is_self_intersecting<T: Scalar>(vertices: &[Point2<T>]) -> bool {
    let n = vertices.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if a == b {
            return true;
        }
        for j in (i + 1)..n {
            let c = vertices[j];
            let d = vertices[(j + 1) % n];
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Shared vertex is fine; folding back onto the previous edge is not.
                let (shared, other_ab, other_cd) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                if orient(other_ab, shared, other_cd) == Ordering::Equal {
                    let dx1 = (other_ab.x - shared.x).widen();
                    let dy1 = (other_ab.y - shared.y).widen();
                    let dx2 = (other_cd.x - shared.x).widen();
                    let dy2 = (other_cd.y - shared.y).widen();
                    if dx1 * dx2 + dy1 * dy2 > 0.0 {
                        return true;
                    }
                }
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    #[test]
    fn orientation_signs() {
        assert_eq!(orient(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)), Ordering::Greater);
        assert_eq!(orient(p(0.0, 0.0), p(1.0, 0.0), p(0.0, -1.0)), Ordering::Less);
        assert_eq!(orient(p(0.0, 0.0), p(1.0, 1.0), p(3.0, 3.0)), Ordering::Equal);
    }

    #[test]
    fn exact_fallback_resolves_near_collinear() {
        // 0.1 + 0.2 style rounding: c lies exactly on the line through a, b
        // only in real arithmetic if the decimal values were exact, which they
        // are not. The exact path must agree with a rational evaluation.
        let a = p(0.1, 0.1);
        let b = p(0.3, 0.3);
        let c = p(0.2, 0.2);
        let expected = orient_exact(0.1, 0.1, 0.3, 0.3, 0.2, 0.2);
        assert_eq!(orient(a, b, c), expected);
    }

    #[test]
    fn square_locations() {
        let sq = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        assert_eq!(locate(&sq, p(0.5, 0.5)), Location::Inside);
        assert_eq!(locate(&sq, p(1.0, 0.5)), Location::Boundary);
        assert_eq!(locate(&sq, p(0.0, 0.0)), Location::Boundary);
        assert_eq!(locate(&sq, p(1.5, 0.5)), Location::Outside);
        assert_eq!(locate(&sq, p(0.5, 1.0 + 1e-15)), Location::Outside);
    }

    #[test]
    fn bowtie_is_self_intersecting() {
        let bowtie = [p(0.0, 0.0), p(1.0, 1.0), p(1.0, 0.0), p(0.0, 1.0)];
        assert!(is_self_intersecting(&bowtie));
        let sq = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        assert!(!is_self_intersecting(&sq));
    }

    #[test]
    fn centroid_of_rectangle() {
        let r = [p(0.0, 0.0), p(4.0, 0.0), p(4.0, 2.0), p(0.0, 2.0)];
        let c = centroid(&r);
        assert!((c.x - 2.0).abs() < 1e-12 && (c.y - 1.0).abs() < 1e-12);
        assert!((signed_area(&r) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn works_for_f32() {
        let sq = [
            Point2::new(0.0f32, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        assert!(contains_closed(&sq, Point2::new(0.25f32, 0.75)));
        assert!(contains_closed(&sq, Point2::new(0.0f32, 0.75)));
    }
}
