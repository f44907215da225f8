use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::scalar::Scalar;

/// Rotation quaternion stored as (w, x, y, z). Kept at unit norm by every
/// constructor and product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Quaternion<T> {
    pub fn identity() -> Self {
        Self { w: T::one(), x: T::zero(), y: T::zero(), z: T::zero() }
    }

    /// Builds and renormalizes. A zero quaternion collapses to identity.
    pub fn new(w: T, x: T, y: T, z: T) -> Self {
        Self { w, x, y, z }.normalized()
    }

    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Self {
        let n = axis.norm();
        if n == T::zero() {
            return Self::identity();
        }
        let half = angle * T::half();
        let s = half.sin() / n;
        Self::new(half.cos(), axis.x * s, axis.y * s, axis.z * s)
    }

    /// Rotation about +z by `yaw` radians.
    pub fn from_yaw(yaw: T) -> Self {
        Self::from_axis_angle(Vec3::new(T::zero(), T::zero(), T::one()), yaw)
    }

    pub fn norm(&self) -> T {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n == T::zero() || !n.is_finite() {
            return Self::identity();
        }
        Self { w: self.w / n, x: self.x / n, y: self.y / n, z: self.z / n }
    }

    pub fn conjugate(&self) -> Self {
        Self { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn dot(&self, o: &Self) -> T {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Hamilton product, renormalized.
    pub fn mul(&self, o: &Self) -> Self {
        Self {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
        .normalized()
    }

    pub fn rotate(&self, v: Vec3<T>) -> Vec3<T> {
        // v' = v + 2w(q×v) + 2 q×(q×v)
        let q = Vec3::new(self.x, self.y, self.z);
        let t = q.cross(&v) * T::two();
        v + t * self.w + q.cross(&t)
    }

    /// Row-major 3×3 rotation matrix.
    pub fn to_matrix(&self) -> [[T; 3]; 3] {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let one = T::one();
        let two = T::two();
        [
            [one - two * (y * y + z * z), two * (x * y - w * z), two * (x * z + w * y)],
            [two * (x * y + w * z), one - two * (x * x + z * z), two * (y * z - w * x)],
            [two * (x * z - w * y), two * (y * z + w * x), one - two * (x * x + y * y)],
        ]
    }

    /// Rotation angle in [0, π] between two orientations.
    pub fn angle_to(&self, o: &Self) -> T {
        let d = self.dot(o).abs().min(T::one());
        T::two() * d.acos()
    }

    /// Shortest-arc spherical interpolation.
    pub fn slerp(&self, other: &Self, s: T) -> Self {
        let mut end = *other;
        let mut cos = self.dot(other);
        if cos < T::zero() {
            end = Self { w: -end.w, x: -end.x, y: -end.y, z: -end.z };
            cos = -cos;
        }
        let (k0, k1) = if cos > T::lit(1.0 - 1e-12) {
            (T::one() - s, s)
        } else {
            let theta = cos.min(T::one()).acos();
            let sin = theta.sin();
            (((T::one() - s) * theta).sin() / sin, (s * theta).sin() / sin)
        };
        Self {
            w: self.w * k0 + end.w * k1,
            x: self.x * k0 + end.x * k1,
            y: self.y * k0 + end.y * k1,
            z: self.z * k0 + end.z * k1,
        }
        .normalized()
    }
}

/// Rotation followed by translation: `p ↦ R·p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform<T> {
    pub translation: Vec3<T>,
    pub rotation: Quaternion<T>,
}

impl<T: Scalar> Default for RigidTransform<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Scalar> RigidTransform<T> {
    pub fn identity() -> Self {
        Self { translation: Vec3::zero(), rotation: Quaternion::identity() }
    }

    pub fn new(translation: Vec3<T>, rotation: Quaternion<T>) -> Self {
        Self { translation, rotation: rotation.normalized() }
    }

    pub fn from_translation(x: T, y: T, z: T) -> Self {
        Self::new(Vec3::new(x, y, z), Quaternion::identity())
    }

    pub fn from_rotation(rotation: Quaternion<T>) -> Self {
        Self::new(Vec3::zero(), rotation)
    }

    pub fn apply(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.rotate(p) + self.translation
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            translation: self.rotation.rotate(other.translation) + self.translation,
            rotation: self.rotation.mul(&other.rotation),
        }
    }

    pub fn inverse(&self) -> Self {
        let inv = self.rotation.conjugate();
        Self { translation: -inv.rotate(self.translation), rotation: inv }
    }

    /// Linear in translation, shortest-arc slerp in rotation.
    pub fn lerp(&self, other: &Self, s: T) -> Self {
        Self {
            translation: self.translation.lerp(&other.translation, s),
            rotation: self.rotation.slerp(&other.rotation, s),
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.translation.distance(&other.translation) <= tol && self.rotation.angle_to(&other.rotation) <= tol
    }
}

/// Free-function form of [`RigidTransform::compose`].
pub fn compose<T: Scalar>(a: &RigidTransform<T>, b: &RigidTransform<T>) -> RigidTransform<T> {
    a.compose(b)
}

/// Free-function form of [`RigidTransform::apply`].
pub fn transform_point<T: Scalar>(x: &RigidTransform<T>, p: Vec3<T>) -> Vec3<T> {
    x.apply(p)
}
