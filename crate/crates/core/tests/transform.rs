use copresence::geometry::Vec3;
use copresence::transform::{interpolate, Quaternion, RigidTransform, StampedTransform, TransformTree, APARTMENT_FRAME};
use proptest::prelude::*;

type M4 = [[f64; 4]; 4];

/// Rodrigues: rotation by `angle` about the unit `axis`, then translation.
fn matrix(axis: [f64; 3], angle: f64, t: [f64; 3]) -> M4 {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let (x, y, z) = (axis[0] / n, axis[1] / n, axis[2] / n);
    let (s, c) = angle.sin_cos();
    let v = 1.0 - c;
    [
        [c + x * x * v, x * y * v - z * s, x * z * v + y * s, t[0]],
        [y * x * v + z * s, c + y * y * v, y * z * v - x * s, t[1]],
        [z * x * v - y * s, z * y * v + x * s, c + z * z * v, t[2]],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

fn mul(a: &M4, b: &M4) -> M4 {
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

fn apply_m(m: &M4, p: [f64; 3]) -> [f64; 3] {
    let r = |i: usize| m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2] + m[i][3];
    [r(0), r(1), r(2)]
}

fn rigid(axis: [f64; 3], angle: f64, t: [f64; 3]) -> RigidTransform<f64> {
    RigidTransform::new(Vec3::new(t[0], t[1], t[2]), Quaternion::from_axis_angle(Vec3::new(axis[0], axis[1], axis[2]), angle))
}

fn close(a: Vec3<f64>, b: [f64; 3], tol: f64) -> bool {
    (a.x - b[0]).abs() <= tol && (a.y - b[1]).abs() <= tol && (a.z - b[2]).abs() <= tol
}

fn axis() -> impl Strategy<Value = [f64; 3]> {
    [-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0].prop_filter("non-degenerate axis", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-3)
}

fn vec3(r: f64) -> impl Strategy<Value = [f64; 3]> {
    [-r..r, -r..r, -r..r]
}

fn pose() -> impl Strategy<Value = ([f64; 3], f64, [f64; 3])> {
    (axis(), -3.2f64..3.2, vec3(10.0))
}

proptest! {
    #[test]
    fn matches_rodrigues((ax, ang, t) in pose(), p in vec3(5.0)) {
        let got = rigid(ax, ang, t).apply(Vec3::new(p[0], p[1], p[2]));
        prop_assert!(close(got, apply_m(&matrix(ax, ang, t), p), 1e-9));
    }

    #[test]
    fn inverse_round_trip((ax, ang, t) in pose(), p in vec3(5.0)) {
        let x = rigid(ax, ang, t);
        let v = Vec3::new(p[0], p[1], p[2]);
        prop_assert!(close(x.inverse().apply(x.apply(v)), p, 1e-9));
        prop_assert!(close(x.apply(x.inverse().apply(v)), p, 1e-9));
        prop_assert!(x.compose(&x.inverse()).approx_eq(&RigidTransform::identity(), 1e-9));
    }

    #[test]
    fn composition_is_associative_and_matches_matrices(a in pose(), b in pose(), c in pose(), p in vec3(5.0)) {
        let (xa, xb, xc) = (rigid(a.0, a.1, a.2), rigid(b.0, b.1, b.2), rigid(c.0, c.1, c.2));
        let v = Vec3::new(p[0], p[1], p[2]);
        let left = xa.compose(&xb).compose(&xc).apply(v);
        let right = xa.compose(&xb.compose(&xc)).apply(v);
        prop_assert!(left.distance(&right) <= 1e-9);
        let m = mul(&mul(&matrix(a.0, a.1, a.2), &matrix(b.0, b.1, b.2)), &matrix(c.0, c.1, c.2));
        prop_assert!(close(left, apply_m(&m, p), 1e-9));
    }

    #[test]
    fn apartment_sensor_user_chain(sensor in pose(), u0 in pose(), u1 in pose(), p in vec3(3.0), at_end in any::<bool>()) {
        let tree = TransformTree::default();
        tree.set_static(APARTMENT_FRAME, "kinect1", rigid(sensor.0, sensor.1, sensor.2)).unwrap();
        tree.insert(StampedTransform::new("kinect1", "kinect1/user3", 10.0, rigid(u0.0, u0.1, u0.2))).unwrap();
        tree.insert(StampedTransform::new("kinect1", "kinect1/user3", 10.5, rigid(u1.0, u1.1, u1.2))).unwrap();
        let (t, u) = if at_end { (10.5, u1) } else { (10.0, u0) };
        let got = tree.lookup(APARTMENT_FRAME, "kinect1/user3", t).unwrap().apply(Vec3::new(p[0], p[1], p[2]));
        let m = mul(&matrix(sensor.0, sensor.1, sensor.2), &matrix(u.0, u.1, u.2));
        prop_assert!(close(got, apply_m(&m, p), 1e-9));
        // the reverse lookup is the inverse
        let back = tree.lookup("kinect1/user3", APARTMENT_FRAME, t).unwrap().apply(got);
        prop_assert!(close(back, p, 1e-9));
    }

    #[test]
    fn interpolation_endpoints_are_exact(a in pose(), b in pose(), t0 in 0.0f64..100.0, dt in 0.01f64..5.0) {
        let s0 = StampedTransform::new("p", "c", t0, rigid(a.0, a.1, a.2));
        let s1 = StampedTransform::new("p", "c", t0 + dt, rigid(b.0, b.1, b.2));
        prop_assert_eq!(interpolate(&s0, &s1, t0).unwrap(), s0.xform);
        prop_assert_eq!(interpolate(&s0, &s1, t0 + dt).unwrap(), s1.xform);
    }

    #[test]
    fn interpolation_about_a_fixed_axis(ax in axis(), th0 in -1.5f64..1.5, th1 in -1.5f64..1.5, ta in vec3(5.0), tb in vec3(5.0), s in 0.0f64..1.0, p in vec3(3.0)) {
        let s0 = StampedTransform::new("p", "c", 0.0, rigid(ax, th0, ta));
        let s1 = StampedTransform::new("p", "c", 2.0, rigid(ax, th1, tb));
        let got = interpolate(&s0, &s1, 2.0 * s).unwrap().apply(Vec3::new(p[0], p[1], p[2]));
        let t: Vec<f64> = (0..3).map(|i| ta[i] + s * (tb[i] - ta[i])).collect();
        let want = apply_m(&matrix(ax, th0 + s * (th1 - th0), [t[0], t[1], t[2]]), p);
        prop_assert!(close(got, want, 1e-9));
    }

    #[test]
    fn f32_round_trip((ax, ang, t) in pose(), p in vec3(5.0)) {
        let f = |a: [f64; 3]| Vec3::new(a[0] as f32, a[1] as f32, a[2] as f32);
        let x = RigidTransform::new(f(t), Quaternion::from_axis_angle(f(ax), ang as f32));
        let v = f(p);
        prop_assert!(x.inverse().apply(x.apply(v)).distance(&v) <= 1e-4);
    }
}
