//! Rigid poses and angle helpers shared by navigation and registration.

use std::f64::consts::PI;

use nalgebra::{Isometry3, Point2, Point3, Rotation3, Translation3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Heading of the baseline from `p1` to `p2` in ENU (counter-clockwise from
/// east), quadrant-correct.
pub fn heading_from_rovers(p1: &Point2<f64>, p2: &Point2<f64>) -> Result<f64> {
    let d = p2 - p1;
    if d.x == 0.0 && d.y == 0.0 {
        return Err(Error::DegenerateBaseline);
    }
    Ok(normalize_angle(d.y.atan2(d.x)))
}

/// Translation plus roll/pitch/yaw. The rotation is `Rz(yaw)·Ry(pitch)·Rx(roll)`,
/// mapping local coordinates into the parent frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub translation: Vector3<f64>,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Pose {
    pub fn new(translation: Vector3<f64>, roll: f64, pitch: f64, yaw: f64) -> Self {
        Pose {
            translation,
            roll,
            pitch,
            yaw,
        }
    }

    pub fn identity() -> Self {
        Pose::new(Vector3::zeros(), 0.0, 0.0, 0.0)
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.roll, self.pitch, self.yaw)
    }

    pub fn isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(
            Translation3::from(self.translation),
            UnitQuaternion::from_rotation_matrix(&self.rotation()),
        )
    }

    pub fn from_isometry(iso: &Isometry3<f64>) -> Self {
        let (roll, pitch, yaw) = iso.rotation.euler_angles();
        Pose::new(iso.translation.vector, roll, pitch, yaw)
    }

    pub fn inverse(&self) -> Pose {
        Pose::from_isometry(&self.isometry().inverse())
    }
}

/// `translation + R(roll, pitch, yaw) · local`.
pub fn transform_point(local: &Point3<f64>, pose: &Pose) -> Point3<f64> {
    Point3::from(pose.translation + pose.rotation() * local.coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rover_headings() {
        let o = Point2::new(2.0, 3.0);
        assert_eq!(
            heading_from_rovers(&o, &Point2::new(3.0, 3.0)).unwrap(),
            0.0
        );
        assert_relative_eq!(
            heading_from_rovers(&o, &Point2::new(2.0, 4.0)).unwrap(),
            PI / 2.0
        );
        assert_relative_eq!(heading_from_rovers(&o, &Point2::new(1.0, 3.0)).unwrap(), PI);
        assert!(matches!(
            heading_from_rovers(&o, &o),
            Err(Error::DegenerateBaseline)
        ));
    }

    #[test]
    fn transform_examples() {
        let p = Point3::new(1.0, 2.0, 3.0);
        assert_eq!(transform_point(&p, &Pose::identity()), p);
        let t = Pose::new(Vector3::new(1.0, 2.0, 3.0), 0.0, 0.0, 0.0);
        assert_eq!(
            transform_point(&Point3::origin(), &t),
            Point3::new(1.0, 2.0, 3.0)
        );
        let yaw = Pose::new(Vector3::zeros(), 0.0, 0.0, PI / 2.0);
        let q = transform_point(&Point3::new(1.0, 0.0, 0.0), &yaw);
        assert_relative_eq!(q, Point3::new(0.0, 1.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn rotation_order_is_z_y_x() {
        let (r, p, y) = (0.1, -0.2, 0.7);
        let pose = Pose::new(Vector3::zeros(), r, p, y);
        let expect = Rotation3::from_axis_angle(&Vector3::z_axis(), y)
            * Rotation3::from_axis_angle(&Vector3::y_axis(), p)
            * Rotation3::from_axis_angle(&Vector3::x_axis(), r);
        assert_relative_eq!(pose.rotation(), expect, epsilon = 1e-12);
    }

    #[test]
    fn normalize_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_relative_eq!(normalize_angle(-PI), PI);
        assert_relative_eq!(normalize_angle(3.0 * PI / 2.0), -PI / 2.0);
    }

    proptest! {
        #[test]
        fn inverse_round_trip(
            t in prop::array::uniform3(-50.0f64..50.0),
            r in -1.0f64..1.0, p in -1.0f64..1.0, y in -3.1f64..3.1,
            q in prop::array::uniform3(-20.0f64..20.0),
        ) {
            let pose = Pose::new(Vector3::from(t), r, p, y);
            let local = Point3::from(q);
            let back = transform_point(&transform_point(&local, &pose), &pose.inverse());
            prop_assert!((back - local).norm() < 1e-9);
        }

        #[test]
        fn rover_heading_antisymmetry(
            a in prop::array::uniform2(-10.0f64..10.0),
            b in prop::array::uniform2(-10.0f64..10.0),
        ) {
            let (p1, p2) = (Point2::from(a), Point2::from(b));
            prop_assume!((p2 - p1).norm() > 1e-6);
            let f = heading_from_rovers(&p1, &p2).unwrap();
            let r = heading_from_rovers(&p2, &p1).unwrap();
            prop_assert!(f > -PI && f <= PI);
            prop_assert!(normalize_angle(f - r - PI).abs() < 1e-9);
        }
    }
}
