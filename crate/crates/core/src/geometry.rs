//! Small shared geometry helpers used across the toolkit.
//!
//! All lengths are in millimetres and all angles in radians unless a name
//! says otherwise. Rigid poses are represented by [`RigidPose`], a rotation
//! (unit quaternion) followed by a translation.

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, UnitVector3, Vector3};

/// A rigid transform: unit-quaternion rotation plus translation in mm.
pub type RigidPose = Isometry3<f64>;

/// Builds a pose from a translation and a rotation.
#[must_use]
pub fn pose(translation: Vector3<f64>, rotation: UnitQuaternion<f64>) -> RigidPose {
    Isometry3::from_parts(Translation3::from(translation), rotation)
}

/// Deterministic orthonormal basis `(u, v)` for the plane orthogonal to `n`.
///
/// `n` must be non-zero; it does not have to be unit length. The returned
/// vectors are unit length, mutually orthogonal and orthogonal to `n`, and
/// `(u, v, n̂)` is right-handed.
#[must_use]
pub fn plane_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let n = n.normalize();
    // Pick the world axis least aligned with n so the cross product is stable.
    let helper = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vector3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let u = n.cross(&helper).normalize();
    let v = n.cross(&u);
    (u, v)
}

/// Rotation that maps local +Z onto `z_axis` and local +X onto `x_axis`.
///
/// `x_axis` is re-orthogonalised against `z_axis`; the caller should pass
/// vectors that are already close to orthogonal.
#[must_use]
pub fn rotation_from_zx(z_axis: &Vector3<f64>, x_axis: &Vector3<f64>) -> UnitQuaternion<f64> {
    let z = z_axis.normalize();
    let mut x = x_axis - z * x_axis.dot(&z);
    if x.norm_squared() < 1e-20 {
        x = plane_basis(&z).0;
    }
    let x = x.normalize();
    let y = z.cross(&x);
    let m = nalgebra::Matrix3::from_columns(&[x, y, z]);
    UnitQuaternion::from_rotation_matrix(&nalgebra::Rotation3::from_matrix_unchecked(m))
}

/// Rotation about `axis` through `angle` radians.
#[must_use]
pub fn axis_angle(axis: &Vector3<f64>, angle: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&UnitVector3::new_normalize(*axis), angle)
}

/// Squared distance between two points.
#[inline]
#[must_use]
pub fn dist2(a: &Point3<f64>, b: &Point3<f64>) -> f64 {
    (a - b).norm_squared()
}
