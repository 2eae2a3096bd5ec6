//! Coordinate conversions, rotations and angle arithmetic.
//!
//! Angles are kept on the `atan2` branch `(-π, π]`. Points on the polar or
//! cylindrical axis (`rho == 0`) get `phi = 0`.

use nalgebra::{Matrix2, Rotation3, Unit, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Vec2<T> = Vector2<T>;
pub type Vec3<T> = Vector3<T>;

/// Polar coordinates of a planar vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar2<T> {
    pub phi: T,
    pub rho: T,
}

/// Cylindrical coordinates about the Z axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cyl3<T> {
    pub phi: T,
    pub rho: T,
    pub z: T,
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::two_pi();
    let mut r = a - two_pi * (a / two_pi).floor();
    if r > T::pi() {
        r -= two_pi;
    }
    if r <= -T::pi() {
        r += two_pi;
    }
    r
}

fn canonical_phi<T: Real>(y: T, x: T, rho: T) -> T {
    if rho == T::zero() {
        return T::zero();
    }
    let phi = y.atan2(x);
    if phi <= -T::pi() {
        phi + T::two_pi()
    } else {
        phi
    }
}

pub fn pol2<T: Real>(v: &Vec2<T>) -> Polar2<T> {
    let rho = v.x.hypot(v.y);
    Polar2 {
        phi: canonical_phi(v.y, v.x, rho),
        rho,
    }
}

pub fn cart2<T: Real>(p: &Polar2<T>) -> Vec2<T> {
    Vec2::new(p.rho * p.phi.cos(), p.rho * p.phi.sin())
}

pub fn cyl<T: Real>(v: &Vec3<T>) -> Cyl3<T> {
    let rho = v.x.hypot(v.y);
    Cyl3 {
        phi: canonical_phi(v.y, v.x, rho),
        rho,
        z: v.z,
    }
}

pub fn cart<T: Real>(c: &Cyl3<T>) -> Vec3<T> {
    Vec3::new(c.rho * c.phi.cos(), c.rho * c.phi.sin(), c.z)
}

pub fn rot2<T: Real>(phi: T) -> Matrix2<T> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(c, -s, s, c)
}

pub fn rot_z<T: Real>(phi: T) -> Rotation3<T> {
    let (s, c) = phi.sin_cos();
    Rotation3::from_matrix_unchecked(nalgebra::Matrix3::new(
        c,
        -s,
        T::zero(),
        s,
        c,
        T::zero(),
        T::zero(),
        T::zero(),
        T::one(),
    ))
}

/// Rotation by `angle` about `axis` (normalized internally).
///
/// A zero angle yields the identity for any axis; a zero axis with a
/// nonzero angle is an error.
pub fn axis_angle<T: Real>(angle: T, axis: &Vec3<T>) -> Result<Rotation3<T>> {
    if angle == T::zero() {
        return Ok(Rotation3::identity());
    }
    let n = axis.norm();
    if n == T::zero() || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(Rotation3::from_axis_angle(
        &Unit::new_unchecked(axis / n),
        angle,
    ))
}

/// Unsigned angle between two vectors in `[0, π]`.
pub fn angle_between<T: Real>(u: &Vec3<T>, v: &Vec3<T>) -> Result<T> {
    if u.norm_squared() == T::zero() || v.norm_squared() == T::zero() {
        return Err(Error::ZeroVector);
    }
    Ok(angle_between_unchecked(u, v))
}

/// `atan2(|u×v|, u·v)`; well conditioned near 0 and π, always inside `[0, π]`.
#[inline]
pub(crate) fn angle_between_unchecked<T: Real>(u: &Vec3<T>, v: &Vec3<T>) -> T {
    u.cross(v).norm().atan2(u.dot(v))
}

/// Geodesic angle of a rotation, accurate for small angles.
pub fn rotation_angle<T: Real>(r: &Rotation3<T>) -> T {
    let m = r.matrix();
    let half = T::lit(0.5);
    let w = Vec3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]) * half;
    let c = (m.trace() - T::one()) * half;
    w.norm().atan2(c)
}

/// Rigid transform taking object coordinates into the camera frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T: Real> {
    pub rotation: Rotation3<T>,
    pub translation: Vec3<T>,
}

impl<T: Real> Pose<T> {
    pub fn new(rotation: Rotation3<T>, translation: Vec3<T>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Rotation3::identity(), Vec3::zeros())
    }

    /// Pose from a rotation vector (axis times angle) and a translation.
    pub fn from_rotvec(rotvec: Vec3<T>, translation: Vec3<T>) -> Self {
        Self::new(Rotation3::new(rotvec), translation)
    }

    #[inline]
    pub fn transform_point(&self, p: &Vec3<T>) -> Vec3<T> {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> Self {
        let r = self.rotation.inverse();
        Self::new(r, -(r * self.translation))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn cast<U: Real>(&self) -> Pose<U> {
        let m = self.rotation.matrix().map(|x| U::lit(x.as_f64()));
        Pose::new(
            Rotation3::from_matrix_unchecked(m),
            self.translation.map(|x| U::lit(x.as_f64())),
        )
    }
}

/// True if `R·Rᵀ = I` and `det R = 1` within `tol`.
pub fn is_rotation<T: Real>(r: &nalgebra::Matrix3<T>, tol: T) -> bool {
    let e = r * r.transpose() - nalgebra::Matrix3::identity();
    e.iter().all(|x| x.abs() <= tol) && (r.determinant() - T::one()).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn polar_axis_and_round_trip() {
        let p = pol2(&Vec2::new(0.0, 1.0));
        assert_abs_diff_eq!(p.phi, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(p.rho, 1.0, epsilon = 1e-15);

        let v = cart2(&Polar2 { phi: PI, rho: 2.0 });
        assert_abs_diff_eq!(v.x, -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.y, 0.0, epsilon = 1e-15);

        let p = pol2(&cart2(&Polar2 { phi: 0.7, rho: 1.3 }));
        assert_abs_diff_eq!(p.phi, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(p.rho, 1.3, epsilon = 1e-12);
    }

    #[test]
    fn zero_vector_is_degenerate_not_error() {
        let p = pol2(&Vec2::new(0.0, 0.0));
        assert_eq!((p.phi, p.rho), (0.0, 0.0));
        let c = cyl(&Vec3::new(0.0, -0.0, 3.0));
        assert_eq!((c.phi, c.rho, c.z), (0.0, 0.0, 3.0));
    }

    #[test]
    fn branch_is_half_open() {
        // (-1, -0.0) would give -π from atan2.
        let p = pol2(&Vec2::new(-1.0, -0.0));
        assert_eq!(p.phi, PI);
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-0.5), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn cylindrical_examples() {
        let c = cyl(&Vec3::new(1.0, 1.0, 2.0));
        assert_abs_diff_eq!(c.phi, FRAC_PI_4, epsilon = 1e-15);
        assert_abs_diff_eq!(c.rho, 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(c.z, 2.0);

        let v = cart(&Cyl3 { phi: 0.0, rho: 0.0, z: 5.0 });
        assert_eq!(v, Vec3::new(0.0, 0.0, 5.0));

        let v = cart(&cyl(&Vec3::new(-1.0, 0.5, 0.0)));
        assert_abs_diff_eq!(v, Vec3::new(-1.0, 0.5, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn rotations() {
        let v = rot_z(FRAC_PI_2) * Vec3::new(1.0, 0.0, 0.0);
        assert_abs_diff_eq!(v, Vec3::new(0.0, 1.0, 0.0), epsilon = 1e-15);

        let r = axis_angle(0.0, &Vec3::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(r, Rotation3::identity());
        assert_eq!(axis_angle(0.3, &Vec3::<f64>::zeros()), Err(Error::ZeroVector));

        let a = axis_angle(PI, &Vec3::new(0.0, 0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(a.matrix(), rot_z(PI).matrix(), epsilon = 1e-15);
        assert!(is_rotation(a.matrix(), 1e-12));

        let r2 = rot2(FRAC_PI_2) * Vec2::new(1.0, 0.0);
        assert_abs_diff_eq!(r2, Vec2::new(0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn angles() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        assert_abs_diff_eq!(angle_between(&x, &Vec3::y()).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(angle_between(&x, &x).unwrap(), 0.0);
        let a = angle_between(&Vec3::new(1.0, 1.0, 0.0), &Vec3::new(-1.0, -1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(a, PI, epsilon = 1e-15);
        assert_eq!(angle_between(&x, &Vec3::zeros()), Err(Error::ZeroVector));
    }

    #[test]
    fn rotation_angle_small_and_large() {
        let r = Rotation3::new(Vec3::new(1e-9, 0.0, 0.0));
        assert_abs_diff_eq!(rotation_angle(&r), 1e-9, epsilon = 1e-20);
        let r = Rotation3::new(Vec3::new(0.0, 3.0, 0.0));
        assert_abs_diff_eq!(rotation_angle(&r), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn pose_inverse_composes_to_identity() {
        let p = Pose::from_rotvec(Vec3::new(0.3, -0.2, 0.9), Vec3::new(0.1, 0.2, 1.5));
        let id = p.compose(&p.inverse());
        assert!(rotation_angle(&id.rotation) < 1e-12);
        assert!(id.translation.norm() < 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let c = cyl(&Vec3::new(1.0f32, 1.0, 2.0));
        assert!((c.phi - std::f32::consts::FRAC_PI_4).abs() < 1e-6);
    }
}
