//! Forward symmetry transforms.
//!
//! The star transform multiplies the angle about a symmetry axis by the fold
//! `n`, so one symmetry step `θ = 2π/n` becomes a full turn and symmetric
//! equivalents collapse onto the same value. An infinite fold multiplies the
//! angle by zero.

mod dash;
mod render;

pub use dash::{align_dash_map, dash_map, dash_point, r_ray, undash_point};
pub use render::{render_scene, Rendering, Scene, Solid};

use nalgebra::{Rotation3, Vector2};

use crate::error::{Error, Result};
use crate::geom::{cart, cyl, Cyl3, Vec2, Vec3};
use crate::pointmap::PointMap;
use crate::scalar::Real;

/// Order of a rotational symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fold {
    Finite(u32),
    Infinite,
}

impl Fold {
    pub fn finite(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSymmetry("fold must be at least 1".into()));
        }
        Ok(Fold::Finite(n))
    }

    /// Angle multiplier of the star transform: `n`, or `0` for the infinite fold.
    pub fn multiplier(self) -> u32 {
        match self {
            Fold::Finite(n) => n,
            Fold::Infinite => 0,
        }
    }

    /// Symmetry angle `2π/n`; `None` for the infinite fold.
    pub fn theta<T: Real>(self) -> Option<T> {
        match self {
            Fold::Finite(n) => Some(T::two_pi() / T::from_u32(n).unwrap()),
            Fold::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Fold::Finite(_))
    }
}

impl std::fmt::Display for Fold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Fold::Finite(n) => write!(f, "{n}"),
            Fold::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Fold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" | "∞" => Ok(Fold::Infinite),
            t => {
                let n: u32 = t
                    .parse()
                    .map_err(|_| Error::InvalidSymmetry(format!("bad fold '{t}'")))?;
                Fold::finite(n)
            }
        }
    }
}

/// Orthonormal frame whose Z axis is a symmetry axis.
///
/// `phi = 0` about the axis points along the frame's X axis, which is either an
/// explicit reference direction or the world basis vector least aligned with
/// the axis. For the world Z axis the frame is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisFrame<T: Real> {
    to_local: Rotation3<T>,
}

impl<T: Real> AxisFrame<T> {
    pub fn new(axis: &Vec3<T>) -> Result<Self> {
        let z = normalized(axis)?;
        let mut best = 0;
        for k in 1..3 {
            if z[k].abs() < z[best].abs() {
                best = k;
            }
        }
        Self::with_reference(&z, &Vec3::ith(best, T::one()))
    }

    /// Frame with Z along `axis` and X along the component of `reference`
    /// perpendicular to it.
    pub fn with_reference(axis: &Vec3<T>, reference: &Vec3<T>) -> Result<Self> {
        let z = normalized(axis)?;
        let x = normalized(&(reference - z * reference.dot(&z)))?;
        let y = z.cross(&x);
        let m = nalgebra::Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        Ok(Self {
            to_local: Rotation3::from_matrix_unchecked(m),
        })
    }

    pub fn axis(&self) -> Vec3<T> {
        self.to_local.matrix().row(2).transpose()
    }

    #[inline]
    pub fn to_local(&self, p: &Vec3<T>) -> Vec3<T> {
        self.to_local * p
    }

    #[inline]
    pub fn to_world(&self, p: &Vec3<T>) -> Vec3<T> {
        self.to_local.inverse_transform_vector(p)
    }

    /// Cylindrical coordinates of a world point about this axis.
    #[inline]
    pub fn cyl(&self, p: &Vec3<T>) -> Cyl3<T> {
        cyl(&self.to_local(p))
    }

    #[inline]
    pub fn cart(&self, c: &Cyl3<T>) -> Vec3<T> {
        self.to_world(&cart(c))
    }

    /// Rotation by `angle` about the axis, expressed in world coordinates.
    pub fn rotation(&self, angle: T) -> Rotation3<T> {
        self.to_local.inverse() * crate::geom::rot_z(angle) * self.to_local
    }
}

fn normalized<T: Real>(v: &Vec3<T>) -> Result<Vec3<T>> {
    let n = v.norm();
    if !(n > T::lit(1e-12)) || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v / n)
}

/// One symmetry axis with its fold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSymmetry<T: Real> {
    pub frame: AxisFrame<T>,
    pub fold: Fold,
}

impl<T: Real> AxisSymmetry<T> {
    pub fn axis(&self) -> Vec3<T> {
        self.frame.axis()
    }

    pub fn star(&self, p: &Vec3<T>) -> Vec3<T> {
        star_point_in(&self.frame, p, self.fold)
    }
}

/// Symmetry of an object: a primary axis and an optional secondary axis.
///
/// A secondary axis must be a 2-fold axis perpendicular to the primary one
/// (dihedral symmetry such as a general box). Anything else, e.g. the 4-fold
/// pairs of a cube, cannot be expressed by composing two star transforms and
/// is rejected. The primary frame uses the secondary axis as its `phi = 0`
/// reference so that the composition stays invariant under both generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetrySpec<T: Real> {
    pub primary: AxisSymmetry<T>,
    pub secondary: Option<AxisSymmetry<T>>,
}

const PERPENDICULAR_TOL: f64 = 1e-6;

impl<T: Real> SymmetrySpec<T> {
    pub fn single(axis: Vec3<T>, fold: Fold) -> Result<Self> {
        if let Fold::Finite(0) = fold {
            return Err(Error::InvalidSymmetry("fold must be at least 1".into()));
        }
        Ok(Self {
            primary: AxisSymmetry {
                frame: AxisFrame::new(&axis)?,
                fold,
            },
            secondary: None,
        })
    }

    pub fn about_z(fold: Fold) -> Self {
        Self::single(Vec3::z(), fold).expect("z axis is valid")
    }

    pub fn two_axis(axis: Vec3<T>, fold: Fold, second_axis: Vec3<T>, second_fold: u32) -> Result<Self> {
        if let Fold::Finite(0) = fold {
            return Err(Error::InvalidSymmetry("fold must be at least 1".into()));
        }
        if second_fold == 0 {
            return Err(Error::InvalidSymmetry("fold must be at least 1".into()));
        }
        let a = normalized(&axis)?;
        let b = normalized(&second_axis)?;
        let c = a.dot(&b).abs();
        if c > T::one() - T::lit(1e-9) {
            return Err(Error::InvalidSymmetry("symmetry axes are parallel".into()));
        }
        if second_fold > 2 || c > T::lit(PERPENDICULAR_TOL) {
            return Err(Error::CubeLikeSymmetry(format!(
                "secondary fold {second_fold}, |cos(axes)| = {}",
                c.as_f64()
            )));
        }
        let b = (b - a * a.dot(&b)).normalize();
        Ok(Self {
            primary: AxisSymmetry {
                frame: AxisFrame::with_reference(&a, &b)?,
                fold,
            },
            secondary: Some(AxisSymmetry {
                frame: AxisFrame::with_reference(&b, &a)?,
                fold: Fold::Finite(second_fold),
            }),
        })
    }

    /// Star transform of one point: primary axis, then secondary if present.
    pub fn star(&self, p: &Vec3<T>) -> Vec3<T> {
        let s = self.primary.star(p);
        match &self.secondary {
            Some(sec) => sec.star(&s),
            None => s,
        }
    }

    /// Rotations that map the object onto itself for a finite symmetry,
    /// enumerated from the primary generator (and the secondary flip).
    /// `None` when the primary fold is infinite.
    pub fn finite_group(&self) -> Option<Vec<Rotation3<T>>> {
        let Fold::Finite(n) = self.primary.fold else {
            return None;
        };
        let theta = self.primary.fold.theta::<T>().unwrap();
        let base: Vec<_> = (0..n)
            .map(|k| self.primary.frame.rotation(theta * T::from_u32(k).unwrap()))
            .collect();
        Some(match self.secondary_flip() {
            Some(flip) => base.iter().copied().chain(base.iter().map(|g| g * flip)).collect(),
            None => base,
        })
    }

    /// The secondary generator, if any (identity folds are ignored).
    pub fn secondary_flip(&self) -> Option<Rotation3<T>> {
        match self.secondary {
            Some(AxisSymmetry {
                frame,
                fold: Fold::Finite(2),
            }) => Some(frame.rotation(T::pi())),
            _ => None,
        }
    }
}

/// Unit vector at `n·alpha`; closes its loop after one symmetry step.
pub fn csl_vector<T: Real>(alpha: T, n: u32) -> Vec2<T> {
    let a = alpha * T::from_u32(n).unwrap();
    Vector2::new(a.cos(), a.sin())
}

/// Star transform of `p` about `axis` (default frame for that axis).
pub fn star_point<T: Real>(p: &Vec3<T>, axis: &Vec3<T>, fold: Fold) -> Result<Vec3<T>> {
    Ok(star_point_in(&AxisFrame::new(axis)?, p, fold))
}

/// Star transform in an explicit axis frame.
pub fn star_point_in<T: Real>(frame: &AxisFrame<T>, p: &Vec3<T>, fold: Fold) -> Vec3<T> {
    if fold == Fold::Finite(1) {
        return *p;
    }
    let mut c = frame.cyl(p);
    c.phi *= T::from_u32(fold.multiplier()).unwrap();
    frame.cart(&c)
}

/// Star transform applied to every valid pixel.
pub fn star_map<T: Real>(map: &PointMap<T>, spec: &SymmetrySpec<T>) -> PointMap<T> {
    map.map_valid(|_, _, p| spec.star(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};

    #[test]
    fn csl_vector_examples() {
        assert_abs_diff_eq!(csl_vector(0.0, 6), Vec2::new(1.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(csl_vector(FRAC_PI_6, 6), Vec2::new(-1.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(csl_vector(FRAC_PI_3, 6), Vec2::new(1.0, 0.0), epsilon = 1e-14);
    }

    #[test]
    fn star_examples() {
        let z = Vec3::z();
        let s = star_point(&Vec3::new(0.0, 1.0, 0.5), &z, Fold::Finite(4)).unwrap();
        assert_abs_diff_eq!(s, Vec3::new(1.0, 0.0, 0.5), epsilon = 1e-15);
        let r2 = 2f64.sqrt();
        let s = star_point(&Vec3::new(r2, r2, 1.0), &z, Fold::Finite(2)).unwrap();
        assert_abs_diff_eq!(s, Vec3::new(0.0, 2.0, 1.0), epsilon = 1e-15);
        let s = star_point(&Vec3::new(r2, r2, 1.0), &z, Fold::Infinite).unwrap();
        assert_abs_diff_eq!(s, Vec3::new(2.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn on_axis_point_is_fixed() {
        let p = Vec3::new(0.0, 0.0, -0.3);
        for fold in [Fold::Finite(3), Fold::Infinite] {
            assert_eq!(star_point(&p, &Vec3::z(), fold).unwrap(), p);
        }
    }

    #[test]
    fn z_frame_is_identity() {
        let f = AxisFrame::new(&Vec3::<f64>::z()).unwrap();
        let p = Vec3::new(0.3, -0.1, 0.7);
        assert_eq!(f.to_local(&p), p);
    }

    #[test]
    fn fold_one_is_identity_on_maps() {
        let mut m = PointMap::invalid(2, 2);
        m.set(1, 0, Some(Vec3::new(0.2, 0.4, -0.1)));
        let spec = SymmetrySpec::about_z(Fold::Finite(1));
        assert_eq!(star_map(&m, &spec), m);
        let empty = PointMap::<f64>::invalid(3, 3);
        assert_eq!(star_map(&empty, &spec).valid_count(), 0);
    }

    #[test]
    fn spec_validation() {
        assert!(SymmetrySpec::single(Vec3::<f64>::zeros(), Fold::Finite(2)).is_err());
        assert!(SymmetrySpec::single(Vec3::<f64>::z(), Fold::Finite(0)).is_err());
        assert!(matches!(
            SymmetrySpec::two_axis(Vec3::<f64>::z(), Fold::Finite(4), Vec3::x(), 4),
            Err(Error::CubeLikeSymmetry(_))
        ));
        assert!(matches!(
            SymmetrySpec::two_axis(Vec3::<f64>::z(), Fold::Finite(2), Vec3::new(1.0, 0.0, 0.5), 2),
            Err(Error::CubeLikeSymmetry(_))
        ));
        assert!(SymmetrySpec::two_axis(Vec3::<f64>::z(), Fold::Finite(2), Vec3::z() * 2.0, 2).is_err());
        assert!(SymmetrySpec::two_axis(Vec3::<f64>::z(), Fold::Finite(2), Vec3::x(), 2).is_ok());
    }

    #[test]
    fn two_axis_invariant_under_both_generators() {
        let spec = SymmetrySpec::two_axis(
            Vec3::new(0.2, -0.3, 1.0),
            Fold::Finite(3),
            Vec3::new(1.0, 0.0, 0.2).cross(&Vec3::new(0.2, -0.3, 1.0)),
            2,
        )
        .unwrap();
        let group = spec.finite_group().unwrap();
        assert_eq!(group.len(), 6);
        let p = Vec3::new(0.31, -0.42, 0.77);
        let s = spec.star(&p);
        for g in &group {
            assert_abs_diff_eq!(spec.star(&(g * p)), s, epsilon = 1e-12);
        }
    }

    #[test]
    fn general_axis_invariance() {
        let axis = Vec3::new(1.0, 2.0, -0.5);
        let frame = AxisFrame::new(&axis).unwrap();
        let p = Vec3::new(0.4, 0.1, -0.9);
        let s = star_point_in(&frame, &p, Fold::Finite(5));
        let g = frame.rotation(2.0 * PI / 5.0 * 3.0);
        assert_abs_diff_eq!(star_point_in(&frame, &(g * p), Fold::Finite(5)), s, epsilon = 1e-12);
        // norm and axial component preserved
        assert_abs_diff_eq!(s.norm(), p.norm(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.dot(&frame.axis()), p.dot(&frame.axis()), epsilon = 1e-12);
    }

    #[test]
    fn fold_parse() {
        assert_eq!("inf".parse::<Fold>().unwrap(), Fold::Infinite);
        assert_eq!("4".parse::<Fold>().unwrap(), Fold::Finite(4));
        assert!("0".parse::<Fold>().is_err());
    }
}
