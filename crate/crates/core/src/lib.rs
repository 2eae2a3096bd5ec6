//! Closed-symmetry-loop pose representations for rotationally symmetric
//! objects.
//!
//! The crate covers the full chain from ground truth to pose:
//!
//! * [`symmetry`]: star (angle × fold) and dash (ray-aligned) transforms and a
//!   ray caster that produces ground-truth object-coordinate maps,
//! * [`losses`]: plain and min-over-symmetries losses with gradients,
//! * [`reverse`]: recovery of consistent object points from star and dash maps,
//! * [`pnp`]: pose from 2D–3D correspondences and symmetry-aware pose error,
//! * [`toylab`]: the one-degree-of-freedom disc study with a small CNN.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod camera;
pub mod error;
pub mod geom;
pub mod losses;
pub mod pnp;
pub mod pointmap;
pub mod reverse;
pub mod scalar;
pub mod symmetry;
pub mod toylab;

pub use camera::CameraModel;
pub use error::{Error, Result};
pub use geom::{Pose, Vec2, Vec3};
pub use pointmap::PointMap;
pub use scalar::Real;
pub use symmetry::{Fold, SymmetrySpec};

pub type Vec3d = Vec3<f64>;
pub type Pose64 = Pose<f64>;
pub type PointMap64 = PointMap<f64>;
pub type Camera64 = CameraModel<f64>;
pub type Symmetry64 = SymmetrySpec<f64>;
