//! Dash representation: object points rotated into the camera, then
//! de-rotated by the viewing-ray rotation of their pixel.

use nalgebra::{Rotation3, Unit};

use crate::camera::CameraModel;
use crate::geom::{angle_between_unchecked, Pose, Vec3};
use crate::pointmap::PointMap;
use crate::scalar::Real;

/// Rotation taking the optical axis `(0,0,1)` onto the viewing ray of pixel
/// `(i, j)`, about `(0,0,1) × ray`. Identity on the optical axis.
pub fn r_ray<T: Real>(i: usize, j: usize, cam: &CameraModel<T>) -> Rotation3<T> {
    let ray = cam.ray(i, j);
    let z = Vec3::z();
    let axis = z.cross(&ray);
    let n = axis.norm();
    if n <= T::default_epsilon() {
        return Rotation3::identity();
    }
    Rotation3::from_axis_angle(&Unit::new_unchecked(axis / n), angle_between_unchecked(&z, &ray))
}

/// `R_ray(i,j)⁻¹ · R_co · p`.
pub fn dash_point<T: Real>(
    p: &Vec3<T>,
    r_co: &Rotation3<T>,
    i: usize,
    j: usize,
    cam: &CameraModel<T>,
) -> Vec3<T> {
    r_ray(i, j, cam).inverse_transform_vector(&(r_co * p))
}

/// Undoes the per-pixel ray rotation: `R_ray(i,j) · p'`, i.e. the object
/// point rotated into the camera frame.
pub fn undash_point<T: Real>(dash: &Vec3<T>, i: usize, j: usize, cam: &CameraModel<T>) -> Vec3<T> {
    r_ray(i, j, cam) * dash
}

pub fn dash_map<T: Real>(map: &PointMap<T>, pose: &Pose<T>, cam: &CameraModel<T>) -> PointMap<T> {
    map.map_valid(|i, j, p| dash_point(p, &pose.rotation, i, j, cam))
}

/// Dash map with the ray rotation removed from every pixel.
pub fn align_dash_map<T: Real>(dash: &PointMap<T>, cam: &CameraModel<T>) -> PointMap<T> {
    dash.map_valid(|i, j, p| undash_point(p, i, j, cam))
}
