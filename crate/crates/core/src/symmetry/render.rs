//! Flat-shaded ray caster producing ground-truth object-coordinate maps.

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::geom::{Pose, Vec3};
use crate::pointmap::PointMap;
use crate::scalar::Real;

/// Parametric solids centered at the object origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solid<T: Real> {
    /// Axis-aligned box with the given half extents.
    Cuboid { half_extents: Vec3<T> },
    /// Closed cylinder about the object Z axis.
    Cylinder { radius: T, half_height: T },
}

impl<T: Real> Solid<T> {
    pub fn bounding_radius(&self) -> T {
        match self {
            Solid::Cuboid { half_extents } => half_extents.norm(),
            Solid::Cylinder {
                radius,
                half_height,
            } => radius.hypot(*half_height),
        }
    }

    /// First intersection along `origin + s·dir`, `s > 0`, with the face index.
    pub fn intersect(&self, origin: &Vec3<T>, dir: &Vec3<T>) -> Option<(T, usize)> {
        match self {
            Solid::Cuboid { half_extents } => intersect_box(half_extents, origin, dir),
            Solid::Cylinder {
                radius,
                half_height,
            } => intersect_cylinder(*radius, *half_height, origin, dir),
        }
    }

    /// Face albedo. Congruent faces share an albedo, so any rotation mapping
    /// the solid onto itself leaves the shaded image unchanged.
    pub fn albedo(&self, face: usize) -> T {
        match self {
            Solid::Cuboid { half_extents: h } => {
                let area = |k: usize| h[(k + 1) % 3] * h[(k + 2) % 3];
                let max = area(0).max(area(1)).max(area(2));
                T::lit(0.25) + T::lit(0.6) * area(face / 2) / max
            }
            Solid::Cylinder { .. } => {
                if face == 0 {
                    T::lit(0.45)
                } else {
                    T::lit(0.85)
                }
            }
        }
    }
}

fn intersect_box<T: Real>(h: &Vec3<T>, o: &Vec3<T>, d: &Vec3<T>) -> Option<(T, usize)> {
    let mut t_near = T::min_value().unwrap();
    let mut t_far = T::max_value().unwrap();
    let mut face = 0;
    for k in 0..3 {
        if d[k] == T::zero() {
            if o[k].abs() > h[k] {
                return None;
            }
            continue;
        }
        let t1 = (-h[k] - o[k]) / d[k];
        let t2 = (h[k] - o[k]) / d[k];
        let (lo, hi, lo_face) = if t1 < t2 {
            (t1, t2, 2 * k)
        } else {
            (t2, t1, 2 * k + 1)
        };
        if lo > t_near {
            t_near = lo;
            face = lo_face;
        }
        t_far = t_far.min(hi);
    }
    (t_near <= t_far && t_near > T::zero()).then_some((t_near, face))
}

fn intersect_cylinder<T: Real>(r: T, hh: T, o: &Vec3<T>, d: &Vec3<T>) -> Option<(T, usize)> {
    let mut best: Option<(T, usize)> = None;
    let mut consider = |t: T, face: usize| {
        if t > T::zero() && best.is_none_or(|(b, _)| t < b) {
            best = Some((t, face));
        }
    };
    let a = d.x * d.x + d.y * d.y;
    if a > T::zero() {
        let b = o.x * d.x + o.y * d.y;
        let c = o.x * o.x + o.y * o.y - r * r;
        let disc = b * b - a * c;
        if disc >= T::zero() {
            let sq = disc.sqrt();
            for t in [(-b - sq) / a, (-b + sq) / a] {
                if (o.z + t * d.z).abs() <= hh {
                    consider(t, 0);
                }
            }
        }
    }
    if d.z != T::zero() {
        for (zc, face) in [(-hh, 1), (hh, 2)] {
            let t = (zc - o.z) / d.z;
            let (x, y) = (o.x + t * d.x, o.y + t * d.y);
            if x * x + y * y <= r * r {
                consider(t, face);
            }
        }
    }
    best
}

/// At most one object; multi-object occlusion is not modelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scene<T: Real> {
    pub object: Option<(Solid<T>, Pose<T>)>,
}

impl<T: Real> Scene<T> {
    pub fn empty() -> Self {
        Self { object: None }
    }

    pub fn single(solid: Solid<T>, pose: Pose<T>) -> Self {
        Self {
            object: Some((solid, pose)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Rendering<T: Real> {
    /// Row-major intensities in `[0, 1]`; background is zero.
    pub image: Vec<T>,
    /// First-hit object coordinates per pixel.
    pub points: PointMap<T>,
}

/// Casts one ray per pixel through the pinhole camera.
pub fn render_scene<T: Real>(scene: &Scene<T>, cam: &CameraModel<T>) -> Result<Rendering<T>> {
    let (w, h) = (cam.width, cam.height);
    let mut image = vec![T::zero(); w * h];
    let mut points = PointMap::invalid(w, h);
    let Some((solid, pose)) = &scene.object else {
        return Ok(Rendering { image, points });
    };
    if pose.translation.z + solid.bounding_radius() <= T::zero() {
        return Err(Error::BehindCamera);
    }
    let inv = pose.inverse();
    let origin = inv.translation;
    for j in 0..h {
        for i in 0..w {
            let d = cam.ray_direction(T::from_count(i), T::from_count(j));
            let dir = inv.rotation * d;
            if let Some((s, face)) = solid.intersect(&origin, &dir) {
                points.set(i, j, Some(origin + dir * s));
                image[j * w + i] = solid.albedo(face);
            }
        }
    }
    Ok(Rendering { image, points })
}
