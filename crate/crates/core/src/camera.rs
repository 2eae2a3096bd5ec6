//! Pinhole camera intrinsics.
//!
//! Pixel `(i, j)` is column `i`, row `j`; integer pixel coordinates are pixel
//! centers, so the ray of pixel `(i, j)` projects back exactly onto `(i, j)`.

use crate::error::{Error, Result};
use crate::geom::{Vec2, Vec3};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: usize,
    pub height: usize,
}

impl<T: Real> CameraModel<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T, width: usize, height: usize) -> Result<Self> {
        if !(fx > T::zero() && fy > T::zero()) {
            return Err(Error::InvalidCamera("focal lengths must be positive".into()));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("empty image".into()));
        }
        let inside = |c: T, n: usize| c >= T::zero() && c <= T::from_count(n - 1);
        if !inside(cx, width) || !inside(cy, height) {
            return Err(Error::InvalidCamera("principal point outside the image".into()));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    pub fn check_pixel(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.width || j >= self.height {
            return Err(Error::PixelOutOfBounds {
                i,
                j,
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }

    /// Unnormalized viewing direction `((u-cx)/fx, (v-cy)/fy, 1)`.
    #[inline]
    pub fn ray_direction(&self, u: T, v: T) -> Vec3<T> {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, T::one())
    }

    /// Unit viewing ray through pixel `(i, j)`.
    pub fn ray(&self, i: usize, j: usize) -> Vec3<T> {
        self.ray_direction(T::from_count(i), T::from_count(j)).normalize()
    }

    /// Projects a camera-frame point; `None` if it is not in front of the camera.
    pub fn project(&self, p: &Vec3<T>) -> Option<Vec2<T>> {
        if p.z <= T::zero() {
            return None;
        }
        Some(Vec2::new(
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
        ))
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn cast<U: Real>(&self) -> CameraModel<U> {
        CameraModel {
            fx: U::lit(self.fx.as_f64()),
            fy: U::lit(self.fy.as_f64()),
            cx: U::lit(self.cx.as_f64()),
            cy: U::lit(self.cy.as_f64()),
            width: self.width,
            height: self.height,
        }
    }
}
