//! Per-pixel optional 3D points with a validity mask.
//!
//! Binary layout (little endian): `u32 width`, `u32 height`, then for each
//! pixel in row-major order three `f64` coordinates followed by one mask byte
//! (`1` valid, `0` invalid; invalid pixels store zeros).

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct PointMap<T: Real> {
    width: usize,
    height: usize,
    data: Vec<Option<Vec3<T>>>,
}

impl<T: Real> PointMap<T> {
    pub fn invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![None; width * height],
        }
    }

    /// Builds a map from row-major entries; non-finite points are rejected.
    pub fn from_entries(width: usize, height: usize, data: Vec<Option<Vec3<T>>>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch(width, height, data.len(), 1));
        }
        if data
            .iter()
            .flatten()
            .any(|p| !p.iter().all(|x| x.is_finite()))
        {
            return Err(Error::Io("non-finite point in map".into()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn entries(&self) -> &[Option<Vec3<T>>] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<&Vec3<T>> {
        self.data[j * self.width + i].as_ref()
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, p: Option<Vec3<T>>) {
        self.data[j * self.width + i] = p;
    }

    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_some()
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|p| p.is_some()).count()
    }

    /// Valid pixels as `(i, j, point)` in row-major order.
    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, usize, &Vec3<T>)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter_map(move |(k, p)| p.as_ref().map(|p| (k % w, k / w, p)))
    }

    /// Applies `f` to every valid pixel, keeping the mask.
    pub fn map_valid<F>(&self, mut f: F) -> Self
    where
        F: FnMut(usize, usize, &Vec3<T>) -> Vec3<T>,
    {
        let w = self.width;
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(k, p)| p.as_ref().map(|p| f(k % w, k / w, p)))
            .collect();
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::ShapeMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    pub fn same_mask(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.is_some() == b.is_some())
    }

    /// Largest point norm over valid pixels (zero for an empty map).
    pub fn max_norm(&self) -> T {
        self.data
            .iter()
            .flatten()
            .map(|p| p.norm())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.width as u32).to_le_bytes())?;
        w.write_all(&(self.height as u32).to_le_bytes())?;
        for p in &self.data {
            let (v, m) = match p {
                Some(p) => (*p, 1u8),
                None => (Vec3::zeros(), 0u8),
            };
            for x in v.iter() {
                w.write_all(&x.as_f64().to_le_bytes())?;
            }
            w.write_all(&[m])?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let width = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4)?;
        let height = u32::from_le_bytes(b4) as usize;
        let mut data = Vec::with_capacity(width * height);
        let mut b8 = [0u8; 8];
        let mut m = [0u8; 1];
        for _ in 0..width * height {
            let mut v = [T::zero(); 3];
            for x in v.iter_mut() {
                r.read_exact(&mut b8)?;
                *x = T::lit(f64::from_le_bytes(b8));
            }
            r.read_exact(&mut m)?;
            data.push(match m[0] {
                0 => None,
                1 => Some(Vec3::new(v[0], v[1], v[2])),
                b => return Err(Error::Io(format!("invalid mask byte {b}"))),
            });
        }
        Self::from_entries(width, height, data)
    }

    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_binary(f)
    }

    pub fn load_binary(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// XYZ → RGB color coding, each axis scaled by the largest absolute
    /// coordinate; invalid pixels are black.
    pub fn to_rgb(&self) -> image::RgbImage {
        let scale = self
            .data
            .iter()
            .flatten()
            .flat_map(|p| p.iter().map(|x| x.as_f64().abs()).collect::<Vec<_>>())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        image::RgbImage::from_fn(self.width as u32, self.height as u32, |i, j| {
            match self.get(i as usize, j as usize) {
                Some(p) => {
                    let c = |x: T| ((x.as_f64() / scale + 1.0) * 127.5).round().clamp(0.0, 255.0) as u8;
                    image::Rgb([c(p.x), c(p.y), c(p.z)])
                }
                None => image::Rgb([0, 0, 0]),
            }
        })
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_rgb()
            .save(path)
            .map_err(|e| Error::Io(e.to_string()))
    }
}
