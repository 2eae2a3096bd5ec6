use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scalar::Real;

/// Smooth random albedo pattern repeated `fold` times around the perimeter.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscTexture {
    base: Vec<f64>,
    fold: u32,
    seed: u64,
}

pub const DEFAULT_PATTERN_LEN: usize = 64;
pub const DEFAULT_SMOOTHING: f64 = 1.5;

impl DiscTexture {
    /// Gaussian noise, circularly low-pass filtered with a Gaussian of
    /// `smoothing` samples, rescaled to `[0.1, 0.9]`.
    pub fn random(fold: u32, pattern_len: usize, smoothing: f64, seed: u64) -> Result<Self> {
        if fold == 0 {
            return Err(Error::InvalidConfig("fold must be at least 1".into()));
        }
        if pattern_len < 4 {
            return Err(Error::InvalidConfig("texture needs at least 4 samples".into()));
        }
        if !(smoothing > 0.0) {
            return Err(Error::InvalidConfig("smoothing must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let noise: Vec<f64> = (0..pattern_len).map(|_| normal.sample(&mut rng)).collect();
        let p = pattern_len as i64;
        let kernel: Vec<f64> = (0..pattern_len)
            .map(|d| {
                // circular distance
                let d = (d as i64).min(p - d as i64) as f64;
                (-0.5 * (d / smoothing).powi(2)).exp()
            })
            .collect();
        let smooth: Vec<f64> = (0..pattern_len)
            .map(|i| (0..pattern_len).map(|j| noise[j] * kernel[(i + pattern_len - j) % pattern_len]).sum())
            .collect();
        let (lo, hi) = smooth.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        let base = smooth.iter().map(|v| 0.1 + 0.8 * (v - lo) / (hi - lo)).collect();
        Ok(Self { base, fold, seed })
    }

    pub fn from_pattern(base: Vec<f64>, fold: u32) -> Result<Self> {
        if fold == 0 || base.len() < 4 {
            return Err(Error::InvalidConfig("need fold ≥ 1 and at least 4 samples".into()));
        }
        Ok(Self { base, fold, seed: 0 })
    }

    pub fn fold(&self) -> u32 {
        self.fold
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn pattern(&self) -> &[f64] {
        &self.base
    }

    pub fn theta(&self) -> f64 {
        std::f64::consts::TAU / self.fold as f64
    }

    /// Albedo at object angle `phi`, Catmull-Rom interpolated.
    pub fn sample(&self, phi: f64) -> f64 {
        let p = self.base.len();
        let u = (phi / self.theta()).rem_euclid(1.0) * p as f64;
        let i = u.floor();
        let t = u - i;
        let i = i as usize % p;
        let at = |k: isize| self.base[((i as isize + k).rem_euclid(p as isize)) as usize];
        let (p0, p1, p2, p3) = (at(-1), at(0), at(1), at(2));
        let v = 0.5
            * (2.0 * p1
                + (p2 - p0) * t
                + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t
                + (3.0 * (p1 - p2) + p3 - p0) * t * t * t);
        v.clamp(0.0, 1.0)
    }

    /// Largest normalized circular autocorrelation of the base pattern over
    /// nonzero shifts; 1 would mean a smaller period than the pattern length.
    pub fn max_autocorrelation(&self) -> f64 {
        let p = self.base.len();
        let mean = self.base.iter().sum::<f64>() / p as f64;
        let c: Vec<f64> = self.base.iter().map(|v| v - mean).collect();
        let r0: f64 = c.iter().map(|v| v * v).sum();
        (1..p)
            .map(|s| (0..p).map(|i| c[i] * c[(i + s) % p]).sum::<f64>() / r0)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Object angle seen at each pixel of a `width`-pixel line camera looking at
/// the near half of a unit disc rotated by `alpha` (orthographic projection).
pub fn pixel_object_angles(alpha: f64, width: usize) -> Vec<f64> {
    (0..width)
        .map(|i| {
            let x = -1.0 + (i as f64 + 0.5) * 2.0 / width as f64;
            -x.acos() - alpha
        })
        .collect()
}

/// Intensities in `[0, 1]`, one per pixel.
pub fn render_disc<T: Real>(alpha: f64, tex: &DiscTexture, width: usize) -> Vec<T> {
    pixel_object_angles(alpha, width)
        .into_iter()
        .map(|phi| T::lit(tex.sample(phi)))
        .collect()
}

/// Seen perimeter point per pixel, in object coordinates.
pub fn object_point_image<T: Real>(alpha: f64, width: usize) -> Vec<Vec2<T>> {
    pixel_object_angles(alpha, width)
        .into_iter()
        .map(|phi| Vec2::new(T::lit(phi.cos()), T::lit(phi.sin())))
        .collect()
}

/// Object-point image with every angle multiplied by `fold`.
pub fn csl_image<T: Real>(alpha: f64, width: usize, fold: u32) -> Vec<Vec2<T>> {
    let n = fold as f64;
    pixel_object_angles(alpha, width)
        .into_iter()
        .map(|phi| Vec2::new(T::lit((n * phi).cos()), T::lit((n * phi).sin())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tex() -> DiscTexture {
        DiscTexture::random(6, DEFAULT_PATTERN_LEN, DEFAULT_SMOOTHING, 1).unwrap()
    }

    #[test]
    fn texture_is_n_fold_and_not_finer() {
        let t = tex();
        for k in 0..100 {
            let phi = -3.0 + 0.061 * k as f64;
            assert!((t.sample(phi) - t.sample(phi + t.theta())).abs() < 1e-9);
        }
        assert!(t.max_autocorrelation() < 0.95);
        let periodic = DiscTexture::from_pattern((0..8).map(|i| (i % 4) as f64).collect(), 6).unwrap();
        assert!((periodic.max_autocorrelation() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn catmull_rom_hits_samples() {
        let t = tex();
        for i in 0..DEFAULT_PATTERN_LEN {
            let phi = t.theta() * i as f64 / DEFAULT_PATTERN_LEN as f64;
            assert!((t.sample(phi) - t.pattern()[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn render_periodicity_and_continuity() {
        let t = tex();
        let a: Vec<f64> = render_disc(0.3, &t, 64);
        let b: Vec<f64> = render_disc(0.3 + t.theta(), &t, 64);
        let c: Vec<f64> = render_disc(0.3 + 2.0 * PI, &t, 64);
        for i in 0..64 {
            assert!((a[i] - b[i]).abs() < 1e-9 && (a[i] - c[i]).abs() < 1e-9);
            assert!((0.0..=1.0).contains(&a[i]));
        }
        // adjacent test-sweep angles: step bounded by the texture's slope
        let slope = (0..DEFAULT_PATTERN_LEN)
            .map(|i| (t.pattern()[(i + 1) % DEFAULT_PATTERN_LEN] - t.pattern()[i]).abs())
            .fold(0.0, f64::max)
            * DEFAULT_PATTERN_LEN as f64
            / t.theta();
        let step = PI / 900.0;
        let bound = 2.0 * slope * step * 64f64.sqrt();
        let mut prev: Vec<f64> = render_disc(0.0, &t, 64);
        for k in 1..1800 {
            let cur: Vec<f64> = render_disc(k as f64 * step, &t, 64);
            let d = prev.iter().zip(&cur).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            assert!(d < bound, "step {k}: {d} ≥ {bound}");
            prev = cur;
        }
    }

    #[test]
    fn pixel_geometry() {
        let phis = pixel_object_angles(0.0, 4);
        // leftmost pixel sees the disc edge near angle -π, rightmost near 0
        assert!(phis[0] < -2.0 && phis[3] > -1.0);
        assert!(phis.iter().all(|p| (-PI..0.0).contains(p)));
        let s: Vec<Vec2<f64>> = csl_image(0.4, 8, 6);
        let o: Vec<Vec2<f64>> = object_point_image(0.4, 8);
        for (a, b) in s.iter().zip(&o) {
            let expect = 6.0 * b.y.atan2(b.x);
            assert!((a.y.atan2(a.x) - crate::geom::wrap_angle(expect)).abs() < 1e-9);
        }
    }
}
