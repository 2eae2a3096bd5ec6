//! Representation losses and their gradients with respect to the prediction.
//!
//! Vector errors use the Euclidean norm `|y - ŷ|`. Map losses average over the
//! pixels where the target is valid. Min-over-symmetries losses search
//! `k ∈ 0..n`; where two branches tie, the smaller `k` supplies the gradient.

use nalgebra::{Matrix2, Rotation3, SVector};

use crate::error::{Error, Result};
use crate::geom::{rot2, Vec2, Vec3};
use crate::scalar::Real;
use crate::symmetry::AxisFrame;

/// Symmetry angle `θ`, `0 < θ ≤ 2π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta<T> {
    radians: T,
}

impl<T: Real> Theta<T> {
    pub fn new(radians: T) -> Result<Self> {
        if !(radians > T::zero() && radians <= T::two_pi() * (T::one() + T::default_epsilon())) {
            return Err(Error::InvalidSymmetry(format!(
                "symmetry angle {} outside (0, 2π]",
                radians.as_f64()
            )));
        }
        Ok(Self { radians })
    }

    pub fn from_fold(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSymmetry("fold must be at least 1".into()));
        }
        Ok(Self {
            radians: T::two_pi() / T::from_u32(n).unwrap(),
        })
    }

    pub fn radians(&self) -> T {
        self.radians
    }

    /// The integer fold `n = 2π/θ`.
    pub fn fold(&self) -> Result<u32> {
        let n = (T::two_pi() / self.radians).as_f64();
        let r = n.round();
        if (n - r).abs() > 1e-6 * r.max(1.0) {
            return Err(Error::NonIntegerFold(self.radians.as_f64()));
        }
        Ok(r as u32)
    }
}

pub fn ae<T: Real>(y: T, y_hat: T) -> T {
    (y - y_hat).abs()
}

/// `∂ ae / ∂ŷ`; zero at `y == ŷ`.
pub fn ae_grad<T: Real>(y: T, y_hat: T) -> T {
    sign(y_hat - y)
}

fn sign<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Euclidean distance between two vectors.
pub fn vec_ae<T: Real, const D: usize>(y: &SVector<T, D>, y_hat: &SVector<T, D>) -> T {
    (y - y_hat).norm()
}

pub fn vec_ae_grad<T: Real, const D: usize>(y: &SVector<T, D>, y_hat: &SVector<T, D>) -> SVector<T, D> {
    let d = y_hat - y;
    let n = d.norm();
    if n > T::zero() {
        d / n
    } else {
        SVector::zeros()
    }
}

/// Residual `y - ŷ + kθ` of smallest magnitude (smaller `k` on ties).
fn mos_residual<T: Real>(y: T, y_hat: T, theta: &Theta<T>) -> T {
    let th = theta.radians;
    let d = y - y_hat;
    let k0 = (-d / th).floor();
    let r0 = d + k0 * th;
    let r1 = r0 + th;
    if r0.abs() <= r1.abs() {
        r0
    } else {
        r1
    }
}

/// `min_k |y - ŷ + kθ|`, always in `[0, θ/2]`.
pub fn mos_ae<T: Real>(y: T, y_hat: T, theta: &Theta<T>) -> T {
    // depends on |y - ŷ| only, so the value is exactly symmetric
    let th = theta.radians;
    let d = (y - y_hat).abs();
    let r = (d - th * (d / th).floor()).abs();
    r.min((th - r).abs())
}

pub fn mos_ae_grad<T: Real>(y: T, y_hat: T, theta: &Theta<T>) -> T {
    -sign(mos_residual(y, y_hat, theta))
}

/// A finite symmetry acting on target vectors: the `k`-th equivalent of `y`.
pub trait SymmetryAction<T: Real, const D: usize> {
    fn fold(&self) -> u32;
    fn apply(&self, v: &SVector<T, D>, k: u32) -> SVector<T, D>;
}

/// Rotations `Rot(kθ)` of planar vectors.
#[derive(Debug, Clone)]
pub struct PlanarSymmetry<T: Real> {
    rotations: Vec<Matrix2<T>>,
}

impl<T: Real> PlanarSymmetry<T> {
    pub fn new(theta: &Theta<T>) -> Result<Self> {
        let n = theta.fold()?;
        let th = theta.radians();
        Ok(Self {
            rotations: (0..n).map(|k| rot2(th * T::from_u32(k).unwrap())).collect(),
        })
    }
}

impl<T: Real> SymmetryAction<T, 2> for PlanarSymmetry<T> {
    fn fold(&self) -> u32 {
        self.rotations.len() as u32
    }

    fn apply(&self, v: &Vec2<T>, k: u32) -> Vec2<T> {
        self.rotations[k as usize] * v
    }
}

/// Rotations by `kθ` about an axis in 3D.
#[derive(Debug, Clone)]
pub struct AxialSymmetry<T: Real> {
    rotations: Vec<Rotation3<T>>,
}

impl<T: Real> AxialSymmetry<T> {
    pub fn new(theta: &Theta<T>, axis: &Vec3<T>) -> Result<Self> {
        let n = theta.fold()?;
        let frame = AxisFrame::new(axis)?;
        let th = theta.radians();
        Ok(Self {
            rotations: (0..n)
                .map(|k| match k {
                    0 => Rotation3::identity(),
                    k => frame.rotation(th * T::from_u32(k).unwrap()),
                })
                .collect(),
        })
    }
}

impl<T: Real> SymmetryAction<T, 3> for AxialSymmetry<T> {
    fn fold(&self) -> u32 {
        self.rotations.len() as u32
    }

    fn apply(&self, v: &Vec3<T>, k: u32) -> Vec3<T> {
        self.rotations[k as usize] * v
    }
}

/// `min_k |Rot(kθ)y - ŷ|` over `k ∈ 0..n`.
pub fn vec_mos_ae<T: Real>(y: &Vec2<T>, y_hat: &Vec2<T>, theta: &Theta<T>) -> Result<T> {
    let sym = PlanarSymmetry::new(theta)?;
    Ok(best_equivalent(&sym, y, y_hat).1)
}

pub fn vec_mos_ae_grad<T: Real>(y: &Vec2<T>, y_hat: &Vec2<T>, theta: &Theta<T>) -> Result<Vec2<T>> {
    let sym = PlanarSymmetry::new(theta)?;
    let (k, _) = best_equivalent(&sym, y, y_hat);
    Ok(vec_ae_grad(&sym.apply(y, k), y_hat))
}

/// `(k, |Rot(kθ)y - ŷ|)` of the closest equivalent, first `k` on ties.
pub fn best_equivalent<T: Real, const D: usize, S: SymmetryAction<T, D>>(
    sym: &S,
    y: &SVector<T, D>,
    y_hat: &SVector<T, D>,
) -> (u32, T) {
    // k = 0 goes through `apply` too, so the per-pixel minimum never exceeds
    // the value the whole-map search computes for the same k
    let mut best = (0, vec_ae(&sym.apply(y, 0), y_hat));
    for k in 1..sym.fold() {
        let e = vec_ae(&sym.apply(y, k), y_hat);
        if e < best.1 {
            best = (k, e);
        }
    }
    best
}

type Map<T, const D: usize> = [Option<SVector<T, D>>];

/// Valid `(target, prediction)` pairs; errors on shape or mask problems.
fn valid_pairs<'a, T: Real, const D: usize>(
    y: &'a Map<T, D>,
    y_hat: &'a Map<T, D>,
) -> Result<Vec<(usize, &'a SVector<T, D>, &'a SVector<T, D>)>> {
    if y.len() != y_hat.len() {
        return Err(Error::ShapeMismatch(y.len(), 1, y_hat.len(), 1));
    }
    let mut out = Vec::with_capacity(y.len());
    for (idx, (a, b)) in y.iter().zip(y_hat).enumerate() {
        if let Some(a) = a {
            let b = b.as_ref().ok_or(Error::MaskMismatch)?;
            out.push((idx, a, b));
        }
    }
    if out.is_empty() {
        return Err(Error::NoValidPixels);
    }
    Ok(out)
}

/// Mean of per-pixel Euclidean errors over valid target pixels.
pub fn mae<T: Real, const D: usize>(y: &Map<T, D>, y_hat: &Map<T, D>) -> Result<T> {
    let pairs = valid_pairs(y, y_hat)?;
    let m = T::from_count(pairs.len());
    Ok(pairs.iter().map(|(_, a, b)| vec_ae(*a, *b)).fold(T::zero(), |s, e| s + e) / m)
}

/// Gradient with respect to every prediction pixel (zero where the target is invalid).
pub fn mae_grad<T: Real, const D: usize>(y: &Map<T, D>, y_hat: &Map<T, D>) -> Result<Vec<SVector<T, D>>> {
    let pairs = valid_pairs(y, y_hat)?;
    let m = T::from_count(pairs.len());
    let mut g = vec![SVector::zeros(); y.len()];
    for (idx, a, b) in pairs {
        g[idx] = vec_ae_grad(a, b) / m;
    }
    Ok(g)
}

/// Each pixel picks its own closest equivalent, then the mean is taken.
pub fn pmos_mae<T: Real, const D: usize, S: SymmetryAction<T, D>>(
    y: &Map<T, D>,
    y_hat: &Map<T, D>,
    sym: &S,
) -> Result<T> {
    let pairs = valid_pairs(y, y_hat)?;
    let m = T::from_count(pairs.len());
    Ok(pairs
        .iter()
        .map(|(_, a, b)| best_equivalent(sym, a, b).1)
        .fold(T::zero(), |s, e| s + e)
        / m)
}

pub fn pmos_mae_grad<T: Real, const D: usize, S: SymmetryAction<T, D>>(
    y: &Map<T, D>,
    y_hat: &Map<T, D>,
    sym: &S,
) -> Result<Vec<SVector<T, D>>> {
    let pairs = valid_pairs(y, y_hat)?;
    let m = T::from_count(pairs.len());
    let mut g = vec![SVector::zeros(); y.len()];
    for (idx, a, b) in pairs {
        let (k, _) = best_equivalent(sym, a, b);
        g[idx] = vec_ae_grad(&sym.apply(a, k), b) / m;
    }
    Ok(g)
}

/// `(k, mean error)` for the single equivalent that fits the whole map best.
pub fn imos_best<T: Real, const D: usize, S: SymmetryAction<T, D>>(
    y: &Map<T, D>,
    y_hat: &Map<T, D>,
    sym: &S,
) -> Result<(u32, T)> {
    let pairs = valid_pairs(y, y_hat)?;
    let m = T::from_count(pairs.len());
    let mean = |k: u32| {
        pairs
            .iter()
            .map(|(_, a, b)| vec_ae(&sym.apply(a, k), b))
            .fold(T::zero(), |s, e| s + e)
            / m
    };
    let mut best = (0, mean(0));
    for k in 1..sym.fold() {
        let e = mean(k);
        if e < best.1 {
            best = (k, e);
        }
    }
    Ok(best)
}

/// One equivalent for the whole map: `min_k` of the mean error.
pub fn imos_mae<T: Real, const D: usize, S: SymmetryAction<T, D>>(
    y: &Map<T, D>,
    y_hat: &Map<T, D>,
    sym: &S,
) -> Result<T> {
    Ok(imos_best(y, y_hat, sym)?.1)
}

pub fn imos_mae_grad<T: Real, const D: usize, S: SymmetryAction<T, D>>(
    y: &Map<T, D>,
    y_hat: &Map<T, D>,
    sym: &S,
) -> Result<Vec<SVector<T, D>>> {
    let (k, _) = imos_best(y, y_hat, sym)?;
    let rotated: Vec<_> = y.iter().map(|v| v.map(|v| sym.apply(&v, k))).collect();
    mae_grad(&rotated, y_hat)
}
