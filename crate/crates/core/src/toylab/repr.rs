use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use super::disc::{csl_image, object_point_image};
use super::net::OutputKind;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::losses::{
    ae, ae_grad, imos_mae, imos_mae_grad, mae, mae_grad, mos_ae, mos_ae_grad, pmos_mae, pmos_mae_grad, vec_ae,
    vec_ae_grad, vec_mos_ae, vec_mos_ae_grad, PlanarSymmetry, Theta,
};
use crate::scalar::Real;

/// Output representation and its training loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    /// `α mod θ`, absolute error.
    NormAngle,
    /// `α`, absolute error modulo `θ`.
    AngleMos,
    /// `(cos α, sin α)`, closest symmetric equivalent.
    VectorMos,
    /// `(cos nα, sin nα)`, plain error.
    CslVector,
    /// Object-point image, each pixel picks its equivalent.
    PointImagePmos,
    /// Object-point image, one equivalent per image.
    PointImageImos,
    /// Object-point image with angles multiplied by `n`, plain error.
    CslImage,
}

impl Representation {
    pub const ALL: [Representation; 7] = [
        Representation::NormAngle,
        Representation::AngleMos,
        Representation::VectorMos,
        Representation::CslVector,
        Representation::PointImagePmos,
        Representation::PointImageImos,
        Representation::CslImage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Representation::NormAngle => "norm-angle",
            Representation::AngleMos => "angle",
            Representation::VectorMos => "vector",
            Representation::CslVector => "csl-vector",
            Representation::PointImagePmos => "po-img-pmos",
            Representation::PointImageImos => "po-img-imos",
            Representation::CslImage => "csl-img",
        }
    }

    pub fn loss_name(self) -> &'static str {
        match self {
            Representation::NormAngle | Representation::CslVector => "ae",
            Representation::AngleMos | Representation::VectorMos => "mos-ae",
            Representation::PointImagePmos => "pmos-mae",
            Representation::PointImageImos => "imos-mae",
            Representation::CslImage => "mae",
        }
    }

    pub fn output_kind(self) -> OutputKind {
        match self {
            Representation::NormAngle | Representation::AngleMos => OutputKind::Vector { dim: 1 },
            Representation::VectorMos | Representation::CslVector => OutputKind::Vector { dim: 2 },
            _ => OutputKind::Image { channels: 2 },
        }
    }

    pub fn is_image(self) -> bool {
        matches!(self.output_kind(), OutputKind::Image { .. })
    }

    pub fn is_csl(self) -> bool {
        matches!(self, Representation::CslVector | Representation::CslImage)
    }

    pub fn output_size(self, width: usize) -> usize {
        match self.output_kind() {
            OutputKind::Vector { dim } => dim,
            OutputKind::Image { channels } => channels * width,
        }
    }

    /// Ground truth for angle `alpha`; images are channel-major (`x` row, then `y` row).
    pub fn target<T: Real>(self, alpha: f64, width: usize, fold: u32) -> Vec<T> {
        let n = fold as f64;
        let theta = TAU / n;
        match self {
            Representation::NormAngle => vec![T::lit(alpha - theta * (alpha / theta).floor())],
            Representation::AngleMos => vec![T::lit(alpha)],
            Representation::VectorMos => vec![T::lit(alpha.cos()), T::lit(alpha.sin())],
            Representation::CslVector => vec![T::lit((n * alpha).cos()), T::lit((n * alpha).sin())],
            Representation::PointImagePmos | Representation::PointImageImos => flatten(&object_point_image(alpha, width)),
            Representation::CslImage => flatten(&csl_image(alpha, width, fold)),
        }
    }

    /// Per-sample loss and its gradient with respect to `output`.
    pub fn loss_and_grad<T: Real>(self, target: &[T], output: &[T], theta: &Theta<T>) -> Result<(T, Vec<T>)> {
        if target.len() != output.len() {
            return Err(Error::ShapeMismatch(target.len(), 1, output.len(), 1));
        }
        let v2 = |s: &[T]| Vec2::new(s[0], s[1]);
        Ok(match self {
            Representation::NormAngle => (ae(target[0], output[0]), vec![ae_grad(target[0], output[0])]),
            Representation::AngleMos => (
                mos_ae(target[0], output[0], theta),
                vec![mos_ae_grad(target[0], output[0], theta)],
            ),
            Representation::VectorMos => {
                let (y, yh) = (v2(target), v2(output));
                let g = vec_mos_ae_grad(&y, &yh, theta)?;
                (vec_mos_ae(&y, &yh, theta)?, vec![g.x, g.y])
            }
            Representation::CslVector => {
                let (y, yh) = (v2(target), v2(output));
                let g = vec_ae_grad(&y, &yh);
                (vec_ae(&y, &yh), vec![g.x, g.y])
            }
            Representation::PointImagePmos | Representation::PointImageImos | Representation::CslImage => {
                let (y, yh) = (unflatten(target), unflatten(output));
                let (l, g) = match self {
                    Representation::PointImagePmos => {
                        let sym = PlanarSymmetry::new(theta)?;
                        (pmos_mae(&y, &yh, &sym)?, pmos_mae_grad(&y, &yh, &sym)?)
                    }
                    Representation::PointImageImos => {
                        let sym = PlanarSymmetry::new(theta)?;
                        (imos_mae(&y, &yh, &sym)?, imos_mae_grad(&y, &yh, &sym)?)
                    }
                    _ => (mae(&y, &yh)?, mae_grad(&y, &yh)?),
                };
                (l, flatten(&g))
            }
        })
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Representation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown representation '{s}'")))
    }
}

pub(crate) fn flatten<T: Real>(v: &[Vec2<T>]) -> Vec<T> {
    v.iter().map(|p| p.x).chain(v.iter().map(|p| p.y)).collect()
}

pub(crate) fn unflatten<T: Real>(s: &[T]) -> Vec<Option<Vec2<T>>> {
    let w = s.len() / 2;
    (0..w).map(|i| Some(Vec2::new(s[i], s[w + i]))).collect()
}

/// Precomputed ground-truth images on a `π/1800` angle grid.
#[derive(Debug, Clone)]
pub struct AngleLookup {
    step: f64,
    entries: Vec<Vec<f64>>,
    /// Recovered angles are reduced modulo this period.
    period: f64,
}

pub const LOOKUP_STEP: f64 = PI / 1800.0;

impl AngleLookup {
    /// Csl images repeat every `θ`; plain object-point images cover the
    /// full turn and are reduced modulo `θ` afterwards.
    pub fn new(repr: Representation, width: usize, fold: u32) -> Result<Self> {
        if !repr.is_image() {
            return Err(Error::InvalidConfig(format!("{repr} has no image lookup")));
        }
        let theta = TAU / fold as f64;
        let span = if repr == Representation::CslImage { theta } else { TAU };
        let count = (span / LOOKUP_STEP).round() as usize;
        let entries = (0..count)
            .map(|g| repr.target::<f64>(g as f64 * LOOKUP_STEP, width, fold))
            .collect();
        Ok(Self {
            step: LOOKUP_STEP,
            entries,
            period: theta,
        })
    }

    /// Nearest entry by mean squared difference, refined by a parabola
    /// through the neighbouring distances.
    pub fn find<T: Real>(&self, output: &[T]) -> f64 {
        let dist: Vec<f64> = self
            .entries
            .iter()
            .map(|e| e.iter().zip(output).map(|(a, b)| (a - b.as_f64()).powi(2)).sum::<f64>())
            .collect();
        let n = dist.len();
        let g = (0..n).fold(0, |b, k| if dist[k] < dist[b] { k } else { b });
        let (dm, d0, dp) = (dist[(g + n - 1) % n], dist[g], dist[(g + 1) % n]);
        let curv = dm - 2.0 * d0 + dp;
        let offset = if curv > 0.0 { (0.5 * (dm - dp) / curv).clamp(-0.5, 0.5) } else { 0.0 };
        ((g as f64 + offset) * self.step).rem_euclid(self.period)
    }
}

/// Angle encoded by a network output. Image outputs need the lookup table
/// of their representation.
pub fn recover_angle<T: Real>(output: &[T], repr: Representation, fold: u32, lookup: Option<&AngleLookup>) -> Result<f64> {
    let n = fold as f64;
    let vec_angle = |s: &[T]| -> Result<f64> {
        let (x, y) = (s[0].as_f64(), s[1].as_f64());
        if x == 0.0 && y == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(y.atan2(x))
    };
    match repr {
        Representation::NormAngle | Representation::AngleMos => Ok(output[0].as_f64()),
        Representation::VectorMos => vec_angle(output),
        Representation::CslVector => Ok(vec_angle(output)? / n),
        _ => lookup
            .map(|l| l.find(output))
            .ok_or_else(|| Error::InvalidConfig("image representations need a lookup table".into())),
    }
}
