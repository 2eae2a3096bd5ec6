//! Recovery of consistent object points from star and dash maps.
//!
//! Every star point stands for an equivalence class of object points (`n`
//! members, or a circle for the infinite fold). Rotating object points into
//! the camera preserves their pairwise angles, so the member whose angles to
//! three reference points best match the angles observed in the (ray-aligned)
//! dash map is consistent with the references. References are drawn by seeded
//! random sampling; the set with the lowest total angle error over the whole
//! map wins.
//!
//! The recovered map equals the true object points up to one global symmetry
//! rotation. Only single-axis symmetries are supported.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::geom::{angle_between_unchecked, Cyl3, Vec3};
use crate::pointmap::PointMap;
use crate::scalar::Real;
use crate::symmetry::{align_dash_map, AxisFrame, AxisSymmetry, Fold, SymmetrySpec};

/// Object points sharing one star value.
#[derive(Debug, Clone, PartialEq)]
pub enum EquivalenceClass<T: Real> {
    /// `n` members, member `k` rotated by `kθ` from member 0.
    Finite(Vec<Vec3<T>>),
    /// Circle of radius `rho` at axial height `z` about the frame's axis.
    Continuous { frame: AxisFrame<T>, rho: T, z: T },
}

impl<T: Real> EquivalenceClass<T> {
    /// Member 0 (finite) or the member at `phi = 0` (continuous).
    pub fn representative(&self) -> Option<Vec3<T>> {
        match self {
            EquivalenceClass::Finite(m) => m.first().copied(),
            EquivalenceClass::Continuous { frame, rho, z } => Some(frame.cart(&Cyl3 {
                phi: T::zero(),
                rho: *rho,
                z: *z,
            })),
        }
    }
}

/// Inverts the star transform about one axis.
pub fn equivalence_class<T: Real>(star: &Vec3<T>, sym: &AxisSymmetry<T>) -> EquivalenceClass<T> {
    let c = sym.frame.cyl(star);
    match sym.fold {
        Fold::Finite(n) => {
            let nf = T::from_u32(n).unwrap();
            let theta = T::two_pi() / nf;
            let base = c.phi / nf;
            EquivalenceClass::Finite(
                (0..n)
                    .map(|k| {
                        sym.frame.cart(&Cyl3 {
                            phi: base + theta * T::from_u32(k).unwrap(),
                            ..c
                        })
                    })
                    .collect(),
            )
        }
        Fold::Infinite => EquivalenceClass::Continuous {
            frame: sym.frame,
            rho: c.rho,
            z: c.z,
        },
    }
}

/// Three `(object point, observed point)` pairs. The observed point is the
/// dash value with its ray rotation undone, i.e. the object point rotated
/// into the camera frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSet<T: Real> {
    pub pairs: [(Vec3<T>, Vec3<T>); 3],
}

impl<T: Real> ReferenceSet<T> {
    /// Rejects reference points whose triangle area is at most `min_area`.
    pub fn new(pairs: [(Vec3<T>, Vec3<T>); 3], min_area: T) -> Result<Self> {
        let [a, b, c] = pairs.map(|p| p.0);
        if triangle_area(&a, &b, &c) <= min_area {
            return Err(Error::Degenerate("collinear reference points".into()));
        }
        Ok(Self { pairs })
    }
}

fn triangle_area<T: Real>(a: &Vec3<T>, b: &Vec3<T>, c: &Vec3<T>) -> T {
    (b - a).cross(&(c - a)).norm() * T::lit(0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig {
    pub num_samples: usize,
    /// Minimum reference triangle area relative to the squared object diameter.
    pub collinearity_epsilon: f64,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            num_samples: 16,
            collinearity_epsilon: 1e-6,
            seed: 0,
        }
    }
}

/// `Σ_r |∠(p, p_r) − ∠(observed, observed_r)|`.
pub fn angle_error_sum<T: Real>(p: &Vec3<T>, observed: &Vec3<T>, refs: &ReferenceSet<T>) -> T {
    refs.pairs.iter().fold(T::zero(), |s, (pr, qr)| {
        s + (angle_between_unchecked(p, pr) - angle_between_unchecked(observed, qr)).abs()
    })
}

fn argmin<T: Real>(candidates: impl IntoIterator<Item = Vec3<T>>, cost: impl Fn(&Vec3<T>) -> T) -> Option<(Vec3<T>, T)> {
    let mut best: Option<(Vec3<T>, T)> = None;
    for c in candidates {
        let e = cost(&c);
        if best.is_none_or(|(_, b)| e < b) {
            best = Some((c, e));
        }
    }
    best
}

/// Member of `cls` with the smallest angle error sum; lowest index on ties.
pub fn disambiguate_point<T: Real>(cls: &EquivalenceClass<T>, observed: &Vec3<T>, refs: &ReferenceSet<T>) -> Result<Vec3<T>> {
    Ok(disambiguate_scored(cls, observed, refs)?.0)
}

fn disambiguate_scored<T: Real>(cls: &EquivalenceClass<T>, observed: &Vec3<T>, refs: &ReferenceSet<T>) -> Result<(Vec3<T>, T)> {
    let cost = |p: &Vec3<T>| angle_error_sum(p, observed, refs);
    match cls {
        EquivalenceClass::Finite(members) => argmin(members.iter().copied(), cost).ok_or(Error::EmptyClass),
        EquivalenceClass::Continuous { frame, rho, z } => {
            let cands = continuous_candidates(frame, *rho, *z, observed, refs.pairs.iter());
            match argmin(cands, cost) {
                Some(best) => Ok(best),
                // on the axis (or only degenerate references): the class is a point
                None => {
                    let p = cls.representative().ok_or(Error::EmptyClass)?;
                    Ok((p, cost(&p)))
                }
            }
        }
    }
}

/// Members of the circle `(rho, z)` whose angle to each reference matches the
/// observed angle: two per reference, at `phi_r ± β`.
///
/// For a member `p` at azimuth `phi_r + β` and a reference `p_r` at azimuth
/// `phi_r`, `p·p_r = ρ ρ_r cos β + z z_r`, hence
/// `cos β = (cos∠(observed, observed_r)·|p||p_r| − z z_r) / (ρ ρ_r)`, clamped to
/// `[-1, 1]`. When `z z_r = 0` this is the right-spherical-triangle relation
/// `cos β = cos∠(observed, observed_r) / cos∠(p̄̄, p_r)` with `p̄̄` the member
/// directly above the reference. References with `ρ ρ_r` below `1e-9·|p||p_r|`
/// do not constrain the azimuth and are skipped.
pub fn continuous_candidates<'a, T: Real>(
    frame: &AxisFrame<T>,
    rho: T,
    z: T,
    observed: &Vec3<T>,
    refs: impl IntoIterator<Item = &'a (Vec3<T>, Vec3<T>)>,
) -> Vec<Vec3<T>> {
    let norm = rho.hypot(z);
    let mut out = Vec::with_capacity(6);
    for (pr, qr) in refs {
        let c = frame.cyl(pr);
        let norm_r = c.rho.hypot(c.z);
        let denom = rho * c.rho;
        if denom <= T::lit(1e-9) * norm * norm_r {
            continue;
        }
        let target = angle_between_unchecked(observed, qr);
        let cos_beta = ((target.cos() * norm * norm_r - z * c.z) / denom).clamp(-T::one(), T::one());
        let beta = cos_beta.acos();
        out.push(frame.cart(&Cyl3 { phi: c.phi + beta, rho, z }));
        if beta > T::zero() {
            out.push(frame.cart(&Cyl3 { phi: c.phi - beta, rho, z }));
        }
    }
    out
}

/// Outcome of reference sampling.
#[derive(Debug, Clone)]
pub struct ReferenceSelection<T: Real> {
    pub refs: ReferenceSet<T>,
    /// Pixel indices (row-major) of the winning triple.
    pub pixels: [usize; 3],
    /// Total angle error sum of the winner over all valid pixels.
    pub score: T,
    /// Score of every evaluated sample, in sampling order.
    pub sample_scores: Vec<T>,
}

struct Pixel<T: Real> {
    index: usize,
    class: EquivalenceClass<T>,
    observed: Vec3<T>,
}

fn primary_only<T: Real>(spec: &SymmetrySpec<T>) -> Result<AxisSymmetry<T>> {
    if spec.secondary_flip().is_some() {
        return Err(Error::TwoAxisReverse);
    }
    Ok(spec.primary)
}

fn collect_pixels<T: Real>(star: &PointMap<T>, observed: &PointMap<T>, sym: &AxisSymmetry<T>) -> Result<Vec<Pixel<T>>> {
    star.same_shape(observed)?;
    if !star.same_mask(observed) {
        return Err(Error::MaskMismatch);
    }
    Ok(star
        .entries()
        .iter()
        .zip(observed.entries())
        .enumerate()
        .filter_map(|(index, (s, q))| {
            Some(Pixel {
                index,
                class: equivalence_class(s.as_ref()?, sym),
                observed: *q.as_ref()?,
            })
        })
        .collect())
}

fn pairwise_error<T: Real>(p: &[Vec3<T>; 3], q: &[Vec3<T>; 3]) -> T {
    [(0, 1), (0, 2), (1, 2)].iter().fold(T::zero(), |s, &(a, b)| {
        s + (angle_between_unchecked(&p[a], &p[b]) - angle_between_unchecked(&q[a], &q[b])).abs()
    })
}

fn det3<T: Real>(p: &[Vec3<T>; 3]) -> T {
    p[0].dot(&p[1].cross(&p[2]))
}

/// Expands a sampled triple into object points: the first point is fixed to
/// its class representative, the others are chosen among their class members
/// (or circle candidates) to minimise the pairwise angle error. Combinations
/// whose handedness contradicts the observed triple are discarded, which
/// removes the mirror ambiguity angles alone leave for the infinite fold.
fn expand_triple<T: Real>(px: [&Pixel<T>; 3], min_area: T) -> Option<ReferenceSet<T>> {
    let q = [px[0].observed, px[1].observed, px[2].observed];
    let p0 = px[0].class.representative()?;
    let fixed = [(p0, q[0])];
    let options = |k: usize| -> Vec<Vec3<T>> {
        match &px[k].class {
            EquivalenceClass::Finite(m) => m.clone(),
            EquivalenceClass::Continuous { frame, rho, z } => continuous_candidates(frame, *rho, *z, &q[k], fixed.iter()),
        }
    };
    let (o1, o2) = (options(1), options(2));
    let dq = det3(&q);
    let scale = q.iter().fold(T::one(), |s, v| s * v.norm());
    let chiral = dq.abs() > T::lit(1e-9) * scale;
    let mut best: Option<([Vec3<T>; 3], T)> = None;
    for p1 in &o1 {
        for p2 in &o2 {
            let p = [p0, *p1, *p2];
            if chiral && det3(&p) * dq < T::zero() {
                continue;
            }
            let e = pairwise_error(&p, &q);
            if best.is_none_or(|(_, b)| e < b) {
                best = Some((p, e));
            }
        }
    }
    let (p, _) = best?;
    ReferenceSet::new([(p[0], q[0]), (p[1], q[1]), (p[2], q[2])], min_area).ok()
}

fn total_error<T: Real>(pixels: &[Pixel<T>], refs: &ReferenceSet<T>) -> T {
    pixels.iter().fold(T::zero(), |s, px| {
        s + disambiguate_scored(&px.class, &px.observed, refs).map_or(T::zero(), |(_, e)| e)
    })
}

/// Samples `cfg.num_samples` nondegenerate reference triples and keeps the
/// one with the smallest total angle error sum (first sample on exact ties).
///
/// `observed` is the ray-aligned dash map (see [`align_dash_map`]).
pub fn select_references<T: Real>(
    star: &PointMap<T>,
    observed: &PointMap<T>,
    spec: &SymmetrySpec<T>,
    cfg: &RansacConfig,
) -> Result<ReferenceSelection<T>> {
    let sym = primary_only(spec)?;
    let pixels = collect_pixels(star, observed, &sym)?;
    select_from_pixels(&pixels, star.max_norm() * T::lit(2.0), cfg)
}

fn select_from_pixels<T: Real>(pixels: &[Pixel<T>], diameter: T, cfg: &RansacConfig) -> Result<ReferenceSelection<T>> {
    if cfg.num_samples == 0 {
        return Err(Error::InvalidConfig("num_samples must be at least 1".into()));
    }
    if pixels.len() < 3 {
        return Err(Error::NotEnoughReferences);
    }
    let eps = T::lit(cfg.collinearity_epsilon);
    let min_area = eps * diameter * diameter;
    let min_det = eps * diameter * diameter * diameter;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<ReferenceSelection<T>> = None;
    let mut sample_scores = Vec::with_capacity(cfg.num_samples);
    let max_attempts = cfg.num_samples * 200;
    let mut attempts = 0;
    while sample_scores.len() < cfg.num_samples && attempts < max_attempts {
        attempts += 1;
        let idx = sample(&mut rng, pixels.len(), 3);
        let px = [&pixels[idx.index(0)], &pixels[idx.index(1)], &pixels[idx.index(2)]];
        let q = [px[0].observed, px[1].observed, px[2].observed];
        // collinear points, or directions coplanar with the object origin,
        // leave the angles unable to separate class members
        if triangle_area(&q[0], &q[1], &q[2]) <= min_area || det3(&q).abs() <= min_det {
            continue;
        }
        let Some(refs) = expand_triple(px, min_area) else {
            continue;
        };
        let score = total_error(pixels, &refs);
        sample_scores.push(score);
        if best.as_ref().is_none_or(|b| score < b.score) {
            best = Some(ReferenceSelection {
                refs,
                pixels: [px[0].index, px[1].index, px[2].index],
                score,
                sample_scores: Vec::new(),
            });
        }
    }
    let mut best = best.ok_or(Error::NotEnoughReferences)?;
    best.sample_scores = sample_scores;
    Ok(best)
}

/// Star and dash maps back to a consistent object-point map.
pub fn reverse_map<T: Real>(
    star: &PointMap<T>,
    dash: &PointMap<T>,
    cam: &CameraModel<T>,
    spec: &SymmetrySpec<T>,
    cfg: &RansacConfig,
) -> Result<PointMap<T>> {
    Ok(reverse_map_detailed(star, dash, cam, spec, cfg)?.0)
}

/// [`reverse_map`] that also returns the reference selection.
pub fn reverse_map_detailed<T: Real>(
    star: &PointMap<T>,
    dash: &PointMap<T>,
    cam: &CameraModel<T>,
    spec: &SymmetrySpec<T>,
    cfg: &RansacConfig,
) -> Result<(PointMap<T>, ReferenceSelection<T>)> {
    let sym = primary_only(spec)?;
    let observed = align_dash_map(dash, cam);
    let pixels = collect_pixels(star, &observed, &sym)?;
    let selection = select_from_pixels(&pixels, star.max_norm() * T::lit(2.0), cfg)?;
    let mut out = PointMap::invalid(star.width(), star.height());
    let w = star.width();
    for px in &pixels {
        let p = disambiguate_point(&px.class, &px.observed, &selection.refs)?;
        out.set(px.index % w, px.index / w, Some(p));
    }
    Ok((out, selection))
}

/// Largest point distance between `got` and `truth` after the best global
/// rotation about the primary axis: the closest group element for a finite
/// fold, the least-squares angle for the infinite fold.
pub fn symmetric_map_error<T: Real>(got: &PointMap<T>, truth: &PointMap<T>, spec: &SymmetrySpec<T>) -> Result<T> {
    got.same_shape(truth)?;
    if !got.same_mask(truth) {
        return Err(Error::MaskMismatch);
    }
    if got.valid_count() == 0 {
        return Err(Error::NoValidPixels);
    }
    let sym = primary_only(spec)?;
    let max_dev = |g: &nalgebra::Rotation3<T>| {
        got.iter_valid()
            .map(|(i, j, p)| (p - g * truth.get(i, j).unwrap()).norm())
            .fold(T::zero(), |a, b| a.max(b))
    };
    Ok(match spec.finite_group() {
        Some(group) => group.iter().map(max_dev).fold(T::max_value().unwrap(), |a, b| a.min(b)),
        None => {
            let (mut s, mut c) = (T::zero(), T::zero());
            for (i, j, p) in got.iter_valid() {
                let a = sym.frame.to_local(truth.get(i, j).unwrap());
                let b = sym.frame.to_local(p);
                s += a.x * b.y - a.y * b.x;
                c += a.x * b.x + a.y * b.y;
            }
            max_dev(&sym.frame.rotation(s.atan2(c)))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{rot_z, Pose};
    use crate::symmetry::{dash_map, render_scene, star_map, star_point, Scene, Solid};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn z_sym(fold: Fold) -> AxisSymmetry<f64> {
        SymmetrySpec::about_z(fold).primary
    }

    fn members(c: &EquivalenceClass<f64>) -> &Vec<Vec3<f64>> {
        match c {
            EquivalenceClass::Finite(m) => m,
            _ => panic!("finite class expected"),
        }
    }

    #[test]
    fn class_of_four_fold_star_point() {
        let c = equivalence_class(&Vec3::new(1.0, 0.0, 0.5), &z_sym(Fold::Finite(4)));
        let expect = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (m, (x, y)) in members(&c).iter().zip(expect) {
            assert_abs_diff_eq!(*m, Vec3::new(x, y, 0.5), epsilon = 1e-15);
        }
        let one = equivalence_class(&Vec3::new(0.3, 0.2, 0.1), &z_sym(Fold::Finite(1)));
        assert_eq!(members(&one).len(), 1);
        assert_abs_diff_eq!(members(&one)[0], Vec3::new(0.3, 0.2, 0.1), epsilon = 1e-15);
    }

    #[test]
    fn class_members_star_back() {
        for n in [2, 3, 5, 6, 12] {
            let sym = z_sym(Fold::Finite(n));
            let s = Vec3::new(-0.4, -0.7, 0.2);
            let c = equivalence_class(&s, &sym);
            assert_eq!(members(&c).len(), n as usize);
            for m in members(&c) {
                assert_abs_diff_eq!(star_point(m, &Vec3::z(), Fold::Finite(n)).unwrap(), s, epsilon = 1e-12);
            }
        }
    }

    fn refs_from(points: [Vec3<f64>; 3], r: &nalgebra::Rotation3<f64>) -> ReferenceSet<f64> {
        ReferenceSet::new(points.map(|p| (p, r * p)), 1e-12).unwrap()
    }

    #[test]
    fn exact_dash_picks_true_member() {
        let r = nalgebra::Rotation3::new(Vec3::new(0.3, 1.1, -0.4));
        let refs = refs_from(
            [Vec3::new(0.5, 0.2, 0.3), Vec3::new(-0.1, 0.5, 0.3), Vec3::new(0.2, -0.4, -0.3)],
            &r,
        );
        let truth = Vec3::new(-0.3, 0.35, -0.1);
        let sym = z_sym(Fold::Finite(4));
        let cls = equivalence_class(&sym.star(&truth), &sym);
        assert_abs_diff_eq!(disambiguate_point(&cls, &(r * truth), &refs).unwrap(), truth, epsilon = 1e-12);
    }

    #[test]
    fn opposite_face_selects_opposite_equivalent() {
        // box 2-fold about Z; references on the +x face
        let r = nalgebra::Rotation3::new(Vec3::new(-0.2, 0.4, 0.9));
        let refs = refs_from(
            [Vec3::new(0.3, 0.1, 0.2), Vec3::new(0.3, -0.15, 0.1), Vec3::new(0.3, 0.05, -0.2)],
            &r,
        );
        let truth = Vec3::new(-0.3, 0.12, 0.05);
        let sym = z_sym(Fold::Finite(2));
        let cls = equivalence_class(&sym.star(&truth), &sym);
        let m = members(&cls);
        let e: Vec<_> = m.iter().map(|p| angle_error_sum(p, &(r * truth), &refs)).collect();
        let oracle = if e[0] <= e[1] { m[0] } else { m[1] };
        assert!(oracle.x < 0.0);
        assert_eq!(disambiguate_point(&cls, &(r * truth), &refs).unwrap(), oracle);
    }

    #[test]
    fn tie_takes_lowest_index() {
        // all references on the axis: every member has the same angles
        let refs = ReferenceSet {
            pairs: [
                (Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 1.0)),
                (Vec3::new(0.0, 0.0, 2.0), Vec3::new(0.0, 0.0, 2.0)),
                (Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 0.0, -1.0)),
            ],
        };
        let cls = equivalence_class(&Vec3::new(0.0, 1.0, 0.4), &z_sym(Fold::Finite(3)));
        let got = disambiguate_point(&cls, &Vec3::new(1.0, 0.0, 0.4), &refs).unwrap();
        assert_eq!(got, members(&cls)[0]);
        assert_eq!(
            disambiguate_point(&EquivalenceClass::Finite(vec![]), &Vec3::x(), &refs),
            Err(Error::EmptyClass)
        );
    }

    #[test]
    fn beta_zero_candidate_is_point_above_reference() {
        let frame = AxisFrame::<f64>::new(&Vec3::z()).unwrap();
        let pr = Vec3::new(0.0, 0.5, 0.2);
        let above = Vec3::new(0.0, 0.3, -0.1);
        // observed angle equals ∠(p̄̄, p_r)
        let refs = [(pr, pr)];
        let c = continuous_candidates(&frame, 0.3, -0.1, &above, refs.iter());
        assert_eq!(c.len(), 1);
        assert_abs_diff_eq!(c[0], above, epsilon = 1e-12);
    }

    #[test]
    fn noisy_cosine_is_clamped() {
        let frame = AxisFrame::<f64>::new(&Vec3::z()).unwrap();
        let pr = Vec3::new(1.0, 0.0, 0.0);
        // observed angle smaller than any member can reach: cos β > 1
        let refs = [(pr, pr)];
        let c = continuous_candidates(&frame, 0.5, 0.5, &Vec3::new(1.0, 0.0, 0.0), refs.iter());
        assert_eq!(c.len(), 1);
        assert_abs_diff_eq!(c[0], Vec3::new(0.5, 0.0, 0.5), epsilon = 1e-15);
    }

    #[test]
    fn equator_case_matches_spherical_pythagoras() {
        let frame = AxisFrame::<f64>::new(&Vec3::z()).unwrap();
        let pr = Vec3::new(0.4, 0.4, 0.0);
        let truth = Vec3::new(0.0, -0.6, 0.25);
        let refs = [(pr, pr)];
        let c = continuous_candidates(&frame, 0.6, 0.25, &truth, refs.iter());
        let cr = frame.cyl(&pr);
        let above = frame.cart(&Cyl3 { phi: cr.phi, rho: 0.6, z: 0.25 });
        let cos_obs = angle_between_unchecked(&truth, &pr).cos();
        let beta = (cos_obs / angle_between_unchecked(&above, &pr).cos()).acos();
        let got = crate::geom::wrap_angle(frame.cyl(&c[0]).phi - cr.phi);
        assert_abs_diff_eq!(got.abs(), beta, epsilon = 1e-12);
    }

    #[test]
    fn continuous_matches_dense_circle_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sym = z_sym(Fold::Infinite);
        for _ in 0..50 {
            let r = nalgebra::Rotation3::new(Vec3::new(rng.random(), rng.random(), rng.random()) * 2.0);
            let rand_pt = |rng: &mut ChaCha8Rng| {
                let phi = rng.random_range(-PI..PI);
                let rho = rng.random_range(0.05..0.1);
                Vec3::new(rho * phi.cos(), rho * phi.sin(), rng.random_range(-0.2..0.2))
            };
            let refs = refs_from([rand_pt(&mut rng), rand_pt(&mut rng), rand_pt(&mut rng)], &r);
            let truth = rand_pt(&mut rng);
            let cls = equivalence_class(&sym.star(&truth), &sym);
            let got = disambiguate_point(&cls, &(r * truth), &refs).unwrap();
            // oracle: densest sampling of the circle, then the true point
            // must be at least as good as every sample
            let c = sym.frame.cyl(&truth);
            let dense_best = (0..20_000)
                .map(|k| {
                    let p = sym.frame.cart(&Cyl3 { phi: -PI + 2.0 * PI * k as f64 / 20_000.0, ..c });
                    (p, angle_error_sum(&p, &(r * truth), &refs))
                })
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert!((dense_best.0 - truth).norm() < 1e-4 * 0.1 * 20.0);
            assert!((got - truth).norm() < 1e-6, "{got} vs {truth}");
        }
    }

    fn scene(solid: Solid<f64>, pose: Pose<f64>) -> (CameraModel<f64>, PointMap<f64>) {
        let cam = CameraModel::new(200.0, 200.0, 40.0, 30.0, 80, 60).unwrap();
        let r = render_scene(&Scene::single(solid, pose), &cam).unwrap();
        (cam, r.points)
    }

    fn max_err_up_to_symmetry(got: &PointMap<f64>, truth: &PointMap<f64>, spec: &SymmetrySpec<f64>) -> f64 {
        spec.finite_group()
            .unwrap()
            .iter()
            .map(|g| {
                got.iter_valid()
                    .map(|(i, j, p)| (p - g * truth.get(i, j).unwrap()).norm())
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn box_round_trip_and_consistency() {
        let spec = SymmetrySpec::about_z(Fold::Finite(4));
        let solid = Solid::Cuboid { half_extents: Vec3::new(0.1, 0.1, 0.15) };
        let pose = Pose::from_rotvec(Vec3::new(1.0, 0.4, 0.3), Vec3::new(0.02, -0.01, 1.0));
        let (cam, truth) = scene(solid, pose);
        let star = star_map(&truth, &spec);
        let dash = dash_map(&truth, &pose, &cam);
        let (rec, sel) = reverse_map_detailed(&star, &dash, &cam, &spec, &RansacConfig::default()).unwrap();
        assert!(rec.same_mask(&truth));
        assert!(max_err_up_to_symmetry(&rec, &truth, &spec) < 1e-6);
        assert!(sel.sample_scores.iter().all(|&s| sel.score <= s));
        assert_eq!(sel.sample_scores.len(), 16);
        // recovered pairwise angles equal observed ones
        let obs = align_dash_map(&dash, &cam);
        let pts: Vec<_> = rec.iter_valid().step_by(37).collect();
        for a in &pts {
            for b in &pts {
                let ra = angle_between_unchecked(a.2, b.2);
                let oa = angle_between_unchecked(obs.get(a.0, a.1).unwrap(), obs.get(b.0, b.1).unwrap());
                assert!((ra - oa).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn fold_one_is_identity_recovery() {
        let spec = SymmetrySpec::about_z(Fold::Finite(1));
        let solid = Solid::Cuboid { half_extents: Vec3::new(0.1, 0.07, 0.12) };
        let pose = Pose::from_rotvec(Vec3::new(-0.6, 0.9, 0.1), Vec3::new(0.0, 0.0, 0.9));
        let (cam, truth) = scene(solid, pose);
        let rec = reverse_map(&star_map(&truth, &spec), &dash_map(&truth, &pose, &cam), &cam, &spec, &RansacConfig::default()).unwrap();
        for (i, j, p) in rec.iter_valid() {
            assert_abs_diff_eq!(*p, *truth.get(i, j).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn bottle_round_trip_up_to_global_rotation() {
        let spec = SymmetrySpec::about_z(Fold::Infinite);
        let solid = Solid::Cylinder { radius: 0.08, half_height: 0.15 };
        let pose = Pose::from_rotvec(Vec3::new(1.2, -0.3, 0.5), Vec3::new(0.01, 0.02, 1.0));
        let (cam, truth) = scene(solid, pose);
        let rec = reverse_map(&star_map(&truth, &spec), &dash_map(&truth, &pose, &cam), &cam, &spec, &RansacConfig::default()).unwrap();
        // least-squares global angle about Z
        let (mut s, mut c) = (0.0, 0.0);
        for (i, j, p) in rec.iter_valid() {
            let t = truth.get(i, j).unwrap();
            s += t.x * p.y - t.y * p.x;
            c += t.x * p.x + t.y * p.y;
        }
        let g = rot_z(s.atan2(c));
        let resid = rec
            .iter_valid()
            .map(|(i, j, p)| (p - g * truth.get(i, j).unwrap()).norm())
            .fold(0.0, f64::max);
        assert!(resid < 1e-5, "residual {resid}");
    }

    #[test]
    fn corrupted_reference_loses() {
        let spec = SymmetrySpec::about_z(Fold::Finite(2));
        let solid = Solid::Cuboid { half_extents: Vec3::new(0.12, 0.08, 0.1) };
        let pose = Pose::from_rotvec(Vec3::new(0.8, 0.5, -0.2), Vec3::new(0.0, 0.0, 1.0));
        let (cam, truth) = scene(solid, pose);
        let star = star_map(&truth, &spec);
        let mut obs = align_dash_map(&dash_map(&truth, &pose, &cam), &cam);
        let sym = spec.primary;
        let clean_pixels = collect_pixels(&star, &obs, &sym).unwrap();
        let bad = clean_pixels[clean_pixels.len() / 2].index;
        let (bi, bj) = (bad % 80, bad / 80);
        let q = *obs.get(bi, bj).unwrap();
        obs.set(bi, bj, Some(nalgebra::Rotation3::new(Vec3::new(0.0, 0.4, 0.0)) * q));
        let pixels = collect_pixels(&star, &obs, &sym).unwrap();
        let pos = pixels.iter().position(|p| p.index == bad).unwrap();
        let n = pixels.len();
        let corrupt = expand_triple([&pixels[pos], &pixels[n / 7], &pixels[n - 3]], 0.0).unwrap();
        let clean = expand_triple([&pixels[n / 5], &pixels[n / 7], &pixels[n - 3]], 0.0).unwrap();
        assert!(total_error(&pixels, &clean) < total_error(&pixels, &corrupt));
        let sel = select_references(&star, &obs, &spec, &RansacConfig { num_samples: 32, ..Default::default() }).unwrap();
        assert!(!sel.pixels.contains(&bad));
    }

    #[test]
    fn triple_expansion_matches_enumeration() {
        let spec = SymmetrySpec::about_z(Fold::Finite(2));
        let r = nalgebra::Rotation3::new(Vec3::new(0.1, -0.7, 0.3));
        let truth = [Vec3::new(0.2, 0.1, 0.1), Vec3::new(-0.15, 0.05, -0.1), Vec3::new(0.05, -0.2, 0.12)];
        let pixels: Vec<_> = truth
            .iter()
            .enumerate()
            .map(|(index, p)| Pixel {
                index,
                class: equivalence_class(&spec.primary.star(p), &spec.primary),
                observed: r * p,
            })
            .collect();
        let got = expand_triple([&pixels[0], &pixels[1], &pixels[2]], 0.0).unwrap();
        let q = truth.map(|p| r * p);
        let p0 = members(&pixels[0].class)[0];
        let mut best = (f64::INFINITY, [Vec3::zeros(); 3]);
        for k1 in 0..2 {
            for k2 in 0..2 {
                let p = [p0, members(&pixels[1].class)[k1], members(&pixels[2].class)[k2]];
                let e = pairwise_error(&p, &q);
                if e < best.0 {
                    best = (e, p);
                }
            }
        }
        for k in 0..3 {
            assert_eq!(got.pairs[k].0, best.1[k]);
        }
        assert!(best.0 < 1e-12);
    }

    #[test]
    fn errors() {
        let spec = SymmetrySpec::about_z(Fold::Finite(2));
        let mut m = PointMap::invalid(4, 4);
        m.set(0, 0, Some(Vec3::new(0.1, 0.0, 0.0)));
        m.set(1, 0, Some(Vec3::new(0.0, 0.1, 0.0)));
        let cfg = RansacConfig::default();
        assert_eq!(select_references(&m, &m, &spec, &cfg).unwrap_err(), Error::NotEnoughReferences);
        let two = SymmetrySpec::two_axis(Vec3::z(), Fold::Finite(2), Vec3::x(), 2).unwrap();
        assert_eq!(select_references(&m, &m, &two, &cfg).unwrap_err(), Error::TwoAxisReverse);
        let mut other = m.clone();
        other.set(3, 3, Some(Vec3::x()));
        assert_eq!(select_references(&m, &other, &spec, &cfg).unwrap_err(), Error::MaskMismatch);
        let r = ReferenceSet::new([(Vec3::x(), Vec3::x()), (Vec3::x() * 2.0, Vec3::x()), (Vec3::x() * 3.0, Vec3::x())], 1e-9);
        assert!(r.is_err());
    }
}
