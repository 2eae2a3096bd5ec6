//! Pose from 2D–3D correspondences, and pose error modulo symmetry.

use nalgebra::{DMatrix, Matrix3, Rotation3, SMatrix, SVector, Vector6};

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::geom::{angle_between_unchecked, rotation_angle, Pose, Vec2, Vec3};
use crate::pointmap::PointMap;
use crate::scalar::Real;
use crate::symmetry::{Fold, SymmetrySpec};

pub const MIN_CORRESPONDENCES: usize = 6;

/// Pixel positions (continuous, pixel centers at integers) paired with object points.
#[derive(Debug, Clone)]
pub struct Correspondences<T: Real> {
    camera: CameraModel<T>,
    pixels: Vec<Vec2<T>>,
    points: Vec<Vec3<T>>,
}

impl<T: Real> Correspondences<T> {
    pub fn new(camera: CameraModel<T>) -> Self {
        Self {
            camera,
            pixels: Vec::new(),
            points: Vec::new(),
        }
    }

    /// Adds a sub-pixel observation; it must fall on the image.
    pub fn push(&mut self, pixel: Vec2<T>, point: Vec3<T>) -> Result<()> {
        let half = T::lit(0.5);
        let inside = |c: T, n: usize| c >= -half && c < T::from_count(n) - half;
        if !(inside(pixel.x, self.camera.width) && inside(pixel.y, self.camera.height)) {
            let clamp = |c: T| c.as_f64().max(0.0).round() as usize;
            return Err(Error::PixelOutOfBounds {
                i: clamp(pixel.x),
                j: clamp(pixel.y),
                width: self.camera.width,
                height: self.camera.height,
            });
        }
        self.pixels.push(pixel);
        self.points.push(point);
        Ok(())
    }

    pub fn push_pixel(&mut self, i: usize, j: usize, point: Vec3<T>) -> Result<()> {
        self.camera.check_pixel(i, j)?;
        self.push(Vec2::new(T::from_count(i), T::from_count(j)), point)
    }

    /// One correspondence per valid pixel of an object-point map.
    pub fn from_point_map(map: &PointMap<T>, camera: CameraModel<T>) -> Result<Self> {
        if map.width() != camera.width || map.height() != camera.height {
            return Err(Error::ShapeMismatch(map.width(), map.height(), camera.width, camera.height));
        }
        let mut c = Self::new(camera);
        for (i, j, p) in map.iter_valid() {
            c.push_pixel(i, j, *p)?;
        }
        Ok(c)
    }

    pub fn camera(&self) -> &CameraModel<T> {
        &self.camera
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec2<T>, &Vec3<T>)> + '_ {
        self.pixels.iter().zip(&self.points)
    }

    /// Root-mean-square reprojection error in pixels; infinite if any point
    /// lies behind the camera.
    pub fn reprojection_rms(&self, pose: &Pose<T>) -> T {
        match sum_sq(self, pose) {
            Some(s) => (s / T::from_count(self.len().max(1))).sqrt(),
            None => T::max_value().unwrap(),
        }
    }
}

fn sum_sq<T: Real>(c: &Correspondences<T>, pose: &Pose<T>) -> Option<T> {
    let mut s = T::zero();
    for (uv, p) in c.iter() {
        let q = c.camera.project(&pose.transform_point(p))?;
        s += (q - uv).norm_squared();
    }
    Some(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnpConfig {
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for PnpConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            step_tolerance: 1e-10,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnpSolution<T: Real> {
    pub pose: Pose<T>,
    /// Reprojection RMS in pixels at `pose`.
    pub rms: T,
    pub iterations: usize,
}

/// Minimizes the squared reprojection error. Without `init` the pose is
/// initialized linearly: a 3×4 projection fit for spatially spread points, a
/// plane homography for (nearly) planar ones, both refined when the
/// configuration is in between.
pub fn solve_pnp<T: Real>(corr: &Correspondences<T>, init: Option<&Pose<T>>, cfg: &PnpConfig) -> Result<PnpSolution<T>> {
    if corr.len() < MIN_CORRESPONDENCES {
        return Err(Error::NotEnoughCorrespondences {
            needed: MIN_CORRESPONDENCES,
            got: corr.len(),
        });
    }
    let spread = Spread::of(&corr.points)?;
    let inits = match init {
        Some(p) => vec![*p],
        None => {
            let mut v = Vec::with_capacity(2);
            if spread.planarity > T::lit(1e-10) {
                v.extend(dlt_pose(corr, &spread));
            }
            if spread.planarity < T::lit(1e-2) {
                v.extend(homography_pose(corr, &spread));
            }
            if v.is_empty() {
                return Err(Error::Degenerate("linear initialization failed".into()));
            }
            v
        }
    };
    let mut best: Option<PnpSolution<T>> = None;
    let mut last_err = None;
    for p in inits {
        match refine(corr, p, cfg) {
            Ok(s) if best.is_none_or(|b| s.rms < b.rms) => best = Some(s),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap())
}

/// Principal axes of the point cloud.
struct Spread<T: Real> {
    centroid: Vec3<T>,
    scale: T,
    /// Eigenvectors, largest variance first.
    axes: Matrix3<T>,
    /// Smallest over largest variance.
    planarity: T,
}

impl<T: Real> Spread<T> {
    fn of(points: &[Vec3<T>]) -> Result<Self> {
        let n = T::from_count(points.len());
        let centroid = points.iter().fold(Vec3::zeros(), |s, p| s + p) / n;
        let cov = points.iter().fold(Matrix3::zeros(), |s, p| {
            let d = p - centroid;
            s + d * d.transpose()
        }) / n;
        let eig = cov.symmetric_eigen();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let ev = order.map(|k| eig.eigenvalues[k].max(T::zero()));
        if ev[0] <= T::zero() || ev[1] <= T::lit(1e-12) * ev[0] {
            return Err(Error::Degenerate("correspondences are collinear".into()));
        }
        let axes = Matrix3::from_columns(&order.map(|k| eig.eigenvectors.column(k).into_owned()));
        Ok(Self {
            centroid,
            scale: (ev[0] + ev[1] + ev[2]).sqrt(),
            axes,
            planarity: ev[2] / ev[0],
        })
    }
}

fn normalized_image<T: Real>(cam: &CameraModel<T>, uv: &Vec2<T>) -> (T, T) {
    ((uv.x - cam.cx) / cam.fx, (uv.y - cam.cy) / cam.fy)
}

fn smallest_eigenvector<const N: usize>(ata: SMatrix<f64, N, N>) -> SVector<f64, N> {
    let eig = DMatrix::from_column_slice(N, N, ata.as_slice()).symmetric_eigen();
    let k = eig.eigenvalues.imin();
    SVector::from_column_slice(eig.eigenvectors.column(k).as_slice())
}

/// Nearest rotation in the Frobenius sense and the mean singular value.
fn nearest_rotation(m: &Matrix3<f64>) -> Option<(Rotation3<f64>, f64)> {
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u?, svd.v_t?);
    let mut d = Matrix3::identity();
    if (u * vt).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let r = u * d * vt;
    Some((Rotation3::from_matrix_unchecked(r), svd.singular_values.mean()))
}

/// Linear fit of `[R | t]` from `x ∝ R X + t`, in f64 with the points
/// centered and scaled for conditioning.
fn dlt_pose<T: Real>(corr: &Correspondences<T>, s: &Spread<T>) -> Option<Pose<T>> {
    let (c, sc) = (s.centroid.map(|v| v.as_f64()), s.scale.as_f64());
    let mut ata = SMatrix::<f64, 12, 12>::zeros();
    for (uv, p) in corr.iter() {
        let (x, y) = normalized_image(&corr.camera, uv);
        let q = (p.map(|v| v.as_f64()) - c) / sc;
        let h = [q.x, q.y, q.z, 1.0];
        let mut r1 = SVector::<f64, 12>::zeros();
        let mut r2 = SVector::<f64, 12>::zeros();
        for k in 0..4 {
            r1[k] = h[k];
            r1[8 + k] = -x.as_f64() * h[k];
            r2[4 + k] = h[k];
            r2[8 + k] = -y.as_f64() * h[k];
        }
        ata += r1 * r1.transpose() + r2 * r2.transpose();
    }
    let v = smallest_eigenvector(ata);
    let mut m = Matrix3::from_fn(|r, k| v[4 * r + k]);
    let mut t = Vec3::new(v[3], v[7], v[11]);
    if m.determinant() < 0.0 {
        m = -m;
        t = -t;
    }
    // undo the normalization: x ∝ M (X - c)/sc + t  ⇒  t' = t - M c / sc
    let m = m / sc;
    let t = t - m * c;
    let (r, scale) = nearest_rotation(&m)?;
    if scale <= 0.0 {
        return None;
    }
    Some(Pose::new(r, t / scale).cast())
}

/// Homography from plane coordinates to normalized image coordinates,
/// decomposed into a pose. Points off the plane are projected onto it.
fn homography_pose<T: Real>(corr: &Correspondences<T>, s: &Spread<T>) -> Option<Pose<T>> {
    let (c, sc) = (s.centroid.map(|v| v.as_f64()), s.scale.as_f64());
    let axes = s.axes.map(|v| v.as_f64());
    let (e1, e2) = (axes.column(0).into_owned(), axes.column(1).into_owned());
    let mut ata = SMatrix::<f64, 9, 9>::zeros();
    for (uv, p) in corr.iter() {
        let (x, y) = normalized_image(&corr.camera, uv);
        let d = (p.map(|v| v.as_f64()) - c) / sc;
        let h = [d.dot(&e1), d.dot(&e2), 1.0];
        let mut r1 = SVector::<f64, 9>::zeros();
        let mut r2 = SVector::<f64, 9>::zeros();
        for k in 0..3 {
            r1[k] = h[k];
            r1[6 + k] = -x.as_f64() * h[k];
            r2[3 + k] = h[k];
            r2[6 + k] = -y.as_f64() * h[k];
        }
        ata += r1 * r1.transpose() + r2 * r2.transpose();
    }
    let v = smallest_eigenvector(ata);
    // H ∝ [sc·R e1, sc·R e2, R c + t]
    let col = |k: usize| Vec3::new(v[k], v[3 + k], v[6 + k]);
    let (h1, h2, h3) = (col(0), col(1), col(2));
    let mut mu = (h1.norm() + h2.norm()) / (2.0 * sc);
    if mu <= 0.0 {
        return None;
    }
    if h3.z < 0.0 {
        mu = -mu;
    }
    let r1 = h1 / (mu * sc);
    let r2 = h2 / (mu * sc);
    let q = Matrix3::from_columns(&[r1, r2, r1.cross(&r2)]);
    let (qr, _) = nearest_rotation(&q)?;
    let e = Matrix3::from_columns(&[e1, e2, e1.cross(&e2)]);
    let r = Rotation3::from_matrix_unchecked(qr.matrix() * e.transpose());
    let t = h3 / mu - r * c;
    Some(Pose::new(r, t).cast())
}

/// Levenberg–Marquardt on pixel residuals with the update
/// `R ← exp(ω) R`, `t ← t + τ`.
fn refine<T: Real>(corr: &Correspondences<T>, init: Pose<T>, cfg: &PnpConfig) -> Result<PnpSolution<T>> {
    let cam = &corr.camera;
    let mut pose = init;
    let mut cost = sum_sq(corr, &pose).ok_or(Error::BehindCamera)?;
    let mut lambda = T::lit(cfg.initial_damping);
    let tol = T::lit(cfg.step_tolerance);
    let n = T::from_count(corr.len());
    for it in 1..=cfg.max_iterations {
        let mut jtj = SMatrix::<T, 6, 6>::zeros();
        let mut jtr = Vector6::<T>::zeros();
        for (uv, p) in corr.iter() {
            let rp = pose.rotation * p;
            let q = rp + pose.translation;
            let iz = T::one() / q.z;
            let proj = Vec2::new(cam.fx * q.x * iz + cam.cx, cam.fy * q.y * iz + cam.cy);
            let r = proj - uv;
            let dpi = SMatrix::<T, 2, 3>::new(
                cam.fx * iz,
                T::zero(),
                -cam.fx * q.x * iz * iz,
                T::zero(),
                cam.fy * iz,
                -cam.fy * q.y * iz * iz,
            );
            // ∂q/∂ω = -[R p]×, ∂q/∂τ = I
            let mut j = SMatrix::<T, 2, 6>::zeros();
            j.fixed_view_mut::<2, 3>(0, 0).copy_from(&(dpi * -rp.cross_matrix()));
            j.fixed_view_mut::<2, 3>(0, 3).copy_from(&dpi);
            jtj += j.transpose() * j;
            jtr += j.transpose() * r;
        }
        if jtr.iter().all(|v| *v == T::zero()) {
            return Ok(solution(pose, cost, n, it));
        }
        let diag = jtj.diagonal();
        if diag.iter().any(|d| *d <= T::zero()) {
            return Err(Error::Degenerate("rank-deficient normal equations".into()));
        }
        let mut a = jtj;
        for k in 0..6 {
            a[(k, k)] += lambda * diag[k];
        }
        let step = a
            .cholesky()
            .ok_or_else(|| Error::Degenerate("rank-deficient normal equations".into()))?
            .solve(&-jtr);
        let omega = Vec3::new(step[0], step[1], step[2]);
        let tau = Vec3::new(step[3], step[4], step[5]);
        let cand = Pose::new(Rotation3::new(omega) * pose.rotation, pose.translation + tau);
        match sum_sq(corr, &cand) {
            Some(c) if c < cost => {
                pose = cand;
                cost = c;
                lambda *= T::lit(0.1);
            }
            _ => lambda *= T::lit(10.0),
        }
        if step.norm() < tol {
            return Ok(solution(pose, cost, n, it));
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        rms: (cost / n).sqrt().as_f64(),
    })
}

fn solution<T: Real>(pose: Pose<T>, cost: T, n: T, iterations: usize) -> PnpSolution<T> {
    PnpSolution {
        pose,
        rms: (cost / n).sqrt(),
        iterations,
    }
}

/// Rotation error modulo the object's symmetry and translation error.
///
/// Finite folds take the minimum geodesic angle over the symmetry group. For
/// an infinite fold the spin about the axis is free, so the error is the tilt
/// of the axis (minimized over the secondary flip, if any).
pub fn sym_pose_error<T: Real>(est: &Pose<T>, gt: &Pose<T>, spec: &SymmetrySpec<T>) -> (T, T) {
    let d = gt.rotation.inverse() * est.rotation;
    let rot = match spec.primary.fold {
        Fold::Finite(_) => spec
            .finite_group()
            .unwrap()
            .iter()
            .map(|g| rotation_angle(&(g.inverse() * d)))
            .fold(T::max_value().unwrap(), |a, b| a.min(b)),
        Fold::Infinite => {
            let a = spec.primary.axis();
            let tilt = |m: &Rotation3<T>| angle_between_unchecked(&a, &(m * a));
            match spec.secondary_flip() {
                Some(h) => tilt(&d).min(tilt(&(d * h.inverse()))),
                None => tilt(&d),
            }
        }
    };
    (rot, (est.translation - gt.translation).norm())
}
