use clap::{Args as ClapArgs, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use csl_core::pnp::{solve_pnp, sym_pose_error, Correspondences, PnpConfig};
use csl_core::reverse::{reverse_map_detailed, symmetric_map_error, RansacConfig};
use csl_core::symmetry::{dash_map, render_scene, star_map, Scene, Solid};
use csl_core::{Camera64, Error, Fold, PointMap64, Pose64, Symmetry64, Vec3d};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Object {
    /// Square box, 4-fold about Z.
    Box,
    /// Oblong box, 2-fold about Z.
    FlatBox,
    /// Cylinder, infinite fold about Z.
    Bottle,
}

impl Object {
    fn solid(self) -> Solid<f64> {
        match self {
            Object::Box => Solid::Cuboid {
                half_extents: Vec3d::new(0.1, 0.1, 0.15),
            },
            Object::FlatBox => Solid::Cuboid {
                half_extents: Vec3d::new(0.12, 0.08, 0.1),
            },
            Object::Bottle => Solid::Cylinder {
                radius: 0.08,
                half_height: 0.15,
            },
        }
    }

    fn fold(self) -> Fold {
        match self {
            Object::Box => Fold::Finite(4),
            Object::FlatBox => Fold::Finite(2),
            Object::Bottle => Fold::Infinite,
        }
    }
}

#[derive(Debug, Clone, ClapArgs)]
pub struct Args {
    #[arg(long, value_enum, default_value = "box")]
    pub object: Object,
    /// Rotation vector (rad) and translation (m) as `rx,ry,rz,tx,ty,tz`.
    #[arg(long, default_value = "0.9,0.4,0.3,0.02,-0.01,1.0", allow_hyphen_values = true)]
    pub pose: String,
    /// Symmetry order about Z (`inf` for rotational); defaults to the object's.
    #[arg(long)]
    pub fold: Option<String>,
    /// Standard deviation (m) of Gaussian noise added to star and dash points.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_pose(s: &str) -> Result<Pose64, Failure> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Config(format!("bad pose '{s}'")))?;
    if v.len() != 6 || v.iter().any(|x| !x.is_finite()) {
        return Err(Failure::Config(format!("pose needs six finite numbers, got '{s}'")));
    }
    Ok(Pose64::from_rotvec(Vec3d::new(v[0], v[1], v[2]), Vec3d::new(v[3], v[4], v[5])))
}

fn classify(e: Error) -> Failure {
    match e {
        Error::NotEnoughReferences
        | Error::NoValidPixels
        | Error::Degenerate(_)
        | Error::NotEnoughCorrespondences { .. }
        | Error::NotConverged { .. }
        | Error::BehindCamera => Failure::Degenerate(e.to_string()),
        Error::InvalidSymmetry(_) | Error::CubeLikeSymmetry(_) | Error::TwoAxisReverse | Error::InvalidCamera(_) => {
            Failure::Config(e.to_string())
        }
        e => Failure::Other(e.to_string()),
    }
}

fn add_noise(map: &PointMap64, dist: &Normal<f64>, rng: &mut ChaCha8Rng) -> PointMap64 {
    map.map_valid(|_, _, p| p + Vec3d::new(dist.sample(rng), dist.sample(rng), dist.sample(rng)))
}

pub fn run(args: &Args) -> Result<(), Failure> {
    let pose = parse_pose(&args.pose)?;
    let fold = match &args.fold {
        Some(s) => s.parse().map_err(|e: Error| Failure::Config(e.to_string()))?,
        None => args.object.fold(),
    };
    let spec = Symmetry64::single(Vec3d::z(), fold).map_err(classify)?;
    if !(args.noise >= 0.0 && args.noise.is_finite()) {
        return Err(Failure::Config("noise must be a non-negative number".into()));
    }
    let cam = Camera64::new(500.0, 500.0, 80.0, 60.0, 160, 120).map_err(classify)?;

    let truth = render_scene(&Scene::single(args.object.solid(), pose), &cam)
        .map_err(classify)?
        .points;
    if truth.valid_count() == 0 {
        return Err(Failure::Degenerate("object is not visible".into()));
    }
    let mut star = star_map(&truth, &spec);
    let mut dash = dash_map(&truth, &pose, &cam);
    if args.noise > 0.0 {
        let dist = Normal::new(0.0, args.noise).map_err(|e| Failure::Config(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        star = add_noise(&star, &dist, &mut rng);
        dash = add_noise(&dash, &dist, &mut rng);
    }

    let ransac = RansacConfig {
        seed: args.seed,
        ..Default::default()
    };
    let (recovered, selection) = reverse_map_detailed(&star, &dash, &cam, &spec, &ransac).map_err(classify)?;
    let map_err = symmetric_map_error(&recovered, &truth, &spec).map_err(classify)?;
    let corr = Correspondences::from_point_map(&recovered, cam).map_err(classify)?;
    let sol = solve_pnp(&corr, None, &PnpConfig::default()).map_err(classify)?;
    let (rot_err, trans_err) = sym_pose_error(&sol.pose, &pose, &spec);

    println!("object: {:?}", args.object);
    println!("fold: {fold}");
    println!("noise: {}", args.noise);
    println!("pixels: {}", truth.valid_count());
    println!("reference_score: {:.6e}", selection.score);
    println!("reverse_max_error_m: {map_err:.3e}");
    println!("pnp_rms_px: {:.3e}", sol.rms);
    println!("pnp_iterations: {}", sol.iterations);
    println!("rot_err_rad: {rot_err:.3e}");
    println!("trans_err_m: {trans_err:.3e}");
    Ok(())
}
