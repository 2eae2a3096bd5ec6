use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero-length vector where a direction is required")]
    ZeroVector,
    #[error("invalid symmetry: {0}")]
    InvalidSymmetry(String),
    #[error("symmetry cannot be decomposed into a primary fold and a perpendicular 2-fold axis: {0}")]
    CubeLikeSymmetry(String),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("pixel ({i}, {j}) outside {width}x{height} image")]
    PixelOutOfBounds {
        i: usize,
        j: usize,
        width: usize,
        height: usize,
    },
    #[error("point maps differ in shape: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("prediction missing at a pixel where the target is valid")]
    MaskMismatch,
    #[error("no valid pixels")]
    NoValidPixels,
    #[error("symmetry angle {0} does not correspond to an integer fold")]
    NonIntegerFold(f64),
    #[error("object lies entirely behind the camera")]
    BehindCamera,
    #[error("empty equivalence class")]
    EmptyClass,
    #[error("not enough valid noncollinear pixels to choose references")]
    NotEnoughReferences,
    #[error("operation requires a finite fold")]
    InfiniteFold,
    #[error("two-axis symmetry is not supported by the reverse operation")]
    TwoAxisReverse,
    #[error("need at least {needed} correspondences, got {got}")]
    NotEnoughCorrespondences { needed: usize, got: usize },
    #[error("degenerate point configuration: {0}")]
    Degenerate(String),
    #[error("PnP did not converge after {iterations} iterations (rms {rms} px)")]
    NotConverged { iterations: usize, rms: f64 },
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
