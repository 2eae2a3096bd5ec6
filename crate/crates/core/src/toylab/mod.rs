//! One-degree-of-freedom study: a disc with an `n`-fold texture seen by a
//! line camera, and a tiny CNN trained to output its angle in seven
//! representations.

pub mod disc;
pub mod net;
pub mod nn;
pub mod repr;
pub mod study;
pub mod train;

pub use disc::{render_disc, DiscTexture};
pub use net::{OutputKind, TinyNet};
pub use repr::{recover_angle, AngleLookup, Representation};
pub use study::{run_study, ExperimentConfig, StudyRow};
pub use train::{make_datasets, train, Sweep, TrainConfig};
