use std::io::Write;

use rayon::prelude::*;

use super::disc::{DiscTexture, DEFAULT_PATTERN_LEN, DEFAULT_SMOOTHING};
use super::repr::{unflatten, AngleLookup, Representation};
use super::train::{init_net, make_datasets, predict, train, Sweep, TrainConfig};
use crate::error::{Error, Result};
use crate::losses::{imos_mae, mae, mos_ae, PlanarSymmetry, Theta};
use crate::scalar::Real;

/// Everything that determines a study run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub representations: Vec<Representation>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Odd, so the median restart is well defined.
    pub num_restarts: usize,
    /// Restart `r` uses seed `seed + r` for initialization and shuffling.
    pub seed: u64,
    pub width: usize,
    pub fold: u32,
    pub texture_seed: u64,
    pub pattern_len: usize,
    pub smoothing: f64,
    /// A raw output step counts as steep above this multiple of the target's median step.
    pub transition_factor: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            representations: Representation::ALL.to_vec(),
            epochs: 500,
            batch_size: 10,
            learning_rate: 1e-3,
            num_restarts: 11,
            seed: 0,
            width: 64,
            fold: 6,
            texture_seed: 0,
            pattern_len: DEFAULT_PATTERN_LEN,
            smoothing: DEFAULT_SMOOTHING,
            transition_factor: 10.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.representations.is_empty() {
            return fail("no representation selected");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return fail("epochs and batch size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning rate must be positive");
        }
        if self.num_restarts % 2 == 0 {
            return fail("num_restarts must be odd");
        }
        if self.width < 16 || self.width % 16 != 0 {
            return fail("width must be a positive multiple of 16");
        }
        if self.fold < 2 {
            return fail("fold must be at least 2");
        }
        if !(self.transition_factor > 1.0) {
            return fail("transition factor must exceed 1");
        }
        DiscTexture::random(self.fold, self.pattern_len, self.smoothing, self.texture_seed).map(|_| ())
    }

    pub fn texture(&self) -> Result<DiscTexture> {
        DiscTexture::random(self.fold, self.pattern_len, self.smoothing, self.texture_seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartResult {
    pub seed: u64,
    pub final_loss: f64,
}

/// One row of the results table, from the median-loss restart.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub representation: Representation,
    /// Image representations only.
    pub pixel_error: Option<f64>,
    /// Mean angle error modulo `θ` over the test sweep.
    pub angle_error: f64,
    pub transitions: usize,
    pub seed_of_median: u64,
    pub restarts: Vec<RestartResult>,
    /// `(α, recovered angle)` over the test sweep.
    pub sweep: Vec<(f64, f64)>,
}

/// Number of maximal runs of consecutive steps whose Euclidean norm exceeds
/// `factor` times the median step of `reference`. Both sequences hold
/// `size` values per sample.
pub fn count_transitions(raw: &[f64], reference: &[f64], size: usize, factor: f64) -> usize {
    let steps = |s: &[f64]| -> Vec<f64> {
        s.chunks(size)
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| w[0].iter().zip(w[1]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .collect()
    };
    let mut ref_steps = steps(reference);
    if ref_steps.is_empty() {
        return 0;
    }
    ref_steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let threshold = factor * ref_steps[ref_steps.len() / 2];
    let mut runs = 0;
    let mut inside = false;
    for s in steps(raw) {
        let steep = s > threshold;
        if steep && !inside {
            runs += 1;
        }
        inside = steep;
    }
    runs
}

/// Largest and median step norm of a sequence of `size`-vectors.
pub fn step_stats(seq: &[f64], size: usize) -> (f64, f64) {
    let chunks: Vec<_> = seq.chunks(size).collect();
    let mut steps: Vec<f64> = chunks
        .windows(2)
        .map(|w| w[0].iter().zip(w[1]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .collect();
    steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (*steps.last().unwrap_or(&0.0), steps.get(steps.len() / 2).copied().unwrap_or(0.0))
}

/// Trains `num_restarts` networks for one representation and evaluates the
/// one with the median final training loss.
pub fn run_representation<T: Real>(
    repr: Representation,
    cfg: &ExperimentConfig,
    train_set: &Sweep<T>,
    test_set: &Sweep<T>,
) -> Result<StudyRow> {
    let tcfg = |seed| TrainConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        learning_rate: cfg.learning_rate,
        seed,
    };
    let runs: Vec<_> = (0..cfg.num_restarts as u64)
        .into_par_iter()
        .map(|r| -> Result<_> {
            let seed = cfg.seed.wrapping_add(r);
            let mut net = init_net::<T>(repr, cfg.width, seed);
            let outcome = train(&mut net, train_set, repr, &tcfg(seed))?;
            Ok((seed, outcome.final_loss, net))
        })
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| runs[a].1.partial_cmp(&runs[b].1).unwrap().then(a.cmp(&b)));
    let median = order[order.len() / 2];
    let restarts = runs
        .iter()
        .map(|(seed, loss, _)| RestartResult {
            seed: *seed,
            final_loss: *loss,
        })
        .collect();
    let (seed_of_median, mut net) = {
        let (s, _, n) = runs.into_iter().nth(median).unwrap();
        (s, n)
    };
    let out: Vec<f64> = predict(&mut net, test_set).iter().map(|v| v.as_f64()).collect();
    evaluate(repr, cfg, test_set, &out, seed_of_median, restarts)
}

fn evaluate<T: Real>(
    repr: Representation,
    cfg: &ExperimentConfig,
    test_set: &Sweep<T>,
    out: &[f64],
    seed_of_median: u64,
    restarts: Vec<RestartResult>,
) -> Result<StudyRow> {
    let size = repr.output_size(cfg.width);
    let theta = Theta::<f64>::from_fold(cfg.fold)?;
    let targets: Vec<f64> = test_set.targets(repr).iter().map(|v| v.as_f64()).collect();
    let lookup = if repr.is_image() {
        Some(AngleLookup::new(repr, cfg.width, cfg.fold)?)
    } else {
        None
    };
    let sym = PlanarSymmetry::new(&theta)?;
    let mut angle_sum = 0.0;
    let mut pixel_sum = 0.0;
    let mut sweep = Vec::with_capacity(test_set.len());
    for (k, &alpha) in test_set.alphas.iter().enumerate() {
        let o = &out[k * size..(k + 1) * size];
        let est = super::repr::recover_angle(o, repr, cfg.fold, lookup.as_ref())?;
        angle_sum += mos_ae(alpha, est, &theta);
        sweep.push((alpha, est));
        if repr.is_image() {
            let (y, yh) = (unflatten(&targets[k * size..(k + 1) * size]), unflatten(o));
            pixel_sum += if repr == Representation::CslImage {
                mae(&y, &yh)?
            } else {
                imos_mae(&y, &yh, &sym)?
            };
        }
    }
    let n = test_set.len() as f64;
    Ok(StudyRow {
        representation: repr,
        pixel_error: repr.is_image().then_some(pixel_sum / n),
        angle_error: angle_sum / n,
        transitions: count_transitions(out, &targets, size, cfg.transition_factor),
        seed_of_median,
        restarts,
        sweep,
    })
}

/// Runs every configured representation on one shared texture and dataset.
pub fn run_study<T: Real>(cfg: &ExperimentConfig) -> Result<Vec<StudyRow>> {
    cfg.validate()?;
    let tex = cfg.texture()?;
    let (train_set, test_set) = make_datasets::<T>(&tex, cfg.width);
    cfg.representations
        .iter()
        .map(|&r| run_representation(r, cfg, &train_set, &test_set))
        .collect()
}

pub const RESULTS_HEADER: &str = "representation,loss,pixel_error,angle_error,transitions,seed_of_median";

pub fn write_results_csv<W: Write>(rows: &[StudyRow], mut w: W) -> Result<()> {
    writeln!(w, "{RESULTS_HEADER}")?;
    for r in rows {
        let px = r.pixel_error.map(|v| format!("{v:.6}")).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{:.6},{},{}",
            r.representation.name(),
            r.representation.loss_name(),
            px,
            r.angle_error,
            r.transitions,
            r.seed_of_median
        )?;
    }
    Ok(())
}

/// `alpha,predicted` per test angle.
pub fn write_sweep_csv<W: Write>(row: &StudyRow, mut w: W) -> Result<()> {
    writeln!(w, "alpha,predicted")?;
    for (a, p) in &row.sweep {
        writeln!(w, "{a:.9},{p:.9}")?;
    }
    Ok(())
}
