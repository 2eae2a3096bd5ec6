//! Flat `key = value` configuration for the disc study.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use csl_core::toylab::{ExperimentConfig, Representation};

pub const HELP: &str = "\
Config keys (one `key = value` or `key: value` per line, `#` starts a comment):
  representations   comma-separated list or `all`                  [all]
                    norm-angle, angle, vector, csl-vector,
                    po-img-pmos, po-img-imos, csl-img
  epochs            training epochs                                 [500]
  batch_size        mini-batch size                                 [10]
  learning_rate     Adam step size                                  [0.001]
  num_restarts      restarts per representation, odd                [11]
  seed              restart r uses seed + r                         [0]
  width             line-image width, multiple of 16                [64]
  fold              texture symmetry order                          [6]
  texture_seed      seed of the random base pattern                 [0]
  pattern_len       samples in one base period                      [64]
  smoothing         Gaussian smoothing of the pattern, in samples   [1.5]
  transition_factor steep-step threshold over the median step       [10]
  precision         f32 or f64                                      [f32]";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl Precision {
    pub fn name(self) -> &'static str {
        match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub experiment: ExperimentConfig,
    pub precision: Precision,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentConfig::default(),
            precision: Precision::F32,
        }
    }
}

/// Keys a manifest carries besides the configuration.
const MANIFEST_ONLY: [&str; 4] = ["command", "version", "restart_seeds", "results"];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("bad value for {key}: '{value}'"))
}

impl ToyConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = ToyConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some(pos) = line.find(['=', ':']) else {
                return Err(format!("line {}: expected `key = value`", lineno + 1));
            };
            let (key, value) = (line[..pos].trim(), line[pos + 1..].trim());
            if MANIFEST_ONLY.contains(&key) || key.starts_with("sweep.") {
                continue;
            }
            cfg.set(key, value).map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let e = &mut self.experiment;
        match key {
            "representations" => {
                e.representations = if value == "all" {
                    Representation::ALL.to_vec()
                } else {
                    value
                        .split(',')
                        .map(|s| s.trim().parse::<Representation>().map_err(|err| err.to_string()))
                        .collect::<Result<_, _>>()?
                }
            }
            "epochs" => e.epochs = parse(key, value)?,
            "batch_size" => e.batch_size = parse(key, value)?,
            "learning_rate" => e.learning_rate = parse(key, value)?,
            "num_restarts" => e.num_restarts = parse(key, value)?,
            "seed" => e.seed = parse(key, value)?,
            "width" => e.width = parse(key, value)?,
            "fold" => e.fold = parse(key, value)?,
            "texture_seed" => e.texture_seed = parse(key, value)?,
            "pattern_len" => e.pattern_len = parse(key, value)?,
            "smoothing" => e.smoothing = parse(key, value)?,
            "transition_factor" => e.transition_factor = parse(key, value)?,
            "precision" => {
                self.precision = match value {
                    "f32" => Precision::F32,
                    "f64" => Precision::F64,
                    _ => return Err(format!("bad value for precision: '{value}'")),
                }
            }
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Configuration as `key: value` lines, readable by [`ToyConfig::parse`].
    pub fn to_lines(&self) -> String {
        let e = &self.experiment;
        let reprs: Vec<&str> = e.representations.iter().map(|r| r.name()).collect();
        let mut s = String::new();
        let _ = writeln!(s, "representations: {}", reprs.join(","));
        let _ = writeln!(s, "epochs: {}", e.epochs);
        let _ = writeln!(s, "batch_size: {}", e.batch_size);
        let _ = writeln!(s, "learning_rate: {:?}", e.learning_rate);
        let _ = writeln!(s, "num_restarts: {}", e.num_restarts);
        let _ = writeln!(s, "seed: {}", e.seed);
        let _ = writeln!(s, "width: {}", e.width);
        let _ = writeln!(s, "fold: {}", e.fold);
        let _ = writeln!(s, "texture_seed: {}", e.texture_seed);
        let _ = writeln!(s, "pattern_len: {}", e.pattern_len);
        let _ = writeln!(s, "smoothing: {:?}", e.smoothing);
        let _ = writeln!(s, "transition_factor: {:?}", e.transition_factor);
        let _ = writeln!(s, "precision: {}", self.precision.name());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_lines() {
        let mut cfg = ToyConfig::default();
        cfg.experiment.representations = vec![Representation::CslVector, Representation::AngleMos];
        cfg.experiment.learning_rate = 3e-4;
        cfg.experiment.smoothing = 0.1 + 0.2;
        cfg.precision = Precision::F64;
        assert_eq!(ToyConfig::parse(&cfg.to_lines()).unwrap(), cfg);
    }

    #[test]
    fn comments_and_equals() {
        let cfg = ToyConfig::parse("# study\nepochs = 3 # short\n\nnum_restarts=1\n").unwrap();
        assert_eq!(cfg.experiment.epochs, 3);
        assert_eq!(cfg.experiment.num_restarts, 1);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ToyConfig::parse("epoch = 3").is_err());
        assert!(ToyConfig::parse("epochs = three").is_err());
        assert!(ToyConfig::parse("epochs").is_err());
        assert!(ToyConfig::parse("representations = csl").is_err());
    }
}
