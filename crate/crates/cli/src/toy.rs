use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use csl_core::toylab::study::{write_results_csv, write_sweep_csv};
use csl_core::toylab::{run_study, Representation, StudyRow};
use csl_core::Error;

use crate::config::{Precision, ToyConfig};
use crate::Failure;

pub const MANIFEST: &str = "manifest.txt";
pub const RESULTS: &str = "results.csv";

fn sweep_name(r: Representation) -> String {
    format!("sweep-{}.csv", r.name())
}

/// Writes through a temporary file in the same directory and renames it.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

fn manifest(cfg: &ToyConfig, out: &Path) -> String {
    let e = &cfg.experiment;
    let mut s = format!("command: toy\nversion: {}\n", env!("CARGO_PKG_VERSION"));
    s += &cfg.to_lines();
    let last = e.seed.wrapping_add(e.num_restarts as u64 - 1);
    s += &format!("restart_seeds: {}..={}\n", e.seed, last);
    s += &format!("results: {}\n", out.join(RESULTS).display());
    for r in &e.representations {
        s += &format!("sweep.{}: {}\n", r.name(), out.join(sweep_name(*r)).display());
    }
    s
}

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Other(format!("{}: {e}", path.display()))
}

pub fn run(config: Option<&Path>, representation: Option<&str>, out: &Path) -> Result<(), Failure> {
    let mut cfg = match config {
        Some(p) => ToyConfig::load(p).map_err(Failure::Config)?,
        None => ToyConfig::default(),
    };
    if let Some(name) = representation {
        let r: Representation = name.parse().map_err(|e: Error| Failure::Config(e.to_string()))?;
        cfg.experiment.representations = vec![r];
    }
    cfg.experiment.validate().map_err(|e| Failure::Config(e.to_string()))?;

    fs::create_dir_all(out).map_err(|e| io_fail(out, e))?;
    let manifest_path: PathBuf = out.join(MANIFEST);
    write_atomic(&manifest_path, manifest(&cfg, out).as_bytes()).map_err(|e| io_fail(&manifest_path, e))?;

    let rows = match cfg.precision {
        Precision::F32 => run_study::<f32>(&cfg.experiment),
        Precision::F64 => run_study::<f64>(&cfg.experiment),
    }
    .map_err(|e| match e {
        Error::InvalidConfig(m) => Failure::Config(m),
        e => Failure::Other(e.to_string()),
    })?;

    write_outputs(&rows, out)?;
    let mut table = Vec::new();
    write_results_csv(&rows, &mut table).map_err(|e| Failure::Other(e.to_string()))?;
    print!("{}", String::from_utf8_lossy(&table));
    Ok(())
}

fn write_outputs(rows: &[StudyRow], out: &Path) -> Result<(), Failure> {
    for row in rows {
        let path = out.join(sweep_name(row.representation));
        let mut buf = Vec::new();
        write_sweep_csv(row, &mut buf).map_err(|e| io_fail(&path, e))?;
        write_atomic(&path, &buf).map_err(|e| io_fail(&path, e))?;
    }
    let path = out.join(RESULTS);
    let mut buf = Vec::new();
    write_results_csv(rows, &mut buf).map_err(|e| io_fail(&path, e))?;
    write_atomic(&path, &buf).map_err(|e| io_fail(&path, e))
}
