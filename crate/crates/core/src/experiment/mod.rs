//! Reproducible experiment runs: one config in, a directory of CSV files and
//! a plain-text summary out.
//!
//! Monte Carlo samples are produced per index from seeds derived from
//! `(seed, index)` and collected in index order, so the output bytes do not
//! depend on the worker count. Every file starts with a
//! `# config_hash=... seed=...` line.

mod config;
mod monte_carlo;
mod physics;

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

pub use config::{ExperimentConfig, ExperimentKind, SampleSource};

use crate::ensembles::{stream_sample, EnsembleSpec};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::spectral::{spectrum, SpectralData};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub config_hash: String,
    pub files: Vec<PathBuf>,
    pub checks: Vec<Check>,
    pub skipped_samples: usize,
    /// Key/value lines of the summary file, in output order.
    pub summary: Vec<(String, String)>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn value(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Collects output files and summary lines for one run.
pub(crate) struct Output {
    dir: PathBuf,
    header: String,
    report: RunReport,
}

impl Output {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.out)?;
        let hash = cfg.hash();
        Ok(Self {
            dir: cfg.out.clone(),
            header: format!("# config_hash={hash} seed={}\n", cfg.seed),
            report: RunReport {
                kind: cfg.kind,
                config_hash: hash,
                files: Vec::new(),
                checks: Vec::new(),
                skipped_samples: 0,
                summary: Vec::new(),
            },
        })
    }

    pub(crate) fn file<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut buf = self.header.clone().into_bytes();
        body(&mut buf)?;
        let path = self.dir.join(name);
        fs::write(&path, buf)?;
        self.report.files.push(path);
        Ok(())
    }

    pub(crate) fn put(&mut self, key: &str, value: impl Display) {
        self.report.summary.push((key.to_string(), value.to_string()));
    }

    pub(crate) fn check(&mut self, name: &str, passed: bool, detail: impl Display) {
        self.report.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.to_string(),
        });
    }

    pub(crate) fn skipped(&mut self, count: usize) {
        self.report.skipped_samples += count;
    }

    fn finish(mut self, cfg: &ExperimentConfig) -> Result<RunReport> {
        let mut text = String::new();
        text.push_str(&format!("kind = {}\n", cfg.kind));
        for (k, v) in &self.report.summary {
            text.push_str(&format!("{k} = {v}\n"));
        }
        text.push_str(&format!("skipped_samples = {}\n", self.report.skipped_samples));
        for c in &self.report.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            text.push_str(&format!("check {} = {verdict} ({})\n", c.name, c.detail));
        }
        let canonical = cfg.canonical();
        self.file("config.txt", |w| Ok(w.write_all(canonical.as_bytes())?))?;
        self.file("summary.txt", |w| Ok(w.write_all(text.as_bytes())?))?;
        Ok(self.report)
    }
}

/// Runs `cfg` on a pool of `cfg.workers` threads and writes its outputs.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        let mut out = Output::new(cfg)?;
        match cfg.kind {
            ExperimentKind::TodaT1 => monte_carlo::run_toda_t1(cfg, &mut out)?,
            ExperimentKind::QrHalting => monte_carlo::run_qr_halting(cfg, &mut out)?,
            ExperimentKind::CgHalting => monte_carlo::run_cg_halting(cfg, &mut out)?,
            ExperimentKind::UniversalityCompare => monte_carlo::run_universality(cfg, &mut out)?,
            ExperimentKind::Theorem1 => monte_carlo::run_theorem1(cfg, &mut out)?,
            ExperimentKind::Conditions => monte_carlo::run_conditions(cfg, &mut out)?,
            ExperimentKind::LatticeShock => physics::run_lattice_shock(cfg, &mut out)?,
            ExperimentKind::LatticeDriven => physics::run_lattice_driven(cfg, &mut out)?,
            ExperimentKind::FredholmGrid => physics::run_fredholm(cfg, &mut out)?,
        }
        out.finish(cfg)
    })
}

/// Reads a config file and applies `run`.
pub fn run_file(path: &Path) -> Result<RunReport> {
    run(&ExperimentConfig::parse(&fs::read_to_string(path)?)?)
}

/// Spectral data of sample `index` of `source`.
pub fn source_spectrum(source: SampleSource, n: usize, seed: u64, index: u64) -> Result<SpectralData> {
    match source {
        SampleSource::Ensemble(kind) => {
            let spec = EnsembleSpec::new(kind, n)?;
            spectrum(&stream_sample(&spec, seed, index))
        }
        SampleSource::Diagonal => {
            let mut rng = stream_rng(seed, index);
            let normal = Normal::new(0.0, (2.0 / n as f64).sqrt()).expect("positive variance");
            let d: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
            let eig = order.iter().map(|&i| d[i]).collect();
            let beta = order.iter().map(|&i| if i == 0 { 1.0 } else { 0.0 }).collect();
            SpectralData::new(eig, beta)
        }
        SampleSource::Planted => {
            let mut eig: Vec<f64> = (1..=n).map(|k| k as f64).collect();
            eig[n - 1] += 1.0;
            SpectralData::with_uniform_weights(eig)
        }
    }
}

/// `count` spectra in index order, with per-sample failures counted rather
/// than aborting the run.
pub fn collect_spectra(
    source: SampleSource,
    n: usize,
    seed: u64,
    count: usize,
) -> Result<(Vec<(usize, SpectralData)>, usize)> {
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    let results: Vec<(usize, Result<SpectralData>)> = (0..count)
        .into_par_iter()
        .map(|i| (i, source_spectrum(source, n, seed, i as u64)))
        .collect();
    let mut kept = Vec::with_capacity(count);
    let mut skipped = 0;
    for (i, r) in results {
        match r {
            Ok(sd) => kept.push((i, sd)),
            Err(Error::NonConvergence { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((kept, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::EnsembleKind;

    #[test]
    fn diagonal_source_has_trivial_first_row() {
        let sd = source_spectrum(SampleSource::Diagonal, 8, 1, 0).unwrap();
        assert_eq!(sd.first_components().iter().filter(|&&b| b == 1.0).count(), 1);
        assert_eq!(crate::toda::halting_time_t1(&sd, 1e-3).unwrap().t1, 0.0);
    }

    #[test]
    fn planted_source() {
        let sd = source_spectrum(SampleSource::Planted, 3, 0, 0).unwrap();
        assert_eq!(sd.eigenvalues(), &[1.0, 2.0, 4.0]);
    }

    #[test]
    fn collected_spectra_follow_stream() {
        let src = SampleSource::Ensemble(EnsembleKind::Goe);
        let (v, skipped) = collect_spectra(src, 6, 5, 4).unwrap();
        assert_eq!(skipped, 0);
        assert_eq!(v.len(), 4);
        assert_eq!(v[2].1, source_spectrum(src, 6, 5, 2).unwrap());
    }
}
