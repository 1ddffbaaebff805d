//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Unknown keys are rejected so a
//! typo cannot silently fall back to a default. List values are comma
//! separated. The canonical form lists every key in a fixed order and is what
//! the config hash covers; `out` and `workers` are excluded because they do
//! not affect results.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::ensembles::EnsembleKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    TodaT1,
    QrHalting,
    CgHalting,
    UniversalityCompare,
    Theorem1,
    Conditions,
    LatticeShock,
    LatticeDriven,
    FredholmGrid,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::TodaT1,
        ExperimentKind::QrHalting,
        ExperimentKind::CgHalting,
        ExperimentKind::UniversalityCompare,
        ExperimentKind::Theorem1,
        ExperimentKind::Conditions,
        ExperimentKind::LatticeShock,
        ExperimentKind::LatticeDriven,
        ExperimentKind::FredholmGrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::TodaT1 => "toda-t1",
            ExperimentKind::QrHalting => "qr-halting",
            ExperimentKind::CgHalting => "cg-halting",
            ExperimentKind::UniversalityCompare => "universality-compare",
            ExperimentKind::Theorem1 => "theorem1",
            ExperimentKind::Conditions => "conditions",
            ExperimentKind::LatticeShock => "lattice-shock",
            ExperimentKind::LatticeDriven => "lattice-driven",
            ExperimentKind::FredholmGrid => "fredholm-grid",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind '{s}'")))
    }
}

/// Where the matrices of a Monte Carlo run come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSource {
    Ensemble(EnsembleKind),
    /// Random diagonal matrices: `e_1` is an eigenvector, so `T1 = 0`.
    Diagonal,
    /// Deterministic spectrum `1, 2, .., n-1, n+1` with uniform weights.
    Planted,
}

impl SampleSource {
    pub fn beta(self) -> u8 {
        match self {
            SampleSource::Ensemble(k) => k.beta(),
            SampleSource::Diagonal | SampleSource::Planted => 1,
        }
    }
}

impl fmt::Display for SampleSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleSource::Ensemble(k) => write!(f, "{k}"),
            SampleSource::Diagonal => f.write_str("diagonal"),
            SampleSource::Planted => f.write_str("planted"),
        }
    }
}

impl FromStr for SampleSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal" => Ok(SampleSource::Diagonal),
            "planted" => Ok(SampleSource::Planted),
            other => other
                .parse::<EnsembleKind>()
                .map(SampleSource::Ensemble)
                .map_err(|e| Error::Config(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub ensemble: SampleSource,
    /// Second ensemble for `universality-compare`.
    pub compare: SampleSource,
    pub n: usize,
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: usize,
    pub p_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub s: f64,
    pub c_v: f64,
    pub b_v: f64,
    /// Lower bound on `log(1/eps)/log(n) - 5/3`, times two.
    pub tau: f64,
    pub ks_threshold: f64,
    /// Wishart aspect ratio `m / n` for `cg-halting`.
    pub mn_ratio: f64,
    pub k_max: usize,
    pub a: f64,
    pub gamma: f64,
    /// Sweep over drive frequencies; empty means the single `gamma`.
    pub gamma_grid: Vec<f64>,
    pub h_amplitude: f64,
    pub lattice_k: usize,
    pub dt: f64,
    pub t_end: f64,
    pub window_start: f64,
    pub window: f64,
    /// Snapshot every `stride` integrator steps.
    pub stride: usize,
    /// Write every `csv_stride`-th snapshot to the trajectory file.
    pub csv_stride: usize,
    pub s_grid: Vec<f64>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        let mut c = Self {
            kind,
            ensemble: SampleSource::Ensemble(EnsembleKind::Goe),
            compare: SampleSource::Ensemble(EnsembleKind::BernoulliReal),
            n: 100,
            epsilon: 1e-6,
            samples: 1000,
            seed: 0,
            out: PathBuf::from("out"),
            workers: 1,
            p_grid: vec![0.3, 0.2, 0.1, 0.05, 0.02],
            n_grid: vec![100, 200],
            s: 0.2,
            c_v: 1.0,
            b_v: 2.0,
            tau: 0.5,
            ks_threshold: 0.1,
            mn_ratio: 2.0,
            k_max: 10_000,
            a: 2.0,
            gamma: 10.0,
            gamma_grid: Vec::new(),
            h_amplitude: 0.1,
            lattice_k: 300,
            dt: 0.005,
            t_end: 170.0,
            window_start: 150.0,
            window: 10.0,
            stride: 10,
            csv_stride: 100,
            s_grid: vec![0.5, 1.0, 2.0, 4.0, 8.0],
        };
        if kind == ExperimentKind::LatticeDriven {
            c.a = 0.5;
            c.lattice_k = 200;
            c.t_end = 100.0;
            c.window_start = 80.0;
            c.window = 5.0;
        }
        c
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let kind = pairs
            .iter()
            .find(|(k, _)| k == "kind")
            .ok_or_else(|| Error::Config("missing 'kind'".into()))?
            .1
            .parse()?;
        let mut cfg = Self::new(kind);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value '{v}' for '{key}'")))
        }
        fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| num(key, s))
                .collect()
        }
        match key {
            "kind" => {
                let kind: ExperimentKind = value.parse()?;
                if kind != self.kind {
                    return Err(Error::Config("'kind' may only be set once".into()));
                }
            }
            "ensemble" => self.ensemble = value.parse()?,
            "compare" => self.compare = value.parse()?,
            "n" => self.n = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "samples" => self.samples = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "workers" => self.workers = num(key, value)?,
            "p_grid" => self.p_grid = list(key, value)?,
            "n_grid" => self.n_grid = list(key, value)?,
            "s" => self.s = num(key, value)?,
            "c_v" => self.c_v = num(key, value)?,
            "b_v" => self.b_v = num(key, value)?,
            "tau" => self.tau = num(key, value)?,
            "ks_threshold" => self.ks_threshold = num(key, value)?,
            "mn_ratio" => self.mn_ratio = num(key, value)?,
            "k_max" => self.k_max = num(key, value)?,
            "a" => self.a = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "gamma_grid" => self.gamma_grid = list(key, value)?,
            "h_amplitude" => self.h_amplitude = num(key, value)?,
            "lattice_k" => self.lattice_k = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "t_end" => self.t_end = num(key, value)?,
            "window_start" => self.window_start = num(key, value)?,
            "window" => self.window = num(key, value)?,
            "stride" => self.stride = num(key, value)?,
            "csv_stride" => self.csv_stride = num(key, value)?,
            "s_grid" => self.s_grid = list(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Every result-affecting key in a fixed order.
    pub fn canonical(&self) -> String {
        fn join<T: fmt::Display>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("kind", self.kind.to_string());
        put("ensemble", self.ensemble.to_string());
        put("compare", self.compare.to_string());
        put("n", self.n.to_string());
        put("epsilon", format!("{:e}", self.epsilon));
        put("samples", self.samples.to_string());
        put("seed", self.seed.to_string());
        put("p_grid", join(&self.p_grid));
        put("n_grid", join(&self.n_grid));
        put("s", self.s.to_string());
        put("c_v", self.c_v.to_string());
        put("b_v", self.b_v.to_string());
        put("tau", self.tau.to_string());
        put("ks_threshold", self.ks_threshold.to_string());
        put("mn_ratio", self.mn_ratio.to_string());
        put("k_max", self.k_max.to_string());
        put("a", self.a.to_string());
        put("gamma", self.gamma.to_string());
        put("gamma_grid", join(&self.gamma_grid));
        put("h_amplitude", self.h_amplitude.to_string());
        put("lattice_k", self.lattice_k.to_string());
        put("dt", self.dt.to_string());
        put("t_end", self.t_end.to_string());
        put("window_start", self.window_start.to_string());
        put("window", self.window.to_string());
        put("stride", self.stride.to_string());
        put("csv_stride", self.csv_stride.to_string());
        put("s_grid", join(&self.s_grid));
        s
    }

    /// First 16 hex digits of the SHA-256 of the canonical form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_with_comments_and_lists() {
        let cfg = ExperimentConfig::parse(
            "# halting times\nkind = toda-t1\nensemble = gue\nn = 50 # small\n\nepsilon = 1e-8\np_grid = 0.1, 0.05\n",
        )
        .unwrap();
        assert_eq!(cfg.kind, ExperimentKind::TodaT1);
        assert_eq!(cfg.ensemble, SampleSource::Ensemble(EnsembleKind::Gue));
        assert_eq!(cfg.n, 50);
        assert_eq!(cfg.epsilon, 1e-8);
        assert_eq!(cfg.p_grid, vec![0.1, 0.05]);
    }

    #[test]
    fn canonical_round_trip() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::FredholmGrid);
        cfg.s_grid = vec![0.25, 3.0];
        cfg.seed = 99;
        let back = ExperimentConfig::parse(&cfg.canonical()).unwrap();
        assert_eq!(back.canonical(), cfg.canonical());
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn hash_ignores_workers_and_output() {
        let a = ExperimentConfig::new(ExperimentKind::TodaT1);
        let mut b = a.clone();
        b.workers = 8;
        b.out = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("n = 5").is_err());
        assert!(ExperimentConfig::parse("kind = nope").is_err());
        assert!(ExperimentConfig::parse("kind = theorem1\nfoo = 1").is_err());
        assert!(ExperimentConfig::parse("kind = theorem1\nn = x").is_err());
        assert!(ExperimentConfig::parse("kind = theorem1\nkind = toda-t1").is_err());
        assert!(ExperimentConfig::parse("kind = theorem1\njunk").is_err());
    }

    #[test]
    fn special_sources() {
        assert_eq!("diagonal".parse::<SampleSource>().unwrap(), SampleSource::Diagonal);
        assert_eq!("planted".parse::<SampleSource>().unwrap(), SampleSource::Planted);
        assert_eq!(
            "cber".parse::<SampleSource>().unwrap(),
            SampleSource::Ensemble(EnsembleKind::BernoulliComplex)
        );
    }
}
