//! Eigenvalues and first eigenvector components of self-adjoint matrices.

mod eigen;
mod semicircle;
pub(crate) mod tridiag;

use std::io::{BufRead, Write};

pub use eigen::eigen_full;
pub use semicircle::{semicircle_cdf, semicircle_density, semicircle_quantile};
pub use tridiag::tridiagonalize;

use rayon::prelude::*;

use crate::ensembles::{stream_sample, EnsembleSpec, RandomMatrix};
use crate::error::{param, Error, Result};

/// Real symmetric tridiagonal matrix: `diag` has length `n`, `offdiag` `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl SymTridiagonal {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }
}

/// Ascending eigenvalues with the moduli of the first components of the
/// matching normalized eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    first_components: Vec<f64>,
}

impl SpectralData {
    /// Validating constructor for planted or deserialized data.
    pub fn new(eigenvalues: Vec<f64>, first_components: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.len() != first_components.len() {
            return param("eigenvalues and first components must be nonempty and equally long");
        }
        if eigenvalues.windows(2).any(|w| !(w[0] <= w[1])) {
            return param("eigenvalues must be weakly ascending");
        }
        if first_components.iter().any(|b| !(*b >= 0.0)) {
            return param("first components must be nonnegative");
        }
        let norm: f64 = first_components.iter().map(|b| b * b).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return param(format!("sum of squared first components is {norm}, expected 1"));
        }
        Ok(Self {
            eigenvalues,
            first_components,
        })
    }

    /// Planted spectrum with equal first components `1/sqrt(n)`.
    pub fn with_uniform_weights(eigenvalues: Vec<f64>) -> Result<Self> {
        let b = 1.0 / (eigenvalues.len().max(1) as f64).sqrt();
        let n = eigenvalues.len();
        Self::new(eigenvalues, vec![b; n])
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn first_components(&self) -> &[f64] {
        &self.first_components
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty")
    }

    pub fn top_gap(&self) -> Option<f64> {
        let n = self.n();
        (n >= 2).then(|| self.eigenvalues[n - 1] - self.eigenvalues[n - 2])
    }

    /// Two-column CSV `lambda,beta`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lambda,beta")?;
        for (l, b) in self.eigenvalues.iter().zip(&self.first_components) {
            writeln!(w, "{l:e},{b:e}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut eig = Vec::new();
        let mut beta = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("lambda") {
                continue;
            }
            let mut parts = line.split(',');
            let mut next = || -> Result<f64> {
                parts
                    .next()
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Parameter(format!("bad spectral CSV row '{line}'")))
            };
            eig.push(next()?);
            beta.push(next()?);
        }
        Self::new(eig, beta)
    }
}

/// Full pipeline: reduction followed by the QL eigensolver.
pub fn spectrum(h: &RandomMatrix) -> Result<SpectralData> {
    eigen_full(&tridiagonalize(h)?)
}

/// Spectra of matrices `0..count` of a seeded stream, in index order.
pub fn sample_spectra(spec: &EnsembleSpec, master_seed: u64, count: usize) -> Result<Vec<SpectralData>> {
    (0..count as u64)
        .into_par_iter()
        .map(|k| spectrum(&stream_sample(spec, master_seed, k)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapStatistics {
    pub top_gap: f64,
    pub second_gap: f64,
    /// `2^{-2/3} n^{2/3} (b_v - lambda_{n-k+1})` for `k = 1, 2, 3`.
    pub scaled_edge_triple: [f64; 3],
}

pub fn gap_stats(sd: &SpectralData, b_v: f64) -> Result<GapStatistics> {
    let n = sd.n();
    if n < 3 {
        return param("gap statistics need n >= 3");
    }
    let l = sd.eigenvalues();
    let scale = 2f64.powf(-2.0 / 3.0) * (n as f64).powf(2.0 / 3.0);
    Ok(GapStatistics {
        top_gap: l[n - 1] - l[n - 2],
        second_gap: l[n - 2] - l[n - 3],
        scaled_edge_triple: [
            scale * (b_v - l[n - 1]),
            scale * (b_v - l[n - 2]),
            scale * (b_v - l[n - 3]),
        ],
    })
}
