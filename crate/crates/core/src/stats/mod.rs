//! Empirical distributions, the halting-time scalings and the conditions on
//! eigenvalues and first components that control them.

mod conditions;
mod edge;
mod histogram;
mod ks;

pub use conditions::{
    condition1, condition1_limit_check, condition1_table, condition2, condition2_probability,
    Condition1Row, Condition2Report,
};
pub use edge::{edge_drift, edge_statistics_suite, modulus_normal_cdf, EdgeReport};
pub use histogram::Histogram;
pub use ks::{ks_one_sample, ks_two_sample};

use crate::error::{param, Error, Result};
use crate::spectral::SpectralData;

/// Sorted sample set with its mean and unbiased standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
    mean: f64,
    std: f64,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return param("empirical distribution needs at least one sample");
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return param("samples must be finite");
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std = if samples.len() > 1 {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(Self { samples, mean, std })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    /// Right-continuous empirical CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|s| *s <= x) as f64 / self.samples.len() as f64
    }

    /// Linear-interpolated quantile.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.samples.len();
        let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let w = pos - lo as f64;
        self.samples[lo] * (1.0 - w) + self.samples[hi] * w
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    pub fn ks_distance(&self, other: &EmpiricalDistribution) -> f64 {
        ks::ks_sorted(&self.samples, &other.samples)
    }
}

/// The `tau` statistic: samples centered by the sample mean and scaled by
/// the sample standard deviation.
pub fn tau_normalize(d: &EmpiricalDistribution) -> Result<EmpiricalDistribution> {
    if d.len() < 2 {
        return param("tau normalization needs at least two samples");
    }
    if !(d.std() > 0.0) {
        return Err(Error::Degenerate("zero sample variance".into()));
    }
    EmpiricalDistribution::new(d.samples().iter().map(|x| (x - d.mean()) / d.std()).collect())
}

/// Ensemble constant `C_v` and top of the equilibrium support `b_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingConstants {
    pub c_v: f64,
    pub b_v: f64,
}

impl Default for ScalingConstants {
    fn default() -> Self {
        Self { c_v: 1.0, b_v: 2.0 }
    }
}

impl ScalingConstants {
    pub fn new(c_v: f64, b_v: f64) -> Result<Self> {
        if !(c_v > 0.0) {
            return param("C_v must be positive");
        }
        Ok(Self { c_v, b_v })
    }

    /// `C_v^{2/3} 2^{-2/3} n^{2/3}`, shared by both scalings.
    pub fn edge_block(&self, n: usize) -> f64 {
        self.c_v.powf(2.0 / 3.0) * 2f64.powf(-2.0 / 3.0) * (n as f64).powf(2.0 / 3.0)
    }
}

/// `log(1/epsilon) / log(n)`; the scaling region asks for at least
/// `5/3 + tau/2`.
pub fn scaling_region_ratio(n: usize, epsilon: f64) -> f64 {
    (1.0 / epsilon).ln() / (n as f64).ln()
}

pub fn in_scaling_region(n: usize, epsilon: f64, tau: f64) -> bool {
    scaling_region_ratio(n, epsilon) >= 5.0 / 3.0 + tau / 2.0
}

/// `T1 / (C_v^{2/3} 2^{-2/3} n^{2/3} (log(1/eps) - (2/3) log n))`.
pub fn theorem1_scale(t1: f64, n: usize, epsilon: f64, c: &ScalingConstants) -> Result<f64> {
    let log_term = (1.0 / epsilon).ln() - 2.0 / 3.0 * (n as f64).ln();
    let denom = c.edge_block(n) * log_term;
    if !(denom > 0.0) {
        return Err(Error::ScalingRegion(format!(
            "log(1/eps) - (2/3) log n = {log_term} is not positive"
        )));
    }
    Ok(t1 / denom)
}

/// `1 / (C_v^{2/3} 2^{-2/3} n^{2/3} (lambda_n - lambda_{n-1}))`.
pub fn gap_scale(sd: &SpectralData, c: &ScalingConstants) -> Result<f64> {
    let gap = sd
        .top_gap()
        .ok_or_else(|| Error::Parameter("gap scaling needs n >= 2".into()))?;
    if !(gap > 0.0) {
        return Err(Error::Degenerate("zero top eigenvalue gap".into()));
    }
    Ok(1.0 / (c.edge_block(sd.n()) * gap))
}
