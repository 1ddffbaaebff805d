use std::io::Write;

use crate::error::{param, Result};

/// Fixed-width histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub start: f64,
    pub width: f64,
    pub counts: Vec<usize>,
    pub total: usize,
}

impl Histogram {
    pub fn with_width(samples: &[f64], width: f64) -> Result<Self> {
        if samples.is_empty() {
            return param("histogram of an empty sample");
        }
        if !(width > 0.0) {
            return param("bin width must be positive");
        }
        let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bins = (((max - min) / width).floor() as usize + 1).max(1);
        let mut counts = vec![0; bins];
        for &x in samples {
            let k = (((x - min) / width).floor() as usize).min(bins - 1);
            counts[k] += 1;
        }
        Ok(Self {
            start: min,
            width,
            counts,
            total: samples.len(),
        })
    }

    /// Freedman–Diaconis width `2 IQR n^{-1/3}`, falling back to Sturges'
    /// rule when the interquartile range vanishes.
    pub fn freedman_diaconis(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return param("histogram of an empty sample");
        }
        let mut xs = samples.to_vec();
        xs.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (xs.len() - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            xs[lo] + (xs[hi] - xs[lo]) * (pos - lo as f64)
        };
        let iqr = q(0.75) - q(0.25);
        let n = xs.len() as f64;
        let range = xs[xs.len() - 1] - xs[0];
        let width = if iqr > 0.0 {
            2.0 * iqr * n.powf(-1.0 / 3.0)
        } else if range > 0.0 {
            range / (n.log2().ceil() + 1.0)
        } else {
            1.0
        };
        Self::with_width(&xs, width)
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.counts.len()).map(move |k| self.start + (k as f64 + 0.5) * self.width)
    }

    pub fn densities(&self) -> impl Iterator<Item = f64> + '_ {
        let norm = self.total as f64 * self.width;
        self.counts.iter().map(move |&c| c as f64 / norm)
    }

    /// CSV rows `bin_center,count,density`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin_center,count,density")?;
        for ((c, n), d) in self.centers().zip(&self.counts).zip(self.densities()) {
            writeln!(w, "{c:e},{n},{d:e}")?;
        }
        Ok(())
    }
}
