//! Gap and delocalization conditions on the top of the spectrum.

use crate::ensembles::{EnsembleKind, EnsembleSpec};
use crate::error::{param, Result};
use crate::rng::derive_seed;
use crate::spectral::{sample_spectra, semicircle_quantile, SpectralData};

/// `lambda_{n-1} - lambda_{n-2} >= p (lambda_n - lambda_{n-1})`.
pub fn condition1(sd: &SpectralData, p: f64) -> Result<bool> {
    if !(p > 0.0 && p < 1.0 / 3.0) {
        return param(format!("p = {p} outside (0, 1/3)"));
    }
    let l = sd.eigenvalues();
    let n = l.len();
    if n < 3 {
        return param("condition 1 needs n >= 3");
    }
    Ok(l[n - 2] - l[n - 3] >= p * (l[n - 1] - l[n - 2]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Condition2Report {
    /// Clauses (i)-(iv) in order.
    pub clauses: [bool; 4],
    pub holds: bool,
}

/// Clauses (i)-(iv): delocalized first components, non-vanishing top
/// components, edge gaps on the `n^{-2/3}` scale, and eigenvalue rigidity
/// around the quantiles of the semicircle of radius `b_v`.
pub fn condition2(sd: &SpectralData, s: f64, b_v: f64) -> Result<Condition2Report> {
    if !(s > 0.0) {
        return param("s must be positive");
    }
    let n = sd.n();
    if n < 3 {
        return param("condition 2 needs n >= 3");
    }
    let nf = n as f64;
    let l = sd.eigenvalues();
    let b = sd.first_components();

    let upper = nf.powf(-0.5 + s / 2.0);
    let c1 = b.iter().all(|&x| x <= upper);

    let lower = nf.powf(-0.5 - s / 2.0);
    let c2 = b[n - 1] >= lower && b[n - 2] >= lower;

    let (glo, ghi) = (nf.powf(-2.0 / 3.0 - s), nf.powf(-2.0 / 3.0 + s));
    let c3 = [n - 2, n - 3].iter().all(|&j| {
        let g = l[n - 1] - l[j];
        g >= glo && g <= ghi
    });

    let mut c4 = true;
    for j in 1..=n {
        let gamma = 0.5 * b_v * semicircle_quantile(j as f64 / nf)?;
        let bound = ghi * (j.min(n - j + 1) as f64).powf(-1.0 / 3.0);
        if (l[j - 1] - gamma).abs() > bound {
            c4 = false;
            break;
        }
    }
    let clauses = [c1, c2, c3, c4];
    Ok(Condition2Report {
        clauses,
        holds: clauses.iter().all(|&c| c),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition1Row {
    pub n: usize,
    pub p: f64,
    /// Empirical probability that condition 1 fails.
    pub complement_probability: f64,
}

/// Complement frequencies of condition 1 over a fixed set of spectra.
pub fn condition1_table(spectra: &[SpectralData], p_grid: &[f64]) -> Result<Vec<Condition1Row>> {
    if spectra.is_empty() {
        return param("no spectra");
    }
    let n = spectra[0].n();
    p_grid
        .iter()
        .map(|&p| {
            let mut fails = 0usize;
            for sd in spectra {
                if !condition1(sd, p)? {
                    fails += 1;
                }
            }
            Ok(Condition1Row {
                n,
                p,
                complement_probability: fails as f64 / spectra.len() as f64,
            })
        })
        .collect()
}

/// Monte Carlo table of `P(G_{n,p}^c)` over an `n x p` grid.
pub fn condition1_limit_check(
    kind: EnsembleKind,
    p_grid: &[f64],
    n_grid: &[usize],
    m: usize,
    master_seed: u64,
) -> Result<Vec<Condition1Row>> {
    if m < 100 {
        return param("condition 1 limit check needs at least 100 samples");
    }
    let mut rows = Vec::new();
    for &n in n_grid {
        let spec = EnsembleSpec::new(kind, n)?;
        let spectra = sample_spectra(&spec, derive_seed(master_seed, n as u64), m)?;
        rows.extend(condition1_table(&spectra, p_grid)?);
    }
    Ok(rows)
}

/// Fraction of spectra in `R_{n,s}`, followed by the per-clause pass rates.
pub fn condition2_probability(spectra: &[SpectralData], s: f64, b_v: f64) -> Result<(f64, [f64; 4])> {
    if spectra.is_empty() {
        return param("no spectra");
    }
    let mut all = 0usize;
    let mut per = [0usize; 4];
    for sd in spectra {
        let r = condition2(sd, s, b_v)?;
        all += r.holds as usize;
        for (c, ok) in per.iter_mut().zip(r.clauses) {
            *c += ok as usize;
        }
    }
    let m = spectra.len() as f64;
    Ok((all as f64 / m, per.map(|c| c as f64 / m)))
}
