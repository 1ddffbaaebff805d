//! Edge statistics: rescaled top first components and top eigenvalues.

use statrs::function::erf::erf;

use crate::error::{param, Result};
use crate::spectral::{gap_stats, SpectralData};

use super::ks::{ks_one_sample, ks_sorted};

/// CDF of `|X|` for a standard normal `X`: real (`beta = 1`, the
/// half-normal law) or complex with `E|X|^2 = 1` (`beta = 2`).
pub fn modulus_normal_cdf(beta: u8, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    match beta {
        1 => erf(x / std::f64::consts::SQRT_2),
        _ => 1.0 - (-x * x).exp(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeReport {
    pub n: usize,
    pub beta: u8,
    pub samples: usize,
    /// `sqrt(n) beta_{n-k+1}` for `k = 1, 2, 3`, each sorted.
    pub scaled_components: [Vec<f64>; 3],
    /// KS distance of each marginal to the modulus-of-normal law.
    pub component_ks: [f64; 3],
    /// `2^{-2/3} n^{2/3} (b_v - lambda_{n-k+1})`, each sorted.
    pub scaled_edge: [Vec<f64>; 3],
    /// Samples whose top three eigenvalues have a gap below `1e-8`.
    pub degenerate_triples: usize,
}

pub fn edge_statistics_suite(spectra: &[SpectralData], beta: u8, b_v: f64) -> Result<EdgeReport> {
    if spectra.len() < 100 {
        return param("edge statistics need at least 100 samples");
    }
    let n = spectra[0].n();
    if n < 3 || spectra.iter().any(|s| s.n() != n) {
        return param("edge statistics need spectra of one common size n >= 3");
    }
    let root_n = (n as f64).sqrt();
    let mut comps: [Vec<f64>; 3] = Default::default();
    let mut edge: [Vec<f64>; 3] = Default::default();
    let mut degenerate = 0;
    for sd in spectra {
        let b = sd.first_components();
        for k in 0..3 {
            comps[k].push(root_n * b[n - 1 - k]);
        }
        let g = gap_stats(sd, b_v)?;
        for k in 0..3 {
            edge[k].push(g.scaled_edge_triple[k]);
        }
        if g.top_gap < 1e-8 || g.second_gap < 1e-8 {
            degenerate += 1;
        }
    }
    for v in comps.iter_mut().chain(edge.iter_mut()) {
        v.sort_by(f64::total_cmp);
    }
    let component_ks = [0, 1, 2].map(|k| ks_one_sample(&comps[k], |x| modulus_normal_cdf(beta, x)));
    Ok(EdgeReport {
        n,
        beta,
        samples: spectra.len(),
        scaled_components: comps,
        component_ks,
        scaled_edge: edge,
        degenerate_triples: degenerate,
    })
}

/// KS distance between the rescaled edge marginals of two runs.
pub fn edge_drift(a: &EdgeReport, b: &EdgeReport) -> [f64; 3] {
    [0, 1, 2].map(|k| ks_sorted(&a.scaled_edge[k], &b.scaled_edge[k]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn half_normal_self_test() {
        let mut rng = rng_from_seed(1);
        let xs: Vec<f64> = (0..2000)
            .map(|_| rng.sample::<f64, _>(StandardNormal).abs())
            .collect();
        assert!(ks_one_sample(&xs, |x| modulus_normal_cdf(1, x)) < 0.05);

        let zs: Vec<f64> = (0..2000)
            .map(|_| {
                let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                ((a * a + b * b) / 2.0).sqrt()
            })
            .collect();
        assert!(ks_one_sample(&zs, |x| modulus_normal_cdf(2, x)) < 0.05);
    }

    #[test]
    fn rejects_small_sample_sets() {
        let sd = SpectralData::with_uniform_weights(vec![0.0, 1.0, 2.0]).unwrap();
        assert!(edge_statistics_suite(&vec![sd; 10], 1, 2.0).is_err());
    }

    #[test]
    fn planted_spectra() {
        let sd = SpectralData::with_uniform_weights(vec![0.0, 1.0, 1.0 + 1e-9, 2.0]).unwrap();
        let r = edge_statistics_suite(&vec![sd; 100], 1, 2.0).unwrap();
        assert_eq!(r.degenerate_triples, 100);
        assert!(r.scaled_components.iter().all(|v| v.iter().all(|&x| (x - 1.0).abs() < 1e-12)));
        assert_eq!(edge_drift(&r, &r), [0.0; 3]);
    }
}
