//! Nyström evaluation of `det(1 - K_s)` for the sine kernel
//! `sin(s(x - y)) / (pi (x - y))` on `L^2(-1, 1)`.
//!
//! The operator is replaced by `M = W^{1/2} K W^{1/2}` on Gauss–Legendre
//! nodes, which is symmetric positive semidefinite with spectrum in `[0, 1)`.

mod quadrature;

use std::f64::consts::PI;

use nalgebra::DMatrix;

pub use quadrature::gauss_legendre;

use crate::error::{param, Result};
use crate::spectral::{eigen_full, SpectralData};
use crate::spectral::tridiag::reduce;

pub const DEFAULT_NODES: usize = 60;
/// Refinement stops once doubling the node count moves the result by less.
pub const REFINEMENT_TOL: f64 = 1e-10;
const MAX_NODES: usize = 1920;

/// The sine kernel, with its diagonal limit `s / pi`.
pub fn sine_kernel(s: f64, x: f64, y: f64) -> f64 {
    let d = x - y;
    if d == 0.0 {
        s / PI
    } else {
        (s * d).sin() / (PI * d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelDiscretization {
    pub s: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

impl KernelDiscretization {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }
}

pub fn discretize(s: f64, n: usize) -> Result<KernelDiscretization> {
    if !(s >= 0.0) {
        return param(format!("kernel parameter s = {s} must be nonnegative"));
    }
    if n < 4 {
        return param("need at least 4 quadrature nodes");
    }
    let (nodes, weights) = gauss_legendre(n);
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = sw[i] * sine_kernel(s, nodes[i], nodes[j]) * sw[j];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(KernelDiscretization {
        s,
        nodes,
        weights,
        matrix: m,
    })
}

/// `det(I - M)` from a Cholesky factorization of the positive definite
/// `I - M`, with an LU fallback.
pub fn determinant(d: &KernelDiscretization) -> f64 {
    let n = d.n();
    let a = DMatrix::<f64>::identity(n, n) - &d.matrix;
    match a.clone().cholesky() {
        Some(c) => c.l().diagonal().iter().map(|x| x * x).product(),
        None => a.lu().determinant(),
    }
}

/// Eigenvalues of `M`, descending. `M` is positive semidefinite, so
/// roundoff-level negative values are reported as zero.
pub fn eigenvalues(d: &KernelDiscretization) -> Result<Vec<f64>> {
    let sd: SpectralData = eigen_full(&reduce(&d.matrix))?;
    Ok(sd.eigenvalues().iter().rev().map(|l| l.max(0.0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductIdentity {
    pub determinant: f64,
    pub product: f64,
    pub difference: f64,
}

/// `det(I - M)` against `prod_k (1 - lambda_k(M))`.
pub fn product_identity(d: &KernelDiscretization) -> Result<ProductIdentity> {
    let det = determinant(d);
    let product: f64 = eigenvalues(d)?.iter().map(|l| 1.0 - l).product();
    Ok(ProductIdentity {
        determinant: det,
        product,
        difference: (det - product).abs(),
    })
}

/// `F_s` with its refinement metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapProbability {
    pub s: f64,
    pub value: f64,
    pub nodes: usize,
    /// `|F_s(N) - F_s(N/2)|` at the final node count.
    pub refinement_delta: f64,
    pub converged: bool,
}

/// Doubles the node count from `start` until two successive values agree
/// to `REFINEMENT_TOL`.
pub fn gap_probability(s: f64, start: usize) -> Result<GapProbability> {
    let mut n = start.max(4);
    let mut prev = determinant(&discretize(s, n)?);
    loop {
        let next_n = 2 * n;
        let next = determinant(&discretize(s, next_n)?);
        let delta = (next - prev).abs();
        if delta < REFINEMENT_TOL || next_n >= MAX_NODES {
            return Ok(GapProbability {
                s,
                value: next,
                nodes: next_n,
                refinement_delta: delta,
                converged: delta < REFINEMENT_TOL,
            });
        }
        n = next_n;
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_limit_and_symmetry() {
        let d = discretize(1.7, 20).unwrap();
        assert_eq!(sine_kernel(1.7, 0.3, 0.3), 1.7 / PI);
        for i in 0..20 {
            assert!((d.matrix[(i, i)] - d.weights[i] * 1.7 / PI).abs() < 1e-15);
            for j in 0..20 {
                assert_eq!(d.matrix[(i, j)].to_bits(), d.matrix[(j, i)].to_bits());
            }
        }
    }

    #[test]
    fn trace_identity() {
        let s = 2.5;
        let d = discretize(s, 60).unwrap();
        assert!((d.matrix.trace() - 2.0 * s / PI).abs() < 1e-12);
        let sum: f64 = eigenvalues(&d).unwrap().iter().sum();
        assert!((sum - 2.0 * s / PI).abs() < 1e-10);
    }

    #[test]
    fn zero_kernel_has_unit_determinant() {
        let d = discretize(0.0, 10).unwrap();
        assert_eq!(determinant(&d), 1.0);
        let p = product_identity(&d).unwrap();
        assert_eq!(p.product, 1.0);
    }

    #[test]
    fn small_s_expansion() {
        let s = 1e-3;
        let f = determinant(&discretize(s, 60).unwrap());
        assert!((f - (1.0 - 2.0 * s / PI)).abs() < 1e-6);
    }

    #[test]
    fn strictly_decreasing_in_s() {
        let vals: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&s| determinant(&discretize(s, 60).unwrap()))
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(vals.iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn eigenvalues_are_ordered_and_bounded() {
        let d = discretize(1.0, 40).unwrap();
        let e = eigenvalues(&d).unwrap();
        assert!(e.iter().all(|&l| (0.0..1.0).contains(&l)));
        assert!(e[0] > e[1] && e[1] > e[2] && e[0] < 1.0);
        let e2 = eigenvalues(&discretize(1.0, 80).unwrap()).unwrap();
        for k in 0..3 {
            assert!((e[k] - e2[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn product_matches_determinant() {
        let d = discretize(1.0, 60).unwrap();
        let p = product_identity(&d).unwrap();
        assert!(p.difference < 1e-10);
    }

    #[test]
    fn tail_truncation_is_invisible() {
        let d = discretize(2.0, 60).unwrap();
        let e = eigenvalues(&d).unwrap();
        let full: f64 = e.iter().map(|l| 1.0 - l).product();
        let cut = e.iter().position(|&l| l < f64::EPSILON).unwrap();
        let head: f64 = e[..cut].iter().map(|l| 1.0 - l).product();
        assert!((full - head).abs() < 1e-14);
    }

    #[test]
    fn refinement_converges() {
        let g = gap_probability(3.0, 40).unwrap();
        assert!(g.converged);
        assert!(g.refinement_delta < REFINEMENT_TOL);
        assert!(discretize(-1.0, 10).is_err());
        assert!(discretize(1.0, 3).is_err());
    }
}
