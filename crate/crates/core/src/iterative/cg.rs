use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Result};
use crate::rng::rng_from_seed;

/// `A = W W^T / m` with `W` an `n x m` standard Gaussian array, and a unit
/// Gaussian right-hand side.
pub fn wishart_system(n: usize, m: usize, seed: u64) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if n == 0 {
        return param("n must be at least 1");
    }
    if m < n {
        return param(format!("m = {m} < n = {n} gives a singular Wishart matrix"));
    }
    let mut rng = rng_from_seed(seed);
    let w = DMatrix::<f64>::from_fn(n, m, |_, _| rng.sample(StandardNormal));
    let mut b = DVector::<f64>::from_fn(n, |_, _| rng.sample(StandardNormal));
    let a = (&w * w.transpose()) / m as f64;
    let a = DMatrix::from_fn(n, n, |i, j| if i <= j { a[(i, j)] } else { a[(j, i)] });
    let norm = b.norm();
    b /= norm;
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgRun {
    pub iterations: usize,
    /// True residual `|b - A x_k|` for `k = 0..=iterations`.
    pub residuals: Vec<f64>,
    /// Iterates `x_0 = 0, ..., x_k`.
    pub iterates: Vec<DVector<f64>>,
    pub solution: DVector<f64>,
    pub halted: bool,
}

/// Conjugate gradient from `x_0 = 0`, stopping at the first `k` whose
/// recomputed residual `|b - A x_k|` is below `epsilon`.
pub fn cg_halting(a: &DMatrix<f64>, b: &DVector<f64>, epsilon: f64, k_max: usize) -> Result<CgRun> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return param("dimension mismatch between A and b");
    }
    if !(epsilon > 0.0) {
        return param("epsilon must be positive");
    }
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    let mut residuals = vec![b.norm()];
    let mut iterates = vec![x.clone()];
    let mut k = 0;
    while residuals[k] >= epsilon {
        if k == k_max {
            return Ok(CgRun {
                iterations: k,
                residuals,
                iterates,
                solution: x,
                halted: false,
            });
        }
        let ap = a * &p;
        let pap = p.dot(&ap);
        if !(pap > 0.0) {
            return param("matrix is not positive definite along the search direction");
        }
        let alpha = rr / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rr_next = r.norm_squared();
        p = &r + &p * (rr_next / rr);
        rr = rr_next;
        k += 1;
        residuals.push((b - a * &x).norm());
        iterates.push(x.clone());
    }
    Ok(CgRun {
        iterations: k,
        residuals,
        iterates,
        solution: x,
        halted: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solves_in_one_step() {
        let a = DMatrix::<f64>::identity(6, 6);
        let b = DVector::from_vec(vec![0.1, -0.2, 0.3, 0.0, 0.5, 0.4]);
        let run = cg_halting(&a, &b, 1e-12, 50).unwrap();
        assert!(run.halted);
        assert_eq!(run.iterations, 1);
    }

    #[test]
    fn two_distinct_eigenvalues_terminate_in_two_steps() {
        // Q diag(1,1,1,3,3) Q^T with a fixed rotation
        let q = DMatrix::<f64>::from_fn(5, 5, |i, j| ((i + 1) as f64 * (j + 2) as f64).sin())
            .qr()
            .q();
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 1.0, 3.0, 3.0]));
        let a = &q * d * q.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let b = DVector::from_vec(vec![1.0, 2.0, -1.0, 0.5, 0.3]);
        let run = cg_halting(&a, &b, 1e-10, 50).unwrap();
        assert!(run.halted);
        assert!(run.iterations <= 2, "{}", run.iterations);
    }

    #[test]
    fn wishart_is_symmetric_positive_definite() {
        let (a, b) = wishart_system(20, 40, 3).unwrap();
        assert_eq!(a, a.transpose());
        assert!((b.norm() - 1.0).abs() < 1e-14);
        let eig = a.clone().symmetric_eigenvalues();
        assert!(eig.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn wishart_scalar_case() {
        let (a, _) = wishart_system(1, 1, 9).unwrap();
        assert!(a[(0, 0)] > 0.0);
        assert!(wishart_system(3, 2, 0).is_err());
    }

    #[test]
    fn marchenko_pastur_support() {
        // ratio n/m = 1/2: support [(1 - sqrt(1/2))^2, (1 + sqrt(1/2))^2]
        let c = 0.5f64.sqrt();
        let (lo, hi) = ((1.0 - c).powi(2) - 0.2, (1.0 + c).powi(2) + 0.2);
        let inside = (0..40)
            .filter(|&seed| {
                let (a, _) = wishart_system(50, 100, seed).unwrap();
                a.symmetric_eigenvalues().iter().all(|&l| l >= lo && l <= hi)
            })
            .count();
        assert!(inside as f64 >= 0.95 * 40.0, "{inside}/40");
    }

    #[test]
    fn residual_and_error_monotonicity() {
        for seed in 0..5 {
            let (a, b) = wishart_system(40, 80, seed).unwrap();
            let run = cg_halting(&a, &b, 1e-10, 200).unwrap();
            assert!(run.halted);
            assert!(*run.residuals.last().unwrap() < 1e-10);
            let exact = a.clone().lu().solve(&b).unwrap();
            let errs: Vec<f64> = run
                .iterates
                .iter()
                .map(|x| {
                    let e = &exact - x;
                    e.dot(&(&a * &e)).sqrt()
                })
                .collect();
            for w in errs.windows(2) {
                assert!(w[1] <= w[0] + 1e-10);
            }
            let again = cg_halting(&a, &b, 1e-10, 200).unwrap();
            assert_eq!(again.iterations, run.iterations);
        }
    }
}
