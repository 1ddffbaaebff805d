use nalgebra::{ComplexField, DMatrix};

use crate::ensembles::RandomMatrix;
use crate::error::{param, Error, Result};

/// One unshifted QR step `X = QR -> RQ`, with `R` normalized to a
/// nonnegative diagonal. The result is re-symmetrized, so it is exactly
/// self-adjoint.
pub fn qr_step_matrix<T>(x: &DMatrix<T>) -> DMatrix<T>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = x.nrows();
    let qr = x.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..n {
        let rii = r[(i, i)];
        let m = rii.modulus();
        let d = if m == 0.0 { T::one() } else { rii.unscale(m) };
        // R <- D^* R, Q <- Q D
        for j in 0..n {
            r[(i, j)] = d.conjugate() * r[(i, j)];
            q[(j, i)] *= d;
        }
    }
    let y = r * q;
    let half = T::from_real(0.5);
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            T::from_real(y[(i, i)].real())
        } else {
            (y[(i, j)] + y[(j, i)].conjugate()) * half
        }
    })
}

pub fn qr_step(x: &RandomMatrix) -> Result<RandomMatrix> {
    if !x.is_self_adjoint() {
        return Err(Error::Contract("qr_step requires a self-adjoint matrix".into()));
    }
    Ok(match x {
        RandomMatrix::Real(m) => RandomMatrix::Real(qr_step_matrix(m)),
        RandomMatrix::Complex(m) => RandomMatrix::Complex(qr_step_matrix(m)),
    })
}

/// A run of unshifted QR with the first-row stopping rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QrRun {
    /// Number of QR steps taken; `0` when `H` already satisfies the rule.
    pub iterations: usize,
    /// First-row off-diagonal norm of `X_0, ..., X_k`.
    pub residuals: Vec<f64>,
    pub final_diagonal: Vec<f64>,
    pub final_matrix: RandomMatrix,
    /// `false` when `k_max` was reached first.
    pub halted: bool,
}

fn first_row_norm<T: ComplexField<RealField = f64> + Copy>(x: &DMatrix<T>) -> f64 {
    (1..x.ncols()).map(|j| x[(0, j)].modulus_squared()).sum::<f64>().sqrt()
}

fn run<T>(h: &DMatrix<T>, epsilon: f64, k_max: usize) -> (usize, Vec<f64>, DMatrix<T>, bool)
where
    T: ComplexField<RealField = f64> + Copy,
{
    let mut x = h.clone();
    let mut residuals = vec![first_row_norm(&x)];
    let mut k = 0;
    while residuals[k] >= epsilon {
        if k == k_max {
            return (k, residuals, x, false);
        }
        x = qr_step_matrix(&x);
        k += 1;
        residuals.push(first_row_norm(&x));
    }
    (k, residuals, x, true)
}

/// Iterates `X_{k+1} = qr_step(X_k)` from `X_0 = H` until the first row
/// off-diagonal norm drops below `epsilon`.
pub fn qr_halting(h: &RandomMatrix, epsilon: f64, k_max: usize) -> Result<QrRun> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return param(format!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    if k_max == 0 {
        return param("k_max must be at least 1");
    }
    if !h.is_self_adjoint() {
        return Err(Error::Contract("QR halting requires a self-adjoint matrix".into()));
    }
    let (iterations, residuals, final_matrix, halted) = match h {
        RandomMatrix::Real(m) => {
            let (k, r, x, ok) = run(m, epsilon, k_max);
            (k, r, RandomMatrix::Real(x), ok)
        }
        RandomMatrix::Complex(m) => {
            let (k, r, x, ok) = run(m, epsilon, k_max);
            (k, r, RandomMatrix::Complex(x), ok)
        }
    };
    let final_diagonal = match &final_matrix {
        RandomMatrix::Real(m) => m.diagonal().iter().copied().collect(),
        RandomMatrix::Complex(m) => m.diagonal().iter().map(|z| z.re).collect(),
    };
    Ok(QrRun {
        iterations,
        residuals,
        final_diagonal,
        final_matrix,
        halted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample, EnsembleKind, EnsembleSpec};
    use crate::spectral::spectrum;

    fn sorted_eigs(x: &RandomMatrix) -> Vec<f64> {
        spectrum(x).unwrap().eigenvalues().to_vec()
    }

    #[test]
    fn positive_diagonal_is_a_fixed_point() {
        let x = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 0.5]));
        let y = qr_step_matrix(&x);
        assert!((y - &x).abs().max() < 1e-15);
    }

    #[test]
    fn swap_matrix_step() {
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let y = qr_step_matrix(&x);
        // Q = [[0,1],[1,0]] with R = I gives RQ = X back; any sign choice
        // keeps the spectrum {-1, 1}
        let eig = RandomMatrix::Real(y.clone());
        let e = sorted_eigs(&eig);
        assert!((e[0] + 1.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
        assert!(y[(0, 0)].abs() < 1e-15 && y[(1, 1)].abs() < 1e-15);
        assert!((y[(0, 1)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn steps_are_self_adjoint_and_isospectral() {
        for kind in [EnsembleKind::Goe, EnsembleKind::Gue] {
            let h = sample(&EnsembleSpec::new(kind, 12).unwrap(), 8);
            let before = sorted_eigs(&h);
            let mut x = h.clone();
            for _ in 0..100 {
                x = qr_step(&x).unwrap();
                assert!(x.is_self_adjoint());
            }
            let after = sorted_eigs(&x);
            let drift = before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(drift <= 1e-7, "{kind}: {drift}");
        }
    }

    #[test]
    fn diagonal_input_halts_immediately() {
        let h = RandomMatrix::Real(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            2.0, -1.0, 0.5,
        ])));
        let run = qr_halting(&h, 1e-6, 10).unwrap();
        assert!(run.halted);
        assert_eq!(run.iterations, 0);
    }

    #[test]
    fn two_eigenvalue_rate_follows_the_ratio() {
        // eigenvalue ratio ~ 1/2, so each step gains a factor 2
        let delta = 1e-2;
        let h = RandomMatrix::Real(DMatrix::from_row_slice(2, 2, &[2.0, delta, delta, -1.0]));
        let ks: Vec<f64> = [1e-4, 1e-7, 1e-10]
            .iter()
            .map(|&eps| qr_halting(&h, eps, 1000).unwrap().iterations as f64)
            .collect();
        let per_decade = (ks[2] - ks[0]) / 6.0;
        let expect = (10f64).ln() / 2f64.ln();
        assert!((per_decade - expect).abs() < 0.2, "{per_decade} vs {expect}");
    }

    #[test]
    fn goe_halt_finds_largest_modulus_eigenvalue() {
        let h = sample(&EnsembleSpec::new(EnsembleKind::Goe, 50).unwrap(), 3);
        let run = qr_halting(&h, 1e-6, 200_000).unwrap();
        assert!(run.halted);
        let eig = sorted_eigs(&h);
        let target = if eig[0].abs() > eig[49].abs() { eig[0] } else { eig[49] };
        assert!((run.final_diagonal[0] - target).abs() < 1e-6);
        assert!(*run.residuals.last().unwrap() < 1e-6);

        let again = qr_halting(&h, 1e-6, 200_000).unwrap();
        assert_eq!(again.iterations, run.iterations);
    }

    #[test]
    fn sign_symmetric_spectrum_does_not_halt() {
        let h = RandomMatrix::Real(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let run = qr_halting(&h, 1e-6, 50).unwrap();
        assert!(!run.halted);
        assert_eq!(run.iterations, 50);
    }

    #[test]
    fn rejects_bad_parameters() {
        let h = RandomMatrix::Real(DMatrix::identity(2, 2));
        assert!(qr_halting(&h, 0.0, 10).is_err());
        assert!(qr_halting(&h, 0.1, 0).is_err());
    }
}
