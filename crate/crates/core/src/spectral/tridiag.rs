//! Householder reduction of a self-adjoint matrix to real symmetric
//! tridiagonal form.
//!
//! Reflectors act only on coordinates `2..n`, so the first coordinate vector
//! is fixed and eigenvector first components survive the reduction in
//! modulus. A final diagonal phase change (with unit first entry) makes the
//! sub-diagonal real and nonnegative in the Hermitian case.

use nalgebra::{ComplexField, DMatrix};

use crate::ensembles::RandomMatrix;
use crate::error::{Error, Result};

use super::SymTridiagonal;

pub fn tridiagonalize(h: &RandomMatrix) -> Result<SymTridiagonal> {
    if !h.is_self_adjoint() {
        return Err(Error::Contract("tridiagonalize requires a self-adjoint matrix".into()));
    }
    Ok(match h {
        RandomMatrix::Real(m) => reduce(m),
        RandomMatrix::Complex(m) => reduce(m),
    })
}

/// Reduction for an already validated Hermitian matrix.
pub(crate) fn reduce<T>(m: &DMatrix<T>) -> SymTridiagonal
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = m.nrows();
    // row-major working copy
    let mut a: Vec<T> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            a.push(m[(i, j)]);
        }
    }

    let mut v = vec![T::zero(); n];
    let mut u = vec![T::zero(); n];
    let two = T::from_real(2.0);

    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let tail: f64 = (lo + 1..n).map(|i| a[i * n + k].modulus_squared()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = a[lo * n + k];
        let xnorm = (x0.modulus_squared() + tail).sqrt();
        let phase = if x0.modulus() == 0.0 {
            T::one()
        } else {
            x0.scale(1.0 / x0.modulus())
        };
        let alpha = -phase.scale(xnorm);

        v[lo] = x0 - alpha;
        for i in lo + 1..n {
            v[i] = a[i * n + k];
        }
        let vnorm = (v[lo..n].iter().map(|z| z.modulus_squared()).sum::<f64>()).sqrt();
        for z in &mut v[lo..n] {
            *z = z.unscale(vnorm);
        }

        // u = S v on the trailing block
        for i in lo..n {
            let row = &a[i * n + lo..i * n + n];
            let mut acc = T::zero();
            for (s, vj) in row.iter().zip(&v[lo..n]) {
                acc += *s * *vj;
            }
            u[i] = acc;
        }
        let gamma: f64 = v[lo..n]
            .iter()
            .zip(&u[lo..n])
            .map(|(vi, ui)| (vi.conjugate() * *ui).real())
            .sum();
        // q = 2u - 2 gamma v, stored in u
        for i in lo..n {
            u[i] = two * u[i] - v[i].scale(2.0 * gamma);
        }
        // S <- S - v q* - q v*
        for i in lo..n {
            let (vi, qi) = (v[i], u[i]);
            let row = &mut a[i * n + lo..i * n + n];
            for (j, s) in row.iter_mut().enumerate() {
                let j = j + lo;
                *s -= vi * u[j].conjugate() + qi * v[j].conjugate();
            }
        }

        a[lo * n + k] = alpha;
        a[k * n + lo] = alpha.conjugate();
        for i in lo + 1..n {
            a[i * n + k] = T::zero();
            a[k * n + i] = T::zero();
        }
    }

    let diag = (0..n).map(|i| a[i * n + i].real()).collect();
    let offdiag = (0..n.saturating_sub(1)).map(|i| a[(i + 1) * n + i].modulus()).collect();
    SymTridiagonal { diag, offdiag }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample, EnsembleKind, EnsembleSpec};
    use num_complex::Complex64;

    #[test]
    fn diagonal_input_is_unchanged() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.5, 0.0]));
        let t = tridiagonalize(&RandomMatrix::Real(m)).unwrap();
        assert_eq!(t.diag, vec![3.0, -1.0, 2.5, 0.0]);
        assert_eq!(t.offdiag, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_non_self_adjoint() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(
            tridiagonalize(&RandomMatrix::Real(m)),
            Err(Error::Contract(_))
        ));
        let mut c = DMatrix::<Complex64>::zeros(2, 2);
        c[(0, 0)] = Complex64::new(1.0, 0.5);
        assert!(tridiagonalize(&RandomMatrix::Complex(c)).is_err());
    }

    #[test]
    fn trace_and_frobenius_norm_are_preserved() {
        for kind in [EnsembleKind::Goe, EnsembleKind::Gue, EnsembleKind::BernoulliComplex] {
            let n = 30;
            let h = sample(&EnsembleSpec::new(kind, n).unwrap(), 42);
            let t = tridiagonalize(&h).unwrap();
            let tol = 1e-12 * n as f64 * h.max_abs_entry();
            assert!((t.trace() - h.trace()).abs() <= tol, "{kind}");

            let fro_h: f64 = h.to_complex().iter().map(|z| z.norm_sqr()).sum();
            let fro_t: f64 = t.diag.iter().map(|x| x * x).sum::<f64>()
                + 2.0 * t.offdiag.iter().map(|x| x * x).sum::<f64>();
            assert!((fro_h - fro_t).abs() <= 1e-12 * fro_h);
        }
    }

    #[test]
    fn offdiagonal_is_nonnegative() {
        let h = sample(&EnsembleSpec::new(EnsembleKind::Gue, 12).unwrap(), 1);
        let t = tridiagonalize(&h).unwrap();
        assert!(t.offdiag.iter().all(|&e| e >= 0.0));
        assert_eq!(t.diag.len(), 12);
        assert_eq!(t.offdiag.len(), 11);
    }

    #[test]
    fn first_row_and_column_are_fixed_in_the_leading_entry() {
        let h = sample(&EnsembleSpec::new(EnsembleKind::Goe, 6).unwrap(), 3);
        let t = tridiagonalize(&h).unwrap();
        let RandomMatrix::Real(m) = &h else { unreachable!() };
        assert_eq!(t.diag[0], m[(0, 0)]);
        let first_row: f64 = (1..6).map(|j| m[(0, j)].powi(2)).sum::<f64>().sqrt();
        assert!((t.offdiag[0] - first_row).abs() < 1e-14);
    }
}
