//! The Toda eigenvalue algorithm.
//!
//! The flow `dX/dt = [X, B(X)]` with `B(X) = X_- - X_-^*` is solved in closed
//! form from the eigenvalues and the first eigenvector components of
//! `X(0)`: the first components evolve as
//!
//! ```text
//! |u_1j(t)|^2 = beta_j^2 e^{2 lambda_j t} / sum_i beta_i^2 e^{2 lambda_i t}
//! ```
//!
//! which is evaluated as a softmax with the largest exponent factored out.
//! `X_11(t)` is the weighted mean of the eigenvalues and the first-row
//! off-diagonal energy `E(t)` their weighted variance.

use nalgebra::{ComplexField, DMatrix};

use crate::ensembles::RandomMatrix;
use crate::error::{param, Error, Result};
use crate::spectral::SpectralData;

/// Geometric growth of the forward scan that brackets the first crossing.
const SCAN_FACTOR: f64 = 1.25;
const SCAN_START: f64 = 1e-3;
const SCAN_LIMIT: f64 = 1e6;
const BISECTION_RTOL: f64 = 1e-10;

/// Outcome of the `T^(1)` stopping rule.
#[derive(Debug, Clone, PartialEq)]
pub struct TodaClock {
    pub spectral: SpectralData,
    pub epsilon: f64,
    /// First time with `E(t) = epsilon^2`.
    pub t1: f64,
    pub x11_at_t1: f64,
    /// `|lambda_max - X_11(t1)|`, computed without cancellation.
    pub edge_error: f64,
}

/// Squared first components `|u_1j(t)|^2`.
pub fn first_row_weights(sd: &SpectralData, t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return param(format!("time must be nonnegative, got {t}"));
    }
    let logw: Vec<f64> = sd
        .eigenvalues()
        .iter()
        .zip(sd.first_components())
        .map(|(l, b)| if *b > 0.0 { 2.0 * (b.ln() + l * t) } else { f64::NEG_INFINITY })
        .collect();
    let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logw.iter().map(|x| (x - top).exp()).collect();
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    Ok(w)
}

/// `(X_11(t) - lambda_max, E(t))` from the weights, centered at the top
/// eigenvalue so that neither quantity suffers cancellation near halting.
fn offset_and_energy(sd: &SpectralData, w: &[f64]) -> (f64, f64) {
    let top = sd.lambda_max();
    let offset: f64 = sd.eigenvalues().iter().zip(w).map(|(l, p)| p * (l - top)).sum();
    let energy = sd
        .eigenvalues()
        .iter()
        .zip(w)
        .map(|(l, p)| p * (l - top - offset).powi(2))
        .sum();
    (offset, energy)
}

/// `E(t) = sum_{j>=2} |X_1j(t)|^2`.
pub fn energy(sd: &SpectralData, t: f64) -> Result<f64> {
    let w = first_row_weights(sd, t)?;
    Ok(offset_and_energy(sd, &w).1)
}

/// `X_11(t) = sum_i lambda_i |u_1i(t)|^2`.
pub fn x11(sd: &SpectralData, t: f64) -> Result<f64> {
    let w = first_row_weights(sd, t)?;
    Ok(sd.lambda_max() + offset_and_energy(sd, &w).0)
}

/// First time `E(t)` drops to `epsilon^2`.
///
/// A geometric forward scan brackets the first down-crossing, then bisection
/// narrows it to a relative width of `1e-10`. `E` need not be monotone, so
/// the crossing found is the first one on the scan grid.
pub fn halting_time_t1(sd: &SpectralData, epsilon: f64) -> Result<TodaClock> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return param(format!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    let target = epsilon * epsilon;
    let below = |t: f64| -> Result<bool> { Ok(energy(sd, t)? <= target) };

    let (lo, hi) = if below(0.0)? {
        (0.0, 0.0)
    } else {
        let mut prev = 0.0;
        let mut t = SCAN_START;
        loop {
            if t > SCAN_LIMIT {
                return Err(Error::NonHalting { limit: SCAN_LIMIT });
            }
            if below(t)? {
                break;
            }
            prev = t;
            t *= SCAN_FACTOR;
        }
        let (mut lo, mut hi) = (prev, t);
        while hi - lo > BISECTION_RTOL * hi {
            let mid = 0.5 * (lo + hi);
            if below(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo, hi)
    };
    debug_assert!(lo <= hi);

    let w = first_row_weights(sd, hi)?;
    let (offset, _) = offset_and_energy(sd, &w);
    Ok(TodaClock {
        spectral: sd.clone(),
        epsilon,
        t1: hi,
        x11_at_t1: sd.lambda_max() + offset,
        edge_error: offset.abs(),
    })
}

/// `B(X) = X_- - X_-^*`.
fn toda_generator<T>(x: &DMatrix<T>) -> DMatrix<T>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = x.nrows();
    DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => x[(i, j)],
        std::cmp::Ordering::Less => -x[(j, i)].conjugate(),
        std::cmp::Ordering::Equal => T::zero(),
    })
}

fn toda_rhs<T>(x: &DMatrix<T>) -> DMatrix<T>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let b = toda_generator(x);
    x * &b - &b * x
}

fn frobenius<T: ComplexField<RealField = f64> + Copy>(x: &DMatrix<T>) -> f64 {
    x.iter().map(|z| z.modulus_squared()).sum::<f64>().sqrt()
}

/// Classical RK4 on the matrix Toda ODE, sampled at every step.
///
/// Intended as an independent check of the closed-form solution.
pub fn integrate_toda<T>(h: &DMatrix<T>, t_end: f64, dt: f64) -> Result<Vec<(f64, DMatrix<T>)>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return param("need dt > 0 and t_end >= 0");
    }
    let norm0 = frobenius(h);
    let steps = (t_end / dt).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = h.clone();
    let mut t = 0.0;
    out.push((t, x.clone()));
    let half = T::from_real(0.5);
    for k in 0..steps {
        let step = if k + 1 == steps { t_end - t } else { dt };
        let hs = T::from_real(step);
        let k1 = toda_rhs(&x);
        let k2 = toda_rhs(&(&x + &k1 * (hs * half)));
        let k3 = toda_rhs(&(&x + &k2 * (hs * half)));
        let k4 = toda_rhs(&(&x + &k3 * hs));
        x += (k1 + (k2 + k3) * T::from_real(2.0) + k4) * (hs * T::from_real(1.0 / 6.0));
        t = if k + 1 == steps { t_end } else { t + step };
        if !(frobenius(&x) <= 10.0 * norm0.max(f64::MIN_POSITIVE)) {
            return Err(Error::BlowUp {
                t,
                reason: "iterate norm exceeded 10x the initial norm".into(),
            });
        }
        out.push((t, x.clone()));
    }
    Ok(out)
}

/// Toda trajectory oracle for a sampled matrix.
pub fn ode_oracle(h: &RandomMatrix, t_end: f64, dt: f64) -> Result<Vec<(f64, RandomMatrix)>> {
    if !h.is_self_adjoint() {
        return Err(Error::Contract("Toda flow requires a self-adjoint initial matrix".into()));
    }
    Ok(match h {
        RandomMatrix::Real(m) => integrate_toda(m, t_end, dt)?
            .into_iter()
            .map(|(t, x)| (t, RandomMatrix::Real(x)))
            .collect(),
        RandomMatrix::Complex(m) => integrate_toda(m, t_end, dt)?
            .into_iter()
            .map(|(t, x)| (t, RandomMatrix::Complex(x)))
            .collect(),
    })
}

/// `sum_{j>=2} |X_1j|^2` read off a matrix.
pub fn first_row_energy<T: ComplexField<RealField = f64> + Copy>(x: &DMatrix<T>) -> f64 {
    (1..x.ncols()).map(|j| x[(0, j)].modulus_squared()).sum()
}

/// Frobenius norm of the off-diagonal block for each split `j = 1..n-1`
/// (leading block `j x j`).
pub fn deflation_residuals<T: ComplexField<RealField = f64> + Copy>(x: &DMatrix<T>) -> Vec<f64> {
    let n = x.nrows();
    (1..n)
        .map(|j| {
            let mut s = 0.0;
            for r in 0..j {
                for c in j..n {
                    s += x[(r, c)].modulus_squared();
                }
            }
            s.sqrt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample, EnsembleKind, EnsembleSpec};
    use crate::spectral::spectrum;
    use num_complex::Complex64;

    fn swap_2x2() -> SpectralData {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        SpectralData::new(vec![-1.0, 1.0], vec![s, s]).unwrap()
    }

    #[test]
    fn eigenbasis_initial_data_has_zero_energy() {
        let sd = SpectralData::new(vec![-1.0, 0.5, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        for t in [0.0, 1.0, 100.0] {
            assert_eq!(energy(&sd, t).unwrap(), 0.0);
        }
        let c = halting_time_t1(&sd, 0.1).unwrap();
        assert_eq!(c.t1, 0.0);
    }

    #[test]
    fn two_by_two_closed_form() {
        let sd = swap_2x2();
        assert!((energy(&sd, 0.0).unwrap() - 1.0).abs() < 1e-15);
        for k in 0..=50 {
            let t = 0.1 * k as f64;
            let sech = 1.0 / (2.0 * t).cosh();
            assert!((energy(&sd, t).unwrap() - sech * sech).abs() < 1e-10);
            assert!((x11(&sd, t).unwrap() - (2.0 * t).tanh()).abs() < 1e-10);
        }
        let eps: f64 = 1e-3;
        let expect = (1.0 / eps).acosh() / 2.0;
        assert!((expect - 3.8005).abs() < 1e-4);
        let c = halting_time_t1(&sd, eps).unwrap();
        assert!((c.t1 - expect).abs() < 1e-8);
        assert!((energy(&sd, c.t1).unwrap() / (eps * eps) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn negative_time_is_rejected() {
        assert!(energy(&swap_2x2(), -1.0).is_err());
        assert!(halting_time_t1(&swap_2x2(), 1.5).is_err());
    }

    #[test]
    fn x11_starts_at_h11() {
        let h = sample(&EnsembleSpec::new(EnsembleKind::Goe, 9).unwrap(), 4);
        let sd = spectrum(&h).unwrap();
        let RandomMatrix::Real(m) = &h else { unreachable!() };
        assert!((x11(&sd, 0.0).unwrap() - m[(0, 0)]).abs() < 1e-12);
        assert!((energy(&sd, 0.0).unwrap() - first_row_energy(m)).abs() < 1e-12);
    }

    #[test]
    fn long_time_limit_is_the_top_eigenvalue() {
        let h = sample(&EnsembleSpec::new(EnsembleKind::Goe, 6).unwrap(), 12);
        let sd = spectrum(&h).unwrap();
        let gap = sd.top_gap().unwrap();
        assert!(energy(&sd, 50.0 / gap).unwrap() < 1e-20 * energy(&sd, 0.0).unwrap());
        assert!((x11(&sd, 40.0 / gap).unwrap() - sd.lambda_max()).abs() < 1e-10);
    }

    #[test]
    fn energy_is_finite_at_extreme_times() {
        let h = sample(&EnsembleSpec::new(EnsembleKind::Gue, 2000).unwrap(), 1);
        let sd = spectrum(&h).unwrap();
        for t in [0.0, 1.0, 1e3, 1e6] {
            let e = energy(&sd, t).unwrap();
            assert!(e.is_finite() && e >= 0.0);
        }
    }

    #[test]
    fn halting_corollary_on_goe_50() {
        for seed in 0..10 {
            let h = sample(&EnsembleSpec::new(EnsembleKind::Goe, 50).unwrap(), seed);
            let sd = spectrum(&h).unwrap();
            let c = halting_time_t1(&sd, 1e-6).unwrap();
            assert!(c.edge_error < 1e-6, "seed {seed}: {}", c.edge_error);
            assert!((energy(&sd, c.t1).unwrap() / 1e-12 - 1.0).abs() < 1e-8);
            // first crossing on the scan grid
            let mut t = SCAN_START;
            while t < c.t1 {
                assert!(energy(&sd, t).unwrap() > 1e-12);
                t *= SCAN_FACTOR;
            }
        }
    }

    #[test]
    fn degenerate_top_never_halts() {
        // a near-tied top pair converges on a time scale far beyond the cap
        let b = (0.5f64).sqrt();
        let sd = SpectralData::new(vec![0.0, 1e-7], vec![b, b]).unwrap();
        assert!(matches!(
            halting_time_t1(&sd, 1e-9),
            Err(Error::NonHalting { .. })
        ));
    }

    #[test]
    fn ode_keeps_diagonal_fixed() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -0.5, 0.25]));
        let traj = integrate_toda(&h, 1.0, 0.01).unwrap();
        assert!(traj.iter().all(|(_, x)| *x == h));
    }

    #[test]
    fn ode_matches_two_by_two_closed_form() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let traj = integrate_toda(&h, 2.0, 1e-3).unwrap();
        for target in [0.5, 1.0, 2.0] {
            let (_, x) = traj
                .iter()
                .min_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()))
                .unwrap();
            let sech = 1.0 / (2.0 * target).cosh();
            assert!((x[(0, 1)] - sech).abs() < 1e-8, "t={target}");
        }
    }

    #[test]
    fn ode_is_isospectral_and_trace_preserving() {
        for kind in [EnsembleKind::Goe, EnsembleKind::Gue] {
            let h = sample(&EnsembleSpec::new(kind, 6).unwrap(), 21);
            let traj = ode_oracle(&h, 1.0, 1e-3).unwrap();
            let (_, last) = traj.last().unwrap();
            let before = spectrum(&h).unwrap();
            let after = h_spectrum_unchecked(last);
            for (a, b) in before.eigenvalues().iter().zip(&after) {
                assert!((a - b).abs() < 1e-8);
            }
            assert!((last.trace() - h.trace()).abs() < 1e-9);
        }
    }

    fn h_spectrum_unchecked(x: &RandomMatrix) -> Vec<f64> {
        let mut v: Vec<f64> = match x {
            RandomMatrix::Real(m) => m.clone().symmetric_eigenvalues().iter().copied().collect(),
            RandomMatrix::Complex(m) => m.clone().symmetric_eigenvalues().iter().copied().collect(),
        };
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn deflation_residuals_examples() {
        let (a, b) = (0.3, -0.7);
        let x = DMatrix::from_row_slice(3, 3, &[1.0, a, 0.0, a, 2.0, b, 0.0, b, 3.0]);
        let r = deflation_residuals(&x);
        assert_eq!(r, vec![a.abs(), b.abs()]);
        assert!((r[0] - first_row_energy(&x).sqrt()).abs() < 1e-15);

        let mut blk = DMatrix::<Complex64>::zeros(4, 4);
        blk[(0, 1)] = Complex64::new(0.0, 1.0);
        blk[(1, 0)] = Complex64::new(0.0, -1.0);
        blk[(2, 3)] = Complex64::new(2.0, 0.0);
        blk[(3, 2)] = Complex64::new(2.0, 0.0);
        assert_eq!(deflation_residuals(&blk)[1], 0.0);
    }
}
