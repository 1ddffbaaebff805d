//! Wigner-class random matrix ensembles.
//!
//! All ensembles share one normalization: off-diagonal entries have mean 0
//! and variance `1/n`, so the limiting spectral density is the semicircle on
//! `[-2, 2]` and the top edge is `b_v = 2`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Error, Result};
use crate::rng::{rng_from_seed, stream_rng, SampleRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    Goe,
    Gue,
    BernoulliReal,
    BernoulliComplex,
}

impl EnsembleKind {
    pub fn beta(self) -> u8 {
        match self {
            EnsembleKind::Goe | EnsembleKind::BernoulliReal => 1,
            EnsembleKind::Gue | EnsembleKind::BernoulliComplex => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Goe => "goe",
            EnsembleKind::Gue => "gue",
            EnsembleKind::BernoulliReal => "bernoulli-real",
            EnsembleKind::BernoulliComplex => "bernoulli-complex",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "goe" => Ok(EnsembleKind::Goe),
            "gue" => Ok(EnsembleKind::Gue),
            "bernoulli-real" | "bernoulli" | "ber" => Ok(EnsembleKind::BernoulliReal),
            "bernoulli-complex" | "cber" => Ok(EnsembleKind::BernoulliComplex),
            other => Err(Error::Parameter(format!("unknown ensemble '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnsembleSpec {
    kind: EnsembleKind,
    n: usize,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n: usize) -> Result<Self> {
        if n == 0 {
            return param("matrix dimension must be at least 1");
        }
        Ok(Self { kind, n })
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> u8 {
        self.kind.beta()
    }
}

/// A self-adjoint sample. Real variants are symmetric, complex ones Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub enum RandomMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl RandomMatrix {
    pub fn n(&self) -> usize {
        match self {
            RandomMatrix::Real(m) => m.nrows(),
            RandomMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn beta(&self) -> u8 {
        match self {
            RandomMatrix::Real(_) => 1,
            RandomMatrix::Complex(_) => 2,
        }
    }

    /// Bitwise check that `entry(i, j) == conj(entry(j, i))`.
    pub fn is_self_adjoint(&self) -> bool {
        match self {
            RandomMatrix::Real(m) => m.is_square() && is_exactly_symmetric(m),
            RandomMatrix::Complex(m) => m.is_square() && is_exactly_hermitian(m),
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match self {
            RandomMatrix::Real(m) => m.map(|x| Complex64::new(x, 0.0)),
            RandomMatrix::Complex(m) => m.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            RandomMatrix::Real(m) => m.trace(),
            RandomMatrix::Complex(m) => m.trace().re,
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        match self {
            RandomMatrix::Real(m) => m.iter().fold(0.0, |a, x| a.max(x.abs())),
            RandomMatrix::Complex(m) => m.iter().fold(0.0, |a, x| a.max(x.norm())),
        }
    }

    /// Row-major CSV. Complex matrices interleave `re,im` per entry.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.n();
        for i in 0..n {
            let row: Vec<String> = match self {
                RandomMatrix::Real(m) => (0..n).map(|j| format!("{:e}", m[(i, j)])).collect(),
                RandomMatrix::Complex(m) => (0..n)
                    .map(|j| format!("{:e},{:e}", m[(i, j)].re, m[(i, j)].im))
                    .collect(),
            };
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn is_exactly_symmetric(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| m[(i, j)].to_bits() == m[(j, i)].to_bits()))
}

pub(crate) fn is_exactly_hermitian(m: &DMatrix<Complex64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| {
        m[(i, i)].im == 0.0
            && (0..i).all(|j| {
                let a = m[(i, j)];
                let b = m[(j, i)].conj();
                a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()
            })
    })
}

fn gaussian(rng: &mut SampleRng, std: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    std * z
}

fn sign(rng: &mut SampleRng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

fn sample_with(spec: &EnsembleSpec, rng: &mut SampleRng) -> RandomMatrix {
    let n = spec.n;
    let nf = n as f64;
    match spec.kind {
        EnsembleKind::Goe | EnsembleKind::BernoulliReal => {
            let mut m = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let x = match (spec.kind, i == j) {
                        (EnsembleKind::Goe, true) => gaussian(rng, (2.0 / nf).sqrt()),
                        (EnsembleKind::Goe, false) => gaussian(rng, (1.0 / nf).sqrt()),
                        _ => sign(rng) / nf.sqrt(),
                    };
                    m[(i, j)] = x;
                    m[(j, i)] = x;
                }
            }
            RandomMatrix::Real(m)
        }
        EnsembleKind::Gue | EnsembleKind::BernoulliComplex => {
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            let half = (1.0 / (2.0 * nf)).sqrt();
            for i in 0..n {
                for j in i..n {
                    let z = match (spec.kind, i == j) {
                        (EnsembleKind::Gue, true) => Complex64::new(gaussian(rng, (1.0 / nf).sqrt()), 0.0),
                        (EnsembleKind::Gue, false) => {
                            Complex64::new(gaussian(rng, half), gaussian(rng, half))
                        }
                        (_, true) => Complex64::new(sign(rng) / nf.sqrt(), 0.0),
                        (_, false) => Complex64::new(sign(rng) * half, sign(rng) * half),
                    };
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                }
            }
            RandomMatrix::Complex(m)
        }
    }
}

/// Draws one matrix; pure in `(spec, seed)`.
pub fn sample(spec: &EnsembleSpec, seed: u64) -> RandomMatrix {
    sample_with(spec, &mut rng_from_seed(seed))
}

/// Matrix `index` of the stream rooted at `master_seed`.
pub fn stream_sample(spec: &EnsembleSpec, master_seed: u64, index: u64) -> RandomMatrix {
    sample_with(spec, &mut stream_rng(master_seed, index))
}

/// Lazily replayable stream; element `k` depends only on `(master_seed, k)`.
pub fn reseedable_stream(
    spec: EnsembleSpec,
    master_seed: u64,
    count: usize,
) -> Result<impl ExactSizeIterator<Item = RandomMatrix>> {
    if count == 0 {
        return param("stream count must be at least 1");
    }
    Ok((0..count).map(move |k| stream_sample(&spec, master_seed, k as u64)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: EnsembleKind, n: usize) -> EnsembleSpec {
        EnsembleSpec::new(kind, n).unwrap()
    }

    const ALL: [EnsembleKind; 4] = [
        EnsembleKind::Goe,
        EnsembleKind::Gue,
        EnsembleKind::BernoulliReal,
        EnsembleKind::BernoulliComplex,
    ];

    #[test]
    fn rejects_zero_dimension() {
        assert!(matches!(
            EnsembleSpec::new(EnsembleKind::Goe, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn beta_follows_kind() {
        assert_eq!(spec(EnsembleKind::Goe, 3).beta(), 1);
        assert_eq!(spec(EnsembleKind::BernoulliReal, 3).beta(), 1);
        assert_eq!(spec(EnsembleKind::Gue, 3).beta(), 2);
        assert_eq!(spec(EnsembleKind::BernoulliComplex, 3).beta(), 2);
    }

    #[test]
    fn every_sample_is_exactly_self_adjoint() {
        for kind in ALL {
            for seed in 0..5 {
                let m = sample(&spec(kind, 17), seed);
                assert!(m.is_self_adjoint(), "{kind} seed {seed}");
                assert_eq!(m.beta(), kind.beta());
            }
        }
    }

    #[test]
    fn goe_one_by_one_has_variance_two() {
        let s = spec(EnsembleKind::Goe, 1);
        let xs: Vec<f64> = (0..20_000)
            .map(|k| match stream_sample(&s, 3, k) {
                RandomMatrix::Real(m) => m[(0, 0)],
                _ => unreachable!(),
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 2.0).abs() < 0.1, "var {var}");
    }

    fn off_diagonal_moments(kind: EnsembleKind, n: usize) -> (f64, f64, Vec<Complex64>) {
        let s = spec(kind, n);
        let mut vals = Vec::new();
        let mut k = 0;
        while vals.len() < 100_000 {
            let m = stream_sample(&s, 11, k).to_complex();
            for i in 0..n {
                for j in (i + 1)..n {
                    vals.push(m[(i, j)]);
                }
            }
            k += 1;
        }
        let len = vals.len() as f64;
        let mean = vals.iter().sum::<Complex64>() / len;
        let var = vals.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (len - 1.0);
        (mean.norm(), var, vals)
    }

    #[test]
    fn off_diagonal_moments_match_normalization() {
        let n = 20;
        for kind in ALL {
            let (mean, var, _) = off_diagonal_moments(kind, n);
            let nf = n as f64;
            assert!(mean < 3e-2 / nf.sqrt(), "{kind}: mean {mean}");
            assert!((var * nf - 1.0).abs() < 0.05, "{kind}: var*n {}", var * nf);
        }
    }

    #[test]
    fn complex_gaussian_parts_have_half_variance() {
        let n = 20;
        let (_, _, vals) = off_diagonal_moments(EnsembleKind::Gue, n);
        let len = vals.len() as f64;
        let re = vals.iter().map(|z| z.re * z.re).sum::<f64>() / len;
        let im = vals.iter().map(|z| z.im * z.im).sum::<f64>() / len;
        let target = 1.0 / (2.0 * n as f64);
        assert!((re / target - 1.0).abs() < 0.05);
        assert!((im / target - 1.0).abs() < 0.05);
    }

    #[test]
    fn bernoulli_entries_take_only_allowed_values() {
        let n = 9;
        let nf = n as f64;
        let RandomMatrix::Real(m) = sample(&spec(EnsembleKind::BernoulliReal, n), 5) else {
            panic!()
        };
        assert!(m.iter().all(|&x| x == 1.0 / nf.sqrt() || x == -1.0 / nf.sqrt()));

        let RandomMatrix::Complex(m) = sample(&spec(EnsembleKind::BernoulliComplex, n), 5) else {
            panic!()
        };
        let h = (1.0 / (2.0 * nf)).sqrt();
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)];
                if i == j {
                    assert_eq!(z.im, 0.0);
                    assert_eq!(z.re.abs(), 1.0 / nf.sqrt());
                } else {
                    assert_eq!(z.re.abs(), h);
                    assert_eq!(z.im.abs(), h);
                }
            }
        }
    }

    #[test]
    fn stream_is_deterministic_and_prefix_stable() {
        let s = spec(EnsembleKind::Goe, 10);
        let a: Vec<_> = reseedable_stream(s, 7, 3).unwrap().collect();
        let b: Vec<_> = reseedable_stream(s, 7, 3).unwrap().collect();
        assert_eq!(a, b);

        let long: Vec<_> = reseedable_stream(s, 7, 100).unwrap().collect();
        let short: Vec<_> = reseedable_stream(s, 7, 10).unwrap().collect();
        assert_eq!(&long[..10], &short[..]);

        let other: Vec<_> = reseedable_stream(s, 8, 3).unwrap().collect();
        assert!(a.iter().zip(&other).all(|(x, y)| x != y));
    }

    #[test]
    fn stream_rejects_zero_count() {
        assert!(reseedable_stream(spec(EnsembleKind::Goe, 2), 0, 0).is_err());
    }

    #[test]
    fn csv_layout() {
        let m = RandomMatrix::Complex(DMatrix::from_row_slice(
            1,
            1,
            &[Complex64::new(1.5, 0.0)],
        ));
        let mut out = Vec::new();
        m.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1.5e0,0e0\n");
    }
}
