//! Numerical computation with random data.
//!
//! Sampling of Wigner-class ensembles, the Toda eigenvalue algorithm in
//! closed form, discrete iterative algorithms (unshifted QR, conjugate
//! gradient), halting-time statistics, driven and shock Toda lattices, and
//! Nyström evaluation of the sine-kernel Fredholm determinant.

pub mod ensembles;
pub mod error;
pub mod experiment;
pub mod fredholm;
pub mod iterative;
pub mod lattice;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod toda;

pub use ensembles::{EnsembleKind, EnsembleSpec, RandomMatrix};
pub use error::{Error, Result};
pub use spectral::{GapStatistics, SpectralData, SymTridiagonal};
pub use stats::{EmpiricalDistribution, ScalingConstants};
pub use toda::TodaClock;
