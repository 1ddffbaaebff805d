//! Python bindings for the core sampling, Toda halting-time, statistics,
//! lattice and Fredholm routines.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use todalab_core::ensembles::{sample, EnsembleKind, EnsembleSpec, RandomMatrix};
use todalab_core::experiment::{self, ExperimentConfig};
use todalab_core::{fredholm, iterative, lattice, spectral, stats, toda};

fn py_err(e: todalab_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn ensemble(name: &str, n: usize) -> PyResult<EnsembleSpec> {
    let kind: EnsembleKind = name.parse().map_err(py_err)?;
    EnsembleSpec::new(kind, n).map_err(py_err)
}

/// Eigenvalues (ascending) with the moduli of the matching eigenvector
/// first components.
#[pyclass(name = "Spectrum", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpectrum(todalab_core::SpectralData);

#[pymethods]
impl PySpectrum {
    #[new]
    fn new(eigenvalues: Vec<f64>, first_components: Vec<f64>) -> PyResult<Self> {
        todalab_core::SpectralData::new(eigenvalues, first_components)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues().to_vec()
    }

    #[getter]
    fn first_components(&self) -> Vec<f64> {
        self.0.first_components().to_vec()
    }

    #[getter]
    fn lambda_max(&self) -> f64 {
        self.0.lambda_max()
    }

    #[getter]
    fn top_gap(&self) -> Option<f64> {
        self.0.top_gap()
    }

    fn __len__(&self) -> usize {
        self.0.n()
    }

    /// Off-diagonal first-row energy `E(t)` of the Toda flow.
    fn energy(&self, t: f64) -> PyResult<f64> {
        toda::energy(&self.0, t).map_err(py_err)
    }

    /// `X_11(t)` of the Toda flow.
    fn x11(&self, t: f64) -> PyResult<f64> {
        toda::x11(&self.0, t).map_err(py_err)
    }

    /// `(t1, x11_at_t1, edge_error)` for tolerance `epsilon`.
    fn halting_time(&self, epsilon: f64) -> PyResult<(f64, f64, f64)> {
        let c = toda::halting_time_t1(&self.0, epsilon).map_err(py_err)?;
        Ok((c.t1, c.x11_at_t1, c.edge_error))
    }

    fn __repr__(&self) -> String {
        format!("Spectrum(n={}, lambda_max={})", self.0.n(), self.0.lambda_max())
    }
}

#[derive(IntoPyObject)]
enum PyMatrix {
    Real(Vec<Vec<f64>>),
    Complex(Vec<Vec<Complex64>>),
}

/// Sample `seed` of an ensemble ("goe", "gue", "bernoulli-real",
/// "bernoulli-complex") as a list of rows.
#[pyfunction]
fn sample_matrix(name: &str, n: usize, seed: u64) -> PyResult<PyMatrix> {
    Ok(match sample(&ensemble(name, n)?, seed) {
        RandomMatrix::Real(m) => PyMatrix::Real(m.row_iter().map(|r| r.iter().copied().collect()).collect()),
        RandomMatrix::Complex(m) => {
            PyMatrix::Complex(m.row_iter().map(|r| r.iter().copied().collect()).collect())
        }
    })
}

#[pyfunction]
fn sample_spectrum(name: &str, n: usize, seed: u64) -> PyResult<PySpectrum> {
    spectral::spectrum(&sample(&ensemble(name, n)?, seed))
        .map(PySpectrum)
        .map_err(py_err)
}

/// Spectra of samples `0..count` of the stream with master seed `seed`.
#[pyfunction]
fn sample_spectra(py: Python<'_>, name: &str, n: usize, seed: u64, count: usize) -> PyResult<Vec<PySpectrum>> {
    let spec = ensemble(name, n)?;
    let out = py
        .detach(|| spectral::sample_spectra(&spec, seed, count))
        .map_err(py_err)?;
    Ok(out.into_iter().map(PySpectrum).collect())
}

#[pyfunction]
fn ks_two_sample(a: Vec<f64>, b: Vec<f64>) -> f64 {
    stats::ks_two_sample(&a, &b)
}

#[pyfunction]
fn tau_normalize(samples: Vec<f64>) -> PyResult<Vec<f64>> {
    let d = stats::EmpiricalDistribution::new(samples).map_err(py_err)?;
    Ok(stats::tau_normalize(&d).map_err(py_err)?.samples().to_vec())
}

#[pyfunction]
#[pyo3(signature = (t1, n, epsilon, c_v = 1.0))]
fn theorem1_scale(t1: f64, n: usize, epsilon: f64, c_v: f64) -> PyResult<f64> {
    let c = stats::ScalingConstants::new(c_v, 2.0).map_err(py_err)?;
    stats::theorem1_scale(t1, n, epsilon, &c).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (spectrum, c_v = 1.0))]
fn gap_scale(spectrum: &PySpectrum, c_v: f64) -> PyResult<f64> {
    let c = stats::ScalingConstants::new(c_v, 2.0).map_err(py_err)?;
    stats::gap_scale(&spectrum.0, &c).map_err(py_err)
}

/// Unshifted QR iterations until the first row falls below `epsilon`;
/// `None` if `k_max` is reached.
#[pyfunction]
fn qr_halting(name: &str, n: usize, seed: u64, epsilon: f64, k_max: usize) -> PyResult<Option<usize>> {
    let run = iterative::qr_halting(&sample(&ensemble(name, n)?, seed), epsilon, k_max).map_err(py_err)?;
    Ok(run.halted.then_some(run.iterations))
}

/// Conjugate-gradient iterations on a seeded `n x n` Wishart system with
/// `m` degrees of freedom.
#[pyfunction]
fn cg_halting(n: usize, m: usize, seed: u64, epsilon: f64, k_max: usize) -> PyResult<Option<usize>> {
    let (a, b) = iterative::wishart_system(n, m, seed).map_err(py_err)?;
    let run = iterative::cg_halting(&a, &b, epsilon, k_max).map_err(py_err)?;
    Ok(run.halted.then_some(run.iterations))
}

/// `det(1 - K_s)` for the sine kernel on `(-1, 1)`, refined until node
/// doubling changes it by less than `1e-10`.
#[pyfunction]
fn gap_probability(s: f64) -> PyResult<f64> {
    fredholm::gap_probability(s, fredholm::DEFAULT_NODES)
        .map(|g| g.value)
        .map_err(py_err)
}

/// Eigenvalues of the discretized sine-kernel operator, descending.
#[pyfunction]
fn sine_kernel_eigenvalues(s: f64, nodes: usize) -> PyResult<Vec<f64>> {
    fredholm::eigenvalues(&fredholm::discretize(s, nodes).map_err(py_err)?).map_err(py_err)
}

/// Shock lattice run; returns `(times, positions)` sampled every `stride`
/// steps.
#[pyfunction]
#[pyo3(signature = (particles, a, dt, t_end, stride = 10))]
fn shock_lattice(
    py: Python<'_>,
    particles: usize,
    a: f64,
    dt: f64,
    t_end: f64,
    stride: usize,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let traj = py
        .detach(|| lattice::simulate(lattice::init_shock(particles, a)?, dt, t_end, stride))
        .map_err(py_err)?;
    Ok(traj.snapshots.into_iter().map(|s| (s.t, s.x)).unzip())
}

/// Runs an experiment from config text; returns `(passed, summary)` where
/// `summary` maps keys to values, including one `check <name>` entry per
/// internal check.
#[pyfunction]
fn run_experiment(py: Python<'_>, config: &str) -> PyResult<(bool, Vec<(String, String)>)> {
    let cfg = ExperimentConfig::parse(config).map_err(py_err)?;
    let report = py.detach(|| experiment::run(&cfg)).map_err(py_err)?;
    let mut summary = report.summary.clone();
    summary.push(("skipped_samples".into(), report.skipped_samples.to_string()));
    for c in &report.checks {
        summary.push((format!("check {}", c.name), if c.passed { "PASS" } else { "FAIL" }.into()));
    }
    Ok((report.passed(), summary))
}

#[pymodule]
fn todalab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpectrum>()?;
    m.add_function(wrap_pyfunction!(sample_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(sample_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(sample_spectra, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(tau_normalize, m)?)?;
    m.add_function(wrap_pyfunction!(theorem1_scale, m)?)?;
    m.add_function(wrap_pyfunction!(gap_scale, m)?)?;
    m.add_function(wrap_pyfunction!(qr_halting, m)?)?;
    m.add_function(wrap_pyfunction!(cg_halting, m)?)?;
    m.add_function(wrap_pyfunction!(gap_probability, m)?)?;
    m.add_function(wrap_pyfunction!(sine_kernel_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(shock_lattice, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
