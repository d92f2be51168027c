//! Python bindings: constitutive laws, relative-entropy evaluation, paired
//! runs and sweeps driven from TOML text.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use relaxlim::config::RunConfig;
use relaxlim::constitutive::make_gamma_law;
use relaxlim::entropy::euler::{self, EulerState};
use relaxlim::error::RelaxError;
use relaxlim::sweep;

fn to_py(e: RelaxError) -> PyErr {
    match e {
        RelaxError::Config(_) | RelaxError::InvalidConstitutive(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Gamma-law pressure with its internal energy, the Euler constitutive pair.
#[pyclass]
struct GammaLaw {
    p: relaxlim::constitutive::PressureLaw,
    h: relaxlim::constitutive::InternalEnergy,
}

#[pymethods]
impl GammaLaw {
    #[new]
    fn new(k: f64, gamma: f64) -> PyResult<Self> {
        let (p, h) = make_gamma_law(k, gamma).map_err(to_py)?;
        Ok(GammaLaw { p, h })
    }

    fn pressure(&self, rho: f64) -> f64 {
        self.p.p(rho)
    }

    fn internal_energy(&self, rho: f64) -> f64 {
        self.h.h(rho)
    }

    fn pressure_rel(&self, rho: f64, rho_bar: f64) -> f64 {
        self.p.p_rel(rho, rho_bar)
    }

    fn energy_rel(&self, rho: f64, rho_bar: f64) -> f64 {
        self.h.h_rel(rho, rho_bar)
    }

    /// Relative entropy of (rho, m) about (rho_bar, m_bar).
    fn relative_entropy(&self, rho: f64, m: f64, rho_bar: f64, m_bar: f64) -> PyResult<f64> {
        euler::relative_entropy(
            EulerState::new(rho, m),
            EulerState::new(rho_bar, m_bar),
            &self.h,
        )
        .map_err(to_py)
    }

    fn relative_flux(&self, rho: f64, m: f64, rho_bar: f64, m_bar: f64) -> PyResult<f64> {
        euler::relative_flux(
            EulerState::new(rho, m),
            EulerState::new(rho_bar, m_bar),
            &self.h,
        )
        .map_err(to_py)
    }
}

/// Eigenvalues of the Hessian of R = rho |u - u_bar|^2 in (rho, m) for the
/// multi-d momentum m, sorted ascending.
#[pyfunction]
fn hessian_eigenvalues(rho: f64, m: Vec<f64>) -> PyResult<Vec<f64>> {
    if m.len() != 3 {
        return Err(PyValueError::new_err("momentum must have 3 components"));
    }
    Ok(euler::hessian_r_eigenvalues(rho, [m[0], m[1], m[2]]).to_vec())
}

/// Ledger of one paired relaxation/limit run.
#[pyclass]
struct RunResult {
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    phi: Vec<f64>,
    #[pyo3(get)]
    dissipation: Vec<f64>,
    #[pyo3(get)]
    residual_max: Vec<f64>,
    #[pyo3(get)]
    cert_constant: f64,
    #[pyo3(get)]
    certified: bool,
}

/// Runs the paired solver from a TOML config string at the given epsilon.
#[pyfunction]
fn run_from_toml(text: &str, eps: f64) -> PyResult<RunResult> {
    let cfg = RunConfig::from_toml(text).map_err(to_py)?;
    let out = sweep::run_single(&cfg, eps, cfg.grid.n).map_err(to_py)?;
    let ledger = out.paired.ledger;
    Ok(RunResult {
        times: ledger.times,
        phi: ledger.phi,
        dissipation: ledger.dissipation_integral,
        residual_max: ledger.entropy_residual_max,
        cert_constant: out.paired.cert_constant,
        certified: out.paired.certified,
    })
}

/// Sweep summary: per-eps phi(T) plus the fitted convergence rate.
#[pyclass]
struct SweepResult {
    #[pyo3(get)]
    epsilons: Vec<f64>,
    #[pyo3(get)]
    phi_at_t: Vec<f64>,
    #[pyo3(get)]
    fitted_rate: f64,
    #[pyo3(get)]
    fitted_constant: f64,
    #[pyo3(get)]
    gronwall: Vec<f64>,
}

#[pyfunction]
#[pyo3(signature = (text, workers = 1))]
fn sweep_from_toml(text: &str, workers: usize) -> PyResult<SweepResult> {
    let cfg = RunConfig::from_toml(text).map_err(to_py)?;
    let (report, _) = sweep::run_sweep(&cfg, workers).map_err(to_py)?;
    Ok(SweepResult {
        epsilons: report.epsilons,
        phi_at_t: report.phi_at_t,
        fitted_rate: report.fitted_rate,
        fitted_constant: report.fitted_constant,
        gronwall: report.gronwall,
    })
}

/// Runs the seeded check suite; returns (name, passed, detail) triples.
#[pyfunction]
#[pyo3(signature = (seed = 42, k = 1.0, gamma = 2.0))]
fn run_checks(seed: u64, k: f64, gamma: f64) -> PyResult<Vec<(String, bool, String)>> {
    let results = relaxlim::checks::run_all(seed, k, gamma).map_err(to_py)?;
    Ok(results
        .into_iter()
        .map(|r| (r.name, r.passed, r.detail))
        .collect())
}

#[pyfunction]
fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

#[pymodule]
fn relaxlim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<GammaLaw>()?;
    m.add_class::<RunResult>()?;
    m.add_class::<SweepResult>()?;
    m.add_function(wrap_pyfunction!(hessian_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(run_from_toml, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_from_toml, m)?)?;
    m.add_function(wrap_pyfunction!(run_checks, m)?)?;
    m.add_function(wrap_pyfunction!(version, m)?)?;
    Ok(())
}
