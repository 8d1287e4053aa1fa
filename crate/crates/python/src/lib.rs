//! Python bindings. Timescales come back as floats, with `inf` when a mechanism is off.

use gravdec::crosscheck::{run_crosscheck, CrosscheckConfig, Preset};
use gravdec::emission::{tau_emission, EmissionModel, SpectralFunction};
use gravdec::master_equation::{
    evolve, extract_visibility, high_temperature_rate, CmHamiltonian, DensityMatrixGrid, EvolutionConfig, EvolutionForm,
};
use gravdec::oracle::{self, OracleConfig as CoreOracleConfig, TwoPointSetup};
use gravdec::propertime::{self, PathSamples, PotentialSpec, TrajectoryPair};
use gravdec::visibility::{self, SchwarzschildSpec};
use gravdec::{InternalStateSpec, PhysicalConstants};
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: gravdec::Error) -> PyErr {
    match e {
        gravdec::Error::NumericalInstability(_) => PyArithmeticError::new_err(e.to_string()),
        gravdec::Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for gravdec::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Physical constants in SI units (or natural units via `Constants.natural()`).
#[pyclass(name = "Constants", from_py_object)]
#[derive(Clone, Copy)]
struct Constants {
    #[pyo3(get, set)]
    hbar: f64,
    #[pyo3(get, set)]
    c: f64,
    #[pyo3(get, set)]
    k_b: f64,
    #[pyo3(get, set)]
    big_g: f64,
    #[pyo3(get, set)]
    g_earth: f64,
}

impl From<PhysicalConstants> for Constants {
    fn from(k: PhysicalConstants) -> Self {
        Constants { hbar: k.hbar, c: k.c, k_b: k.k_b, big_g: k.big_g, g_earth: k.g_earth }
    }
}

impl Constants {
    fn core(&self) -> PyResult<PhysicalConstants> {
        let k = PhysicalConstants { hbar: self.hbar, c: self.c, k_b: self.k_b, big_g: self.big_g, g_earth: self.g_earth };
        k.validate().py()?;
        Ok(k)
    }
}

#[pymethods]
impl Constants {
    #[new]
    fn new() -> Self {
        gravdec::default_constants().into()
    }

    #[staticmethod]
    fn natural() -> Self {
        PhysicalConstants::natural().into()
    }

    fn __repr__(&self) -> String {
        format!(
            "Constants(hbar={:e}, c={}, k_b={:e}, G={:e}, g_earth={})",
            self.hbar, self.c, self.k_b, self.big_g, self.g_earth
        )
    }
}

fn consts(k: Option<Constants>) -> PyResult<PhysicalConstants> {
    k.map_or(Ok(gravdec::default_constants()), |k| k.core())
}

/// Internal thermal modes: either N high-temperature modes or explicit frequencies.
#[pyclass(name = "InternalState", from_py_object)]
#[derive(Clone)]
struct InternalState {
    inner: InternalStateSpec,
}

#[pymethods]
impl InternalState {
    #[staticmethod]
    fn high_temperature(n_modes: f64, temperature: f64) -> PyResult<Self> {
        Ok(InternalState { inner: InternalStateSpec::high_temperature(n_modes, temperature).py()? })
    }

    #[staticmethod]
    fn explicit(temperature: f64, frequencies: Vec<f64>) -> PyResult<Self> {
        Ok(InternalState { inner: InternalStateSpec::explicit(temperature, frequencies).py()? })
    }

    #[getter]
    fn temperature(&self) -> f64 {
        self.inner.temperature()
    }

    #[getter]
    fn n_modes(&self) -> f64 {
        self.inner.n_modes()
    }

    #[getter]
    fn frequencies(&self) -> Option<Vec<f64>> {
        self.inner.frequencies().map(<[f64]>::to_vec)
    }

    #[pyo3(signature = (constants=None))]
    fn occupations(&self, constants: Option<Constants>) -> PyResult<Vec<f64>> {
        self.inner.occupations(&consts(constants)?).py()
    }

    #[pyo3(signature = (constants=None))]
    fn energy_variance(&self, constants: Option<Constants>) -> PyResult<f64> {
        gravdec::internal::internal_energy_variance(&self.inner, &consts(constants)?).py()
    }

    fn __repr__(&self) -> String {
        format!("InternalState({:?})", self.inner)
    }
}

/// Sampling and truncation settings shared by the oracles.
#[pyclass(name = "OracleConfig", from_py_object)]
#[derive(Clone, Copy)]
struct OracleConfig {
    #[pyo3(get, set)]
    n_samples: u64,
    #[pyo3(get, set)]
    seed: u64,
    #[pyo3(get, set)]
    fock_cutoff: usize,
    #[pyo3(get, set)]
    tail_tolerance: f64,
}

#[pymethods]
impl OracleConfig {
    #[new]
    #[pyo3(signature = (n_samples=1_000_000, seed=20_240_917, fock_cutoff=128, tail_tolerance=1e-9))]
    fn new(n_samples: u64, seed: u64, fock_cutoff: usize, tail_tolerance: f64) -> Self {
        OracleConfig { n_samples, seed, fock_cutoff, tail_tolerance }
    }
}

impl OracleConfig {
    fn core(&self) -> CoreOracleConfig {
        CoreOracleConfig {
            n_samples: self.n_samples,
            seed: self.seed,
            fock_cutoff: self.fock_cutoff,
            tail_tolerance: self.tail_tolerance,
        }
    }
}

fn oracle_cfg(cfg: Option<OracleConfig>) -> CoreOracleConfig {
    cfg.map_or_else(CoreOracleConfig::default, |c| c.core())
}

#[pyfunction]
#[pyo3(signature = (omega, temperature, constants=None))]
fn thermal_occupation(omega: f64, temperature: f64, constants: Option<Constants>) -> PyResult<f64> {
    gravdec::internal::thermal_occupation(omega, temperature, &consts(constants)?).py()
}

#[pyfunction]
#[pyo3(signature = (n_modes, temperature, dx, g=None, constants=None))]
fn decoherence_time(n_modes: f64, temperature: f64, dx: f64, g: Option<f64>, constants: Option<Constants>) -> PyResult<f64> {
    let k = consts(constants)?;
    Ok(visibility::decoherence_time(n_modes, temperature, dx, g.unwrap_or(k.g_earth), &k).py()?.seconds())
}

/// Decoherence time at `radius` from `central_mass` (default: at its horizon).
#[pyfunction]
#[pyo3(signature = (n_modes, temperature, dx, central_mass, radius=None, constants=None))]
fn decoherence_time_schwarzschild(
    n_modes: f64,
    temperature: f64,
    dx: f64,
    central_mass: f64,
    radius: Option<f64>,
    constants: Option<Constants>,
) -> PyResult<f64> {
    let k = consts(constants)?;
    let body = match radius {
        Some(r) => SchwarzschildSpec::new(central_mass, r, &k),
        None => SchwarzschildSpec::at_horizon(central_mass, &k),
    }
    .py()?;
    Ok(visibility::decoherence_time_schwarzschild(n_modes, temperature, dx, &body, &k).py()?.seconds())
}

#[pyfunction]
#[pyo3(signature = (mass, constants=None))]
fn hawking_temperature(mass: f64, constants: Option<Constants>) -> PyResult<f64> {
    visibility::hawking_temperature(mass, &consts(constants)?).py()
}

#[pyfunction]
#[pyo3(signature = (state, delta_tau, constants=None))]
fn exact_visibility(state: &InternalState, delta_tau: f64, constants: Option<Constants>) -> PyResult<f64> {
    visibility::exact_visibility(&state.inner, delta_tau, &consts(constants)?).py()
}

#[pyfunction]
#[pyo3(signature = (state, delta_tau, constants=None))]
fn semiclassical_visibility(state: &InternalState, delta_tau: f64, constants: Option<Constants>) -> PyResult<f64> {
    propertime::semiclassical_visibility(&state.inner, delta_tau, &consts(constants)?).py()
}

#[pyfunction]
#[pyo3(signature = (n_modes, temperature, dx, g, t, constants=None))]
fn high_temperature_visibility(
    n_modes: f64,
    temperature: f64,
    dx: f64,
    g: f64,
    t: f64,
    constants: Option<Constants>,
) -> PyResult<f64> {
    visibility::high_temperature_visibility(n_modes, temperature, dx, g, t, &consts(constants)?).py()
}

#[pyfunction]
#[pyo3(signature = (n_modes, temperature, dx, g, t, constants=None))]
fn gaussian_visibility(n_modes: f64, temperature: f64, dx: f64, g: f64, t: f64, constants: Option<Constants>) -> PyResult<f64> {
    visibility::gaussian_visibility(n_modes, temperature, dx, g, t, &consts(constants)?).py()
}

/// Proper-time difference of two branches in a homogeneous field `g`.
#[pyfunction]
#[pyo3(signature = (times, x_a, v_a, x_b, v_b, g=None, constants=None))]
fn proper_time_difference(
    times: Vec<f64>,
    x_a: Vec<f64>,
    v_a: Vec<f64>,
    x_b: Vec<f64>,
    v_b: Vec<f64>,
    g: Option<f64>,
    constants: Option<Constants>,
) -> PyResult<f64> {
    let k = consts(constants)?;
    let pair = TrajectoryPair::new(times, PathSamples::new(x_a, v_a), PathSamples::new(x_b, v_b), &k).py()?;
    let pot = PotentialSpec::Homogeneous { g: g.unwrap_or(k.g_earth) };
    propertime::proper_time_difference(&pair, &pot, &k).py()
}

/// Emission time for a blackbody stand-in mode density and power-law cross section.
#[pyfunction]
#[pyo3(signature = (dx, temperature, sigma_amplitude, sigma_k0, sigma_exponent, k_min, k_max, constants=None))]
#[allow(clippy::too_many_arguments)]
fn emission_time(
    dx: f64,
    temperature: f64,
    sigma_amplitude: f64,
    sigma_k0: f64,
    sigma_exponent: f64,
    k_min: f64,
    k_max: f64,
    constants: Option<Constants>,
) -> PyResult<f64> {
    let sigma = SpectralFunction::PowerLaw { amplitude: sigma_amplitude, k0: sigma_k0, exponent: sigma_exponent };
    let model = EmissionModel::blackbody_stand_in(temperature, sigma, k_min, k_max).py()?;
    Ok(tau_emission(dx, &model, &consts(constants)?).py()?.seconds())
}

/// Two-point superposition evolved by the master equation.
///
/// Returns `(times, visibilities)`. `form` is `"markovian"` or `"full-memory"`; the rate
/// defaults to the high-temperature value for `n_modes` modes at `temperature`.
#[pyfunction]
#[pyo3(signature = (x1, x2, dt, t_final, form="markovian", rate=None, n_modes=None, temperature=None, g=None, constants=None))]
#[allow(clippy::too_many_arguments)]
fn evolve_two_point(
    x1: f64,
    x2: f64,
    dt: f64,
    t_final: f64,
    form: &str,
    rate: Option<f64>,
    n_modes: Option<f64>,
    temperature: Option<f64>,
    g: Option<f64>,
    constants: Option<Constants>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let k = consts(constants)?;
    let form = match form {
        "markovian" => EvolutionForm::Markovian,
        "full-memory" => EvolutionForm::FullMemory,
        other => return Err(PyValueError::new_err(format!("unknown form {other:?}"))),
    };
    let rate = match (rate, n_modes, temperature) {
        (Some(r), _, _) => r,
        (None, Some(n), Some(t)) => high_temperature_rate(n, t, g.unwrap_or(k.g_earth), &k),
        _ => return Err(PyValueError::new_err("give rate, or n_modes and temperature")),
    };
    let rho0 = DensityMatrixGrid::two_point(x1, x2).py()?;
    let cfg = EvolutionConfig::new(dt, t_final, form, rate).py()?;
    let series = evolve(&rho0, &CmHamiltonian::None, &cfg, &k).py()?;
    let curve = extract_visibility(&series, x1, x2).py()?;
    Ok((curve.times, curve.values))
}

/// Coherent-state Monte Carlo estimate: returns `(visibility, standard_error)`.
#[pyfunction]
#[pyo3(signature = (state, delta_tau, config=None, constants=None))]
fn mc_visibility(
    state: &InternalState,
    delta_tau: f64,
    config: Option<OracleConfig>,
    constants: Option<Constants>,
) -> PyResult<(f64, f64)> {
    let est = oracle::mc_visibility(&state.inner, delta_tau, &oracle_cfg(config), &consts(constants)?).py()?;
    Ok((est.visibility, est.standard_error))
}

/// Truncated Fock sum: returns `(visibility, truncation_bound)`.
#[pyfunction]
#[pyo3(signature = (state, delta_tau, config=None, constants=None))]
fn fock_visibility(
    state: &InternalState,
    delta_tau: f64,
    config: Option<OracleConfig>,
    constants: Option<Constants>,
) -> PyResult<(f64, f64)> {
    let est = oracle::fock_visibility(&state.inner, delta_tau, &oracle_cfg(config), &consts(constants)?).py()?;
    Ok((est.visibility, est.truncation_bound))
}

/// Joint evolution of the two-point superposition and up to four Fock modes.
#[pyfunction]
#[pyo3(signature = (state, mass, x1, x2, t, g, config=None, constants=None))]
#[allow(clippy::too_many_arguments)]
fn two_point_unitary_oracle<'py>(
    py: Python<'py>,
    state: &InternalState,
    mass: f64,
    x1: f64,
    x2: f64,
    t: f64,
    g: f64,
    config: Option<OracleConfig>,
    constants: Option<Constants>,
) -> PyResult<Bound<'py, PyDict>> {
    let setup = TwoPointSetup { mass, x1, x2, t, g };
    let r = oracle::two_point_unitary_oracle(&state.inner, &setup, &oracle_cfg(config), &consts(constants)?).py()?;
    let d = PyDict::new(py);
    d.set_item("visibility", r.visibility)?;
    d.set_item("total_phase", r.total_phase)?;
    d.set_item("rest_mass_phase", r.rest_mass_phase)?;
    d.set_item("cutoffs", r.cutoffs)?;
    d.set_item("dimension", r.dimension)?;
    d.set_item("truncation_bound", r.truncation_bound)?;
    Ok(d)
}

/// Runs the randomized oracle suite; returns `(passed, total)`.
#[pyfunction]
#[pyo3(signature = (preset="quick", seed=None))]
fn crosscheck(py: Python<'_>, preset: &str, seed: Option<u64>) -> PyResult<(usize, usize)> {
    let mut cfg = CrosscheckConfig::preset(match preset {
        "standard" => Preset::Standard,
        "quick" => Preset::Quick,
        other => return Err(PyValueError::new_err(format!("unknown preset {other:?}"))),
    });
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = py.detach(|| run_crosscheck(&cfg)).py()?;
    Ok((report.n_passed(), report.cases.len()))
}

#[pymodule]
fn gravdec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", gravdec::VERSION)?;
    m.add_class::<Constants>()?;
    m.add_class::<InternalState>()?;
    m.add_class::<OracleConfig>()?;
    m.add_function(wrap_pyfunction!(thermal_occupation, m)?)?;
    m.add_function(wrap_pyfunction!(decoherence_time, m)?)?;
    m.add_function(wrap_pyfunction!(decoherence_time_schwarzschild, m)?)?;
    m.add_function(wrap_pyfunction!(hawking_temperature, m)?)?;
    m.add_function(wrap_pyfunction!(exact_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(semiclassical_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(high_temperature_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(proper_time_difference, m)?)?;
    m.add_function(wrap_pyfunction!(emission_time, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_two_point, m)?)?;
    m.add_function(wrap_pyfunction!(mc_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(fock_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(two_point_unitary_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(crosscheck, m)?)?;
    Ok(())
}
