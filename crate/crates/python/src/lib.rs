//! Python bindings for `stargraph`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use stargraph::analytic::{self, FamilyKind, TwoModeSpec};
use stargraph::discrete;
use stargraph::dynamics::{self, StopRule, VelocityInit, WavePacketSpec};
use stargraph::{Error, JunctionFamily};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::BlowUp { .. } | Error::NonFinite(_) | Error::ExperimentInvalid(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_family(family: &str) -> PyResult<JunctionFamily> {
    family.parse().map_err(PyValueError::new_err)
}

/// Number of rays and field mass.
#[pyclass(frozen, skip_from_py_object, module = "stargraph_py")]
#[derive(Clone, Copy)]
pub struct StarGraphSpec {
    inner: stargraph::StarGraphSpec,
}

#[pymethods]
impl StarGraphSpec {
    #[new]
    #[pyo3(signature = (ray_count = 3, mass = 1.0))]
    fn new(ray_count: usize, mass: f64) -> PyResult<Self> {
        Ok(Self {
            inner: stargraph::StarGraphSpec::new(ray_count, mass).map_err(to_py)?,
        })
    }

    #[getter]
    fn ray_count(&self) -> usize {
        self.inner.ray_count
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass
    }

    fn __repr__(&self) -> String {
        format!(
            "StarGraphSpec(ray_count={}, mass={})",
            self.inner.ray_count, self.inner.mass
        )
    }
}

/// Lattice constant, sites per ray and time step.
#[pyclass(frozen, skip_from_py_object, module = "stargraph_py")]
#[derive(Clone, Copy)]
pub struct LatticeSpec {
    inner: stargraph::LatticeSpec,
}

#[pymethods]
impl LatticeSpec {
    #[new]
    fn new(delta: f64, sites_per_ray: usize, dt: f64) -> PyResult<Self> {
        Ok(Self {
            inner: stargraph::LatticeSpec::new(delta, sites_per_ray, dt).map_err(to_py)?,
        })
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn sites_per_ray(&self) -> usize {
        self.inner.sites_per_ray
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    fn omega_max(&self, mass: f64) -> f64 {
        self.inner.omega_max(mass)
    }

    fn __repr__(&self) -> String {
        format!(
            "LatticeSpec(delta={}, sites_per_ray={}, dt={})",
            self.inner.delta, self.inner.sites_per_ray, self.inner.dt
        )
    }
}

/// Continuum dispersion `sqrt(k^2 + m^2)`.
#[pyfunction]
fn dispersion_omega(k: f64, mass: f64) -> f64 {
    analytic::dispersion_omega(k, mass)
}

/// Kirchhoff reflection `(2 - s)/s`.
#[pyfunction]
fn kirchhoff_reflection(ray_count: usize) -> Complex64 {
    analytic::kirchhoff_reflection(ray_count)
}

/// `(R, T, theta)` for a junction phase.
#[pyfunction]
fn phase_to_amplitudes(theta: f64, ray_count: usize) -> (Complex64, Complex64, f64) {
    let a = analytic::phase_to_amplitudes(theta, 1.0, ray_count);
    (a.reflection, a.transmission, a.phase)
}

/// `(R, T, theta)` of a family ("kirchhoff", "decoupled", "alpha:X", "beta:X").
#[pyfunction]
fn family_amplitudes(
    family: &str,
    k: f64,
    graph: &StarGraphSpec,
) -> PyResult<(Complex64, Complex64, f64)> {
    let a = analytic::family_amplitudes(parse_family(family)?, k, &graph.inner).map_err(to_py)?;
    Ok((a.reflection, a.transmission, a.phase))
}

#[pyfunction]
fn alpha_family_phase(k: f64, mass: f64, alpha: f64) -> PyResult<Complex64> {
    analytic::alpha_family_phase(k, mass, alpha).map_err(to_py)
}

#[pyfunction]
fn beta_family_phase(k: f64, beta: f64) -> PyResult<Complex64> {
    analytic::beta_family_phase(k, beta).map_err(to_py)
}

#[pyfunction]
fn unitarity_residual(reflection: Complex64, ray_count: usize) -> f64 {
    analytic::unitarity_residual(reflection, ray_count)
}

#[pyfunction]
fn energy_cross_residual(
    k1: f64,
    k2: f64,
    r1: Complex64,
    r2: Complex64,
    mass: f64,
    ray_count: usize,
) -> PyResult<Complex64> {
    let spec = TwoModeSpec::new(k1, k2, r1, r2).map_err(to_py)?;
    Ok(analytic::energy_cross_residual(&spec, mass, ray_count))
}

#[pyfunction]
fn charge_cross_residual(
    k1: f64,
    k2: f64,
    r1: Complex64,
    r2: Complex64,
    ray_count: usize,
) -> PyResult<Complex64> {
    let spec = TwoModeSpec::new(k1, k2, r1, r2).map_err(to_py)?;
    Ok(analytic::charge_cross_residual(&spec, ray_count))
}

/// Fits an alpha or beta constant to `(k, phase)` samples. Returns
/// `(constant, fit_residual, max_cross_residual)`.
#[pyfunction]
fn solve_family(
    samples: Vec<(f64, Complex64)>,
    mass: f64,
    kind: &str,
) -> PyResult<(f64, f64, f64)> {
    let kind = match kind {
        "alpha" => FamilyKind::Alpha,
        "beta" => FamilyKind::Beta,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown family kind {other:?}"
            )))
        }
    };
    let fit = analytic::solve_family_from_residuals(&samples, mass, kind).map_err(to_py)?;
    Ok((fit.constant, fit.fit_residual, fit.max_cross_residual))
}

#[pyfunction]
fn discrete_dispersion(k: f64, mass: f64, delta: f64) -> PyResult<f64> {
    discrete::discrete_dispersion(k, mass, delta).map_err(to_py)
}

/// `(R, T, band_edge)` on the lattice.
#[pyfunction]
fn discrete_reflection(
    k: f64,
    delta: f64,
    ray_count: usize,
) -> PyResult<(Complex64, Complex64, bool)> {
    let d = discrete::discrete_reflection(k, delta, ray_count).map_err(to_py)?;
    Ok((
        d.amplitudes.reflection,
        d.amplitudes.transmission,
        d.band_edge,
    ))
}

#[pyfunction]
fn continuum_limit_error(k: f64, delta: f64, ray_count: usize) -> PyResult<f64> {
    discrete::continuum_limit_error(k, delta, ray_count).map_err(to_py)
}

#[pyfunction]
fn convergence_order(deltas: Vec<f64>, errors: Vec<f64>) -> PyResult<f64> {
    discrete::convergence_order(&deltas, &errors).map_err(to_py)
}

/// Scatters a Gaussian packet off the junction and returns the measurement
/// as a dict. `duration=None` runs until the packet clears the junction.
#[pyfunction]
#[pyo3(signature = (
    graph, lattice, carrier_k, center, width,
    family = "kirchhoff", amplitude = Complex64::new(1.0, 0.0),
    duration = None, narrow_band = false, cadence = 10
))]
#[allow(clippy::too_many_arguments)]
fn run_scattering<'py>(
    py: Python<'py>,
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
    carrier_k: f64,
    center: f64,
    width: f64,
    family: &str,
    amplitude: Complex64,
    duration: Option<f64>,
    narrow_band: bool,
    cadence: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let packet = WavePacketSpec {
        carrier_k,
        center,
        width,
        amplitude,
        velocity_init: if narrow_band {
            VelocityInit::NarrowBand
        } else {
            VelocityInit::EnvelopeCorrected
        },
    };
    let stop = match duration {
        Some(time) => StopRule::Duration { time },
        None => StopRule::clearance_for(&packet),
    };
    let family = parse_family(family)?;
    let run = dynamics::run_scattering_experiment(
        &graph.inner,
        &lattice.inner,
        &packet,
        family,
        stop,
        cadence,
    )
    .map_err(to_py)?;
    let m = run.measurement;
    let d = PyDict::new(py);
    d.set_item("family", m.family.to_string())?;
    d.set_item("carrier_k", m.carrier_k)?;
    d.set_item("stop_time", m.stop_time)?;
    d.set_item("steps", m.steps)?;
    d.set_item("initial_energy", m.initial_energy)?;
    d.set_item("initial_charge", m.initial_charge)?;
    d.set_item("reflected_energy_fraction", m.reflected_energy_fraction)?;
    d.set_item(
        "transmitted_energy_fractions",
        m.transmitted_energy_fractions,
    )?;
    d.set_item("reflected_charge_fraction", m.reflected_charge_fraction)?;
    d.set_item(
        "transmitted_charge_fractions",
        m.transmitted_charge_fractions,
    )?;
    d.set_item("junction_energy_fraction", m.junction_energy_fraction)?;
    d.set_item("energy_drift", m.energy_drift)?;
    d.set_item("charge_drift", m.charge_drift)?;
    d.set_item("energy_closure", m.energy_closure)?;
    d.set_item(
        "predicted_lattice_reflection_sq",
        m.predicted_lattice_reflection_sq,
    )?;
    d.set_item(
        "predicted_continuum_reflection_sq",
        m.predicted_continuum_reflection_sq,
    )?;
    d.set_item("reflection_relative_error", m.reflection_relative_error)?;
    let times: Vec<f64> = run.series.iter().map(|r| r.time).collect();
    let energy: Vec<f64> = run.series.iter().map(|r| r.energy.total()).collect();
    let charge: Vec<f64> = run.series.iter().map(|r| r.charge.total()).collect();
    d.set_item("t", times)?;
    d.set_item("E_total", energy)?;
    d.set_item("Q_total", charge)?;
    Ok(d)
}

#[pymodule]
fn stargraph_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<StarGraphSpec>()?;
    m.add_class::<LatticeSpec>()?;
    m.add_function(wrap_pyfunction!(dispersion_omega, m)?)?;
    m.add_function(wrap_pyfunction!(kirchhoff_reflection, m)?)?;
    m.add_function(wrap_pyfunction!(phase_to_amplitudes, m)?)?;
    m.add_function(wrap_pyfunction!(family_amplitudes, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_family_phase, m)?)?;
    m.add_function(wrap_pyfunction!(beta_family_phase, m)?)?;
    m.add_function(wrap_pyfunction!(unitarity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(energy_cross_residual, m)?)?;
    m.add_function(wrap_pyfunction!(charge_cross_residual, m)?)?;
    m.add_function(wrap_pyfunction!(solve_family, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_reflection, m)?)?;
    m.add_function(wrap_pyfunction!(continuum_limit_error, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_order, m)?)?;
    m.add_function(wrap_pyfunction!(run_scattering, m)?)?;
    Ok(())
}
