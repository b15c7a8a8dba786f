//! Closed-form results for the oscillator network.
//!
//! Each ray is a chain of unit masses with spring constant `1/delta^2` and
//! on-site term `m^2`; the junction oscillator is coupled to the first site of
//! every ray. Stationary modes satisfy
//!
//! ```text
//! [4 sin^2(k d/2) + s (e^{i k d} - 1)] (1 + R) = 2i sin(k d)
//! ```
//!
//! which reduces to `((2 - s) sin(k d/2) + i s cos(k d/2)) (1 + R) = 2i cos(k d/2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{FieldState, LatticeSpec, ScatteringAmplitudes, StarGraphSpec};

fn check_zone(k: f64, delta: f64, allow_edge: bool) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!(
            "lattice constant must be > 0, got {delta}"
        )));
    }
    let kd = k * delta;
    let upper_ok = if allow_edge { kd <= PI } else { kd < PI };
    if !(kd.is_finite() && kd > 0.0 && upper_ok) {
        return Err(Error::Domain(format!(
            "k * delta = {kd} is outside the first Brillouin zone (0, pi]"
        )));
    }
    Ok(kd)
}

/// Lattice normal frequency `sqrt(4/d^2 sin^2(k d/2) + m^2)`.
pub fn discrete_dispersion(k: f64, m: f64, delta: f64) -> Result<f64> {
    let kd = check_zone(k, delta, true)?;
    let s = (0.5 * kd).sin();
    Ok((4.0 * s * s / (delta * delta) + m * m).sqrt())
}

/// Lattice scattering amplitudes plus a flag for the band edge `k d = pi`,
/// where the mode equation degenerates and the limiting value is returned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteScattering {
    pub amplitudes: ScatteringAmplitudes,
    pub band_edge: bool,
}

/// Reflection of a lattice mode off the junction.
pub fn discrete_reflection(k: f64, delta: f64, ray_count: usize) -> Result<DiscreteScattering> {
    if ray_count < 1 {
        return Err(Error::InvalidGraph("ray_count must be >= 1".into()));
    }
    let kd = check_zone(k, delta, true)?;
    let s = ray_count as f64;
    if kd == PI {
        // cos(k d/2) -> 0: 1 + R -> 0 unless the junction is a plain chain link.
        let reflection = if ray_count == 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        };
        return Ok(DiscreteScattering {
            amplitudes: ScatteringAmplitudes::from_reflection(k, reflection, ray_count),
            band_edge: true,
        });
    }
    let (sin_h, cos_h) = (0.5 * kd).sin_cos();
    let denom = Complex64::new((2.0 - s) * sin_h, s * cos_h);
    let transmission = Complex64::new(0.0, 2.0 * cos_h) / denom;
    let reflection = transmission - 1.0;
    Ok(DiscreteScattering {
        amplitudes: ScatteringAmplitudes {
            k,
            reflection,
            transmission,
            phase: crate::graph::normalize_phase((reflection * s + (s - 1.0)).arg()),
        },
        band_edge: false,
    })
}

/// Per-site equation-of-motion residuals.
///
/// `rays[q][n - 1]` belongs to site `n`, for `n = 1..N-1`. The last site is
/// left out because its equation involves the far-boundary closure, which a
/// semi-infinite stationary mode does not obey.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EomResidual {
    pub junction: f64,
    pub rays: Vec<Vec<f64>>,
}

impl EomResidual {
    pub fn max(&self) -> f64 {
        self.rays
            .iter()
            .flatten()
            .copied()
            .fold(self.junction, f64::max)
    }
}

/// `|phi_tt - rhs|` at every site of a stationary state with `phi_tt = -w^2 phi`.
pub fn eom_residual(
    state: &FieldState,
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
    omega: f64,
) -> Result<EomResidual> {
    state.validate(graph, lattice)?;
    let inv_d2 = 1.0 / (lattice.delta * lattice.delta);
    let m2 = graph.mass * graph.mass;
    let w2 = omega * omega;
    let s = graph.ray_count as f64;

    let phi0 = state.junction_value;
    let neighbours: Complex64 = state.ray_values.iter().map(|r| r[0]).sum();
    let rhs0 = (neighbours - phi0 * s) * inv_d2 - phi0 * m2;
    let junction = (-phi0 * w2 - rhs0).norm();

    let n_sites = lattice.sites_per_ray;
    let rays = state
        .ray_values
        .iter()
        .map(|ray| {
            (1..n_sites)
                .map(|n| {
                    let here = ray[n - 1];
                    let left = if n == 1 { phi0 } else { ray[n - 2] };
                    let right = ray[n];
                    let rhs = (right + left - here * 2.0) * inv_d2 - here * m2;
                    (-here * w2 - rhs).norm()
                })
                .collect()
        })
        .collect();
    Ok(EomResidual { junction, rays })
}

/// `|R_lattice(k) - (2 - s)/s|`, the distance from the continuum Kirchhoff
/// amplitude. To first order in `k d` this is `|s - 2| k d / s^2`.
pub fn continuum_limit_error(k: f64, delta: f64, ray_count: usize) -> Result<f64> {
    let kd = check_zone(k, delta, false)?;
    if kd > PI / 4.0 {
        return Err(Error::Domain(format!(
            "k * delta = {kd} is outside the asymptotic regime (0, pi/4]"
        )));
    }
    let lattice = discrete_reflection(k, delta, ray_count)?
        .amplitudes
        .reflection;
    let continuum = crate::analytic::kirchhoff_reflection(ray_count);
    Ok((lattice - continuum).norm())
}

/// Least-squares slope of `ln(error)` against `ln(delta)`.
pub fn convergence_order(deltas: &[f64], errors: &[f64]) -> Result<f64> {
    if deltas.len() != errors.len() || deltas.len() < 2 {
        return Err(Error::Domain(
            "convergence fit needs at least two (delta, error) pairs".into(),
        ));
    }
    if deltas
        .iter()
        .chain(errors)
        .any(|v| !(v.is_finite() && *v > 0.0))
    {
        return Err(Error::Domain(
            "convergence fit needs positive values".into(),
        ));
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain(
            "convergence fit needs distinct deltas".into(),
        ));
    }
    Ok(sxy / sxx)
}
