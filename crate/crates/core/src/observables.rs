//! Discrete energy and charge, their fluxes, and the junction balances.
//!
//! Link `(n, n+1)` belongs to site `n`; the links between the junction and
//! the first site of each linked ray belong to the junction. Every density
//! carries a factor `delta` so that totals converge to continuum integrals.
//! The far end of each ray is closed with `phi_{N+1} = 0`, so the last link
//! stores `|phi_N|^2 / delta^2`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{FieldState, JunctionCoupling, LatticeSpec, StarGraphSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub junction: f64,
    pub rays: Vec<f64>,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.junction + self.rays.iter().sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeBreakdown {
    pub junction: f64,
    pub rays: Vec<f64>,
}

impl ChargeBreakdown {
    pub fn total(&self) -> f64 {
        self.junction + self.rays.iter().sum::<f64>()
    }
}

fn ray_energy(values: &[Complex64], velocities: &[Complex64], delta: f64, m2: f64) -> f64 {
    let inv_d2 = 1.0 / (delta * delta);
    let mut sum = 0.0;
    for (n, (phi, dphi)) in values.iter().zip(velocities).enumerate() {
        let next = values.get(n + 1).copied().unwrap_or_default();
        sum += dphi.norm_sqr() + (next - phi).norm_sqr() * inv_d2 + m2 * phi.norm_sqr();
    }
    0.5 * sum * delta
}

fn density_charge(phi: Complex64, dphi: Complex64) -> f64 {
    // i (conj(phi) dphi - phi conj(dphi)) = -2 Im(conj(phi) dphi)
    -2.0 * (phi.conj() * dphi).im
}

/// Energy owned by the junction and by each ray.
pub fn energy_breakdown(
    state: &FieldState,
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
    coupling: &JunctionCoupling,
) -> EnergyBreakdown {
    let delta = lattice.delta;
    let m2 = graph.mass * graph.mass;
    let phi0 = state.junction_value;
    let links: f64 = state
        .ray_values
        .iter()
        .enumerate()
        .filter(|(q, _)| coupling.is_coupled(*q))
        .map(|(_, ray)| (phi0 - ray[0]).norm_sqr())
        .sum();
    let junction = 0.5
        * (state.junction_velocity.norm_sqr() + links / (delta * delta) + m2 * phi0.norm_sqr())
        * delta;
    let rays = state
        .ray_values
        .iter()
        .zip(&state.ray_velocities)
        .map(|(v, w)| ray_energy(v, w, delta, m2))
        .collect();
    EnergyBreakdown { junction, rays }
}

/// Conserved lattice energy with every ray linked to the junction.
pub fn total_energy(state: &FieldState, graph: &StarGraphSpec, lattice: &LatticeSpec) -> f64 {
    energy_breakdown(
        state,
        graph,
        lattice,
        &JunctionCoupling::full(graph.ray_count),
    )
    .total()
}

/// U(1) charge on the junction and on each ray.
pub fn charge_breakdown(state: &FieldState, lattice: &LatticeSpec) -> ChargeBreakdown {
    let delta = lattice.delta;
    let junction = density_charge(state.junction_value, state.junction_velocity) * delta;
    let rays = state
        .ray_values
        .iter()
        .zip(&state.ray_velocities)
        .map(|(v, w)| {
            v.iter()
                .zip(w)
                .map(|(&phi, &dphi)| density_charge(phi, dphi))
                .sum::<f64>()
                * delta
        })
        .collect();
    ChargeBreakdown { junction, rays }
}

pub fn total_charge(state: &FieldState, lattice: &LatticeSpec) -> f64 {
    charge_breakdown(state, lattice).total()
}

fn centred_derivatives(
    state: &FieldState,
    lattice: &LatticeSpec,
    ray: usize,
    site: usize,
) -> Result<(Complex64, Complex64, Complex64)> {
    let n_sites = state.sites_per_ray();
    if ray >= state.ray_count() {
        return Err(Error::Domain(format!("ray {ray} does not exist")));
    }
    if site < 1 || site + 1 > n_sites {
        return Err(Error::Domain(format!(
            "flux needs 1 <= site <= {}, got {site}",
            n_sites.saturating_sub(1)
        )));
    }
    let phi = state.value(ray, site);
    let dq = (state.value(ray, site + 1) - state.value(ray, site - 1)) / (2.0 * lattice.delta);
    let dt = state.velocity(ray, site);
    Ok((phi, dq, dt))
}

/// Energy flux `-(conj(phi_q) phi_t + conj(phi_t) phi_q)` at `site` of `ray`,
/// positive toward infinity, with a centred spatial difference.
///
/// For an outgoing wave `A e^{i(kq - wt)}` this is `2 w k |A|^2`.
pub fn energy_flux(
    state: &FieldState,
    lattice: &LatticeSpec,
    ray: usize,
    site: usize,
) -> Result<f64> {
    let (_, dq, dt) = centred_derivatives(state, lattice, ray, site)?;
    Ok(-2.0 * (dq.conj() * dt).re)
}

/// Charge flux `2 Im(conj(phi) phi_q)` at `site` of `ray`, positive toward
/// infinity; `2 k |A|^2` for an outgoing wave.
pub fn charge_flux(
    state: &FieldState,
    lattice: &LatticeSpec,
    ray: usize,
    site: usize,
) -> Result<f64> {
    let (phi, dq, _) = centred_derivatives(state, lattice, ray, site)?;
    Ok(2.0 * (phi.conj() * dq).im)
}

fn junction_acceleration(
    state: &FieldState,
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
    coupling: &JunctionCoupling,
) -> Complex64 {
    let phi0 = state.junction_value;
    let pull: Complex64 = state
        .ray_values
        .iter()
        .enumerate()
        .filter(|(q, _)| coupling.is_coupled(*q))
        .map(|(_, ray)| ray[0] - phi0)
        .sum();
    pull / (lattice.delta * lattice.delta) - phi0 * (graph.mass * graph.mass)
}

/// Energy flowing into the junction through its links minus the rate of
/// change of the junction-owned energy.
///
/// The inflow through the link to ray `q` is
/// `Re(conj(phi_{q,1} - phi_0) dphi_{q,1}) / delta`; the junction acceleration
/// comes from its equation of motion.
pub fn junction_energy_balance(
    state: &FieldState,
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
    coupling: &JunctionCoupling,
) -> f64 {
    let delta = lattice.delta;
    let m2 = graph.mass * graph.mass;
    let phi0 = state.junction_value;
    let dphi0 = state.junction_velocity;
    let accel0 = junction_acceleration(state, graph, lattice, coupling);

    let mut inflow = 0.0;
    let mut link_rate = 0.0;
    for (q, (values, velocities)) in state
        .ray_values
        .iter()
        .zip(&state.ray_velocities)
        .enumerate()
    {
        if !coupling.is_coupled(q) {
            continue;
        }
        let gap = values[0] - phi0;
        inflow += (gap.conj() * velocities[0]).re / delta;
        link_rate += (gap.conj() * (velocities[0] - dphi0)).re;
    }
    let rate =
        ((dphi0.conj() * accel0).re + link_rate / (delta * delta) + m2 * (phi0.conj() * dphi0).re)
            * delta;
    inflow - rate
}

/// Charge flowing into the junction minus the rate of change of its charge.
///
/// The inflow from ray `q` is `-2 Im(conj(phi_0) phi_{q,1}) / delta`.
pub fn junction_charge_balance(
    state: &FieldState,
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
    coupling: &JunctionCoupling,
) -> f64 {
    let delta = lattice.delta;
    let phi0 = state.junction_value;
    let accel0 = junction_acceleration(state, graph, lattice, coupling);
    let inflow: f64 = state
        .ray_values
        .iter()
        .enumerate()
        .filter(|(q, _)| coupling.is_coupled(*q))
        .map(|(_, ray)| -2.0 * (phi0.conj() * ray[0]).im / delta)
        .sum();
    let rate = -2.0 * (phi0.conj() * accel0).im * delta;
    inflow - rate
}
