//! Time evolution of the oscillator network.
//!
//! The integrator is velocity Verlet (kick-drift-kick leapfrog). States are
//! always stored at integer steps with synchronised velocities, so observables
//! can be evaluated on any state the integrator hands out.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{dispersion_omega, family_amplitudes};
use crate::discrete::{discrete_dispersion, discrete_reflection};
use crate::error::{Error, Result};
use crate::graph::{
    make_field_state, FieldState, JunctionCoupling, JunctionFamily, LatticeSpec, StarGraphSpec,
};
use crate::observables::{
    charge_breakdown, energy_breakdown, junction_charge_balance, junction_energy_balance,
    ChargeBreakdown, EnergyBreakdown,
};

/// Second time derivative of every site, laid out like [`FieldState`].
#[derive(Debug, Clone, PartialEq)]
pub struct Acceleration {
    pub junction: Complex64,
    pub rays: Vec<Vec<Complex64>>,
}

impl Acceleration {
    fn zeros_like(state: &FieldState) -> Self {
        Self {
            junction: Complex64::default(),
            rays: state
                .ray_values
                .iter()
                .map(|r| vec![Complex64::default(); r.len()])
                .collect(),
        }
    }
}

/// Evaluates the right-hand side of the lattice equations of motion into `out`.
///
/// Unlinked rays lose the junction link entirely, so their first site only
/// feels site 2. Every ray is closed at the far end with `phi_{N+1} = 0`.
pub fn accelerate(
    state: &FieldState,
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
    coupling: &JunctionCoupling,
    out: &mut Acceleration,
) {
    let inv_d2 = 1.0 / (lattice.delta * lattice.delta);
    let m2 = graph.mass * graph.mass;
    let phi0 = state.junction_value;

    let mut pull = Complex64::default();
    for (q, (ray, acc)) in state.ray_values.iter().zip(out.rays.iter_mut()).enumerate() {
        let n = ray.len();
        let linked = coupling.is_coupled(q);
        if linked {
            pull += ray[0] - phi0;
        }
        let left_link = if linked {
            phi0 - ray[0]
        } else {
            Complex64::default()
        };
        acc[0] = (ray[1] - ray[0] + left_link) * inv_d2 - ray[0] * m2;
        for i in 1..n - 1 {
            acc[i] = (ray[i + 1] + ray[i - 1] - ray[i] * 2.0) * inv_d2 - ray[i] * m2;
        }
        acc[n - 1] = (ray[n - 2] - ray[n - 1] * 2.0) * inv_d2 - ray[n - 1] * m2;
    }
    out.junction = pull * inv_d2 - phi0 * m2;
}

/// Velocity-Verlet integrator that owns its state and caches the acceleration
/// between steps.
pub struct Integrator<'a> {
    graph: &'a StarGraphSpec,
    lattice: &'a LatticeSpec,
    coupling: &'a JunctionCoupling,
    state: FieldState,
    accel: Acceleration,
    steps: u64,
    start_time: f64,
}

impl<'a> Integrator<'a> {
    pub fn new(
        state: FieldState,
        graph: &'a StarGraphSpec,
        lattice: &'a LatticeSpec,
        coupling: &'a JunctionCoupling,
    ) -> Result<Self> {
        lattice.validate_for(graph)?;
        coupling.check(graph)?;
        state.validate(graph, lattice)?;
        let mut accel = Acceleration::zeros_like(&state);
        accelerate(&state, graph, lattice, coupling, &mut accel);
        let start_time = state.time;
        Ok(Self {
            graph,
            lattice,
            coupling,
            state,
            accel,
            steps: 0,
            start_time,
        })
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn into_state(self) -> FieldState {
        self.state
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    fn kick(&mut self, h: f64) {
        let st = &mut self.state;
        st.junction_velocity += self.accel.junction * h;
        for (v, a) in st.ray_velocities.iter_mut().zip(&self.accel.rays) {
            for (vi, ai) in v.iter_mut().zip(a) {
                *vi += ai * h;
            }
        }
    }

    fn drift(&mut self, h: f64) {
        let st = &mut self.state;
        st.junction_value += st.junction_velocity * h;
        for (x, v) in st.ray_values.iter_mut().zip(&st.ray_velocities) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += vi * h;
            }
        }
    }

    /// Advances the state by one time step.
    pub fn advance(&mut self) -> Result<()> {
        let dt = self.lattice.dt;
        self.kick(0.5 * dt);
        self.drift(dt);
        accelerate(
            &self.state,
            self.graph,
            self.lattice,
            self.coupling,
            &mut self.accel,
        );
        self.kick(0.5 * dt);
        self.steps += 1;
        // Multiplying avoids the drift of summing dt.
        self.state.time = self.start_time + self.steps as f64 * dt;
        if !self.state.is_finite() {
            return Err(Error::BlowUp {
                step: self.steps,
                max_abs: self.state.max_abs(),
            });
        }
        Ok(())
    }
}

/// One leapfrog step of the fully linked network.
pub fn step(
    state: &FieldState,
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
) -> Result<FieldState> {
    let coupling = JunctionCoupling::full(graph.ray_count);
    let mut integ = Integrator::new(state.clone(), graph, lattice, &coupling)?;
    integ.advance()?;
    Ok(integ.into_state())
}

/// Read-only hook invoked every `cadence()` steps, starting with step 0.
pub trait Observer {
    fn cadence(&self) -> u64;
    fn observe(&mut self, step_index: u64, time: f64, state: &FieldState);
}

/// Wraps a closure as an [`Observer`].
pub struct FnObserver<F> {
    cadence: u64,
    f: F,
}

impl<F: FnMut(u64, f64, &FieldState)> FnObserver<F> {
    pub fn new(cadence: u64, f: F) -> Self {
        Self {
            cadence: cadence.max(1),
            f,
        }
    }
}

impl<F: FnMut(u64, f64, &FieldState)> Observer for FnObserver<F> {
    fn cadence(&self) -> u64 {
        self.cadence
    }
    fn observe(&mut self, step_index: u64, time: f64, state: &FieldState) {
        (self.f)(step_index, time, state)
    }
}

fn notify(observers: &mut [&mut dyn Observer], step: u64, state: &FieldState) {
    for obs in observers.iter_mut() {
        if step.is_multiple_of(obs.cadence().max(1)) {
            obs.observe(step, state.time, state);
        }
    }
}

/// Applies `n_steps` leapfrog steps with the given junction coupling.
pub fn evolve(
    state: FieldState,
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
    coupling: &JunctionCoupling,
    n_steps: u64,
    observers: &mut [&mut dyn Observer],
) -> Result<FieldState> {
    let mut integ = Integrator::new(state, graph, lattice, coupling)?;
    notify(observers, 0, integ.state());
    for i in 1..=n_steps {
        integ.advance()?;
        notify(observers, i, integ.state());
    }
    Ok(integ.into_state())
}

/// Gaussian packet launched along ray 0 toward the junction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacketSpec {
    pub carrier_k: f64,
    pub center: f64,
    pub width: f64,
    pub amplitude: Complex64,
    #[serde(default)]
    pub velocity_init: VelocityInit,
}

impl WavePacketSpec {
    pub fn validate(&self, lattice: &LatticeSpec) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPacket(msg));
        if !(self.carrier_k.is_finite() && self.carrier_k > 0.0) {
            return bad(format!("carrier_k must be > 0, got {}", self.carrier_k));
        }
        if self.carrier_k * lattice.delta >= std::f64::consts::PI {
            return bad(format!(
                "carrier_k * delta = {} is outside the first Brillouin zone",
                self.carrier_k * lattice.delta
            ));
        }
        if !(self.width.is_finite() && self.width >= 10.0 * lattice.delta) {
            return bad(format!(
                "width {} must be >= 10 delta = {}",
                self.width,
                10.0 * lattice.delta
            ));
        }
        if !(self.center - 5.0 * self.width > 0.0) {
            return bad(format!(
                "center - 5 width = {} must be > 0 (packet overlaps the junction)",
                self.center - 5.0 * self.width
            ));
        }
        if !(self.center + 5.0 * self.width < lattice.ray_length()) {
            return bad(format!(
                "center + 5 width = {} must be < ray length {}",
                self.center + 5.0 * self.width,
                lattice.ray_length()
            ));
        }
        if !(self.amplitude.re.is_finite() && self.amplitude.im.is_finite()) {
            return bad("amplitude must be finite".into());
        }
        Ok(())
    }

    /// Continuum group velocity `k/w` at the carrier.
    pub fn group_velocity(&self, mass: f64) -> f64 {
        self.carrier_k / dispersion_omega(self.carrier_k, mass)
    }
}

/// How the initial packet velocity is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityInit {
    /// `dphi = -i w(k0) phi`. Leaves a counter-propagating component of
    /// relative amplitude `~ (w(k) - w(k0)) / 2w` in every spectral component.
    NarrowBand,
    /// `w(k)` expanded to second order about `k0` and applied to the envelope:
    /// `dphi = -i A e^{-i k0 x} [w0 g + i v g' - (c/2) g'']` with lattice group
    /// velocity `v` and dispersion `c = dv/dk`. The counter-propagating part
    /// drops to third order in the spectral width.
    #[default]
    EnvelopeCorrected,
}

/// Places `A exp(-(x - x0)^2 / (4 sigma^2)) e^{-i k0 x}` on ray 0, moving
/// toward the junction, with velocities from `packet.velocity_init`. Frequencies come from
/// the lattice dispersion. Everything else starts at rest.
pub fn init_gaussian_packet(
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
    packet: &WavePacketSpec,
) -> Result<FieldState> {
    packet.validate(lattice)?;
    let mut state = make_field_state(graph, lattice)?;
    let k0 = packet.carrier_k;
    let delta = lattice.delta;
    let omega = discrete_dispersion(k0, graph.mass, delta)?;
    let (v_group, curvature) = match packet.velocity_init {
        VelocityInit::NarrowBand => (0.0, 0.0),
        VelocityInit::EnvelopeCorrected => {
            let v = (k0 * delta).sin() / (delta * omega);
            (v, ((k0 * delta).cos() - v * v) / omega)
        }
    };
    let sigma2 = packet.width * packet.width;
    for (i, (phi, dphi)) in state.ray_values[0]
        .iter_mut()
        .zip(state.ray_velocities[0].iter_mut())
        .enumerate()
    {
        let x = (i + 1) as f64 * delta;
        let u = x - packet.center;
        let g = (-u * u / (4.0 * sigma2)).exp();
        let dg = -u / (2.0 * sigma2) * g;
        let ddg = (u * u / (4.0 * sigma2 * sigma2) - 0.5 / sigma2) * g;
        let carrier = packet.amplitude * Complex64::from_polar(1.0, -k0 * x);
        *phi = carrier * g;
        let bracket = Complex64::new(omega * g - 0.5 * curvature * ddg, v_group * dg);
        *dphi = Complex64::new(0.0, -1.0) * carrier * bracket;
    }
    Ok(state)
}

/// When a scattering run ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopRule {
    /// Run for a fixed physical time.
    Duration { time: f64 },
    /// Run until the energy within `radius` of the junction (junction site
    /// included) falls below `threshold` times the total, after the packet
    /// centre has had time to reach the junction. `max_time` defaults to the
    /// longest causally safe duration.
    Clearance {
        radius: f64,
        threshold: f64,
        max_time: Option<f64>,
    },
}

impl StopRule {
    /// Clearance with radius `2 sigma` and threshold `1e-6`.
    pub fn clearance_for(packet: &WavePacketSpec) -> Self {
        StopRule::Clearance {
            radius: 2.0 * packet.width,
            threshold: 1e-6,
            max_time: None,
        }
    }
}

/// One row of the scattering time series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRecord {
    pub step: u64,
    pub time: f64,
    pub energy: EnergyBreakdown,
    pub charge: ChargeBreakdown,
    pub energy_balance: f64,
    pub charge_balance: f64,
}

impl SeriesRecord {
    fn capture(
        step: u64,
        state: &FieldState,
        graph: &StarGraphSpec,
        lattice: &LatticeSpec,
        coupling: &JunctionCoupling,
    ) -> Self {
        Self {
            step,
            time: state.time,
            energy: energy_breakdown(state, graph, lattice, coupling),
            charge: charge_breakdown(state, lattice),
            energy_balance: junction_energy_balance(state, graph, lattice, coupling),
            charge_balance: junction_charge_balance(state, graph, lattice, coupling),
        }
    }
}

/// Outcome of a packet scattering run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringMeasurement {
    pub family: JunctionFamily,
    pub carrier_k: f64,
    pub stop_time: f64,
    pub steps: u64,
    pub initial_energy: f64,
    pub initial_charge: f64,
    /// Ray 0 energy over total energy at stop time.
    pub reflected_energy_fraction: f64,
    pub transmitted_energy_fractions: Vec<f64>,
    pub reflected_charge_fraction: f64,
    pub transmitted_charge_fractions: Vec<f64>,
    /// Junction-owned energy over total energy at stop time.
    pub junction_energy_fraction: f64,
    /// `(max - min) / |initial|` of the total over the sampled records.
    pub energy_drift: f64,
    pub charge_drift: f64,
    /// `|reflected + transmitted + junction - initial| / initial` at stop time.
    pub energy_closure: f64,
    pub predicted_continuum_reflection_sq: f64,
    pub predicted_continuum_transmission_sq: f64,
    pub predicted_lattice_reflection_sq: f64,
    pub predicted_lattice_transmission_sq: f64,
    pub reflection_relative_error: f64,
    pub transmission_relative_errors: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ScatteringRun {
    pub measurement: ScatteringMeasurement,
    pub series: Vec<SeriesRecord>,
    pub final_state: FieldState,
}

/// Energy fraction in the outermost `width` of every ray that invalidates a run.
pub const BOUNDARY_CONTAMINATION_LIMIT: f64 = 1e-6;

fn drift(values: impl Iterator<Item = f64>, initial: f64) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    (hi - lo) / initial.abs()
}

/// Sends a Gaussian packet into the junction and measures how energy and
/// charge split between the rays.
///
/// Kirchhoff runs link every ray; decoupled runs unlink every ray but the
/// incoming one. Records are sampled every `cadence` steps and at the stop.
pub fn run_scattering_experiment(
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
    packet: &WavePacketSpec,
    family: JunctionFamily,
    stop_rule: StopRule,
    cadence: u64,
) -> Result<ScatteringRun> {
    lattice.validate_for(graph)?;
    packet.validate(lattice)?;
    let coupling = JunctionCoupling::for_family(family, graph.ray_count)?;
    let cadence = cadence.max(1);

    let v_group = packet.group_velocity(graph.mass);
    let causal_limit = (lattice.ray_length() - 5.0 * packet.width - packet.center) / v_group;
    let (max_time, clearance) = match stop_rule {
        StopRule::Duration { time } => (time, None),
        StopRule::Clearance {
            radius,
            threshold,
            max_time,
        } => (max_time.unwrap_or(causal_limit), Some((radius, threshold))),
    };
    if !(max_time.is_finite() && max_time >= 0.0) {
        return Err(Error::ExperimentInvalid(format!(
            "bad run duration {max_time}"
        )));
    }
    if max_time > causal_limit {
        return Err(Error::ExperimentInvalid(format!(
            "run time {max_time:.6} exceeds causal limit {causal_limit:.6}: the back-moving \
             part of the packet would come within 5 widths of the far boundary"
        )));
    }
    let arrival = packet.center / v_group;

    let initial = init_gaussian_packet(graph, lattice, packet)?;
    let mut integ = Integrator::new(initial, graph, lattice, &coupling)?;
    let mut series = vec![SeriesRecord::capture(
        0,
        integ.state(),
        graph,
        lattice,
        &coupling,
    )];
    let initial_energy = series[0].energy.total();
    let initial_charge = series[0].charge.total();
    let max_steps = (max_time / lattice.dt).round() as u64;

    let near_junction_sites = |radius: f64| (radius / lattice.delta).floor() as usize;
    let mut cleared = clearance.is_none();
    while integ.steps_taken() < max_steps {
        integ.advance()?;
        let n = integ.steps_taken();
        let state = integ.state();
        if n % cadence == 0 {
            series.push(SeriesRecord::capture(n, state, graph, lattice, &coupling));
        }
        if let Some((radius, threshold)) = clearance {
            if state.time >= arrival && n % cadence == 0 {
                let rec = series.last().expect("record just pushed");
                let sites = near_junction_sites(radius).min(lattice.sites_per_ray);
                let near = rec.energy.junction + near_junction_energy(state, graph, lattice, sites);
                if near <= threshold * rec.energy.total() {
                    cleared = true;
                    break;
                }
            }
        }
    }
    if !cleared {
        return Err(Error::ExperimentInvalid(format!(
            "packet did not clear the junction before t = {max_time:.6}"
        )));
    }
    let final_state = integ.into_state();
    let last_step = (final_state.time / lattice.dt).round() as u64;
    if series.last().map(|r| r.step) != Some(last_step) {
        series.push(SeriesRecord::capture(
            last_step,
            &final_state,
            graph,
            lattice,
            &coupling,
        ));
    }

    let edge_sites = ((packet.width / lattice.delta).ceil() as usize).min(lattice.sites_per_ray);
    let final_rec = series.last().expect("series is never empty");
    let total_e = final_rec.energy.total();
    let edge_energy = far_edge_energy(&final_state, graph, lattice, edge_sites);
    if edge_energy > BOUNDARY_CONTAMINATION_LIMIT * total_e {
        return Err(Error::ExperimentInvalid(format!(
            "far-boundary energy fraction {:e} exceeds {:e}",
            edge_energy / total_e,
            BOUNDARY_CONTAMINATION_LIMIT
        )));
    }

    let total_q = final_rec.charge.total();
    let e_frac: Vec<f64> = final_rec.energy.rays.iter().map(|e| e / total_e).collect();
    let q_frac: Vec<f64> = final_rec.charge.rays.iter().map(|q| q / total_q).collect();
    let energy_drift = drift(series.iter().map(|r| r.energy.total()), initial_energy);
    let charge_drift = drift(series.iter().map(|r| r.charge.total()), initial_charge);
    let energy_closure = (total_e - initial_energy).abs() / initial_energy;

    let continuum = family_amplitudes(family, packet.carrier_k, graph)?;
    let (lat_r2, lat_t2) = match family.canonical() {
        JunctionFamily::Decoupled => (1.0, 0.0),
        _ => {
            let lat = discrete_reflection(packet.carrier_k, lattice.delta, graph.ray_count)?;
            (
                lat.amplitudes.reflection.norm_sqr(),
                lat.amplitudes.transmission.norm_sqr(),
            )
        }
    };
    let rel = |measured: f64, predicted: f64| {
        if predicted == 0.0 {
            measured.abs()
        } else {
            (measured - predicted).abs() / predicted
        }
    };
    let cont_r2 = continuum.reflection.norm_sqr();
    let cont_t2 = continuum.transmission.norm_sqr();
    let measurement = ScatteringMeasurement {
        family,
        carrier_k: packet.carrier_k,
        stop_time: final_state.time,
        steps: last_step,
        initial_energy,
        initial_charge,
        reflected_energy_fraction: e_frac[0],
        transmitted_energy_fractions: e_frac[1..].to_vec(),
        reflected_charge_fraction: q_frac[0],
        transmitted_charge_fractions: q_frac[1..].to_vec(),
        junction_energy_fraction: final_rec.energy.junction / total_e,
        energy_drift,
        charge_drift,
        energy_closure,
        predicted_continuum_reflection_sq: cont_r2,
        predicted_continuum_transmission_sq: cont_t2,
        predicted_lattice_reflection_sq: lat_r2,
        predicted_lattice_transmission_sq: lat_t2,
        reflection_relative_error: rel(e_frac[0], cont_r2),
        transmission_relative_errors: e_frac[1..].iter().map(|&f| rel(f, cont_t2)).collect(),
    };
    Ok(ScatteringRun {
        measurement,
        series,
        final_state,
    })
}

/// Energy of the first `sites` sites of every ray, links included.
fn near_junction_energy(
    state: &FieldState,
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
    sites: usize,
) -> f64 {
    let m2 = graph.mass * graph.mass;
    let inv_d2 = 1.0 / (lattice.delta * lattice.delta);
    let mut sum = 0.0;
    for (v, w) in state.ray_values.iter().zip(&state.ray_velocities) {
        for n in 0..sites {
            let next = v.get(n + 1).copied().unwrap_or_default();
            sum += w[n].norm_sqr() + (next - v[n]).norm_sqr() * inv_d2 + m2 * v[n].norm_sqr();
        }
    }
    0.5 * sum * lattice.delta
}

fn far_edge_energy(
    state: &FieldState,
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
    sites: usize,
) -> f64 {
    let m2 = graph.mass * graph.mass;
    let inv_d2 = 1.0 / (lattice.delta * lattice.delta);
    let n_sites = lattice.sites_per_ray;
    let mut sum = 0.0;
    for (v, w) in state.ray_values.iter().zip(&state.ray_velocities) {
        for n in n_sites - sites..n_sites {
            let next = v.get(n + 1).copied().unwrap_or_default();
            sum += w[n].norm_sqr() + (next - v[n]).norm_sqr() * inv_d2 + m2 * v[n].norm_sqr();
        }
    }
    0.5 * sum * lattice.delta
}
