//! Seeded invariant suite behind the `validate` command.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use super::{fmt_float, CliResult, ScenarioConfig};
use crate::analytic::{
    alpha_family_phase, beta_family_phase, charge_cross_residual, dispersion_omega,
    energy_cross_residual, kirchhoff_reflection, monochromatic_field,
    monochromatic_field_derivative, phase_to_amplitudes, unitarity_residual, TwoModeSpec,
};
use crate::discrete::{
    continuum_limit_error, convergence_order, discrete_dispersion, discrete_reflection,
    eom_residual,
};
use crate::dynamics::{
    init_gaussian_packet, run_scattering_experiment, Integrator, StopRule, VelocityInit,
    WavePacketSpec,
};
use crate::graph::{
    sample_discrete_mode, FieldState, JunctionCoupling, JunctionFamily, LatticeSpec, StarGraphSpec,
};
use crate::observables::total_energy;

const SAMPLES: usize = 1000;

/// Outcome of one invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    /// Worst value over all samples.
    pub worst: f64,
    pub limit: f64,
    /// `true` when `worst` must stay at or above `limit` instead of below it.
    pub lower_bound: bool,
    pub pass: bool,
}

impl CheckResult {
    fn upper(name: &'static str, worst: f64, limit: f64) -> Self {
        Self {
            name,
            worst,
            limit,
            lower_bound: false,
            pass: worst.is_finite() && worst <= limit,
        }
    }

    fn lower(name: &'static str, worst: f64, limit: f64) -> Self {
        Self {
            name,
            worst,
            limit,
            lower_bound: true,
            pass: worst.is_finite() && worst >= limit,
        }
    }

    /// `PASS name worst=... limit<=...` style line.
    pub fn line(&self) -> String {
        format!(
            "{} {} worst={} limit{}{}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            fmt_float(self.worst),
            if self.lower_bound { ">=" } else { "<=" },
            fmt_float(self.limit)
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&c.line());
            out.push('\n');
        }
        out
    }
}

fn ray_count(rng: &mut StdRng) -> usize {
    rng.gen_range(1..=6)
}

fn continuum_unitarity(rng: &mut StdRng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let s = ray_count(rng);
        let theta = rng.gen_range(-PI..PI);
        let amp = phase_to_amplitudes(theta, 1.0, s);
        worst = worst.max(unitarity_residual(amp.reflection, s).abs());
    }
    CheckResult::upper("continuum_unitarity", worst, 1e-14)
}

fn family_phase_modulus(rng: &mut StdRng) -> CliResult<CheckResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let k = rng.gen_range(0.01..10.0);
        let m = rng.gen_range(0.0..3.0);
        let c = rng.gen_range(-10.0..10.0);
        let a = alpha_family_phase(k, m, c)?;
        let b = beta_family_phase(k, c)?;
        worst = worst
            .max((a.norm() - 1.0).abs())
            .max((b.norm() - 1.0).abs());
    }
    Ok(CheckResult::upper("family_phase_modulus", worst, 1e-14))
}

fn normalized_cross(k1: f64, k2: f64, r1: Complex64, r2: Complex64, m: f64, s: usize) -> f64 {
    let spec = TwoModeSpec { k1, k2, r1, r2 };
    let w1 = dispersion_omega(k1, m);
    let w2 = dispersion_omega(k2, m);
    let e = energy_cross_residual(&spec, m, s).norm() / (w1 * k2 + w2 * k1);
    let q = charge_cross_residual(&spec, s).norm() / (k1 + k2);
    e.max(q)
}

fn kirchhoff_cross_residuals(rng: &mut StdRng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let s = ray_count(rng);
        let m = rng.gen_range(0.0..3.0);
        let k1 = rng.gen_range(0.01..10.0);
        let k2 = rng.gen_range(0.01..10.0);
        let r = kirchhoff_reflection(s);
        let d = Complex64::new(-1.0, 0.0);
        worst = worst
            .max(normalized_cross(k1, k2, r, r, m, s))
            .max(normalized_cross(k1, k2, d, d, m, s));
    }
    CheckResult::upper("kirchhoff_decoupled_cross_residuals", worst, 1e-12)
}

fn generic_phase_cross_residuals(rng: &mut StdRng) -> CheckResult {
    // Stay away from the Kirchhoff and decoupled points where both vanish.
    let mut least = f64::INFINITY;
    for _ in 0..SAMPLES {
        let s = rng.gen_range(2..=6);
        let m = rng.gen_range(0.1..3.0);
        let k1 = rng.gen_range(0.1..5.0);
        let k2 = k1 + rng.gen_range(0.1..5.0);
        let t1 = rng.gen_range(0.1..PI - 0.1) * if rng.gen() { 1.0 } else { -1.0 };
        let t2 = rng.gen_range(0.1..PI - 0.1) * if rng.gen() { 1.0 } else { -1.0 };
        let r1 = phase_to_amplitudes(t1, k1, s).reflection;
        let r2 = phase_to_amplitudes(t2, k2, s).reflection;
        least = least.min(normalized_cross(k1, k2, r1, r2, m, s));
    }
    CheckResult::lower("generic_phase_cross_residuals", least, 1e-6)
}

fn kirchhoff_junction_conditions(rng: &mut StdRng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let s = rng.gen_range(2..=6);
        let m = rng.gen_range(0.0..3.0);
        let k = rng.gen_range(0.01..10.0);
        let t = rng.gen_range(0.0..100.0);
        let r = kirchhoff_reflection(s);
        let values: Vec<Complex64> = (0..s)
            .map(|q| monochromatic_field(k, m, r, q, 0.0, t, 0))
            .collect();
        let flux: Complex64 = (0..s)
            .map(|q| monochromatic_field_derivative(k, m, r, q, 0.0, t, 0))
            .sum();
        let spread = values
            .iter()
            .map(|v| (v - values[0]).norm())
            .fold(0.0, f64::max);
        worst = worst.max(spread).max(flux.norm() / k);
    }
    CheckResult::upper("kirchhoff_junction_conditions", worst, 1e-13)
}

fn degenerate_limit(rng: &mut StdRng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let s = ray_count(rng);
        let m = rng.gen_range(0.0..3.0);
        let k = rng.gen_range(0.01..10.0);
        let r = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let spec = TwoModeSpec {
            k1: k,
            k2: k,
            r1: r,
            r2: r,
        };
        let w = dispersion_omega(k, m);
        let e = energy_cross_residual(&spec, m, s) / (2.0 * w * k);
        worst = worst.max((e - unitarity_residual(r, s)).norm());
    }
    CheckResult::upper("degenerate_wavenumber_limit", worst, 1e-12)
}

fn lattice_unitarity(rng: &mut StdRng) -> CliResult<CheckResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let s = ray_count(rng);
        let delta = rng.gen_range(0.01..1.0);
        let kd = rng.gen_range(1e-3..PI);
        let lat = discrete_reflection(kd / delta, delta, s)?;
        worst = worst.max(unitarity_residual(lat.amplitudes.reflection, s).abs());
    }
    Ok(CheckResult::upper("lattice_unitarity", worst, 1e-13))
}

fn lattice_mode_eom(rng: &mut StdRng) -> CliResult<CheckResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s = ray_count(rng);
        let graph = StarGraphSpec::new(s, rng.gen_range(0.0..2.0))?;
        let delta = rng.gen_range(0.05..0.5);
        let lattice = LatticeSpec::new(delta, 64, 0.1 * delta)?;
        let k = rng.gen_range(0.05..PI - 0.05) / delta;
        let t = rng.gen_range(0.0..10.0);
        let r = discrete_reflection(k, delta, s)?.amplitudes.reflection;
        let state = sample_discrete_mode(&graph, &lattice, k, r, t)?;
        let w = discrete_dispersion(k, graph.mass, delta)?;
        let res = eom_residual(&state, &graph, &lattice, w)?;
        worst = worst.max(res.max() / (w * w));
    }
    Ok(CheckResult::upper(
        "lattice_mode_equation_of_motion",
        worst,
        1e-12,
    ))
}

fn continuum_convergence(config: &ScenarioConfig) -> CliResult<CheckResult> {
    let k = 1.0;
    let deltas = [0.2, 0.1, 0.05, 0.025, 0.0125];
    let s = if config.graph.ray_count == 2 {
        3
    } else {
        config.graph.ray_count
    };
    let errors = deltas
        .iter()
        .map(|&d| continuum_limit_error(k, d, s))
        .collect::<crate::Result<Vec<f64>>>()?;
    let order = convergence_order(&deltas, &errors)?;
    Ok(CheckResult::upper(
        "continuum_convergence_order",
        (order - 1.0).abs(),
        0.1,
    ))
}

fn random_state(rng: &mut StdRng, graph: &StarGraphSpec, lattice: &LatticeSpec) -> FieldState {
    let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let n = lattice.sites_per_ray;
    FieldState {
        junction_value: c(),
        junction_velocity: c(),
        ray_values: (0..graph.ray_count)
            .map(|_| (0..n).map(|_| c()).collect())
            .collect(),
        ray_velocities: (0..graph.ray_count)
            .map(|_| (0..n).map(|_| c()).collect())
            .collect(),
        time: 0.0,
    }
}

fn energy_phase_invariance(rng: &mut StdRng) -> CliResult<CheckResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let graph = StarGraphSpec::new(ray_count(rng), rng.gen_range(0.0..2.0))?;
        let lattice = LatticeSpec::new(0.1, 50, 0.01)?;
        let mut state = random_state(rng, &graph, &lattice);
        let e0 = total_energy(&state, &graph, &lattice);
        state.scale(Complex64::from_polar(1.0, rng.gen_range(-PI..PI)));
        let e1 = total_energy(&state, &graph, &lattice);
        worst = worst.max((e1 - e0).abs() / e0);
    }
    Ok(CheckResult::upper("energy_phase_invariance", worst, 1e-14))
}

fn time_reversal(rng: &mut StdRng) -> CliResult<CheckResult> {
    let graph = StarGraphSpec::new(3, 1.0)?;
    let lattice = LatticeSpec::new(0.1, 400, 0.025)?;
    let packet = WavePacketSpec {
        carrier_k: rng.gen_range(1.0..3.0),
        center: 20.0,
        width: 2.0,
        amplitude: Complex64::new(1.0, 0.0),
        velocity_init: VelocityInit::EnvelopeCorrected,
    };
    let coupling = JunctionCoupling::full(3);
    let start = init_gaussian_packet(&graph, &lattice, &packet)?;
    let steps = 1000;
    let mut integ = Integrator::new(start.clone(), &graph, &lattice, &coupling)?;
    for _ in 0..steps {
        integ.advance()?;
    }
    let mut back = integ.into_state();
    back.negate_velocities();
    let mut integ = Integrator::new(back, &graph, &lattice, &coupling)?;
    for _ in 0..steps {
        integ.advance()?;
    }
    let mut end = integ.into_state();
    end.negate_velocities();
    end.time = start.time;
    Ok(CheckResult::upper(
        "leapfrog_time_reversal",
        end.distance(&start) / start.norm(),
        1e-9,
    ))
}

fn short_run(rng: &mut StdRng) -> CliResult<[CheckResult; 3]> {
    let graph = StarGraphSpec::new(3, 1.0)?;
    let lattice = LatticeSpec::new(0.05, 1200, 0.0125)?;
    let packet = WavePacketSpec {
        carrier_k: rng.gen_range(1.5..2.5),
        center: 20.0,
        width: 2.5,
        amplitude: Complex64::new(1.0, 0.0),
        velocity_init: VelocityInit::EnvelopeCorrected,
    };
    let run = run_scattering_experiment(
        &graph,
        &lattice,
        &packet,
        JunctionFamily::Kirchhoff,
        StopRule::Duration { time: 25.0 },
        10,
    )?;
    let m = &run.measurement;
    let balance = run
        .series
        .iter()
        .map(|r| r.energy_balance.abs().max(r.charge_balance.abs()))
        .fold(0.0, f64::max)
        / m.initial_energy;
    Ok([
        CheckResult::upper("packet_energy_drift", m.energy_drift, 1e-6),
        CheckResult::upper("packet_charge_drift", m.charge_drift, 1e-8),
        CheckResult::upper("junction_balance_identity", balance, 1e-9),
    ])
}

/// Runs every invariant with randomness drawn from `config.seed`.
pub fn cmd_validate(config: &ScenarioConfig) -> CliResult<ValidationReport> {
    let mut rng = StdRng::seed_from_u64(config.seed);
    let mut checks = vec![
        continuum_unitarity(&mut rng),
        family_phase_modulus(&mut rng)?,
        kirchhoff_cross_residuals(&mut rng),
        generic_phase_cross_residuals(&mut rng),
        kirchhoff_junction_conditions(&mut rng),
        degenerate_limit(&mut rng),
        lattice_unitarity(&mut rng)?,
        lattice_mode_eom(&mut rng)?,
        continuum_convergence(config)?,
        energy_phase_invariance(&mut rng)?,
        time_reversal(&mut rng)?,
    ];
    checks.extend(short_run(&mut rng)?);
    Ok(ValidationReport {
        seed: config.seed,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_is_deterministic() {
        let config = ScenarioConfig {
            seed: 7,
            ..Default::default()
        };
        let a = cmd_validate(&config).unwrap();
        for c in &a.checks {
            assert!(c.pass, "{}", c.line());
        }
        let b = cmd_validate(&config).unwrap();
        assert_eq!(a.render(), b.render());
    }

    #[test]
    fn check_lines() {
        let c = CheckResult::upper("x", 2.0, 1.0);
        assert!(!c.pass);
        assert!(c.line().starts_with("FAIL x worst="));
        assert!(CheckResult::lower("y", 2.0, 1.0).pass);
        assert!(!CheckResult::upper("z", f64::NAN, 1.0).pass);
    }
}
