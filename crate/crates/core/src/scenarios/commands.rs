use std::io::Write;

use serde::Serialize;

use super::{fmt_float, CliError, CliResult, ScenarioConfig, SmatrixModel};
use crate::analytic::{
    charge_cross_residual, energy_cross_residual, family_amplitudes, unitarity_residual,
    TwoModeSpec,
};
use crate::discrete::{continuum_limit_error, convergence_order, discrete_reflection};
use crate::dynamics::{run_scattering_experiment, ScatteringMeasurement};
use crate::graph::ScatteringAmplitudes;

/// Largest `k * delta` accepted by `converge`.
pub const CONVERGE_MAX_KDELTA: f64 = 0.3;

fn writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn row(w: &mut csv::Writer<&mut dyn Write>, values: &[f64]) -> CliResult<()> {
    w.write_record(values.iter().map(|v| fmt_float(*v)))?;
    Ok(())
}

fn check_finite(values: &[f64], what: &str) -> CliResult<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("non-finite value in {what}")))
    }
}

/// Writes `k,re_R,im_R,re_T,im_T,theta,unitarity_residual` over the k grid.
pub fn cmd_smatrix(config: &ScenarioConfig, out: &mut dyn Write) -> CliResult<()> {
    config.validate_specs()?;
    let ks = config.smatrix.k_grid.values()?;
    let s = config.graph.ray_count;
    let mut w = writer(out);
    w.write_record([
        "k",
        "re_R",
        "im_R",
        "re_T",
        "im_T",
        "theta",
        "unitarity_residual",
    ])?;
    for k in ks {
        let amp: ScatteringAmplitudes = match config.smatrix.model {
            SmatrixModel::Continuum => family_amplitudes(config.family, k, &config.graph)?,
            SmatrixModel::Lattice => discrete_reflection(k, config.lattice.delta, s)?.amplitudes,
        };
        let values = [
            k,
            amp.reflection.re,
            amp.reflection.im,
            amp.transmission.re,
            amp.transmission.im,
            amp.phase,
            unitarity_residual(amp.reflection, s),
        ];
        check_finite(&values, "smatrix row")?;
        row(&mut w, &values)?;
    }
    w.flush()?;
    Ok(())
}

/// Summary record of a `simulate` run.
#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub config: ScenarioConfig,
    pub measurement: ScatteringMeasurement,
}

/// Everything `simulate` produces besides the CSV stream.
#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub summary: SimulateSummary,
    pub rows: usize,
}

/// Runs the packet experiment and writes the sampled time series.
pub fn cmd_simulate(config: &ScenarioConfig, out: &mut dyn Write) -> CliResult<SimulateOutput> {
    config.validate_specs()?;
    let run = run_scattering_experiment(
        &config.graph,
        &config.lattice,
        &config.simulate.packet,
        config.family,
        config.simulate.stop_rule(),
        config.cadence,
    )?;
    let s = config.graph.ray_count;
    let mut header = vec!["t".to_string(), "E_total".into(), "Q_total".into()];
    header.extend((0..s).map(|q| format!("E_ray{q}")));
    header.extend((0..s).map(|q| format!("Q_ray{q}")));
    header.extend([
        "E_junction".into(),
        "energy_balance".into(),
        "charge_balance".into(),
    ]);

    let mut w = writer(out);
    w.write_record(&header)?;
    for rec in &run.series {
        let mut values = vec![rec.time, rec.energy.total(), rec.charge.total()];
        values.extend(&rec.energy.rays);
        values.extend(&rec.charge.rays);
        values.extend([rec.energy.junction, rec.energy_balance, rec.charge_balance]);
        check_finite(&values, "time series")?;
        row(&mut w, &values)?;
    }
    w.flush()?;
    Ok(SimulateOutput {
        summary: SimulateSummary {
            config: config.clone(),
            measurement: run.measurement,
        },
        rows: run.series.len(),
    })
}

/// Writes `delta,abs_error,ratio` for each lattice constant, then a final
/// `order,<slope>,` row with the fitted convergence order. Returns the order.
pub fn cmd_converge(config: &ScenarioConfig, out: &mut dyn Write) -> CliResult<f64> {
    config.graph.validate()?;
    let k = config.converge.k;
    let deltas = &config.converge.deltas;
    if deltas.len() < 3 {
        return Err(CliError::Usage(
            "converge needs at least three deltas".into(),
        ));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(CliError::Usage(format!("converge k must be > 0, got {k}")));
    }
    for &d in deltas {
        if !(d.is_finite() && d > 0.0) {
            return Err(CliError::Usage(format!("delta must be > 0, got {d}")));
        }
        if k * d > CONVERGE_MAX_KDELTA {
            return Err(CliError::Usage(format!(
                "k * delta = {} exceeds {CONVERGE_MAX_KDELTA}",
                k * d
            )));
        }
    }
    if deltas.windows(2).any(|p| p[1] >= p[0]) {
        return Err(CliError::Usage("deltas must be strictly decreasing".into()));
    }
    if config.graph.ray_count == 2 {
        return Err(CliError::Usage(
            "a two-ray junction is reflectionless at every delta; nothing to converge".into(),
        ));
    }

    let errors = deltas
        .iter()
        .map(|&d| continuum_limit_error(k, d, config.graph.ray_count))
        .collect::<crate::Result<Vec<f64>>>()?;
    let order =
        convergence_order(deltas, &errors).map_err(|e| CliError::Numerical(e.to_string()))?;

    let mut w = writer(out);
    w.write_record(["delta", "abs_error", "ratio"])?;
    for (i, (&d, &e)) in deltas.iter().zip(&errors).enumerate() {
        let ratio = if i == 0 {
            String::new()
        } else {
            fmt_float(errors[i - 1] / e)
        };
        w.write_record([fmt_float(d), fmt_float(e), ratio])?;
    }
    w.write_record(["order".to_string(), fmt_float(order), String::new()])?;
    w.flush()?;
    Ok(order)
}

/// Writes `k1,k2,abs_energy_residual,abs_charge_residual` for every pair
/// `k1 < k2` of the grid. Returns the largest residual seen.
pub fn cmd_twomode(config: &ScenarioConfig, out: &mut dyn Write) -> CliResult<f64> {
    config.graph.validate()?;
    let ks = config.twomode.k_grid.values()?;
    let s = config.graph.ray_count;
    let m = config.graph.mass;
    let amps = ks
        .iter()
        .map(|&k| family_amplitudes(config.family, k, &config.graph))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut w = writer(out);
    w.write_record(["k1", "k2", "abs_energy_residual", "abs_charge_residual"])?;
    let mut worst = 0.0_f64;
    for i in 0..ks.len() {
        for j in i + 1..ks.len() {
            let spec = TwoModeSpec::new(ks[i], ks[j], amps[i].reflection, amps[j].reflection)?;
            let e = energy_cross_residual(&spec, m, s).norm();
            let q = charge_cross_residual(&spec, s).norm();
            worst = worst.max(e).max(q);
            let values = [ks[i], ks[j], e, q];
            check_finite(&values, "two-mode row")?;
            row(&mut w, &values)?;
        }
    }
    w.flush()?;
    Ok(worst)
}
