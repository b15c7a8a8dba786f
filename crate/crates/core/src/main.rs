use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stargraph::dynamics::{StopRule, VelocityInit};
use stargraph::scenarios::{
    cmd_converge, cmd_simulate, cmd_smatrix, cmd_twomode, cmd_validate, CliError, CliResult, KGrid,
    ScenarioConfig, SmatrixModel, Spacing,
};
use stargraph::JunctionFamily;

/// Scattering of a complex scalar field at the vertex of a star graph.
#[derive(Parser, Debug)]
#[command(name = "stargraph", version)]
struct Cli {
    /// JSON scenario file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write CSV (or the validation report) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress informational output on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(flatten)]
    model: ModelArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Number of rays s.
    #[arg(long, global = true)]
    rays: Option<usize>,
    #[arg(long, global = true)]
    mass: Option<f64>,
    /// Junction family: kirchhoff, decoupled, alpha:X or beta:X.
    #[arg(long, global = true)]
    family: Option<JunctionFamily>,
    /// Lattice constant.
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    sites: Option<usize>,
    #[arg(long, global = true)]
    dt: Option<f64>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    k_min: Option<f64>,
    #[arg(long)]
    k_max: Option<f64>,
    #[arg(long)]
    k_count: Option<usize>,
    /// Logarithmic spacing between k_min and k_max.
    #[arg(long)]
    log: bool,
    /// Explicit comma-separated wavenumbers.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["k_min", "k_max", "k_count", "log"])]
    k_list: Option<Vec<f64>>,
}

impl GridArgs {
    fn apply(&self, grid: &mut KGrid) {
        if let Some(list) = &self.k_list {
            *grid = KGrid::List(list.clone());
            return;
        }
        if self.k_min.is_none() && self.k_max.is_none() && self.k_count.is_none() && !self.log {
            return;
        }
        let (start, stop, count, spacing) = match grid {
            KGrid::Range {
                start,
                stop,
                count,
                spacing,
            } => (*start, *stop, *count, *spacing),
            KGrid::List(v) => (
                v.first().copied().unwrap_or(0.0),
                v.last().copied().unwrap_or(0.0),
                v.len(),
                Spacing::Linear,
            ),
        };
        *grid = KGrid::Range {
            start: self.k_min.unwrap_or(start),
            stop: self.k_max.unwrap_or(stop),
            count: self.k_count.unwrap_or(count),
            spacing: if self.log { Spacing::Log } else { spacing },
        };
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate R, T and the phase over a k grid.
    Smatrix {
        /// Use the lattice amplitudes at the configured delta.
        #[arg(long)]
        lattice: bool,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Scatter a Gaussian packet off the junction.
    Simulate {
        /// Carrier wavenumber.
        #[arg(long)]
        k0: Option<f64>,
        /// Initial packet centre, distance from the junction along ray 0.
        #[arg(long)]
        center: Option<f64>,
        /// Gaussian width sigma.
        #[arg(long)]
        width: Option<f64>,
        /// Stop after a fixed time instead of waiting for clearance.
        #[arg(long)]
        duration: Option<f64>,
        /// Initialise velocities with the carrier frequency only.
        #[arg(long)]
        narrow_band: bool,
        /// Rows every this many steps.
        #[arg(long)]
        cadence: Option<u64>,
        /// Write the JSON summary here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Lattice-to-continuum convergence of the reflection amplitude.
    Converge {
        #[arg(long)]
        k: Option<f64>,
        /// Comma-separated, strictly decreasing lattice constants.
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
    },
    /// Cross-term residuals of every pair of modes on a k grid.
    Twomode {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run the seeded invariant suite.
    Validate,
}

fn resolve(cli: &Cli) -> CliResult<ScenarioConfig> {
    let mut c = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    let m = &cli.model;
    if let Some(v) = m.rays {
        c.graph.ray_count = v;
    }
    if let Some(v) = m.mass {
        c.graph.mass = v;
    }
    if let Some(v) = m.family {
        c.family = v;
    }
    if let Some(v) = m.delta {
        c.lattice.delta = v;
    }
    if let Some(v) = m.sites {
        c.lattice.sites_per_ray = v;
    }
    if let Some(v) = m.dt {
        c.lattice.dt = v;
    }
    if let Some(v) = cli.seed {
        c.seed = v;
    }
    if let Some(v) = &cli.out {
        c.output = Some(v.clone());
    }
    match &cli.command {
        Command::Smatrix { lattice, grid } => {
            if *lattice {
                c.smatrix.model = SmatrixModel::Lattice;
            }
            grid.apply(&mut c.smatrix.k_grid);
        }
        Command::Simulate {
            k0,
            center,
            width,
            duration,
            narrow_band,
            cadence,
            ..
        } => {
            let p = &mut c.simulate.packet;
            if let Some(v) = k0 {
                p.carrier_k = *v;
            }
            if let Some(v) = center {
                p.center = *v;
            }
            if let Some(v) = width {
                p.width = *v;
            }
            if *narrow_band {
                p.velocity_init = VelocityInit::NarrowBand;
            }
            if let Some(t) = duration {
                c.simulate.stop = Some(StopRule::Duration { time: *t });
            }
            if let Some(v) = cadence {
                c.cadence = *v;
            }
        }
        Command::Converge { k, deltas } => {
            if let Some(v) = k {
                c.converge.k = *v;
            }
            if let Some(v) = deltas {
                c.converge.deltas = v.clone();
            }
        }
        Command::Twomode { grid } => grid.apply(&mut c.twomode.k_grid),
        Command::Validate => {}
    }
    Ok(c)
}

fn open_output(config: &ScenarioConfig) -> CliResult<Box<dyn Write>> {
    Ok(match &config.output {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            CliError::Usage(format!("cannot create {}: {e}", path.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: &Cli) -> CliResult<()> {
    let config = resolve(cli)?;
    let mut out = open_output(&config)?;
    match &cli.command {
        Command::Smatrix { .. } => cmd_smatrix(&config, &mut out)?,
        Command::Simulate { summary, .. } => {
            let result = cmd_simulate(&config, &mut out)?;
            let json = serde_json::to_string_pretty(&result.summary)
                .map_err(|e| CliError::Numerical(format!("summary: {e}")))?;
            if let Some(path) = summary {
                std::fs::write(path, format!("{json}\n"))?;
            }
            if !cli.quiet {
                eprintln!("{json}");
            }
        }
        Command::Converge { .. } => {
            let order = cmd_converge(&config, &mut out)?;
            if !cli.quiet {
                eprintln!("fitted order {order:.6}");
            }
        }
        Command::Twomode { .. } => {
            let worst = cmd_twomode(&config, &mut out)?;
            if !cli.quiet {
                eprintln!("largest residual {worst:e}");
            }
        }
        Command::Validate => {
            let report = cmd_validate(&config)?;
            out.write_all(report.render().as_bytes())?;
            out.flush()?;
            if !report.all_pass() {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| c.name)
                    .collect();
                return Err(CliError::Numerical(format!(
                    "failed checks: {}",
                    failed.join(", ")
                )));
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stargraph: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
