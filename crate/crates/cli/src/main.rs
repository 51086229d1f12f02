//! Command-line front end: reads an experiment config, runs the requested
//! computation, writes CSV tables, metadata sidecars, SVG figures and the
//! fully-resolved config into the output directory.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use arp_core::analytic::{lz_lost, lz_transfer, sufficient_slope_with, SlopeBranch};
use arp_core::csv;
use arp_core::dynamics::propagate_with_trajectory;
use arp_core::scan::{run_scan, AxisName, Engine};
use arp_core::special::j0_first_zero;
use arp_core::tolerance::{boundary_slopes, tolerance_curve, ToleranceCurve};

use arp_cli::configfile::{self, ConfigDocument};
use arp_cli::svg::{self, Series};
use arp_cli::CliError;

#[derive(Parser)]
#[command(
    name = "arp",
    about = "Rapid adiabatic passage under a sinusoidal detuning tone: \
             sweeps, noise-parameter scans, tolerance boundaries",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (key = value sections).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Cap on concurrent tasks (default: machine parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Skip SVG figures.
    #[arg(long)]
    no_plots: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum EngineArg {
    Full,
    Multijump,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Full => Engine::FullSimulation,
            EngineArg::Multijump => Engine::Multijump,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a single sweep and record the trajectory.
    Sweep(RunArgs),
    /// Phase-averaged transfer over one or two noise axes.
    Scan {
        #[command(flatten)]
        args: RunArgs,
        /// Override the [scan] engine choice.
        #[arg(long)]
        engine: Option<EngineArg>,
    },
    /// Largest acceptable noise amplitude per noise frequency.
    Tolerance {
        #[command(flatten)]
        args: RunArgs,
        /// Override the [tolerance] engine choice.
        #[arg(long)]
        engine: Option<EngineArg>,
    },
    /// Run both engines over one grid and write the difference.
    Compare(RunArgs),
    /// Asymptotic noiseless transfer for a Rabi frequency and sweep rate.
    Lz { rabi: f64, rate: f64 },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Sweep(args) => {
            setup(&args)?;
            cmd_sweep(&args)
        }
        Command::Scan { args, engine } => {
            setup(&args)?;
            cmd_scan(&args, engine.map(Engine::from))
        }
        Command::Tolerance { args, engine } => {
            setup(&args)?;
            cmd_tolerance(&args, engine.map(Engine::from))
        }
        Command::Compare(args) => {
            setup(&args)?;
            cmd_compare(&args)
        }
        Command::Lz { rabi, rate } => cmd_lz(rabi, rate),
    }
}

fn setup(args: &RunArgs) -> Result<(), CliError> {
    if let Some(n) = args.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be at least 1".to_string()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--workers: {e}")))?;
    }
    fs::create_dir_all(&args.out)?;
    Ok(())
}

fn load_document(path: &Path) -> Result<ConfigDocument, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ConfigDocument::parse(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

fn cmd_sweep(args: &RunArgs) -> Result<(), CliError> {
    let cmd = configfile::resolve_sweep_command(load_document(&args.config)?)?;
    eprintln!(
        "sweep: integrating over t in [{}, {}]",
        cmd.sweep.delta_start / cmd.sweep.rate,
        cmd.sweep.delta_end / cmd.sweep.rate
    );
    let started = Instant::now();
    let result = propagate_with_trajectory(&cmd.sweep, &cmd.noise, &cmd.integrator)?;
    eprintln!("sweep: done in {:.2} s", started.elapsed().as_secs_f64());

    let record = result
        .trajectory
        .as_ref()
        .expect("positive record_stride always yields a trajectory");
    let mut buf = Vec::new();
    csv::write_trajectory_csv(&mut buf, record)?;
    write_file(&args.out, "trajectory.csv", &buf)?;
    write_file(
        &args.out,
        "resolved_config.txt",
        configfile::echo_sweep(&cmd).as_bytes(),
    )?;
    if !args.no_plots {
        let pop = svg::line_plot(
            "excited-state population",
            "t",
            "P_e",
            &[Series {
                label: "",
                x: &record.times,
                y: &record.excited_pop,
            }],
            &[],
        );
        write_file(&args.out, "population.svg", pop.as_bytes())?;
        let (u, v, w): (Vec<f64>, Vec<f64>, Vec<f64>) = (
            record.bloch.iter().map(|b| b.u).collect(),
            record.bloch.iter().map(|b| b.v).collect(),
            record.bloch.iter().map(|b| b.w).collect(),
        );
        let components = svg::line_plot(
            "Bloch components",
            "t",
            "u, v, w",
            &[
                Series { label: "u", x: &record.times, y: &u },
                Series { label: "v", x: &record.times, y: &v },
                Series { label: "w", x: &record.times, y: &w },
            ],
            &[],
        );
        let projections = svg::bloch_projections("Bloch projections", &record.bloch);
        write_file(
            &args.out,
            "bloch.svg",
            svg::stack(&[components, projections]).as_bytes(),
        )?;
    }
    println!("norm_drift={:e}", result.norm_drift);
    println!("pe={}", result.final_excited_pop);
    Ok(())
}

/// Frequencies where adjacent-jump interference is constructive,
/// sqrt(2 n pi rate), within [lo, hi].
fn stripe_positions(rate: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(rate > 0.0) || !(hi > lo) {
        return out;
    }
    let n_min = (lo.max(0.0).powi(2) / (2.0 * PI * rate)).ceil().max(1.0) as u64;
    let n_max = (hi.powi(2) / (2.0 * PI * rate)).floor() as u64;
    for n in n_min..=n_max.min(n_min + 400) {
        out.push((2.0 * n as f64 * PI * rate).sqrt());
    }
    out
}

fn cmd_scan(args: &RunArgs, engine_override: Option<Engine>) -> Result<(), CliError> {
    let cmd = configfile::resolve_scan_command(load_document(&args.config)?, engine_override)?;
    let n_points = cmd.spec.axis1.n_points * cmd.spec.axis2.as_ref().map_or(1, |a| a.n_points);
    eprintln!("scan: {n_points} grid point(s), engine {}", cmd.spec.engine.as_str());
    let started = Instant::now();
    let grid = run_scan(&cmd.spec)?;
    eprintln!("scan: done in {:.2} s", started.elapsed().as_secs_f64());

    let mut buf = Vec::new();
    csv::write_grid_csv(&mut buf, &grid)?;
    write_file(&args.out, "efficiency.csv", &buf)?;
    buf.clear();
    csv::write_grid_metadata(&mut buf, &grid)?;
    write_file(&args.out, "efficiency_meta.txt", &buf)?;
    write_file(
        &args.out,
        "resolved_config.txt",
        configfile::echo_scan(&cmd).as_bytes(),
    )?;
    if !args.no_plots {
        let figure = scan_figure(&grid, cmd.overlay);
        write_file(&args.out, "efficiency.svg", figure.as_bytes())?;
    }
    Ok(())
}

fn scan_figure(grid: &arp_core::scan::EfficiencyGrid, overlay: bool) -> String {
    let spec = &grid.spec;
    let x_label = spec.axis1.name.as_str();
    let vlines = if overlay && spec.axis1.name == AxisName::NoiseFrequency {
        stripe_positions(spec.sweep.rate, spec.axis1.start, spec.axis1.stop)
    } else {
        Vec::new()
    };
    match &spec.axis2 {
        None => svg::line_plot(
            &format!("phase-averaged transfer ({})", spec.engine.as_str()),
            x_label,
            "P_e",
            &[Series {
                label: "",
                x: &grid.axis1,
                y: &grid.values,
            }],
            &vlines,
        ),
        Some(axis2) => {
            let mut rays = Vec::new();
            if overlay {
                // carrier suppression boundary in a frequency x amplitude map
                match (spec.axis1.name, axis2.name) {
                    (AxisName::NoiseFrequency, AxisName::NoiseAmplitude) => {
                        rays.push(j0_first_zero())
                    }
                    (AxisName::NoiseAmplitude, AxisName::NoiseFrequency) => {
                        rays.push(1.0 / j0_first_zero())
                    }
                    _ => {}
                }
            }
            svg::heatmap(
                &format!("phase-averaged transfer ({})", spec.engine.as_str()),
                x_label,
                axis2.name.as_str(),
                &grid.axis1,
                &grid.axis2,
                &grid.values,
                &vlines,
                &rays,
            )
        }
    }
}

fn cmd_tolerance(args: &RunArgs, engine_override: Option<Engine>) -> Result<(), CliError> {
    let cmd = configfile::resolve_tolerance_command(load_document(&args.config)?, engine_override)?;
    write_file(
        &args.out,
        "resolved_config.txt",
        configfile::echo_tolerance(&cmd).as_bytes(),
    )?;
    if cmd.rates.is_empty() {
        eprintln!(
            "tolerance: {} frequencies, engine {}",
            cmd.frequencies.len(),
            cmd.search.engine.as_str()
        );
        let started = Instant::now();
        let curve = tolerance_curve(&cmd.frequencies, &cmd.sweep, &cmd.search)?;
        eprintln!("tolerance: done in {:.2} s", started.elapsed().as_secs_f64());
        write_tolerance_outputs(args, &cmd, &curve)
    } else {
        eprintln!(
            "tolerance: boundary slopes over {} rate(s) x {} frequencies",
            cmd.rates.len(),
            cmd.frequencies.len()
        );
        let started = Instant::now();
        let result = boundary_slopes(
            &cmd.rates,
            &cmd.sweep,
            &cmd.frequencies,
            &cmd.search,
            cmd.branch,
        )?;
        eprintln!("tolerance: done in {:.2} s", started.elapsed().as_secs_f64());
        write_boundary_outputs(args, &cmd, &result)
    }
}

fn write_tolerance_outputs(
    args: &RunArgs,
    cmd: &configfile::ToleranceCommand,
    curve: &ToleranceCurve,
) -> Result<(), CliError> {
    let mut buf = Vec::new();
    csv::write_tolerance_csv(&mut buf, curve)?;
    write_file(&args.out, "tolerance.csv", &buf)?;
    buf.clear();
    csv::write_tolerance_metadata(&mut buf, curve, &cmd.sweep, &cmd.search)?;
    write_file(&args.out, "tolerance_meta.txt", &buf)?;
    if !args.no_plots {
        let slope = sufficient_slope_with(
            cmd.search.threshold,
            cmd.sweep.rate,
            cmd.sweep.rabi,
            cmd.branch,
        );
        let line: Vec<f64> = curve.frequencies.iter().map(|f| slope * f).collect();
        let figure = svg::line_plot(
            "largest acceptable noise amplitude",
            "noise frequency",
            "amplitude",
            &[
                Series {
                    label: "measured boundary",
                    x: &curve.frequencies,
                    y: &curve.max_amplitudes,
                },
                Series {
                    label: "sufficient line",
                    x: &curve.frequencies,
                    y: &line,
                },
            ],
            &[],
        );
        write_file(&args.out, "tolerance.svg", figure.as_bytes())?;
    }
    Ok(())
}

fn write_boundary_outputs(
    args: &RunArgs,
    cmd: &configfile::ToleranceCommand,
    result: &arp_core::tolerance::BoundarySlopeResult,
) -> Result<(), CliError> {
    let mut buf = Vec::new();
    csv::write_boundary_csv(&mut buf, result)?;
    write_file(&args.out, "boundary.csv", &buf)?;

    let mut meta = String::new();
    meta.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    meta.push_str(&format!("engine = {}\n", cmd.search.engine.as_str()));
    meta.push_str(&format!("threshold = {}\n", cmd.search.threshold.get()));
    meta.push_str(&format!("n_rates = {}\n", result.sweep_rates.len()));
    // verdict: which closed-form branch tracks the measured slopes better
    for branch in [SlopeBranch::Sum, SlopeBranch::Difference] {
        let name = match branch {
            SlopeBranch::Sum => "sum",
            SlopeBranch::Difference => "difference",
        };
        let mut dev = 0.0;
        for (i, &rate) in result.sweep_rates.iter().enumerate() {
            let analytic =
                sufficient_slope_with(cmd.search.threshold, rate, cmd.sweep.rabi, branch);
            dev += (result.empirical_slopes[i] / analytic).ln().powi(2);
        }
        let rms = (dev / result.sweep_rates.len() as f64).sqrt();
        meta.push_str(&format!("log_ratio_rms_{name} = {rms}\n"));
    }
    write_file(&args.out, "boundary_meta.txt", meta.as_bytes())?;

    if !args.no_plots {
        let figure = svg::line_plot(
            "boundary slope vs sweep rate",
            "sweep rate",
            "amplitude / frequency",
            &[
                Series {
                    label: "measured",
                    x: &result.sweep_rates,
                    y: &result.empirical_slopes,
                },
                Series {
                    label: "closed form",
                    x: &result.sweep_rates,
                    y: &result.analytic_slopes,
                },
            ],
            &[],
        );
        write_file(&args.out, "boundary.svg", figure.as_bytes())?;
    }
    Ok(())
}

fn cmd_compare(args: &RunArgs) -> Result<(), CliError> {
    let cmd = configfile::resolve_compare_command(load_document(&args.config)?)?;
    let n_points = cmd.spec.axis1.n_points * cmd.spec.axis2.as_ref().map_or(1, |a| a.n_points);

    let mut spec_full = cmd.spec.clone();
    spec_full.engine = Engine::FullSimulation;
    eprintln!("compare: {n_points} grid point(s), full simulation");
    let started = Instant::now();
    let full = run_scan(&spec_full)?;
    eprintln!("compare: full done in {:.2} s", started.elapsed().as_secs_f64());

    let mut spec_jumps = cmd.spec.clone();
    spec_jumps.engine = Engine::Multijump;
    eprintln!("compare: {n_points} grid point(s), jump model");
    let started = Instant::now();
    let jumps = run_scan(&spec_jumps)?;
    eprintln!("compare: jumps done in {:.2} s", started.elapsed().as_secs_f64());

    let mut diff = full.clone();
    diff.values = full
        .values
        .iter()
        .zip(&jumps.values)
        .map(|(a, b)| a - b)
        .collect();

    for (name, grid) in [("full", &full), ("jumps", &jumps), ("diff", &diff)] {
        let mut buf = Vec::new();
        csv::write_grid_csv(&mut buf, grid)?;
        write_file(&args.out, &format!("{name}.csv"), &buf)?;
    }
    write_file(
        &args.out,
        "resolved_config.txt",
        configfile::echo_compare(&cmd).as_bytes(),
    )?;

    if !args.no_plots {
        let figure = match &cmd.spec.axis2 {
            None => svg::line_plot(
                "full simulation vs jump model",
                cmd.spec.axis1.name.as_str(),
                "P_e",
                &[
                    Series {
                        label: "full",
                        x: &full.axis1,
                        y: &full.values,
                    },
                    Series {
                        label: "jumps",
                        x: &jumps.axis1,
                        y: &jumps.values,
                    },
                    Series {
                        label: "full - jumps",
                        x: &diff.axis1,
                        y: &diff.values,
                    },
                ],
                &[],
            ),
            Some(axis2) => {
                let panel = |title: &str, grid: &arp_core::scan::EfficiencyGrid, shift: f64| {
                    let shifted: Vec<f64> = grid.values.iter().map(|v| v + shift).collect();
                    svg::heatmap(
                        title,
                        cmd.spec.axis1.name.as_str(),
                        axis2.name.as_str(),
                        &grid.axis1,
                        &grid.axis2,
                        &shifted,
                        &[],
                        &[],
                    )
                };
                svg::stack(&[
                    panel("full simulation", &full, 0.0),
                    panel("jump model", &jumps, 0.0),
                    // difference recentered so 0.5 is exact agreement
                    panel("full - jumps + 1/2", &diff, 0.5),
                ])
            }
        };
        write_file(&args.out, "compare.svg", figure.as_bytes())?;
    }
    Ok(())
}

fn cmd_lz(rabi: f64, rate: f64) -> Result<(), CliError> {
    if !(rabi > 0.0) || !rabi.is_finite() || !(rate > 0.0) || !rate.is_finite() {
        return Err(CliError::Config(format!(
            "lz needs positive finite rabi and rate, got {rabi} and {rate}"
        )));
    }
    println!("lost={}", lz_lost(rabi, rate));
    println!("transfer={}", lz_transfer(rabi, rate));
    Ok(())
}
