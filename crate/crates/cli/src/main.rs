//! `chirplock` command-line interface.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chirplock::harness::{emit_figure_data, run_ensemble, run_scenario, Figure, Horizon, Scenario, BUILTINS};
use chirplock::oscillator::{OrbitTable, Potential};
use chirplock::reduction::analyze;
use chirplock::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "chirplock", version, about = "Resonance capture under decaying chirped excitation and noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an orbit table and write it in the portable text format.
    Orbit(OrbitArgs),
    /// Print the reduced resonance analysis as JSON.
    Reduce(ScenarioArgs),
    /// Simulate a single path and write an output bundle.
    Simulate(ScenarioArgs),
    /// Run a Monte Carlo ensemble; prints statistics, writes a bundle with --out.
    Ensemble(ScenarioArgs),
    /// Write figure reproduction data (fig2a, fig2b, fig3, fig4, fig5 or all).
    Figure(FigureArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// JSON scenario file.
    #[arg(long, conflicts_with = "builtin")]
    config: Option<PathBuf>,
    /// Builtin scenario: ex1, ex2, ex3 or fex0.
    #[arg(long)]
    builtin: Option<String>,
    /// Master seed for the per-path random streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sample paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Output bundle directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Start time.
    #[arg(long)]
    t0: Option<f64>,
    /// End time; overrides the automatic horizon.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Largest allowed step size.
    #[arg(long = "dt-max")]
    dt_max: Option<f64>,
    /// Minimum steps per excitation period.
    #[arg(long = "osc-resolution")]
    osc_resolution: Option<f64>,
    /// Noise intensity override.
    #[arg(long)]
    mu: Option<f64>,
}

#[derive(Args)]
struct OrbitArgs {
    /// JSON scenario whose potential is tabulated (Duffing by default).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "rho-min", default_value_t = 0.5)]
    rho_min: f64,
    #[arg(long = "rho-max", default_value_t = 50.0)]
    rho_max: f64,
    #[arg(long = "per-decade", default_value_t = 16)]
    per_decade: usize,
    #[arg(long = "phi-count", default_value_t = 64)]
    phi_count: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    figure: String,
    #[arg(long, default_value = "figures")]
    out: PathBuf,
}

fn load_config(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    Scenario::from_json(&text)
}

impl ScenarioArgs {
    fn scenario(&self) -> Result<Scenario> {
        let mut s = match (&self.config, &self.builtin) {
            (Some(path), _) => load_config(path)?,
            (None, Some(name)) => Scenario::builtin(name)?,
            (None, None) => {
                return Err(Error::Validation(format!("give --config FILE or --builtin NAME ({BUILTINS:?})")))
            }
        };
        if let Some(seed) = self.seed {
            s.ensemble.master_seed = seed;
        }
        if let Some(n) = self.paths {
            s.ensemble.path_count = n;
        }
        if let Some(t0) = self.t0 {
            s.t0 = t0;
        }
        if let Some(t) = self.t_end {
            s.t_end = Horizon::Fixed(t);
        }
        if let Some(dt) = self.dt_max {
            s.dt_control.dt_max = dt;
        }
        if let Some(osc) = self.osc_resolution {
            s.dt_control.osc_resolution = osc;
        }
        if let Some(mu) = self.mu {
            s.noise.mu = mu;
        }
        s.validate()?;
        Ok(s)
    }
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Orbit(args) => {
            let potential = match &args.config {
                Some(p) => load_config(p)?.potential,
                None => Potential::duffing(),
            };
            if !(args.rho_max > args.rho_min && args.per_decade > 0) {
                return Err(Error::Validation("need rho-max > rho-min and per-decade > 0".into()));
            }
            let grid = OrbitTable::geometric_grid(args.rho_min, args.rho_max, args.per_decade);
            let table = OrbitTable::build(&potential, &grid, args.phi_count)?;
            match &args.out {
                Some(path) => {
                    table.write_text(std::fs::File::create(path)?)?;
                    print_json(&json!({
                        "levels": grid.len(),
                        "phi_count": args.phi_count,
                        "max_energy_error": table.max_energy_error(),
                        "out": path,
                    }))?;
                }
                None => table.write_text(std::io::stdout().lock())?,
            }
        }
        Command::Reduce(args) => {
            let s = args.scenario()?;
            let (analysis, _) = analyze(&s.potential, &s.forcing, &s.noise, s.kappa, s.analysis)?;
            let value = analysis.to_json();
            match &args.out {
                Some(path) => std::fs::write(path, serde_json::to_string_pretty(&value)? + "\n")?,
                None => print_json(&value)?,
            }
        }
        Command::Simulate(args) => {
            let mut s = args.scenario()?;
            s.ensemble.path_count = 1;
            let out = args.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}-path", s.name)));
            let run = run_scenario(&s, &out)?;
            print_json(&json!({ "manifest": run.manifest, "verdict": run.stats.verdicts[0] }))?;
        }
        Command::Ensemble(args) => {
            let s = args.scenario()?;
            match &args.out {
                Some(out) => {
                    let run = run_scenario(&s, out)?;
                    print_json(&json!({ "manifest": run.manifest, "stats": summary(&run.stats) }))?;
                }
                None => print_json(&summary(&run_ensemble(&s)?))?,
            }
        }
        Command::Figure(args) => {
            let figures: Vec<Figure> = if args.figure == "all" {
                Figure::ALL.to_vec()
            } else {
                vec![args.figure.parse()?]
            };
            let mut manifests = Vec::new();
            for f in figures {
                manifests.push(emit_figure_data(f, &args.out.join(f.name()))?);
            }
            print_json(&json!({ "manifests": manifests }))?;
        }
    }
    Ok(())
}

fn summary(stats: &chirplock::EnsembleStats) -> serde_json::Value {
    json!({
        "path_count": stats.path_count,
        "captured_count": stats.captured_count,
        "capture_fraction": stats.capture_fraction,
        "standard_error": stats.standard_error,
        "sup_deviation_quantiles": stats.sup_deviation_quantiles,
        "blow_up_count": stats.blow_up_count,
    })
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (`| head`) is not a failure of the command.
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
