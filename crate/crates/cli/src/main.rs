//! `g2flux`: verification suites for G₂-Strominger solutions on T³-bundles
//! over flat T⁴.
//!
//! Exit status: 0 when every residual is within tolerance, 1 when some check
//! fails (the worst offender is printed), 2 on unreadable or invalid input.
//! Thread count follows `RAYON_NUM_THREADS`.

mod commands;
mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ScenarioConfig;
use report::Report;

#[derive(Parser, Debug)]
#[command(name = "g2flux", version, about = "Verification suites for the G2-Strominger system on T3-bundles over T4")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the grid size N of the scenario.
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Multiplier applied to every tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,

    /// Report path (JSON); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Sample count: random G2 points for verify-algebra, covectors per point
    /// for ellipticity.
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Type projections, J, and the dJd symbol identities at random points.
    VerifyAlgebra,
    /// Exactness of the symbol complexes over random covectors.
    Ellipticity,
    /// Solve for h = e^u, write it, and verify the resulting solution.
    Solve {
        /// Binary output for h.
        #[arg(long, default_value = "h.bin")]
        field: PathBuf,
    },
    /// The four system residuals and the torsion cross-checks.
    Verify,
    /// Dual data, the correspondence-space identity, and both scenarios.
    Tdual,
    /// Charge-window certificate for the scenario.
    LatticeCheck,
    /// Everything applicable to the scenario in one report.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifyAlgebra => "verify-algebra",
            Command::Ellipticity => "ellipticity",
            Command::Solve { .. } => "solve",
            Command::Verify => "verify",
            Command::Tdual => "tdual",
            Command::LatticeCheck => "lattice-check",
            Command::Report => "report",
        }
    }
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, String> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| format!("{} needs --config", cli.command.name()))?;
    let mut c = ScenarioConfig::load(path).map_err(|e| e.to_string())?;
    if let Some(n) = cli.grid {
        c.grid = n;
    }
    Ok(c)
}

fn run(cli: &Cli) -> Result<Report, String> {
    if !(cli.tol_scale > 0.0 && cli.tol_scale.is_finite()) {
        return Err("--tol-scale must be positive".into());
    }
    let config_name = cli.config.as_ref().map(|p| p.display().to_string());
    let mut report = Report::new(cli.command.name(), config_name, cli.seed, cli.tol_scale);
    let outcome = match &cli.command {
        Command::VerifyAlgebra => commands::verify_algebra(&mut report, cli.samples.unwrap_or(50), cli.seed),
        Command::Ellipticity => commands::ellipticity(&mut report, cli.samples.unwrap_or(100), cli.seed),
        Command::LatticeCheck => {
            let config = load_config(cli)?;
            let scenario = config.scenario().ok();
            commands::lattice_check(&mut report, &config, scenario.as_ref())
        }
        cmd => {
            let config = load_config(cli)?;
            match commands::scenario_or_record(&mut report, &config).map_err(|e| e.to_string())? {
                None => Ok(()),
                Some(mut s) => match cmd {
                    Command::Solve { field } => commands::solve(&mut report, &mut s, field),
                    Command::Verify => commands::verify(&mut report, &config, &s),
                    Command::Tdual => commands::tdual(&mut report, &config, &s),
                    Command::Report => commands::full_report(&mut report, &config, &s),
                    Command::VerifyAlgebra | Command::Ellipticity | Command::LatticeCheck => unreachable!(),
                },
            }
        }
    };
    if let Err(e) = outcome {
        report.error(e.to_string());
    }
    Ok(report.finish())
}

fn emit(cli: &Cli, report: &Report) -> std::io::Result<()> {
    let json = report.to_json();
    match &cli.out {
        Some(path) => std::fs::write(path, json),
        None => std::io::stdout().write_all(json.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if let Err(e) = emit(&cli, &report) {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(1);
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "FAIL {}: {}",
                    report.command,
                    report.worst_offender().unwrap_or_default()
                );
                ExitCode::from(1)
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
