use clap::{Args, Parser, Subcommand};
use proca_lab_cli::dump::{dump, Artifact};
use proca_lab_cli::scenario::{Scenario, ScenarioError};
use proca_lab_cli::{run_scenario, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

/// Verification runner for the discrete Proca laboratory.
#[derive(Parser)]
#[command(name = "proca-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Report path; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated suites (complex, spectral, cauchy, green, moller, states, full).
    #[arg(long, value_delimiter = ',')]
    suite: Option<Vec<String>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tolerance_scale: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites of a scenario and write a JSON report.
    Run(RunArgs),
    /// Write one CSV artifact.
    Dump {
        /// spectrum, impulse, frequency or energy-trace.
        artifact: String,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Laplacian degree for the spectrum artifact.
        #[arg(long, default_value_t = 0)]
        degree: usize,
    },
    /// Run only the Møller suite.
    MollerVerify(RunArgs),
    /// Run only the state suite.
    StateVerify(RunArgs),
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), ScenarioError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| ScenarioError(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(args: RunArgs, forced: Option<&str>) -> Result<bool, ScenarioError> {
    let overrides = Overrides {
        suites: forced.map(|s| vec![s.to_string()]).or(args.suite),
        seed: args.seed,
        tolerance_scale: args.tolerance_scale,
    };
    let sc = overrides.apply(Scenario::load(&args.scenario)?)?;
    let report = run_scenario(&sc)?;
    write_or_print(&args.out, &report.to_json())?;
    for c in report.failures() {
        eprintln!("FAIL {}: residual {:e} vs threshold {:e}", c.check_id, c.residual, c.threshold);
    }
    Ok(report.all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a, None),
        Command::MollerVerify(a) => run(a, Some("moller")),
        Command::StateVerify(a) => run(a, Some("states")),
        Command::Dump { artifact, scenario, out, degree } => (|| {
            let kind: Artifact = artifact.parse()?;
            let sc = Scenario::load(&scenario)?;
            write_or_print(&out, &dump(&sc, kind, degree)?)?;
            Ok(true)
        })(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
