use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lincon_cli::experiment::{generate, report_bounds, run_experiment};
use lincon_cli::{CliError, ExperimentConfig, Settings};

#[derive(Parser)]
#[command(
    name = "lincon",
    version,
    about = "Bandits under a linear constraint on the reward-event rate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured algorithms and write traces, aggregates and a summary.
    Run(Common),
    /// Print the stationary optimum, duals and bound terms as JSON.
    Bounds(Common),
    /// Write a synthetic instance as arm CSV.
    Gen(Common),
}

#[derive(Args)]
struct Common {
    /// Key = value settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Arm CSV file (`arm_id,mu,r`).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Synthetic instance kind: coupon or edx.
    #[arg(long)]
    synthetic: Option<String>,
    /// Number of synthetic arms [default: 50].
    #[arg(long)]
    n: Option<usize>,
    /// Seed for the synthetic generator [default: 0].
    #[arg(long)]
    instance_seed: Option<u64>,
    /// Constraint threshold; overrides the instance default.
    #[arg(long)]
    eta: Option<f64>,
    /// Horizon T [default: 50000].
    #[arg(long)]
    horizon: Option<f64>,
    /// Runs per algorithm [default: 16].
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run r uses seed + r [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated list of linconts, linconklucb, or `both`.
    #[arg(long)]
    algo: Option<String>,
    /// Exploration constant c of the KL-UCB index [default: 0].
    #[arg(long)]
    klucb_c: Option<f64>,
    /// Bound parameter gamma in (0, 1] [default: 0.5].
    #[arg(long)]
    gamma: Option<f64>,
    /// Output directory (run, bounds) or file (gen).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for run [default: 1].
    #[arg(long)]
    jobs: Option<usize>,
    /// Points on the logarithmic report grid [default: 200].
    #[arg(long)]
    grid_points: Option<usize>,
}

impl Common {
    fn into_config(self) -> Result<ExperimentConfig, CliError> {
        let base = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        let mut flags = Settings::default();
        let mut put = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                flags.set(key, v);
            }
        };
        let show = |p: Option<PathBuf>| p.map(|p| p.display().to_string());
        put("instance", show(self.instance));
        put("synthetic", self.synthetic);
        put("n", self.n.map(|v| v.to_string()));
        put("instance-seed", self.instance_seed.map(|v| v.to_string()));
        put("eta", self.eta.map(|v| v.to_string()));
        put("horizon", self.horizon.map(|v| v.to_string()));
        put("runs", self.runs.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("algo", self.algo);
        put("klucb-c", self.klucb_c.map(|v| v.to_string()));
        put("gamma", self.gamma.map(|v| v.to_string()));
        put("out", show(self.out));
        put("jobs", self.jobs.map(|v| v.to_string()));
        put("grid-points", self.grid_points.map(|v| v.to_string()));
        base.merged(flags).into_config()
    }
}

/// Prints a line to stdout; a closed pipe is not an error.
fn emit(line: &str) -> Result<(), CliError> {
    match writeln!(io::stdout().lock(), "{line}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
        _ => Ok(()),
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => {
            let config = args.into_config()?;
            let outcome = run_experiment(&config)?;
            if let Some(exp) = &outcome.summary.experiment {
                for r in &exp.results {
                    emit(&format!(
                        "{}: regret {:.3} (sd {:.3}), violation {:.3} (sd {:.3}) at T = {}",
                        r.algorithm,
                        r.regret_mean,
                        r.regret_std,
                        r.violation_mean,
                        r.violation_std,
                        exp.horizon
                    ))?;
                }
            }
            emit(&format!("wrote {} files", outcome.files.len()))?;
        }
        Command::Bounds(args) => {
            let config = args.into_config()?;
            let summary = report_bounds(&config)?;
            emit(&summary.to_json())?;
        }
        Command::Gen(args) => {
            let mut config = args.into_config()?;
            match config.output_dir.take() {
                Some(path) => {
                    let file = File::create(&path)
                        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    generate(&config, BufWriter::new(file))?;
                }
                None => {
                    generate(&config, io::stdout().lock())?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
