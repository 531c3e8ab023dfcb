use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regcert_cli::config::PETERSEN_DEMO;
use regcert_cli::output::{evaluate, write_all, Status};
use regcert_cli::{external, run, CliError, ExperimentConfig, Overrides};
use regcert_core::Tolerance;

#[derive(Parser)]
#[command(name = "regcert", version, about = "Least-squares LTI identification with error certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Fit a model to a CSV time series, one state per row.
    Fit {
        data: PathBuf,
        #[arg(long, default_value = "out/fit")]
        out_dir: PathBuf,
        /// Relative rank tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Run a shipped experiment.
    Demo {
        which: Demo,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    Petersen,
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Relative rank tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            steps: self.steps,
            output_dir: self.out_dir.clone(),
            rank_tolerance: self.tolerance,
        }
    }
}

fn experiment(cfg: ExperimentConfig, flags: &Flags) -> Result<(), CliError> {
    let cfg = cfg.apply(&flags.overrides())?;
    let out = run(&cfg)?;
    let written = write_all(&out, &cfg.output_dir)?;
    let checks = evaluate(&out);
    for check in &checks {
        println!("{}", check.line());
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    if checks.iter().any(|c| c.status == Status::Fail) {
        eprintln!("some checks failed; see report.txt");
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, flags } => experiment(ExperimentConfig::load(&config)?, &flags),
        Command::Demo { which: Demo::Petersen, flags } => experiment(ExperimentConfig::from_json(PETERSEN_DEMO)?, &flags),
        Command::Fit { data, out_dir, tolerance } => {
            let tol = Tolerance::Relative(tolerance.unwrap_or(regcert_core::DEFAULT_RANK_TOLERANCE));
            tol.validate().map_err(|e| CliError::config("--tolerance", e.to_string()))?;
            let fit = external::fit_external(&data, tol)?;
            let last = fit.records.last().expect("at least one transition");
            println!("states: {}, dimension: {}, final rank: {}", fit.states.ncols(), fit.states.nrows(), last.observed_rank);
            for p in external::write_fit(&fit, &out_dir)? {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are validation errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
