use std::path::PathBuf;
use std::process::ExitCode;

use adequacy::adequacy::DEFAULT_EPS_MW;
use adequacy::loss::{DEFAULT_MAX_ITER, DEFAULT_TOL_MW};
use adequacy::report::{
    self, CaseSelection, EvalOptions, LossSelection, Method, OutputFormat, RunConfig,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    version,
    about = "DNS/GNS and wheeling loss by DC load flow vs. max-flow/min-cut"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the case study on a network document.
    Run {
        #[arg(long)]
        network: PathBuf,
        /// 1, 2, 3 or all
        #[arg(long, default_value = "all")]
        case: CaseSelection,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        #[arg(long, value_enum, default_value_t = LossSelection::Both)]
        losses: LossSelection,
        /// Congestion margin (MW).
        #[arg(long, default_value_t = DEFAULT_EPS_MW)]
        eps: f64,
        /// Loss iteration tolerance (MW).
        #[arg(long, default_value_t = DEFAULT_TOL_MW)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        network,
        case,
        method,
        losses,
        eps,
        tol,
        max_iter,
        format,
        out,
    } = Cli::parse().command;

    let config = RunConfig {
        network_path: network,
        case,
        options: EvalOptions {
            cases: case.cases(),
            method,
            losses,
            eps_mw: eps,
            tol_mw: tol,
            max_iter,
        },
        format,
        out,
    };

    let outcome = match report::run(&config) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = report::render(&outcome.report, config.format);
    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if outcome.exit_code != 0 {
        eprintln!("warning: lossy flow did not converge within {max_iter} iterations");
    }
    ExitCode::from(outcome.exit_code as u8)
}
