use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qzda_cli::{commands, config, CliError};

#[derive(Parser, Debug)]
#[command(name = "qzda", version, about = "Quantized zero-dynamics attack analysis and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print transmission zeros, classification, |CB| and output-error bounds.
    Analyze {
        config: PathBuf,
        /// Emit JSON instead of a text report.
        #[arg(long)]
        json: bool,
    },
    /// Simulate the configured scenario and write the result bundle.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Intersample grid points per sampling period.
        #[arg(long)]
        substeps: Option<usize>,
    },
    /// Run the three benchmark attacks and print a comparison table.
    ReproPaper {
        #[arg(long, default_value = "qzda-repro")]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { config, json } => {
            let analysis = commands::analyze(&config::load(&config)?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&analysis).expect("analysis serializes"));
            } else {
                print!("{}", commands::render_analysis(&analysis));
            }
        }
        Command::Run { config, out, substeps } => {
            let cfg = config::load(&config)?;
            let (dir, s) = commands::run(&cfg, out.as_deref(), substeps)?;
            println!(
                "{}: {} of {} steps, observed sup error {:.6e}, stealthy {}, degenerate {}",
                s.method, s.valid_steps, s.requested_horizon, s.observed_sup_error, s.stealthy, s.degenerate
            );
            println!("wrote {}", dir.display());
        }
        Command::ReproPaper { out } => {
            let rows = commands::repro(&out)?;
            print!("{}", commands::render_table(&rows));
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
