use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ptwall::{run, CliError, Command, Options};

#[derive(Parser)]
#[command(
    name = "ptwall",
    version,
    about = "Wall-crossing and rational generating functions for stable pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Tables of the S, U and Lie coefficients for the scenario's `coeffs` queries.
    Coeffs(Common),
    /// DT classes under a change of Kähler vector.
    Wallcross(Common),
    /// Certified stable-pair generating functions.
    Ptgen(Common),
    /// Series coefficients up to `--n-max`.
    Expand(Common),
    /// Runs every certificate and consistency check.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Last coefficient printed by `expand`.
    #[arg(long, default_value_t = 10)]
    n_max: i64,
    /// Overrides the coefficient ring truncation.
    #[arg(long)]
    truncation: Option<u32>,
    /// Disables the shared cache of stable-pair values.
    #[arg(long)]
    no_memo: bool,
    /// Adds the widened-range and identity wall-crossing checks to `verify`.
    #[arg(long)]
    oracle: bool,
    /// Prints per-query wall-clock time to stderr.
    #[arg(long)]
    timing: bool,
    /// Writes the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, c) = match cli.command {
        Sub::Coeffs(c) => (Command::Coeffs, c),
        Sub::Wallcross(c) => (Command::Wallcross, c),
        Sub::Ptgen(c) => (Command::Ptgen, c),
        Sub::Expand(c) => (Command::Expand, c),
        Sub::Verify(c) => (Command::Verify, c),
    };
    let opts = Options {
        n_max: c.n_max,
        truncation: c.truncation,
        no_memo: c.no_memo,
        oracle: c.oracle,
        timing: c.timing,
    };
    let result = std::fs::read_to_string(&c.scenario)
        .map_err(|e| CliError::Validation(format!("{}: {e}", c.scenario.display())))
        .and_then(|text| run(&text, cmd, &opts))
        .and_then(|report| match &c.out {
            Some(path) => std::fs::write(path, &report)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display()))),
            None => {
                print!("{report}");
                Ok(())
            }
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
