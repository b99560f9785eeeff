use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use clustermem::sweep::SweepSpec;
use clustermem::verify::VerifyOptions;
use clustermem::{cmd_protocol, cmd_sweep_coefficients, cmd_sweep_variances, cmd_verify, CliError};
use clustermem_core::cluster::LINEAR4_TABLE;

#[derive(Parser)]
#[command(name = "clustermem", version, about = "Gaussian cluster-state quantum memory simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every invariant check and print residuals.
    Verify {
        /// Use this tolerance for every check.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Flip the sign of one network entry (harness self-test).
        #[arg(long, hide = true)]
        inject_network_sign_error: bool,
    },
    /// Tabulate C1, C2, C3 over a κ grid.
    SweepCoefficients {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 3.0)]
        kappa_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Tabulate nullifier variances per stage over an r grid.
    SweepVariances {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Repeat for several couplings; extra ones go to `<stem>.kappa-<κ>.csv`.
        #[arg(long, default_values_t = [1.5])]
        kappa: Vec<f64>,
        #[arg(long, default_value_t = 3.0)]
        r_max: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Run storage and retrieval for one config and emit a JSON report.
    Protocol {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Verify {
            tolerance,
            inject_network_sign_error,
        } => {
            let mut table = LINEAR4_TABLE;
            if inject_network_sign_error {
                table.root10[1][4] = -table.root10[1][4];
            }
            let report = cmd_verify(&VerifyOptions {
                tolerance_override: tolerance,
                network_table: table,
            })?;
            print!("{}", report.render());
        }
        Command::SweepCoefficients {
            out,
            svg,
            kappa_max,
            step,
        } => {
            cmd_sweep_coefficients(&SweepSpec::kappa(0.0, kappa_max, step), &out, svg.as_deref())?;
        }
        Command::SweepVariances {
            out,
            svg,
            kappa,
            r_max,
            step,
        } => {
            let specs: Vec<_> = kappa.iter().map(|&k| SweepSpec::r(0.0, r_max, step, k)).collect();
            for path in cmd_sweep_variances(&specs, &out, svg.as_deref())? {
                eprintln!("wrote {}", path.display());
            }
        }
        Command::Protocol { config, out } => {
            cmd_protocol(&config, out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
