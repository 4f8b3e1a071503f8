use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qmetro::estimation::NumericalConfig;
use qmetro::harness::{
    read_config, render_certificate, render_fig3, render_fig4, render_fullprob, render_mc,
    render_sweep, HarnessError, HarnessResult, Options, Report, CERTIFICATE_TOL,
};

/// Qubit phase-estimation simulations and Fisher-information reports.
///
/// Exit status: 0 when every row is clean, 1 on runtime errors or when any
/// row carries an error, 2 when arguments or the configuration are invalid.
#[derive(Parser, Debug)]
#[command(name = "qmetro", version)]
struct Cli {
    /// Seed for Monte Carlo runs (overrides the `seed` config key).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Central-difference step for every numeric derivative.
    #[arg(long, global = true, default_value_t = 1e-5)]
    fd_step: f64,

    /// Certificate tolerance on |F_tau_theta| and |F_tau_phi|.
    #[arg(long, global = true, default_value_t = CERTIFICATE_TOL)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ancilla success probability over tau in [0, 2pi].
    ///
    /// CSV columns: tau,p_plus (201 rows).
    Fig3 {
        #[arg(long)]
        out: PathBuf,
    },
    /// Fisher information of the coherent and entanglement-based protocols
    /// under ancilla noise, tau in [0, pi].
    ///
    /// CSV columns: f,tau,fi_coh,fi_ent,fi_coh_numeric,abs_error,tol,error.
    Fig4 {
        /// Comma-separated noise strengths in [0, 1].
        #[arg(long, value_delimiter = ',', default_value = "0.95,0.97,0.99")]
        f: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the outputs requested by a configuration on its grid.
    ///
    /// CSV columns: tau,theta,phi, then per output: p_<outcome>...;
    /// fi_tau[_ref,_abs_error,_tol]; fi_<i>_<j>[_ref,_abs_error,_tol] for the
    /// six upper-triangle entries; qfi_tau[_ref,_abs_error,_tol];
    /// verdict,max_offdiag; and a final error column.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Block-diagonality certificate at every grid point, as JSON.
    ///
    /// Keys: points[] {lambda, fi, verdict, witness | error} and
    /// summary {agnostic_count, errors, max_offdiag, tol, total}.
    Certificate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeated maximum-likelihood estimation of tau from the CCS ancilla.
    ///
    /// CSV columns: batch,estimate; footer rows sample_variance, cr_bound,
    /// ratio and saturated.
    Mc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare Born-rule joint probabilities of the standard CCS setting with
    /// both candidate row labelings of the closed form, as JSON.
    Fullprob {
        /// Optional grid (standard ccs setting only); a built-in grid otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> HarnessResult<Report> {
    let numerics = NumericalConfig::new(cli.fd_step, NumericalConfig::default().prob_floor)
        .map_err(|e| HarnessError::Usage(format!("--fd-step: {e}")))?;
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(HarnessError::Usage(format!("--tol must be positive, got {}", cli.tol)));
    }
    let opts = Options {
        numerics,
        tol: cli.tol,
        seed: cli.seed,
    };
    let (report, out) = match cli.command {
        Command::Fig3 { out } => (render_fig3()?, out),
        Command::Fig4 { f, out } => (render_fig4(&f, &opts)?, out),
        Command::Sweep { config, out } => (render_sweep(&read_config(&config)?, &opts)?, out),
        Command::Certificate { config, out } => {
            (render_certificate(&read_config(&config)?, &opts)?, out)
        }
        Command::Mc { config, out } => (render_mc(&read_config(&config)?, &opts)?, out),
        Command::Fullprob { config, out } => {
            let spec = config.map(|c| read_config(&c)).transpose()?;
            (render_fullprob(spec.as_ref())?, out)
        }
    };
    report.write_to(&out)?;
    Ok(report)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) if report.row_errors == 0 => ExitCode::SUCCESS,
        Ok(report) => {
            eprintln!(
                "qmetro: {} of {} rows carry errors (see the error column)",
                report.row_errors, report.rows
            );
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("qmetro: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
