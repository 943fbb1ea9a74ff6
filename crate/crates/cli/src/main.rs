//! `threebody`: scans, fits and tables for three-body loss near Feshbach
//! resonances. Data go to stdout (or `--out`); summary lines go to stderr.
//!
//! Exit codes: 0 success, 2 bad input or unreadable file, 3 outside the
//! regime a formula covers, 4 numerical failure or failed check.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use threebody_core::Error;

use commands::Outcome;
use config::Settings;
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "threebody", version, about = "Three-body loss rates near narrow Feshbach resonances")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Write data here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance; its meaning depends on the subcommand (see each help).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Prefix the output with the invocation and summary.
    #[arg(long, global = true)]
    annotate: bool,
    /// key = value file presetting constants and tolerances; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Effective ranges and classes for a resonance catalog.
    ReffTable(commands::ReffTable),
    /// Scattering length, effective range and bound states of a model potential.
    /// --tol: largest accepted fit residual.
    TwobodyFit(commands::TwobodyFit),
    /// Solve for the depth and barrier that give a target (a, r_eff).
    /// --tol: relative tolerance on the targets.
    Tune(commands::Tune),
    /// Efimov exponent at unitarity.
    S0,
    /// Zero-range channel potentials along a hyperradius grid, with the
    /// small-R coefficient at unitarity. --tol is not used.
    ZrpCurve(commands::ZrpCurve),
    /// Rates along a grid of scattering lengths at fixed r_eff.
    /// --tol: step tolerance of the numeric propagation.
    RatesScan(commands::RatesScan),
    /// Fit the region boundaries alpha, beta to peak positions of several scans.
    /// --tol: largest relative deviation of the peak spacing from pi.
    FitAlphaBeta(commands::FitAlphaBeta),
    /// Fit the low-energy power law of the inelastic probability.
    /// --tol: relative tolerance on the exponent.
    ThresholdCheck(commands::ThresholdCheck),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::Parse { .. } => 2,
        Error::Regime(_) => 3,
        Error::Numerical(_) => 4,
    }
}

fn settings(cli: &Cli) -> Result<Settings, Error> {
    let mut s = match &cli.config {
        None => Settings::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
            Settings::parse(&text).map_err(|e| match e {
                Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", path.display()) },
                other => other,
            })?
        }
    };
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Input(format!("--tol must be positive, got {t}")));
        }
        s.tol = Some(t);
    }
    Ok(s)
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let s = settings(cli)?;
    match &cli.command {
        Command::ReffTable(a) => commands::reff_table(a, &s),
        Command::TwobodyFit(a) => commands::twobody_fit(a, &s),
        Command::Tune(a) => commands::tune(a, &s),
        Command::S0 => commands::s0(),
        Command::ZrpCurve(a) => commands::zrp_curve_cmd(a, &s),
        Command::RatesScan(a) => commands::rates_scan(a, &s),
        Command::FitAlphaBeta(a) => commands::fit_alpha_beta_cmd(a, &s),
        Command::ThresholdCheck(a) => commands::threshold_check(a, &s),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let invocation = cli.annotate.then(|| {
        let args: Vec<String> = std::env::args().skip(1).collect();
        format!("threebody {}", args.join(" "))
    });
    let text = outcome.report.render(cli.format, invocation.as_deref());
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    for (k, v) in &outcome.report.summary {
        eprintln!("{k}: {v}");
    }
    match outcome.deferred {
        Some(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        None => ExitCode::SUCCESS,
    }
}
