//! Command-line front end: theoretical and empirical LSD moments, ECDF plot
//! data, MA/AR order determination, trace-based white-noise tests, law
//! residual checks and raw sample export.
//!
//! Exit codes: 0 success, 2 validation error, 3 capacity error, 4 I/O error.

mod commands;
mod output;
mod poly;

use autocov::Error;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "autocov", version, about = "Spectral limits of sample autocovariance polynomials for high-dimensional MA(q)/IVAR processes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
pub(crate) struct ModelArgs {
    /// Built-in model index 1..=6.
    #[arg(long, conflicts_with = "lambda")]
    pub(crate) model: Option<usize>,
    /// Custom scalar MA coefficients "1,0.5,-1/3" (lambda_0 must be 1).
    #[arg(long)]
    pub(crate) lambda: Option<String>,
    /// Aspect ratio y = lim p/n (rational literal: "1", "0.5", "1/2").
    #[arg(long, default_value = "1")]
    pub(crate) y: String,
}

#[derive(Args, Clone)]
pub(crate) struct SizeArgs {
    /// Sample length.
    #[arg(long, default_value_t = 300)]
    pub(crate) n: usize,
    /// Dimension.
    #[arg(long, default_value_t = 300)]
    pub(crate) p: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 1)]
    pub(crate) seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Theoretical LSD moments of a symmetric polynomial, with optional
    /// Monte Carlo comparison.
    Moments {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        size: SizeArgs,
        /// Polynomial, e.g. "G1*G1t" or "G1*G1t + G2*G2t".
        #[arg(long)]
        poly: String,
        /// Highest moment order.
        #[arg(long, default_value_t = 2)]
        h: usize,
        /// Monte Carlo replications (0 = theory only).
        #[arg(long, default_value_t = 0)]
        reps: usize,
        /// Matrix trace-functional dimension for matrix-coefficient models.
        #[arg(long, default_value_t = 4096)]
        tau_p: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ECDF plot data (CSV per lag) for a polynomial shape.
    Ecdf {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        size: SizeArgs,
        /// Comma-separated lag list, e.g. "1,2,3,4".
        #[arg(long, default_value = "1,2,3,4")]
        lags: String,
        /// Shape at each lag: "lagsq" (G_u G_u*), "sym" ((G_u+G_u*)/2),
        /// "sumsq" (G_u G_u* + G_{u+1} G_{u+1}*).
        #[arg(long, default_value = "lagsq")]
        shape: String,
        /// Explicit polynomial instead of a per-lag shape (single CSV).
        #[arg(long)]
        poly: Option<String>,
        /// Output directory (created on demand).
        #[arg(long)]
        out: PathBuf,
    },
    /// MA or AR order determination.
    Order {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        size: SizeArgs,
        /// "ma" or "ar".
        #[arg(long, default_value = "ma")]
        mode: String,
        /// Largest MA lag candidate.
        #[arg(long, default_value_t = 4)]
        umax: usize,
        /// Largest AR order candidate.
        #[arg(long, default_value_t = 4)]
        smax: usize,
        /// Null-calibration replicates.
        #[arg(long, default_value_t = 50)]
        null_reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace-based white-noise test on simulated data.
    Tracetest {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        size: SizeArgs,
        /// Statistic: "g0", "g1g1t" or "g1pg1t".
        #[arg(long, default_value = "g0")]
        stat: String,
        /// Replications; > 1 reports a rejection rate across replicates.
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residual checks of the closed-form law equations.
    Laws {
        /// "biquadratic", "silverstein", "cgf" or "all".
        #[arg(long, default_value = "all")]
        check: String,
        #[arg(long, default_value = "1")]
        y: String,
        /// Evaluation point, e.g. "0+4i" or "3+3i".
        #[arg(long, default_value = "0+4i")]
        z: String,
        /// Truncation order of the moment series.
        #[arg(long = "N", default_value_t = 12)]
        n_trunc: usize,
        /// Lag for the compound-free-Poisson checks.
        #[arg(long, default_value_t = 1)]
        u: usize,
        /// Scalar coefficients for the CGF check.
        #[arg(long, default_value = "1,0.5")]
        lambda: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a sample and export it as CSV.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        size: SizeArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("AUTOCOV_THREADS") {
        if let Ok(k) = threads.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Capacity(_) => 3,
                Error::Io(_) => 4,
                _ => 2,
            })
        }
    }
}

fn run(cli: Cli) -> autocov::Result<()> {
    match cli.cmd {
        Cmd::Moments {
            model,
            size,
            poly,
            h,
            reps,
            tau_p,
            out,
        } => commands::moments(&model, &size, &poly, h, reps, tau_p, out.as_deref()),
        Cmd::Ecdf {
            model,
            size,
            lags,
            shape,
            poly,
            out,
        } => commands::ecdf(&model, &size, &lags, &shape, poly.as_deref(), &out),
        Cmd::Order {
            model,
            size,
            mode,
            umax,
            smax,
            null_reps,
            out,
        } => commands::order(&model, &size, &mode, umax, smax, null_reps, out.as_deref()),
        Cmd::Tracetest {
            model,
            size,
            stat,
            reps,
            out,
        } => commands::tracetest(&model, &size, &stat, reps, out.as_deref()),
        Cmd::Laws {
            check,
            y,
            z,
            n_trunc,
            u,
            lambda,
            out,
        } => commands::laws(&check, &y, &z, n_trunc, u, &lambda, out.as_deref()),
        Cmd::Simulate { model, size, out } => commands::simulate(&model, &size, &out),
    }
}
