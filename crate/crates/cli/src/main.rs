//! `lagflow`: run flows, check recorded diagnostics, and probe the
//! Grassmannian and unitary-orbit machinery from the command line.
//!
//! Exit codes: 0 pass, 1 usage or input error, 2 blow-up, 3 check failed.

mod commands;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lagflow",
    version,
    about = "Lagrangian mean curvature flow on the torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the potential flow.
    Flow {
        #[command(subcommand)]
        action: FlowAction,
    },
    /// Check a diagnostics stream against the monotone quantities.
    Monitor {
        #[command(subcommand)]
        action: MonitorAction,
    },
    /// Geodesics and the concavity certificate on the Grassmannian.
    Grassmann {
        #[command(subcommand)]
        action: GrassmannAction,
    },
    /// Rotated S-tensor checks.
    Unitary {
        #[command(subcommand)]
        action: UnitaryAction,
    },
}

#[derive(Subcommand)]
enum FlowAction {
    /// Run a JSON configuration; write diagnostics and snapshots.
    Run { config: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Hypothesis {
    /// D^2 u positive definite: s_min up, logdet_sup down, omega_min up, lambda_min > 0.
    Convex,
    /// All eigenvalues inside (-1, 1).
    #[value(name = "unit_ball")]
    UnitBall,
    /// Only the angle oscillation.
    None,
}

#[derive(Subcommand)]
enum MonitorAction {
    Check {
        diagnostics: PathBuf,
        #[arg(long, value_enum, default_value = "none")]
        hypothesis: Hypothesis,
    },
}

#[derive(Subcommand)]
enum GrassmannAction {
    /// Integrate the geodesic from diag(lambda).
    Geodesic {
        /// Base eigenvalues, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        lambda: Vec<f64>,
        /// Initial velocity as a row-major upper triangle (default: identity),
        /// rescaled to unit speed.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        velocity: Option<Vec<f64>>,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        s_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Sample geodesic directions and check concavity of phi_0.
    Certificate {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum UnitaryAction {
    /// Validate P, Q and evaluate S_U on a Hessian.
    Check {
        matrix: PathBuf,
        /// Also test that every eigenvalue lies in (-1, 1).
        #[arg(long)]
        corollary_b: bool,
    },
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("LAGFLOW_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| {
            anyhow::anyhow!("LAGFLOW_THREADS must be a positive integer, got {v:?}")
        })?;
        if n == 0 {
            anyhow::bail!("LAGFLOW_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    configure_threads()?;
    match cli.command {
        Command::Flow {
            action: FlowAction::Run { config },
        } => commands::flow_run(&config),
        Command::Monitor {
            action:
                MonitorAction::Check {
                    diagnostics,
                    hypothesis,
                },
        } => commands::monitor_check(&diagnostics, hypothesis),
        Command::Grassmann { action } => match action {
            GrassmannAction::Geodesic {
                lambda,
                velocity,
                s_end,
                step,
            } => commands::geodesic(&lambda, velocity.as_deref(), s_end, step),
            GrassmannAction::Certificate {
                lambda,
                samples,
                seed,
            } => commands::certificate(&lambda, samples, seed),
        },
        Command::Unitary {
            action:
                UnitaryAction::Check {
                    matrix,
                    corollary_b,
                },
        } => commands::unitary_check(&matrix, corollary_b),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
