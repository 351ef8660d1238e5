//! `gkp-sim`: command-line front end for the GKP dissipation simulator.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gkp_core::analysis::InitialState;

use crate::commands::Context;
use crate::config::{parse_epsilons, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{resolve_out_dir, Failure};

#[derive(Parser, Debug)]
#[command(name = "gkp-sim", version, about = "Dissipative GKP code simulator")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: config `out_dir`, then $GKP_SIM_OUT_DIR, then `results`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Allow experiments at epsilon <= 1/20.
    #[arg(long, global = true)]
    long_running: bool,
    /// Fock dimension override.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InitialArg {
    Random,
    Codeword,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the convergence rate kappa.
    Kappa {
        /// `a,b,c` or `start:end:count`.
        #[arg(long)]
        epsilons: Option<String>,
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Build codewords, write their coefficients and diagnostics.
    Codewords {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Fit the decay rate of Tr(W rho) from random initial states.
    Lyapunov {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        initial: Option<InitialArg>,
    },
    /// Logical error rates with and without stabilization under photon loss.
    QecSim {
        #[arg(long)]
        epsilon: Option<f64>,
        /// Photon-loss rate.
        #[arg(long)]
        kappa1: Option<f64>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        rtol: Option<f64>,
        #[arg(long)]
        atol: Option<f64>,
        /// Repeat at 1.5 times the dimension.
        #[arg(long)]
        truncation_check: bool,
    },
    /// Run the operator-identity verification suite.
    Check {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Compute the logical operators J_x, J_y, J_z.
    LogicalOps {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        states: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Applies command-line flags on top of the file configuration.
fn merge(cli: &Cli, cfg: &mut RunConfig) -> CliResult<()> {
    let dim = cli.dim;
    match &cli.command {
        Command::Kappa { epsilons, eta } => {
            if let Some(spec) = epsilons {
                cfg.kappa.epsilons = parse_epsilons(spec)?;
            }
            set(&mut cfg.kappa.eta, *eta);
        }
        Command::Codewords { epsilon, eta } => {
            let c = &mut cfg.codewords;
            set(&mut c.epsilon, *epsilon);
            set(&mut c.eta, *eta);
            c.dim = dim.or(c.dim);
        }
        Command::Lyapunov { epsilon, eta, trials, seed, initial } => {
            let c = &mut cfg.lyapunov;
            set(&mut c.epsilon, *epsilon);
            set(&mut c.eta, *eta);
            set(&mut c.n_trials, *trials);
            set(&mut c.seed, *seed);
            set(
                &mut c.initial,
                initial.map(|i| match i {
                    InitialArg::Random => InitialState::Random,
                    InitialArg::Codeword => InitialState::Codeword,
                }),
            );
            c.dim = dim.or(c.dim);
        }
        Command::QecSim { epsilon, kappa1, t_final, rtol, atol, .. } => {
            let c = &mut cfg.qec_sim;
            set(&mut c.epsilon, *epsilon);
            c.kappa1 = kappa1.or(c.kappa1);
            c.t_final = t_final.or(c.t_final);
            set(&mut c.solver.rtol, *rtol);
            set(&mut c.solver.atol, *atol);
            c.dim = dim.or(c.dim);
        }
        Command::Check { epsilon, eta } => {
            let c = &mut cfg.check;
            set(&mut c.epsilon, *epsilon);
            set(&mut c.eta, *eta);
            c.dim = dim.or(c.dim);
        }
        Command::LogicalOps { epsilon, seed, states, tol } => {
            let c = &mut cfg.logical_ops;
            set(&mut c.epsilon, *epsilon);
            set(&mut c.seed, *seed);
            set(&mut c.random_states, *states);
            set(&mut c.options.tol, *tol);
            c.dim = dim.or(c.dim);
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<Option<PathBuf>> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    merge(cli, &mut cfg)?;
    if cli.print_config {
        print!("{}", cfg.to_toml()?);
        return Ok(None);
    }
    let ctx = Context {
        out_dir: resolve_out_dir(cli.out_dir.clone(), cfg.out_dir.clone()),
        long_running: cli.long_running,
    };
    let path = match &cli.command {
        Command::Kappa { .. } => commands::cmd_kappa(&ctx, &cfg.kappa),
        Command::Codewords { .. } => commands::cmd_codewords(&ctx, &cfg.codewords),
        Command::Lyapunov { .. } => commands::cmd_lyapunov(&ctx, &cfg.lyapunov),
        Command::QecSim { truncation_check, .. } => {
            commands::cmd_qec_sim(&ctx, &cfg.qec_sim, *truncation_check)
        }
        Command::Check { .. } => commands::cmd_check(&ctx, &cfg.check),
        Command::LogicalOps { .. } => commands::cmd_logical_ops(&ctx, &cfg.logical_ops),
    }?;
    Ok(Some(path))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Some(path)) => {
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    let failure = Failure::from_error(e);
    eprintln!("error: {e}");
    if let Ok(json) = serde_json::to_string(&failure) {
        eprintln!("{json}");
    }
    ExitCode::from(failure.exit_code as u8)
}
