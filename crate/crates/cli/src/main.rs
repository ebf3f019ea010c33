mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{load_file, resolve, FileConfig, Overrides, OUTPUT_DIR_ENV};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "pvvac", version, about = "Pauli-Villars regulated vacuum polarization toolkit")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for the numerical kernels (0 = all cores, 1 = sequential).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Artifact directory. Also settable through PVVAC_OUTPUT_DIR.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct Physics {
    /// Comma-separated m0,m1,m2.
    #[arg(long, value_parser = parse_masses)]
    masses: Option<[f64; 3]>,
    #[arg(long)]
    coupling: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Default, Clone)]
struct GridArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    box_length: Option<f64>,
    /// Charge of the gaussian source.
    #[arg(long)]
    charge: Option<f64>,
    /// Width of the gaussian source.
    #[arg(long)]
    width: Option<f64>,
}

#[derive(Args, Debug, Default, Clone)]
struct KernelArgs {
    #[arg(long)]
    kmax: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// PV coefficients, averaged cutoff and M(0) as JSON.
    Scheme {
        #[command(flatten)]
        physics: Physics,
    },
    /// Tabulate M(k), U(k) and their gap as CSV.
    Kernel {
        #[command(flatten)]
        physics: Physics,
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Tabulate the Uehling kernel and its distance to M(k) as CSV.
    Uehling {
        #[command(flatten)]
        physics: Physics,
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Screened linear-response potential of the configured source.
    SolveLinear {
        #[command(flatten)]
        physics: Physics,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Self-consistent saddle point of the configured source.
    SolveSc {
        #[command(flatten)]
        physics: Physics,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        damping: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Start from the linear-response solution instead of zero.
        #[arg(long)]
        warm_start: bool,
    },
    /// Run the property suite; exits 0 iff every check passes.
    Verify {
        #[arg(long, conflicts_with = "full")]
        quick: bool,
        #[arg(long)]
        full: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_masses(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad mass {t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected three masses, got {}", v.len()))
}

fn overrides(cli: &Cli) -> Overrides {
    let mut o = Overrides {
        output_dir: cli.output_dir.clone(),
        threads: cli.threads,
        ..Default::default()
    };
    let mut physics = |p: &Physics| {
        o.masses = p.masses;
        o.coupling = p.coupling;
        o.seed = p.seed;
    };
    match &cli.command {
        Command::Scheme { physics: p } => physics(p),
        Command::Kernel { physics: p, kernel } | Command::Uehling { physics: p, kernel } => {
            physics(p);
            o.k_max = kernel.kmax;
            o.points = kernel.points;
        }
        Command::SolveLinear { physics: p, grid } => {
            physics(p);
            grid_overrides(&mut o, grid);
        }
        Command::SolveSc {
            physics: p,
            grid,
            damping,
            max_iter,
            tol,
            ..
        } => {
            physics(p);
            grid_overrides(&mut o, grid);
            o.damping = *damping;
            o.max_iter = *max_iter;
            o.residual_tol = *tol;
        }
        Command::Verify { seed, .. } => o.seed = *seed,
    }
    o
}

fn grid_overrides(o: &mut Overrides, g: &GridArgs) {
    o.n = g.n;
    o.box_length = g.box_length;
    o.charge = g.charge;
    o.width = g.width;
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let cfg = resolve(file, &overrides(&cli), env_dir)?;
    commands::configure_execution(cfg.threads)?;
    match cli.command {
        Command::Scheme { .. } => commands::scheme(&cfg),
        Command::Kernel { .. } => commands::kernel(&cfg),
        Command::Uehling { .. } => commands::uehling(&cfg),
        Command::SolveLinear { .. } => commands::solve_linear(&cfg),
        Command::SolveSc { warm_start, .. } => commands::solve_sc(&cfg, warm_start),
        Command::Verify { full, .. } => commands::verify(&cfg, full),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pvvac: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
