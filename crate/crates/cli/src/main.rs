use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use topovqe_cli::{cmd_exact, cmd_spectrum, cmd_sweep, CliError, Common};

#[derive(Parser)]
#[command(name = "topovqe", version, about = "VQE sweeps and exact references for the open SSH and Kitaev chains")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Overrides the seed in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for CSV and JSON outputs.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run a VQE sweep described by a TOML config.
    Sweep { config: PathBuf },
    /// Exact ground-state diagnostics over the config's grid.
    Exact { config: PathBuf },
    /// SSH single-particle spectra and the edge-splitting fit.
    Spectrum {
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        /// Comma-separated chain lengths.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value = "spectrum")]
        name: String,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    let common = Common { seed: cli.global.seed, out_dir: cli.global.out_dir };
    match cli.command {
        Command::Sweep { config } => {
            let s = cmd_sweep(&config, &common)?;
            Ok(format!(
                "{} N={}: {} points, {} accepted, min fidelity {}",
                s.model,
                s.n_sites,
                s.points,
                s.accepted_points,
                s.min_fidelity.map_or("n/a".into(), |f| format!("{f:.4}"))
            ))
        }
        Command::Exact { config } => {
            let s = cmd_exact(&config, &common)?;
            Ok(format!("{} N={}: {} exact points", s.model, s.n_sites, s.points))
        }
        Command::Spectrum { delta, sizes, name } => {
            let s = cmd_spectrum(delta, &sizes, &name, &common)?;
            Ok(match (s.xi, s.r_squared, s.notice) {
                (Some(xi), Some(r2), _) => format!("xi = {xi:.6}, R^2 = {r2:.8}"),
                (_, _, Some(n)) => n,
                _ => String::new(),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
