use std::path::PathBuf;
use std::process::ExitCode;

use ati_cli::commands::{run_lineout, run_pmd, run_psf_sweep, run_scan, run_tunnel_times};
use ati_cli::verify::run_verify;
use ati_cli::{CliError, Overrides, RunConfig};
use clap::{Parser, Subcommand};

/// Husimi-averaged direct-ATI momentum distributions in bichromatic fields
/// with a quantum weak component.
#[derive(Parser)]
#[command(name = "ati", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML config, or a `*.meta.json` from an earlier run.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Worker threads; overrides ATI_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Averaged momentum distribution on the configured grid.
    Pmd(Common),
    /// Averaged yield along p_y = 0.
    Lineout(Common),
    /// Lineout moments against the mean ω intensity.
    Scan(Common),
    /// Husimi-weighted statistics of Im t_sp per ionization event.
    TunnelTimes(Common),
    /// Photon-statistics-force saddles over the configured (r, g) pairs.
    PsfSweep(Common),
    /// Runs the self-check gates; exit code 2 if any fails.
    Verify(Common),
}

fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    let from_env = std::env::var("ATI_THREADS").ok();
    let n = match (flag, from_env) {
        (Some(n), _) => Some(n),
        (None, Some(s)) => Some(s.trim().parse().map_err(|_| CliError::Config(format!("ATI_THREADS: not a count: `{s}`")))?),
        (None, None) => None,
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Config("threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    Ok(())
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(&common.overrides);
    init_threads(common.threads)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, which) = match &cli.command {
        Command::Pmd(c) => (c, "pmd"),
        Command::Lineout(c) => (c, "lineout"),
        Command::Scan(c) => (c, "scan"),
        Command::TunnelTimes(c) => (c, "tunnel-times"),
        Command::PsfSweep(c) => (c, "psf-sweep"),
        Command::Verify(c) => (c, "verify"),
    };
    let cfg = load(common)?;
    let files = match which {
        "pmd" => run_pmd(&cfg)?,
        "lineout" => run_lineout(&cfg)?,
        "scan" => run_scan(&cfg)?,
        "tunnel-times" => run_tunnel_times(&cfg)?,
        "psf-sweep" => run_psf_sweep(&cfg)?,
        _ => {
            let gates = run_verify(&cfg)?;
            for g in &gates {
                println!("{g}");
            }
            let failed: Vec<String> = gates.into_iter().filter(|g| !g.passed).map(|g| g.name).collect();
            return if failed.is_empty() { Ok(()) } else { Err(CliError::Gates(failed)) };
        }
    };
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
