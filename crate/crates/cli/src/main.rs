use std::path::PathBuf;
use std::process::ExitCode;

use chq_cli::check::CheckOptions;
use chq_cli::commands::{self, CmdResult, Failure};
use chq_cli::config::{parse_config, Config};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chq", version, about = "Variational solver for the planar logarithmic Choquard equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Samples per axis
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Half width L of the box [-L, L)^2
    #[arg(long = "box", global = true)]
    half_width: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant battery
    Check {
        #[arg(long, hide = true, allow_hyphen_values = true)]
        corrupt_origin: Option<f64>,
    },
    /// Descend from a single admissible bump
    Solve,
    /// Lowest-energy state (needs ess inf a > 0)
    GroundState,
    /// Descents from the simplex of a k+1 bump family
    Multistart {
        #[arg(long)]
        k: Option<usize>,
    },
    /// Convolve a dumped density with a log kernel
    Convolve {
        input: PathBuf,
        #[arg(long, default_value = "b0")]
        kernel: String,
    },
    /// Print grid, potential and admissibility
    Info,
}

fn load(cli: &Cli) -> Result<Config, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => Config::default(),
    };
    if let Some(n) = cli.n {
        cfg = cfg.with_override("n", &n.to_string())?;
    }
    if let Some(l) = cli.half_width {
        cfg = cfg.with_override("box", &l.to_string())?;
    }
    if let Some(s) = cli.seed {
        cfg = cfg.with_override("seed", &s.to_string())?;
    }
    if let Command::Multistart { k: Some(k) } = cli.command {
        cfg = cfg.with_override("k", &k.to_string())?;
    }
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> CmdResult {
    let out = cli.out.clone().unwrap_or_else(commands::default_out);
    if let Command::Check { corrupt_origin } = cli.command {
        return commands::cmd_check(&CheckOptions { corrupt_origin, seed: cli.seed.unwrap_or(0) });
    }
    let cfg = load(cli)?;
    match &cli.command {
        Command::Check { .. } => unreachable!(),
        Command::Solve => commands::cmd_solve(&cfg, &out),
        Command::GroundState => commands::cmd_ground_state(&cfg, &out),
        Command::Multistart { .. } => commands::cmd_multistart(&cfg, &out),
        Command::Convolve { input, kernel } => {
            commands::cmd_convolve(&cfg, &out, input, commands::parse_kernel(kernel)?)
        }
        Command::Info => commands::cmd_info(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{f}");
            f.code
        }
    };
    ExitCode::from(code as u8)
}
