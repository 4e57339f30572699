use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pulsetrain::commands::{cmd_bounds, cmd_controllability, cmd_fixedpoints, cmd_simulate};
use pulsetrain::config::{RunConfig, PRESETS};
use pulsetrain::{Error, ProcessKind};

#[derive(Parser)]
#[command(name = "pulsetrain", version, about = "Pulse-train control of thermal rotor ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration (licl-5K when neither this nor --config is given).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory, overriding the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Kinematic bounds and persistence durations over the j_max sweep.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Greedy pulse train in the truncated and the enlarged basis.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Dynamical Lie algebra dimensions against the controllability counts.
    Controllability {
        #[command(flatten)]
        common: Common,
        /// Comma-separated j_max values.
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3])]
        j_max: Vec<u32>,
        /// Defaults to the configured process.
        #[arg(long)]
        process: Option<ProcessKind>,
    },
    /// Fixed-point analysis of the configured strategy.
    Fixedpoints {
        #[command(flatten)]
        common: Common,
        /// Overrides the configured j_max.
        #[arg(long)]
        j_max: Option<u32>,
        /// Run even when the basis exceeds the dimension guard.
        #[arg(long)]
        force: bool,
    },
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), Error> {
    let cfg = match (&common.config, &common.preset) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => RunConfig::preset(PRESETS[0])?,
    };
    cfg.validate()?;
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&out).map_err(|e| Error::Io {
        path: out.clone(),
        source: e,
    })?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, Error> {
    match cli.command {
        Command::Bounds { common } => {
            let (cfg, out) = load(&common)?;
            Ok(cmd_bounds(&cfg, &out)?.files)
        }
        Command::Simulate { common } => {
            let (cfg, out) = load(&common)?;
            let res = cmd_simulate(&cfg, &out)?;
            for (tag, run) in [("idealized", &res.idealized), ("physical", &res.physical)] {
                let r = &run.record;
                eprintln!(
                    "{tag}: {} kicks, efficiency {:.4}, duration {:.4} T_rot",
                    r.entries.len(),
                    r.final_efficiency,
                    r.final_duration.total
                );
                for w in &r.warnings {
                    eprintln!("warning ({tag}): {w}");
                }
            }
            Ok(res.files)
        }
        Command::Controllability { common, j_max, process } => {
            let (cfg, out) = load(&common)?;
            if let Some(j) = j_max.iter().find(|&&j| j == 0) {
                return Err(Error::Config(format!("j_max must be at least 1, got {j}")));
            }
            let process = process.unwrap_or(cfg.process);
            Ok(cmd_controllability(&j_max, process, &cfg.hash(), &out)?.files)
        }
        Command::Fixedpoints { common, j_max, force } => {
            let (mut cfg, out) = load(&common)?;
            if let Some(j) = j_max {
                cfg.j_max = j;
                cfg.j_sim = cfg.j_sim.max(j);
            }
            Ok(cmd_fixedpoints(&cfg, force, &out)?.files)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidInput(_) | Error::NotApplicable(_) => 2,
        Error::Numerical { .. } | Error::Structure(_) => 3,
        Error::Io { .. } => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
