use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use equibif_cli::config::{CounterexampleName, CounterexampleSection, Family, Format, ScanConfig};
use equibif_cli::{diagnose, read_config, scan_and_write, summary, CliError, Overrides};
use log::debug;

#[derive(Parser)]
#[command(
    name = "equibif",
    version,
    about = "Detect equivariant bifurcation instants along parameter sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scan described by a configuration file.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check a configuration file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a gate-locked counterexample (planar or spheres); both when omitted.
    Counterexample {
        name: Option<CounterexampleName>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the circle-symmetric pitchfork.
    Sandbox {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of csv, json, svg.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for the randomized spot checks.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn overrides(self) -> Overrides {
        Overrides {
            out: self.out,
            formats: self.format,
            threads: self.threads,
            seed: self.seed,
        }
    }
}

fn load_or(config: Option<PathBuf>, family: Family) -> Result<ScanConfig, CliError> {
    let cfg = match config {
        Some(path) => read_config(&path)?,
        None => ScanConfig::for_family(family),
    };
    if cfg.family != family {
        return Err(CliError::Config(vec![equibif_cli::Diagnostic {
            path: "family".into(),
            message: format!("expected {family:?} for this subcommand").to_lowercase(),
        }]));
    }
    Ok(cfg)
}

fn scan(cfg: &ScanConfig) -> Result<(), CliError> {
    let (report, written) = scan_and_write(cfg)?;
    for line in summary(&report) {
        println!("{line}");
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Scan { config, common } => {
            let mut cfg = read_config(&config)?;
            common.overrides().apply(&mut cfg);
            scan(&cfg)
        }
        Command::Validate { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| CliError::io(&config, e))?;
            let diagnostics = diagnose(&text);
            if diagnostics.is_empty() {
                println!("ok");
                Ok(())
            } else {
                Err(CliError::Config(diagnostics))
            }
        }
        Command::Counterexample { name, config, common } => {
            let mut base = load_or(config, Family::Counterexample)?;
            common.overrides().apply(&mut base);
            let names = match (name, &base.counterexample) {
                (Some(n), _) => vec![n],
                (None, Some(c)) => vec![c.name],
                (None, None) => vec![CounterexampleName::Planar, CounterexampleName::Spheres],
            };
            let nested = names.len() > 1;
            for n in names {
                let mut cfg = base.clone();
                let section = match &cfg.counterexample {
                    Some(c) => CounterexampleSection { name: n, ..c.clone() },
                    None => CounterexampleSection::named(n),
                };
                cfg.counterexample = Some(section);
                if nested {
                    cfg.output.dir = cfg.output.dir.join(format!("{n:?}").to_lowercase());
                }
                scan(&cfg)?;
            }
            Ok(())
        }
        Command::Sandbox { config, common } => {
            let mut cfg = load_or(config, Family::Sandbox)?;
            common.overrides().apply(&mut cfg);
            scan(&cfg)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EQUIBIF_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            debug!("exit code {}", e.exit_code());
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
