use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use diffest::cli::output::write_output;
use diffest::cli::{cmd_bound, cmd_csl, cmd_montecarlo, cmd_sweep, Config};
use diffest::Error;

/// Precision bounds for estimating momentum diffusion of a freely expanding
/// Gaussian wavepacket.
#[derive(Parser)]
#[command(name = "diffest", version)]
struct Cli {
    /// Worker threads (default: $DIFFEST_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bounds for every configured scheme at one parameter point.
    Bound {
        #[command(flatten)]
        common: Common,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Bounds on a grid of lambda, tau or squeezing (CSV).
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Minimum detectable collapse rate against r_C (CSV).
    Csl {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo check of Cramér–Rao saturation (CSV).
    Montecarlo {
        #[command(flatten)]
        common: Common,
        /// Seed; overrides montecarlo.seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(short, long)]
    config: PathBuf,
    /// Override a config entry, e.g. --set scenario.lambda="1e15 m^-2 s^-1".
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output file ("-" or absent for stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl Common {
    fn load(&self, extra: &[String]) -> diffest::Result<Config> {
        let text = std::fs::read_to_string(&self.config)
            .map_err(|e| Error::Config(format!("{}: {e}", self.config.display())))?;
        let mut overrides = self.overrides.clone();
        overrides.extend_from_slice(extra);
        Config::from_toml_with_overrides(&text, &overrides)
    }

    fn base_dir(&self) -> &Path {
        self.config.parent().unwrap_or(Path::new("."))
    }
}

fn configure_threads(flag: Option<usize>) -> diffest::Result<()> {
    let from_env = match std::env::var("DIFFEST_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("DIFFEST_THREADS must be a positive integer, got {v:?}")))?,
        ),
        Err(_) => None,
    };
    if let Some(n) = flag.or(from_env) {
        if n == 0 {
            return Err(Error::Config("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn degenerate(message: String) -> Self {
        Self {
            code: 3,
            message: format!("degenerate regime: {message}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_degenerate() {
            Self::degenerate(e.to_string())
        } else {
            Self {
                code: 2,
                message: e.to_string(),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Bound { common, json } => {
            let report = cmd_bound(&common.load(&[])?)?;
            let text = if json {
                serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))? + "\n"
            } else {
                report.to_text()
            };
            write_output(common.output.as_deref(), &text)?;
            match report.degenerate() {
                Some(m) => Err(Failure::degenerate(m)),
                None => Ok(()),
            }
        }
        Command::Sweep { common } => Ok(write_output(common.output.as_deref(), &cmd_sweep(&common.load(&[])?)?)?),
        Command::Csl { common } => {
            let text = cmd_csl(&common.load(&[])?, common.base_dir())?;
            Ok(write_output(common.output.as_deref(), &text)?)
        }
        Command::Montecarlo { common, seed } => {
            let extra: Vec<String> = seed.map(|s| format!("montecarlo.seed={s}")).into_iter().collect();
            Ok(write_output(
                common.output.as_deref(),
                &cmd_montecarlo(&common.load(&extra)?)?,
            )?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("diffest: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
