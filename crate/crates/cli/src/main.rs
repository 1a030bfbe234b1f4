use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod io;

use commands::{ChainArgs, ConfigSource, Format};
use error::CliError;

/// Exit status when identification stops on its step budget.
const EXIT_BUDGET: u8 = 5;
const THREADS_ENV: &str = "FKGRAD_THREADS";

#[derive(Parser)]
#[command(name = "fkgrad", version, about = "Batched, differentiable forward kinematics for URDF robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ChainOpts {
    /// URDF file.
    urdf: PathBuf,
    /// Base link of the chain.
    #[arg(long)]
    base: String,
    /// End link of the chain.
    #[arg(long)]
    end: String,
}

#[derive(Args)]
struct InputOpts {
    /// Joint configurations: CSV (optional header) or JSON array of arrays.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    configs: Option<PathBuf>,
    /// Sample N configurations within the joint limits instead of reading a file.
    #[arg(long, value_name = "N")]
    random: Option<usize>,
    /// Seed for --random.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Leave wall-clock timing out of the output.
    #[arg(long)]
    no_timing: bool,
}

impl InputOpts {
    fn source(&self) -> ConfigSource {
        match (&self.configs, self.random) {
            (Some(path), _) => ConfigSource::File(path.clone()),
            (None, Some(count)) => ConfigSource::Random { count },
            (None, None) => unreachable!("clap requires one input"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// End transforms and poses for each configuration.
    Fk {
        #[command(flatten)]
        chain: ChainOpts,
        #[command(flatten)]
        input: InputOpts,
        /// Emit every cumulative frame, not just the end transform.
        #[arg(long)]
        intermediates: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// 6×m pose Jacobians (x, y, z, α, β, γ rows).
    Jacobian {
        #[command(flatten)]
        chain: ChainOpts,
        #[command(flatten)]
        input: InputOpts,
    },
    /// Replace a link with a six-DoF joint and fit it to generated poses.
    Identify {
        /// URDF file of the reference robot.
        urdf: PathBuf,
        /// JSON identification config.
        config: PathBuf,
        /// Leave wall-clock timing out of the output.
        #[arg(long)]
        no_timing: bool,
    },
    /// FK throughput across batch sizes versus a naive sequential baseline.
    Bench {
        #[command(flatten)]
        chain: ChainOpts,
        #[arg(long, value_delimiter = ',', default_value = "1,256,1024,4096")]
        batch_sizes: Vec<usize>,
        /// Minimum timed seconds per measurement.
        #[arg(long, default_value_t = 0.5)]
        seconds: f64,
    },
    /// Parse a URDF and report its structure.
    Validate {
        urdf: PathBuf,
    },
}

fn chain_args(c: &ChainOpts) -> ChainArgs<'_> {
    ChainArgs {
        urdf: &c.urdf,
        base: &c.base,
        end: &c.end,
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// Runs the command; returns the text to print and whether to report
/// budget exhaustion.
fn run(cli: Cli) -> Result<(String, bool), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Fk {
            chain,
            input,
            intermediates,
            format,
        } => {
            let format = match format {
                FormatArg::Json => Format::Json,
                FormatArg::Csv => Format::Csv,
            };
            commands::cmd_fk(
                &chain_args(&chain),
                &input.source(),
                input.seed,
                intermediates,
                format,
                !input.no_timing,
            )
            .map(|d| (d, true))
        }
        Command::Jacobian { chain, input } => {
            commands::cmd_jacobian(&chain_args(&chain), &input.source(), input.seed, !input.no_timing)
                .map(|d| (d, true))
        }
        Command::Identify {
            urdf,
            config,
            no_timing,
        } => commands::cmd_identify(&urdf, &config, !no_timing),
        Command::Bench {
            chain,
            batch_sizes,
            seconds,
        } => commands::cmd_bench(&chain_args(&chain), &batch_sizes, seconds).map(|d| (d, true)),
        Command::Validate { urdf } => commands::cmd_validate(&urdf).map(|d| (d, true)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((text, converged)) => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(1);
            }
            if converged {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: step budget exhausted before convergence");
                ExitCode::from(EXIT_BUDGET)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
