use std::io::{self, Read as _, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gate_witness::cli::{
    cmd_report, cmd_sweep, cmd_table, cmd_verify_bounds, exit_code, render_report, render_sweep, render_table,
    render_verify, GateSpec, Mode, ParamRange, ScenarioConfig, EXIT_USAGE, EXIT_VERIFICATION,
};
use gate_witness::json::to_string_precise;
use gate_witness::Error;

/// Verify two-qubit gates from characteristic-operation fidelities.
#[derive(Parser)]
#[command(name = "gate-witness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario and emit fidelities and bounds.
    Report(ScenarioArgs),
    /// Evaluate a scenario over a grid of its noise parameter.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Grid as LO:HI:STEPS, endpoints included.
        #[arg(long, value_name = "LO:HI:STEPS")]
        param_range: String,
    },
    /// Check every bound against exact values over random channels.
    VerifyBounds {
        #[arg(long, value_name = "N")]
        channels: usize,
        #[arg(long, value_name = "N", default_value_t = 0)]
        seed: u64,
        /// Kraus rank of every channel; cycles through 1..=16 when omitted.
        #[arg(long, value_name = "K")]
        rank: Option<usize>,
        /// Blend each random channel with the identity by a random weight.
        #[arg(long)]
        mix_identity: bool,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Print the classification of a gate's nine characteristic operations.
    Table {
        /// cnot, identity, swap, or a JSON array of sixteen [re, im] pairs.
        #[arg(long, value_name = "GATE", conflicts_with = "config")]
        gate: Option<String>,
        /// Scenario config whose gate is classified.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON; read from standard input when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// JSON destination; overrides the config's "output".
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Shots per input; implies sampled mode.
    #[arg(long, value_name = "N")]
    shots: Option<u64>,
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if exit_code(&e) == EXIT_USAGE {
            Failure::Usage(e.to_string())
        } else {
            Failure::Verification(e.to_string())
        }
    }
}

fn read_config(path: Option<&PathBuf>) -> Result<String, Failure> {
    let mut text = String::new();
    match path {
        Some(p) => {
            text = std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
        }
        None => {
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Failure::Usage(format!("standard input: {e}")))?;
        }
    }
    Ok(text)
}

fn load_scenario(args: &ScenarioArgs) -> Result<ScenarioConfig, Failure> {
    let mut config = ScenarioConfig::from_json(&read_config(args.config.as_ref())?)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(shots) = args.shots {
        config.shots = Some(shots);
        config.mode = Mode::Sampled;
    }
    config.validate()?;
    Ok(config)
}

/// Writes JSON to `out` and the text view to stdout, or JSON to stdout and
/// the text view to stderr when there is no destination.
fn emit(out: Option<PathBuf>, json: &str, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(&path, json).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            log::info!("wrote {}", path.display());
            print!("{text}");
        }
        None => {
            print!("{json}");
            eprint!("{text}");
        }
    }
    io::stdout()
        .flush()
        .map_err(|e| Failure::Usage(format!("standard output: {e}")))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Report(args) => {
            let config = load_scenario(&args)?;
            let report = cmd_report(&config)?;
            let out = args.out.or_else(|| config.output.as_ref().map(PathBuf::from));
            emit(out, &to_string_precise(&report)?, &render_report(&report))
        }
        Command::Sweep { scenario, param_range } => {
            let config = load_scenario(&scenario)?;
            let range: ParamRange = param_range.parse()?;
            let sweep = cmd_sweep(&config, &range)?;
            let out = scenario.out.or_else(|| config.output.as_ref().map(PathBuf::from));
            emit(out, &to_string_precise(&sweep)?, &render_sweep(&sweep))
        }
        Command::VerifyBounds {
            channels,
            seed,
            rank,
            mix_identity,
            out,
        } => {
            let summary = cmd_verify_bounds(channels, seed, rank, mix_identity)?;
            emit(out, &to_string_precise(&summary)?, &render_verify(&summary))?;
            if summary.passed() {
                return Ok(());
            }
            let offenders: Vec<String> = summary
                .checks
                .iter()
                .filter(|c| c.violations > 0)
                .map(|c| format!("{}: seeds {:?}", c.name, c.offending_seeds))
                .collect();
            Err(Failure::Verification(format!(
                "{} bound violations; {}",
                summary.violations,
                offenders.join("; ")
            )))
        }
        Command::Table { gate, config, out } => {
            let spec = match (gate, config) {
                (Some(g), _) => g.parse::<GateSpec>()?,
                (None, Some(path)) => ScenarioConfig::from_json(&read_config(Some(&path))?)?.gate,
                (None, None) => GateSpec::default(),
            };
            let table = cmd_table(&spec)?;
            for cell in table.cells.iter().filter(|c| c.error.is_some()) {
                log::warn!(
                    "{}{}: {}",
                    cell.control.label(),
                    cell.target.label(),
                    cell.error.as_deref().unwrap_or("")
                );
            }
            let text = render_table(&table);
            if let Some(path) = out {
                let json = to_string_precise(&table)?;
                std::fs::write(&path, json).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            }
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GATE_WITNESS_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VERIFICATION)
        }
    }
}
