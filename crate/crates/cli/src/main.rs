mod cmd;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 7_919;

#[derive(Parser, Debug)]
#[command(
    name = "keyleak",
    version,
    about = "Keystroke-timing attacks on masked PIN and password entry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LabelKind {
    /// Keypad distance classes; digraph column holds key pairs like `31`.
    PinClass,
    /// Typed digraphs such as `re`.
    Digraph,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a gamma timing model from a `digraph,latency_ms` log.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        labels: LabelKind,
        #[arg(long, default_value_t = 100)]
        min_samples: usize,
        /// Digraph mode only: under-sample labels above this count.
        #[arg(long, default_value_t = 1000)]
        max_samples: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Per-label latency statistics and overlap flags, as JSON.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        labels: LabelKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Number of PINs for each of the 512 distance triplets.
    Census {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank all PINs for each 3-latency observation.
    RankPins(cmd::pins::RankPinsArgs),
    /// Rank a password dictionary for each observation.
    RankPasswords(cmd::passwords::RankPasswordsArgs),
    /// Pass ground-truth press times through the display/camera channel.
    Simulate(cmd::simulate::SimulateArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Fit {
            input,
            labels,
            min_samples,
            max_samples,
            out,
            seed,
        } => cmd::fit::run(&input, labels, min_samples, max_samples, &out, seed),
        Command::Report { input, labels, out } => cmd::fit::report(&input, labels, out.as_deref()),
        Command::Census { out } => cmd::pins::census(out.as_deref()),
        Command::RankPins(args) => cmd::pins::run(&args),
        Command::RankPasswords(args) => cmd::passwords::run(&args),
        Command::Simulate(args) => cmd::simulate::run(&args),
    }
}

fn broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        let io = e
            .downcast_ref::<std::io::Error>()
            .or_else(|| match e.downcast_ref::<keyleak::Error>() {
                Some(keyleak::Error::Io(io)) => Some(io),
                _ => None,
            });
        io.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

/// 1 for bad input, 2 for a violated internal invariant.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<keyleak::Error>() {
        Some(e) if !e.is_input_error() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
