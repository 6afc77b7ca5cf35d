//! `gp2`: parse, run, explore, compare and audit graph programs.

mod commands;
mod interactive;

use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "gp2",
    version,
    about = "Reference interpreter for GP 2 graph programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse and expand a program, checking context conditions.
    Parse {
        program: PathBuf,
        /// Optional host graph to validate alongside the program.
        graph: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Execute one path of the small-step semantics.
    Run(RunArgs),
    /// Enumerate the outcomes of the small-step semantics.
    Explore(ExploreArgs),
    /// Compare the outcomes of the big-step and small-step semantics.
    Compare(ExploreArgs),
    /// Check machine invariants on every explored state.
    Audit(ExploreArgs),
}

#[derive(Args, Debug)]
struct Inputs {
    /// Program file (`.gp2`).
    program: PathBuf,
    /// Host graph file (`.host`).
    graph: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// `first`, `random:SEED` or `interactive`.
    #[arg(long, default_value = "first")]
    strategy: StrategyArg,
    /// Maximum number of steps.
    #[arg(long, default_value = "10000")]
    fuel: NonZeroUsize,
    /// Print the step-by-step trace (to standard error in text mode).
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug)]
struct ExploreArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, default_value = "100000")]
    max_states: NonZeroUsize,
    #[arg(long, default_value = "10000")]
    max_depth: NonZeroUsize,
    /// Premise-evaluation fuel per step of the big-step semantics.
    #[arg(long, default_value = "2000")]
    old_fuel: NonZeroUsize,
    /// Expand each search frontier in parallel.
    #[arg(long)]
    parallel: bool,
    /// Write the explored state space as Graphviz DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum StrategyArg {
    First,
    Random(u64),
    Interactive,
}

impl FromStr for StrategyArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "first" => Ok(StrategyArg::First),
            None if s == "interactive" => Ok(StrategyArg::Interactive),
            None if s == "random" => Err("random strategy needs a seed: random:SEED".into()),
            Some(("random", seed)) => seed
                .parse()
                .map(StrategyArg::Random)
                .map_err(|e| format!("bad seed `{seed}`: {e}")),
            _ => Err(format!(
                "unknown strategy `{s}`; expected first, random:SEED or interactive"
            )),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                commands::EXIT_USAGE
            } else {
                0
            });
        }
    };
    let result = match cli.command {
        Cmd::Parse {
            program,
            graph,
            format,
        } => commands::parse(&program, graph.as_deref(), format),
        Cmd::Run(args) => commands::run(&args),
        Cmd::Explore(args) => commands::explore(&args),
        Cmd::Compare(args) => commands::compare(&args),
        Cmd::Audit(args) => commands::audit(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_parse() {
        assert_eq!("first".parse(), Ok(StrategyArg::First));
        assert_eq!("random:42".parse(), Ok(StrategyArg::Random(42)));
        assert_eq!("interactive".parse(), Ok(StrategyArg::Interactive));
        assert!("random".parse::<StrategyArg>().is_err());
        assert!("random:x".parse::<StrategyArg>().is_err());
        assert!("breadth".parse::<StrategyArg>().is_err());
    }

    #[test]
    fn zero_bounds_are_rejected() {
        assert!(Cli::try_parse_from(["gp2", "run", "p.gp2", "g.host", "--fuel", "0"]).is_err());
        assert!(
            Cli::try_parse_from(["gp2", "explore", "p.gp2", "g.host", "--max-depth", "0"]).is_err()
        );
        assert!(
            Cli::try_parse_from(["gp2", "compare", "p.gp2", "g.host", "--old-fuel", "3"]).is_ok()
        );
    }

    #[test]
    fn command_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
