use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sizedcheck::driver::{run_check, run_golden, RunConfig};

/// Type checker, totality checker and evaluator for sized-type programs.
#[derive(Parser)]
#[command(name = "sizedcheck", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Dump each clause's size constraints.
    #[arg(long, global = true)]
    print_constraints: bool,

    /// Show size arguments in evaluation output.
    #[arg(long, global = true)]
    print_sizes: bool,

    /// Explain how termination or productivity of NAME was established.
    #[arg(long, global = true, value_name = "NAME")]
    explain_totality: Option<String>,

    /// Unfolding budget per type comparison.
    #[arg(long, global = true, value_name = "N", default_value_t = 10_000,
          value_parser = clap::value_parser!(u64).range(1..))]
    unfold_fuel: u64,

    /// How many coinductive layers to print.
    #[arg(long, global = true, value_name = "N", default_value_t = 3)]
    print_depth: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Check files and run their `eval let`s.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run a corpus of `.ma` files with `.expect` files beside them.
    Golden { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = RunConfig {
        print_constraints: cli.print_constraints,
        print_sizes: cli.print_sizes,
        explain_totality: cli.explain_totality,
        unfold_fuel: cli.unfold_fuel,
        print_depth: cli.print_depth,
    };
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    let code = match &cli.command {
        Command::Check { files } => run_check(files, &cfg, &mut out, &mut err),
        Command::Golden { dir } => run_golden(dir, &cfg, &mut out, &mut err),
    };
    ExitCode::from(code as u8)
}
