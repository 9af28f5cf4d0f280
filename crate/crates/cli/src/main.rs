//! Batch front door for covariate-adjusted graphical model fits.
//!
//! Subcommands: fit, simulate, summarize, roc. All options come from a flat
//! key=value config file (`--config FILE`) with `--key value` command-line
//! overrides. The environment variable CGGM_THREADS caps chain parallelism.
//!
//! Exit codes: 0 ok, 2 validation, 3 numeric failure, 4 I/O.

mod commands;
mod config;

use cggm::Error;

const USAGE: &str = "\
usage: cggm <command> [--config FILE] [--key value ...]

commands:
  fit        run chains on Y/X CSVs (or a simulated dataset) and summarize
  simulate   draw a synthetic dataset with known truth
  summarize  recompute posterior summaries from persisted chain traces
  roc        ROC curve and AUC of edge probabilities against a truth graph

run `cggm <command> --help` for the accepted keys.
";

fn key_help(keys: &[&str]) -> String {
    format!("accepted keys:\n  --{}\n", keys.join("\n  --"))
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::InvalidState(_) | Error::Parse { .. } => 2,
        Error::RankDeficient { .. } | Error::Numeric(_) => 3,
        Error::Io(_) => 4,
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first().map(String::as_str) else {
        eprint!("{USAGE}");
        std::process::exit(2);
    };
    let rest = &args[1..];

    let keys: &[&str] = match command {
        "fit" => commands::FIT_KEYS,
        "simulate" => commands::SIMULATE_KEYS,
        "summarize" => commands::SUMMARIZE_KEYS,
        "roc" => commands::ROC_KEYS,
        "--help" | "-h" | "help" => {
            print!("{USAGE}");
            return;
        }
        other => {
            eprintln!("unknown command {other:?}\n");
            eprint!("{USAGE}");
            std::process::exit(2);
        }
    };
    if rest.iter().any(|a| a == "--help" || a == "-h") {
        print!("{USAGE}\n{}", key_help(keys));
        return;
    }

    let result = config::Config::from_args(rest, keys).and_then(|cfg| match command {
        "fit" => commands::cmd_fit(&cfg),
        "simulate" => commands::cmd_simulate(&cfg),
        "summarize" => commands::cmd_summarize(&cfg),
        "roc" => commands::cmd_roc(&cfg),
        _ => unreachable!(),
    });

    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
