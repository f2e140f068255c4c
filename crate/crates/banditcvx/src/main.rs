use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use banditcvx::cli::{load_config, run_experiment, summarize};

#[derive(Parser)]
#[command(name = "banditcvx", about = "Constrained bandit convex optimization experiments")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Number of worker threads for (seed, horizon) jobs.
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Summarize the trace CSVs in a directory.
    Summarize {
        #[arg(long)]
        input_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match args.command {
        Command::Run {
            config,
            output_dir,
            parallel,
        } => load_config(&config).and_then(|mut cfg| {
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            run_experiment(&cfg, parallel)
        }),
        Command::Summarize { input_dir } => summarize(&input_dir).map(|table| {
            print!("{table}");
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
