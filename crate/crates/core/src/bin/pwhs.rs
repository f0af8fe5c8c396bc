use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pwhs_core::cli::{self, Format, Task};

#[derive(Parser)]
#[command(name = "pwhs", version, about = "Piecewise holomorphic planar systems")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file (TOML)
    scenario: PathBuf,
    /// Output path; defaults to the scenario's [output] path, then stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Partition the switching line into sewing, sliding and tangency sets
    Classify(Common),
    /// Integrate orbits and draw them over the line classification
    Portrait(Common),
    /// Find and verify a limit cycle
    Cycle(Common),
    /// Build a homoclinic loop from invariant rays
    Homoclinic(Common),
    /// Run the fold transition-map experiment
    Regularize(Common),
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (task, common) = match args.command {
        Command::Classify(c) => (Task::Classify, c),
        Command::Portrait(c) => (Task::Portrait, c),
        Command::Cycle(c) => (Task::Cycle, c),
        Command::Homoclinic(c) => (Task::Homoclinic, c),
        Command::Regularize(c) => (Task::Regularize, c),
    };
    let result = cli::threads_from_env().and_then(|threads| {
        if let Some(n) = threads {
            // Fails only if a pool already exists, which cannot happen here.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        cli::run(task, &common.scenario, common.out.as_deref(), common.format)
    });
    match result {
        Ok((summary, artifact_on_stdout)) => {
            // Keep stdout clean when it carries the artifact.
            if artifact_on_stdout {
                eprintln!("{summary}");
            } else {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
