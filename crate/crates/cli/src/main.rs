use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use tim_cli::commands::{self, EnumerateArgs, VerifyDofArgs};
use tim_cli::CommandResult;
use tim_core::beamforming::DEFAULT_TOL;
use tim_core::{Strategy, UnitFraction};

/// Maximal topologies for topological interference management.
///
/// Exit status: 0 when the verdict holds or the artifact was written,
/// 1 for a negative verdict, 2 for usage or input errors.
#[derive(Parser)]
#[command(name = "tim", version)]
struct Cli {
    /// Print one JSON document on standard output instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for channel sampling and topology sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Suppress human-readable output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide maximality and show the block structure of a topology file.
    Analyze {
        path: PathBuf,
        /// Target DoF as 1/n; n >= 3 uses the generalized block conditions.
        #[arg(long)]
        dof: Option<UnitFraction>,
        /// Also write the alignment and conflict graph as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Build the topology of an alliance specification (JSON).
    Construct {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Treat disjoint sibling interferer sets as violations.
        #[arg(long)]
        strict: bool,
    },
    /// Add interference links until the topology is maximal.
    Transform {
        path: PathBuf,
        /// merge, add-links or auto.
        #[arg(long, default_value = "auto")]
        strategy: Strategy,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify every K-user topology, or a sample of them for K > 5.
    Enumerate {
        #[arg(long)]
        k: usize,
        /// Compute canonical labels (K <= 8).
        #[arg(long)]
        canonical: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Count valid alliance specifications per alliance count instead.
        #[arg(long)]
        specs: bool,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Cross-check the maximality characterizations for K users.
    VerifyTheorems {
        #[arg(long)]
        k: usize,
        /// Sample this many topologies instead of enumerating.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Simulate the beamforming scheme and check every receiver decodes.
    VerifyDof {
        path: PathBuf,
        /// Alliance specification to build the groups from; defaults to the alignment sets.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Time extension length; defaults to E_M + 1.
        #[arg(long)]
        slots: Option<usize>,
    },
    /// Compare the achievable DoF with the acyclic-subset upper bound.
    Bound {
        path: PathBuf,
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Write the alignment and conflict graph as DOT.
    ExportDot {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: &Cli) -> Result<CommandResult> {
    match &cli.command {
        Command::Analyze { path, dof, dot } => commands::analyze(path, *dof, dot.as_deref()),
        Command::Construct { spec, out, strict } => commands::construct(spec, out.as_deref(), *strict),
        Command::Transform {
            path,
            strategy,
            out,
        } => commands::transform(path, *strategy, out.as_deref()),
        Command::Enumerate {
            k,
            canonical,
            csv,
            specs,
            samples,
        } => commands::enumerate(&EnumerateArgs {
            k: *k,
            canonical: *canonical,
            csv: csv.as_deref(),
            specs: *specs,
            samples: *samples,
            seed: cli.seed,
        }),
        Command::VerifyTheorems { k, samples } => commands::verify_theorems(*k, *samples, cli.seed),
        Command::VerifyDof {
            path,
            spec,
            trials,
            tol,
            slots,
        } => commands::verify_dof(&VerifyDofArgs {
            path,
            spec: spec.as_deref(),
            trials: *trials,
            tol: *tol,
            slots: *slots,
            seed: cli.seed,
        }),
        Command::Bound { path, spec } => commands::bound(path, spec.as_deref()),
        Command::ExportDot { path, out } => commands::export_dot(path, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(result) => {
            if cli.json {
                let payload = result.machine_payload.unwrap_or(serde_json::Value::Null);
                println!(
                    "{}",
                    serde_json::to_string_pretty(&payload).expect("payloads serialize")
                );
            } else if !cli.quiet {
                print!("{}", result.human_text);
            }
            ExitCode::from(result.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
