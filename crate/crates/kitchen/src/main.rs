use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use kitchen::{load_config, run_experiment, write_outputs, Overrides, ProblemConfig, RoomVariant};
use kitchen_core::Mode;

#[derive(Parser)]
#[command(name = "kitchen", version, about = "Kitchen layout synthesis for human-robot cooking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Anneal layouts and plans for one or more seeds.
    Run(RunArgs),
    /// Load and validate a config file.
    CheckConfig { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Together,
    Separate,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Problem config; the bundled two-burger scenario when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// First seed; run k uses seed + k.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum, default_value_t = RoomVariant::Regular)]
    room: RoomVariant,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, env = "KITCHEN_OUT_DIR", default_value = "out")]
    out: PathBuf,
    /// Skip the SVG renderings.
    #[arg(long)]
    no_render: bool,
    /// Plan the robot around the predicted human path from the start.
    #[arg(long)]
    always_infer: bool,
    /// Record wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let config = match &args.config {
        Some(p) => load_config(p)?,
        None => ProblemConfig::bundled(),
    };
    let overrides = Overrides {
        seed: args.seed,
        runs: args.runs.max(1),
        mode: args.mode.map(|m| match m {
            ModeArg::Together => Mode::Together,
            ModeArg::Separate => Mode::Separate,
        }),
        room: args.room,
        iterations: args.iterations,
        always_infer: args.always_infer,
        timing: args.timing,
    };
    let report = run_experiment(&config, &overrides)?;
    let written = write_outputs(&report, &args.out, !args.no_render)?;
    for r in &report.runs {
        match r.best_total_cost {
            Some(best) => println!("seed {}: initial {:.4}, best {:.4}", r.seed, r.initial_total_cost, best),
            None => println!("seed {}: initial {:.4}, no verified solution", r.seed, r.initial_total_cost),
        }
    }
    for (k, s) in report.solutions.iter().enumerate() {
        println!("solution {k} (seed {}): total {:.4}, path {:.4}", s.seed, s.costs.total, s.costs.path_cost);
        println!("{}", s.assignment);
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::CheckConfig { path } => load_config(&path)
            .with_context(|| format!("invalid config {}", path.display()))
            .map(|c| {
                let tasks = c.tasks().map_or(0, |t| t.len());
                println!("ok: {} counters, {} recipes, {} sub-tasks", c.counters.len(), c.recipes.len(), tasks);
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
