use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use matsp_cli::{emit_report, run_experiment, Config, Format};

/// Run a sum-product experiment over 2x2 matrices.
#[derive(Parser, Debug)]
#[command(name = "lab", version)]
struct Args {
    /// Experiment name (`lab list` prints the catalog).
    experiment: String,
    /// Field order, p or p^k.
    #[arg(long)]
    q: Option<String>,
    /// Set source: a file, construction:<spec>, or random:<size>[:<seed>].
    #[arg(long)]
    set_a: Option<String>,
    #[arg(long)]
    set_b: Option<String>,
    #[arg(long)]
    set_c: Option<String>,
    #[arg(long)]
    set_d: Option<String>,
    #[arg(long)]
    set_e: Option<String>,
    #[arg(long)]
    set_f: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Product side of the digraph: left or right.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Size of randomly sampled sets.
    #[arg(long)]
    size: Option<usize>,
    /// Decomposition parameter M.
    #[arg(long)]
    m: Option<f64>,
    /// Field elements for the lower-triangular construction, comma separated.
    #[arg(long, value_delimiter = ',')]
    x: Option<Vec<u32>>,
    /// Subgroup order for the determinant construction.
    #[arg(long)]
    g: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON file with the same keys as the flags (snake_case).
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.experiment == "list" {
        for name in matsp_cli::experiment_names() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("lab: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(args: Args) -> Result<bool, matsp_cli::CliError> {
    let base = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let flags = Config {
        q: args.q,
        set_a: args.set_a,
        set_b: args.set_b,
        set_c: args.set_c,
        set_d: args.set_d,
        set_e: args.set_e,
        set_f: args.set_f,
        trials: args.trials,
        variant: args.variant,
        seed: args.seed,
        size: args.size,
        m: args.m,
        x: args.x,
        g: args.g,
        out: args.out,
        format: args.format,
    };
    let cfg = flags.over(base);
    let report = run_experiment(&args.experiment, &cfg)?;
    emit_report(&report, cfg.format.unwrap_or(Format::Json), cfg.out.as_deref())?;
    Ok(report.all_pass())
}
