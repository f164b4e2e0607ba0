use std::path::PathBuf;

use clap::Parser;
use plateau_hyp::cli::{execute, Mode};

/// Asymptotic Plateau problems for CMC Killing graphs in hyperbolic space.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    #[arg(value_enum)]
    mode: Mode,
    /// JSON run description.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads for the Perron sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    let args = Args::parse();
    if let Some(k) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            std::process::exit(2);
        }
    }
    std::process::exit(execute(args.mode, &args.config, &args.out_dir, args.seed));
}
