use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod barycenter;
mod eval;
mod io;
mod score;
mod validate;
mod williams;

#[derive(Parser)]
#[command(name = "baryscore", version, about = "Barycentric Wasserstein text-similarity scores")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score candidate texts against references.
    Score(score::ScoreArgs),
    /// Write the layer barycenter of every text in a bundle.
    Barycenter(barycenter::BarycenterArgs),
    /// Correlate a score file with human judgments.
    Eval(eval::EvalArgs),
    /// Compare two metrics' correlations with human judgments.
    Williams(williams::WilliamsArgs),
    /// Check an embedding bundle against the schema.
    Validate(validate::ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WeightingArg {
    Idf,
    Uniform,
}

impl From<WeightingArg> for baryscore::Weighting {
    fn from(w: WeightingArg) -> Self {
        match w {
            WeightingArg::Idf => baryscore::Weighting::Idf,
            WeightingArg::Uniform => baryscore::Weighting::Uniform,
        }
    }
}

/// Flags shared by every command that builds barycenters.
#[derive(Args, Debug, Clone)]
struct BarycenterFlags {
    /// Token masses inside each layer measure.
    #[arg(long, value_enum, default_value = "idf")]
    weighting: WeightingArg,
    /// Comma-separated layer indices (default: all layers).
    #[arg(long, value_delimiter = ',')]
    layers: Option<Vec<usize>>,
    /// Comma-separated aggregation weights, one per selected layer (default: uniform).
    #[arg(long, value_delimiter = ',')]
    layer_weights: Option<Vec<f64>>,
    /// Maximum outer iterations of the barycenter solver.
    #[arg(long, default_value_t = baryscore::barycenter::DEFAULT_MAX_OUTER_ITER)]
    max_iter: usize,
    /// Relative objective tolerance for convergence.
    #[arg(long, default_value_t = baryscore::barycenter::DEFAULT_OBJECTIVE_TOL)]
    tol: f64,
    /// JSONL file with one JSON array of tokens per line, used when IDF comes from a file.
    #[arg(long)]
    idf_file: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "BARYSCORE_WORKERS", default_value_t = io::default_workers())]
    workers: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Score(args) => score::run(args),
        Command::Barycenter(args) => barycenter::run(args),
        Command::Eval(args) => eval::run(args),
        Command::Williams(args) => williams::run(args),
        Command::Validate(args) => validate::run(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
