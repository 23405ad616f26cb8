use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use baryscore::baryscore::{run_indexed, text_barycenter};
use baryscore::embeddings::load_bundle;
use baryscore::IdfTable;
use clap::Args;
use serde::Serialize;

use crate::io;
use crate::score::score_config;
use crate::BarycenterFlags;

#[derive(Args, Debug)]
pub struct BarycenterArgs {
    /// Embedding bundle (JSONL).
    #[arg(long)]
    input: PathBuf,
    /// Output JSONL (default: stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    bary: BarycenterFlags,
}

#[derive(Serialize)]
struct Row<'a> {
    id: &'a str,
    support: Vec<Vec<f64>>,
    weights: Vec<f64>,
    objective_trace: &'a [f64],
    unsquared_objective: f64,
    iterations_used: usize,
    converged: bool,
}

pub fn run(args: BarycenterArgs) -> Result<ExitCode> {
    let mut inputs = vec![args.input.as_path()];
    if let Some(p) = &args.bary.idf_file {
        inputs.push(p);
    }
    io::check_paths(&inputs, args.output.as_deref())?;
    if args.bary.workers == 0 {
        bail!("--workers must be positive");
    }
    let (_, texts) = load_bundle(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    // The bundle itself is the IDF corpus unless a file is given.
    let idf: IdfTable = match &args.bary.idf_file {
        Some(p) => io::idf_from_file(p)?,
        None => io::idf_from_texts(&texts.iter().map(|t| t.tokens()).collect::<Vec<_>>())?,
    };
    let config = score_config(&args.bary);
    let results = run_indexed(texts.len(), args.bary.workers, |i| text_barycenter(&texts[i], &idf, &config))?;

    let mut failures = 0;
    let mut ok = Vec::new();
    for (t, r) in texts.iter().zip(results) {
        match r {
            Ok(b) => ok.push(b),
            Err(e) => {
                failures += 1;
                eprintln!("error: {}: {e}", t.text_id());
            }
        }
    }
    io::write_output(args.output.as_deref(), |w| {
        for b in &ok {
            let row = Row {
                id: &b.text_id,
                support: b.measure.support().rows().into_iter().map(|r| r.to_vec()).collect(),
                weights: b.measure.weights().to_vec(),
                objective_trace: &b.result.objective_trace,
                unsquared_objective: b.result.unsquared_objective,
                iterations_used: b.result.iterations_used,
                converged: b.result.converged,
            };
            serde_json::to_writer(&mut *w, &row)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    Ok(if failures > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}
