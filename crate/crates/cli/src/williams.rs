use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use baryscore::baryscore::read_scores_csv;
use baryscore::eval::{williams_test, EvalDataset, Judgment};
use baryscore::Error;
use clap::{Args, ValueEnum};
use ndarray::{Array2, Axis};

use crate::eval::{load_dataset, CoefArg};
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WilliamsLevel {
    /// Every (text, system) cell is one observation.
    Pooled,
    /// Per-system means are the observations.
    System,
}

#[derive(Args, Debug)]
pub struct WilliamsArgs {
    /// Score CSV of metric A.
    #[arg(long)]
    scores_a: PathBuf,
    /// Score CSV of metric B.
    #[arg(long)]
    scores_b: PathBuf,
    /// Human judgments: CSV with text_id,system_id,candidate_id,human_score,
    /// or the JSONL dataset used by `eval` (by .jsonl extension).
    #[arg(long)]
    human: PathBuf,
    #[arg(long, value_enum, default_value = "pearson")]
    coef: CoefArg,
    #[arg(long, value_enum, default_value = "pooled")]
    level: WilliamsLevel,
}

fn load_human(path: &Path) -> Result<EvalDataset> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        return load_dataset(path, None);
    }
    let mut reader = csv::Reader::from_reader(io::open(path)?);
    let js = reader
        .deserialize::<Judgment>()
        .enumerate()
        .map(|(i, row)| row.with_context(|| format!("{}: bad row {}", path.display(), i + 2)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalDataset::from_judgments(&js, Default::default())?)
}

fn observations(grid: &Array2<f64>, level: WilliamsLevel) -> Vec<f64> {
    match level {
        WilliamsLevel::Pooled => grid.iter().copied().collect(),
        WilliamsLevel::System => grid.mean_axis(Axis(0)).expect("non-empty grid").to_vec(),
    }
}

pub fn run(args: WilliamsArgs) -> Result<ExitCode> {
    io::check_paths(&[&args.scores_a, &args.scores_b, &args.human], None)?;
    let dataset = load_human(&args.human)?;
    let a = read_scores_csv(io::open(&args.scores_a)?).with_context(|| format!("reading {}", args.scores_a.display()))?;
    let b = read_scores_csv(io::open(&args.scores_b)?).with_context(|| format!("reading {}", args.scores_b.display()))?;

    let mut problems = Vec::new();
    let mut grid = |rows, name: &str| match dataset.metric_grid(rows) {
        Ok(g) => Some(g),
        Err(Error::MissingScores { missing }) => {
            for (t, s) in missing {
                problems.push(format!("{name} has no score for ({t}, {s})"));
            }
            None
        }
        Err(e) => {
            problems.push(format!("{name}: {e}"));
            None
        }
    };
    let (ga, gb) = (grid(&a, "scores-a"), grid(&b, "scores-b"));
    let (Some(ga), Some(gb)) = (ga, gb) else {
        bail!("alignment failed:\n  {}", problems.join("\n  "));
    };

    // Scores are distances; negate so agreement with humans is positive.
    let xa: Vec<f64> = observations(&ga, args.level).iter().map(|v| -v).collect();
    let xb: Vec<f64> = observations(&gb, args.level).iter().map(|v| -v).collect();
    let h = observations(dataset.human_scores(), args.level);
    let coef: baryscore::eval::Coefficient = args.coef.into();
    let r12 = coef.apply(&xa, &h)?;
    let r13 = coef.apply(&xb, &h)?;
    let r23 = coef.apply(&xa, &xb)?;
    let out = williams_test(r12, r13, r23, h.len())?;
    println!("coefficient={coef}");
    println!("r12={r12}");
    println!("r13={r13}");
    println!("r23={r23}");
    println!("n={}", h.len());
    println!("t={}", out.t_statistic);
    println!("p={}", out.p_value);
    Ok(ExitCode::SUCCESS)
}
