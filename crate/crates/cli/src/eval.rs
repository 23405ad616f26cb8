use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use baryscore::baryscore::read_scores_csv;
use baryscore::eval::{evaluate, read_judgments, read_references, Coefficient, EvalDataset, Level};
use clap::{Args, ValueEnum};

use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    System,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoefArg {
    Pearson,
    Spearman,
    Kendall,
}

impl From<CoefArg> for Coefficient {
    fn from(c: CoefArg) -> Self {
        match c {
            CoefArg::Pearson => Coefficient::Pearson,
            CoefArg::Spearman => Coefficient::Spearman,
            CoefArg::Kendall => Coefficient::Kendall,
        }
    }
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Score CSV written by `baryscore score`.
    #[arg(long)]
    scores: PathBuf,
    /// JSONL judgments: text_id, system_id, candidate_id, human_score.
    #[arg(long)]
    dataset: PathBuf,
    /// JSON object mapping text_id to a reference id or a list of them.
    #[arg(long)]
    references: Option<PathBuf>,
    /// Correlation levels (default: system and text).
    #[arg(long, value_enum, value_delimiter = ',')]
    level: Vec<LevelArg>,
    /// Coefficients (default: all).
    #[arg(long, value_enum, value_delimiter = ',')]
    coef: Vec<CoefArg>,
    /// Report absolute values.
    #[arg(long)]
    absolute: bool,
    /// Output CSV (default: stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

pub fn load_dataset(judgments: &Path, references: Option<&Path>) -> Result<EvalDataset> {
    let js = read_judgments(io::open(judgments)?).with_context(|| format!("reading {}", judgments.display()))?;
    let refs = match references {
        Some(p) => read_references(io::open(p)?).with_context(|| format!("reading {}", p.display()))?,
        None => Default::default(),
    };
    Ok(EvalDataset::from_judgments(&js, refs)?)
}

pub fn run(args: EvalArgs) -> Result<ExitCode> {
    let mut inputs = vec![args.scores.as_path(), args.dataset.as_path()];
    if let Some(p) = &args.references {
        inputs.push(p);
    }
    io::check_paths(&inputs, args.output.as_deref())?;
    let dataset = load_dataset(&args.dataset, args.references.as_deref())?;
    let scores = read_scores_csv(io::open(&args.scores)?).with_context(|| format!("reading {}", args.scores.display()))?;
    let grid = dataset.metric_grid(&scores)?;

    let levels: Vec<Level> = if args.level.is_empty() {
        vec![Level::System, Level::Text]
    } else {
        args.level
            .iter()
            .map(|l| match l {
                LevelArg::System => Level::System,
                LevelArg::Text => Level::Text,
            })
            .collect()
    };
    let coefs: Vec<Coefficient> = if args.coef.is_empty() {
        Coefficient::ALL.to_vec()
    } else {
        args.coef.iter().map(|&c| c.into()).collect()
    };
    let reports = evaluate(&dataset, &grid, &levels, &coefs, args.absolute)?;
    io::write_output(args.output.as_deref(), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["coefficient", "level", "value", "n_effective"])?;
        for r in &reports {
            out.write_record([
                r.coefficient.name().to_string(),
                r.level.name().to_string(),
                r.value.to_string(),
                r.n_effective.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    })?;
    Ok(ExitCode::SUCCESS)
}
