use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{bail, Context, Result};
use baryscore::baryscore::{bary_score_multi, run_indexed, write_scores_csv, FinalMass, MultiReference};
use baryscore::embeddings::load_bundle;
use baryscore::{bary_score, IdfTable, LayeredEmbedding, ScoreConfig, ScoreRecord};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::io;
use crate::BarycenterFlags;

const PROGRESS_EVERY: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IdfSource {
    References,
    #[value(name = "candidates+references")]
    CandidatesAndReferences,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FinalMassArg {
    Uniform,
    Idf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MultiRefArg {
    Min,
    Mean,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    /// Candidate embedding bundle (JSONL).
    #[arg(long)]
    candidates: PathBuf,
    /// Reference embedding bundle (JSONL).
    #[arg(long)]
    references: PathBuf,
    /// CSV with candidate_id,reference_id columns. Without it the i-th
    /// candidate is scored against the i-th reference.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Merge all references of a candidate into one row.
    #[arg(long, value_enum, requires = "pairs")]
    multi_ref: Option<MultiRefArg>,
    /// Corpus for the IDF table.
    #[arg(long, value_enum, default_value = "references")]
    idf_from: IdfSource,
    /// Ground-cost exponent of the final distance.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Masses of the barycenters in the final distance.
    #[arg(long, value_enum, default_value = "uniform")]
    final_mass: FinalMassArg,
    /// Add barycenter objectives and iteration counts to the output.
    #[arg(long)]
    diagnostics: bool,
    /// Output CSV (default: stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    bary: BarycenterFlags,
}

pub fn score_config(flags: &BarycenterFlags) -> ScoreConfig {
    ScoreConfig {
        weighting: flags.weighting.into(),
        layer_selection: flags.layers.clone(),
        layer_weights: flags.layer_weights.clone(),
        max_outer_iter: flags.max_iter,
        objective_tol: flags.tol,
        ..ScoreConfig::default()
    }
}

#[derive(Deserialize)]
struct PairRow {
    candidate_id: String,
    reference_id: String,
}

fn read_pairs(path: &Path) -> Result<Vec<PairRow>> {
    let mut reader = csv::Reader::from_reader(io::open(path)?);
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.with_context(|| format!("{}: bad row {}", path.display(), i + 2)))
        .collect()
}

fn index_by_id<'a>(records: &'a [LayeredEmbedding], what: &str) -> Result<HashMap<&'a str, usize>> {
    let mut index = HashMap::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        if index.insert(r.text_id(), i).is_some() {
            bail!("duplicate id {:?} in the {what} bundle", r.text_id());
        }
    }
    Ok(index)
}

/// One unit of work: a candidate and the references it is scored against.
struct Job {
    cand: usize,
    refs: Vec<usize>,
}

fn jobs_from_pairs(
    pairs: &[PairRow],
    cands: &[LayeredEmbedding],
    refs: &[LayeredEmbedding],
    grouped: bool,
) -> Result<Vec<Job>> {
    let ci = index_by_id(cands, "candidates")?;
    let ri = index_by_id(refs, "references")?;
    let mut unknown = Vec::new();
    let mut resolved = Vec::with_capacity(pairs.len());
    for p in pairs {
        match (ci.get(p.candidate_id.as_str()), ri.get(p.reference_id.as_str())) {
            (Some(&c), Some(&r)) => resolved.push((c, r)),
            (c, r) => {
                if c.is_none() {
                    unknown.push(format!("candidate {:?}", p.candidate_id));
                }
                if r.is_none() {
                    unknown.push(format!("reference {:?}", p.reference_id));
                }
            }
        }
    }
    if !unknown.is_empty() {
        bail!("pairs file names unknown ids: {}", unknown.join(", "));
    }
    if !grouped {
        return Ok(resolved.into_iter().map(|(cand, r)| Job { cand, refs: vec![r] }).collect());
    }
    // Keep candidates in order of first appearance.
    let mut order = Vec::new();
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (c, r) in resolved {
        let entry = groups.entry(c).or_default();
        if entry.is_empty() {
            order.push(c);
        }
        entry.push(r);
    }
    Ok(order
        .into_iter()
        .map(|cand| Job {
            refs: groups.remove(&cand).unwrap_or_default(),
            cand,
        })
        .collect())
}

fn choose_idf(args: &ScoreArgs, cands: &[LayeredEmbedding], refs: &[LayeredEmbedding]) -> Result<IdfTable> {
    match args.idf_from {
        IdfSource::References => io::idf_from_texts(&refs.iter().map(|r| r.tokens()).collect::<Vec<_>>()),
        IdfSource::CandidatesAndReferences => io::idf_from_texts(
            &cands.iter().chain(refs).map(|r| r.tokens()).collect::<Vec<_>>(),
        ),
        IdfSource::File => match &args.bary.idf_file {
            Some(path) => io::idf_from_file(path),
            None => bail!("--idf-from file requires --idf-file"),
        },
    }
}

pub fn run(args: ScoreArgs) -> Result<ExitCode> {
    let mut inputs = vec![args.candidates.as_path(), args.references.as_path()];
    if let Some(p) = &args.pairs {
        inputs.push(p);
    }
    if let (IdfSource::File, Some(p)) = (args.idf_from, &args.bary.idf_file) {
        inputs.push(p);
    }
    io::check_paths(&inputs, args.output.as_deref())?;
    if args.bary.workers == 0 {
        bail!("--workers must be positive");
    }

    let (ch, cands) = load_bundle(&args.candidates).with_context(|| format!("reading {}", args.candidates.display()))?;
    let (rh, refs) = load_bundle(&args.references).with_context(|| format!("reading {}", args.references.display()))?;
    io::check_headers(&ch, &rh)?;

    let jobs = match &args.pairs {
        Some(path) => jobs_from_pairs(&read_pairs(path)?, &cands, &refs, args.multi_ref.is_some())?,
        None => {
            if cands.len() != refs.len() {
                bail!(
                    "{} candidates but {} references; pass --pairs to score unaligned bundles",
                    cands.len(),
                    refs.len()
                );
            }
            (0..cands.len()).map(|i| Job { cand: i, refs: vec![i] }).collect()
        }
    };

    let idf = choose_idf(&args, &cands, &refs)?;
    let config = ScoreConfig {
        p: args.p,
        final_mass: match args.final_mass {
            FinalMassArg::Uniform => FinalMass::Uniform,
            FinalMassArg::Idf => FinalMass::Idf,
        },
        ..score_config(&args.bary)
    };
    let reduction = match args.multi_ref {
        Some(MultiRefArg::Mean) => MultiReference::Mean,
        _ => MultiReference::Min,
    };

    let done = AtomicUsize::new(0);
    let total = jobs.len();
    let results = run_indexed(total, args.bary.workers, |i| {
        let job = &jobs[i];
        let c = &cands[job.cand];
        let out = if job.refs.len() == 1 {
            bary_score(c, &refs[job.refs[0]], &idf, &config)
        } else {
            let rs: Vec<&LayeredEmbedding> = job.refs.iter().map(|&r| &refs[r]).collect();
            bary_score_multi(c, &rs, &idf, &config, reduction)
        };
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        if n.is_multiple_of(PROGRESS_EVERY) {
            log::info!("scored {n}/{total}");
        }
        out
    })?;

    let mut records: Vec<ScoreRecord> = Vec::with_capacity(results.len());
    let mut failures = 0;
    for (job, res) in jobs.iter().zip(results) {
        match res {
            Ok(r) => records.push(r),
            Err(e) => {
                failures += 1;
                let ref_ids: Vec<&str> = job.refs.iter().map(|&r| refs[r].text_id()).collect();
                eprintln!("error: {} vs {}: {e}", cands[job.cand].text_id(), ref_ids.join("|"));
            }
        }
    }
    io::write_output(args.output.as_deref(), |w| {
        write_scores_csv(w, &records, args.diagnostics)?;
        Ok(())
    })?;
    if failures > 0 {
        eprintln!("{failures} of {total} pairs failed");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}
