use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use baryscore::embeddings::validate_bundle;
use clap::Args;

use crate::io;

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Embedding bundle (JSONL).
    bundle: PathBuf,
}

pub fn run(args: ValidateArgs) -> Result<ExitCode> {
    io::check_paths(&[&args.bundle], None)?;
    let report = validate_bundle(io::open(&args.bundle)?)
        .with_context(|| format!("reading {}", args.bundle.display()))?;
    if report.is_ok() {
        println!("OK, {} records, L={}, d={}", report.records, report.header.layers, report.header.d);
        return Ok(ExitCode::SUCCESS);
    }
    for v in &report.violations {
        println!("line {}: record {}: {}", v.line, v.record, v.message);
    }
    println!("{} violations in {} records", report.violations.len(), report.records);
    Ok(ExitCode::from(1))
}
