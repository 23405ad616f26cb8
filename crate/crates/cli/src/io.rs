use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use baryscore::embeddings::{compute_idf, BundleHeader};
use baryscore::IdfTable;

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Fails before any work starts if an input is missing or the output
/// directory does not exist.
pub fn check_paths(inputs: &[&Path], output: Option<&Path>) -> Result<()> {
    for p in inputs {
        if !p.is_file() {
            bail!("input file {} does not exist", p.display());
        }
    }
    if let Some(out) = output {
        let dir = parent_dir(out);
        if !dir.is_dir() {
            bail!("output directory {} does not exist", dir.display());
        }
    }
    Ok(())
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

/// Writes to `path` through a temporary file in the same directory so a
/// failed run never leaves a partial file behind; `None` means stdout.
pub fn write_output<F>(path: Option<&Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush()?;
        }
        Some(path) => {
            let tmp = tempfile::NamedTempFile::new_in(parent_dir(path))?;
            let mut w = BufWriter::new(tmp);
            body(&mut w)?;
            let tmp = w.into_inner().map_err(|e| e.into_error())?;
            tmp.persist(path)
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    Ok(())
}

/// One JSON array of tokens per non-empty line.
pub fn read_token_documents(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut docs = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Vec<String> = serde_json::from_str(&line)
            .with_context(|| format!("{}: line {} is not a JSON array of tokens", path.display(), i + 1))?;
        docs.push(doc);
    }
    Ok(docs)
}

pub fn idf_from_file(path: &Path) -> Result<IdfTable> {
    let docs = read_token_documents(path)?;
    Ok(compute_idf(&docs)?)
}

pub fn idf_from_texts(texts: &[&[String]]) -> Result<IdfTable> {
    Ok(compute_idf(texts)?)
}

pub fn check_headers(cand: &BundleHeader, reference: &BundleHeader) -> Result<()> {
    if cand.layers != reference.layers {
        bail!(
            "bundle header mismatch: L is {} in the candidates bundle but {} in the references bundle",
            cand.layers,
            reference.layers
        );
    }
    if cand.d != reference.d {
        bail!(
            "bundle header mismatch: d is {} in the candidates bundle but {} in the references bundle",
            cand.d,
            reference.d
        );
    }
    Ok(())
}
