use acceptkit::error::Error;
use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Invalid flag combination or value; exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// 1 for usage errors, 2 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<Error>() {
        Some(e) if !e.is_data_error() => 1,
        _ => 2,
    }
}

/// Missing inputs are reported as usage errors before any work starts.
pub fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(usage(format!("input file not found: {}", path.display())));
    }
    Ok(())
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(f))
}

/// Provenance shared by every output of one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    pub config_digest: String,
}

impl Provenance {
    pub fn new<A: Serialize>(command: &str, seed: u64, args: &A) -> Self {
        let json = serde_json::to_vec(&(command, seed, args)).expect("arguments serialize");
        Provenance {
            command: command.to_string(),
            seed,
            config_digest: hex::encode(Sha256::digest(&json)),
        }
    }
}

fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

fn persist(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Writes `path` atomically plus a `<path>.meta.json` provenance sidecar.
pub fn write_output(path: &Path, prov: &Provenance, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut buf = BufWriter::new(Vec::new());
    fill(&mut buf).with_context(|| format!("writing {}", path.display()))?;
    let bytes = buf.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    persist(path, &bytes)?;
    let meta = serde_json::to_vec_pretty(prov)?;
    persist(&meta_path(path), &meta)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn json_line<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
