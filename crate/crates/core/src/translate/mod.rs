//! Machine translation adapters producing `(source, mt, reference)` records.
//!
//! Besides file-backed and external-command adapters, a noisy-channel
//! simulator corrupts the reference to stand in for an MT system.

mod noise;

pub use noise::{noise_channel, NoiseConfig};

use crate::corpus::SentencePair;
use crate::error::{Error, Result};
use crate::rng;
use crate::text::tokenize;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRecord {
    pub source: Vec<String>,
    pub mt: Vec<String>,
    pub reference: Vec<String>,
}

#[derive(Debug, Clone)]
pub enum MtAdapter {
    /// Plain text, one translation per line, aligned with the corpus.
    File(PathBuf),
    /// Shell command reading source sentences on stdin and writing
    /// translations on stdout, line-aligned.
    Command(String),
    Noise(NoiseConfig),
}

fn records(pairs: &[SentencePair], mt: Vec<Vec<String>>) -> Vec<TranslationRecord> {
    pairs
        .iter()
        .zip(mt)
        .map(|(p, mt)| TranslationRecord {
            source: p.source.clone(),
            mt,
            reference: p.reference.clone(),
        })
        .collect()
}

/// Translation output lines are tokenized and lowercased like the reference side.
fn mt_tokens(line: &str) -> Vec<String> {
    tokenize(&line.to_lowercase())
}

pub fn read_translations<R: BufRead>(reader: R) -> Result<Vec<Vec<String>>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| {
            l.map(|l| mt_tokens(&l))
                .map_err(|e| Error::parse("translations", i + 1, e.to_string()))
        })
        .collect()
}

/// Produces one record per pair, in input order.
pub fn translate_batch(adapter: &MtAdapter, pairs: &[SentencePair]) -> Result<Vec<TranslationRecord>> {
    match adapter {
        MtAdapter::File(path) => {
            let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
            let mt = read_translations(std::io::BufReader::new(file))?;
            if mt.len() != pairs.len() {
                return Err(Error::Adapter(format!(
                    "{} has {} lines but the corpus has {} pairs",
                    path.display(),
                    mt.len(),
                    pairs.len()
                )));
            }
            Ok(records(pairs, mt))
        }
        MtAdapter::Command(command) => {
            let mt = run_command(command, pairs)?;
            Ok(records(pairs, mt))
        }
        MtAdapter::Noise(config) => {
            config.validate()?;
            let mt: Vec<Vec<String>> = pairs
                .par_iter()
                .enumerate()
                .map(|(i, p)| {
                    let mut r = rng::stream(config.seed, i as u64);
                    noise_channel(&p.reference, config, &mut r)
                })
                .collect();
            Ok(records(pairs, mt))
        }
    }
}

fn run_command(command: &str, pairs: &[SentencePair]) -> Result<Vec<Vec<String>>> {
    let mut input = String::new();
    for p in pairs {
        input.push_str(&p.source.join(" "));
        input.push('\n');
    }
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Adapter(format!("cannot start {command:?}: {e}")))?;
    let mut stdin = child.stdin.take().expect("stdin is piped");
    let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
    let output = child
        .wait_with_output()
        .map_err(|e| Error::Adapter(format!("{command:?}: {e}")))?;
    let _ = writer.join();
    if !output.status.success() {
        return Err(Error::Adapter(format!(
            "{command:?} exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    let mt = read_translations(output.stdout.as_slice())?;
    if mt.len() != pairs.len() {
        return Err(Error::Adapter(format!(
            "{command:?} produced {} lines for {} sentences",
            mt.len(),
            pairs.len()
        )));
    }
    Ok(mt)
}
