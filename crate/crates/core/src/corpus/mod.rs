//! Parallel corpus ingestion, subword segmentation and vocabularies.

mod bpe;
mod vocab;

pub use bpe::{desegment, BpeModel, END_OF_WORD};
pub use vocab::{Vocab, PAD, PAD_ID, UNK, UNK_ID};

use crate::error::{Error, Result};
use crate::text::tokenize;
use serde::{Deserialize, Serialize};
use std::io::BufRead;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub source: Vec<String>,
    pub reference: Vec<String>,
}

impl SentencePair {
    pub fn new(source: Vec<String>, reference: Vec<String>) -> Self {
        SentencePair { source, reference }
    }
}

/// Parses one `source<TAB>reference` line. The reference side is lowercased.
pub fn parse_pair_line(line: &str, line_no: usize) -> Result<SentencePair> {
    let mut fields = line.split('\t');
    let (src, tgt) = match (fields.next(), fields.next(), fields.next()) {
        (Some(s), Some(t), None) => (s, t),
        (_, None, _) => return Err(Error::parse("parallel corpus", line_no, "missing tab separator")),
        _ => return Err(Error::parse("parallel corpus", line_no, "more than one tab separator")),
    };
    let source = tokenize(src);
    let reference = tokenize(&tgt.to_lowercase());
    if source.is_empty() || reference.is_empty() {
        return Err(Error::parse(
            "parallel corpus",
            line_no,
            "empty side after tokenization",
        ));
    }
    Ok(SentencePair { source, reference })
}

pub fn read_parallel<R: BufRead>(reader: R) -> Result<Vec<SentencePair>> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::parse("parallel corpus", idx + 1, e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        pairs.push(parse_pair_line(line, idx + 1)?);
    }
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus("parallel corpus has no sentence pairs".into()));
    }
    Ok(pairs)
}

/// Loads a UTF-8 TSV parallel corpus, one `source<TAB>reference` pair per line.
pub fn load_parallel(path: impl AsRef<Path>) -> Result<Vec<SentencePair>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_parallel(std::io::BufReader::new(file))
}
