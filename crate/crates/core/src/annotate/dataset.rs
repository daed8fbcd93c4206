//! JSON-lines dataset files: one header object, then one object per
//! instance with fields `src`, `mt`, `ref` (space-joined tokens), `label`,
//! `src_ids` and `mt_ids`.

use super::LabeledInstance;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

pub const DATASET_FORMAT: &str = "acceptkit-dataset";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format: String,
    pub version: u32,
    pub task: String,
    pub seed: u64,
    #[serde(default)]
    pub config_digest: String,
    #[serde(default)]
    pub source_bpe_digest: String,
    #[serde(default)]
    pub target_bpe_digest: String,
    #[serde(default)]
    pub source_vocab_digest: String,
    #[serde(default)]
    pub target_vocab_digest: String,
    #[serde(default)]
    pub source_vocab_size: usize,
    #[serde(default)]
    pub target_vocab_size: usize,
    #[serde(default)]
    pub skipped: usize,
}

impl DatasetHeader {
    pub fn new(task: impl Into<String>, seed: u64) -> Self {
        DatasetHeader {
            format: DATASET_FORMAT.into(),
            version: DATASET_VERSION,
            task: task.into(),
            seed,
            config_digest: String::new(),
            source_bpe_digest: String::new(),
            target_bpe_digest: String::new(),
            source_vocab_digest: String::new(),
            target_vocab_digest: String::new(),
            source_vocab_size: 0,
            target_vocab_size: 0,
            skipped: 0,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Row {
    src: String,
    mt: String,
    #[serde(rename = "ref")]
    reference: String,
    label: u8,
    #[serde(default)]
    src_ids: Vec<u32>,
    #[serde(default)]
    mt_ids: Vec<u32>,
}

fn split(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

pub fn write_dataset<W: Write>(mut out: W, header: &DatasetHeader, instances: &[LabeledInstance]) -> Result<()> {
    let io = |e: std::io::Error| Error::io("<dataset>", e);
    serde_json::to_writer(&mut out, header).map_err(|e| Error::io("<dataset>", e.into()))?;
    out.write_all(b"\n").map_err(io)?;
    for inst in instances {
        let row = Row {
            src: inst.source.join(" "),
            mt: inst.mt.join(" "),
            reference: inst.reference.join(" "),
            label: inst.label,
            src_ids: inst.source_ids.clone(),
            mt_ids: inst.mt_ids.clone(),
        };
        serde_json::to_writer(&mut out, &row).map_err(|e| Error::io("<dataset>", e.into()))?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_dataset<R: BufRead>(reader: R) -> Result<(DatasetHeader, Vec<LabeledInstance>)> {
    let mut lines = reader.lines().enumerate();
    let header: DatasetHeader = match lines.next() {
        Some((_, line)) => {
            let line = line.map_err(|e| Error::parse("dataset", 1, e.to_string()))?;
            serde_json::from_str(&line).map_err(|e| Error::parse("dataset", 1, format!("bad header: {e}")))?
        }
        None => return Err(Error::EmptyCorpus("dataset file is empty".into())),
    };
    if header.format != DATASET_FORMAT || header.version != DATASET_VERSION {
        return Err(Error::parse(
            "dataset",
            1,
            format!("unsupported format {} v{}", header.format, header.version),
        ));
    }
    let mut instances = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::parse("dataset", idx + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = serde_json::from_str(&line).map_err(|e| Error::parse("dataset", idx + 1, e.to_string()))?;
        if row.label > 1 {
            return Err(Error::parse(
                "dataset",
                idx + 1,
                format!("label {} is not 0 or 1", row.label),
            ));
        }
        instances.push(LabeledInstance {
            source: split(&row.src),
            mt: split(&row.mt),
            reference: split(&row.reference),
            label: row.label,
            source_ids: row.src_ids,
            mt_ids: row.mt_ids,
        });
    }
    Ok((header, instances))
}
