//! Automatic acceptability annotation: run the downstream system on the MT
//! output and on the reference, label the pair acceptable when the outputs
//! agree, and package the results as training data.

mod dataset;
mod encoder;

pub use dataset::{read_dataset, write_dataset, DatasetHeader, DATASET_FORMAT, DATASET_VERSION};
pub use encoder::SubwordEncoder;

use crate::corpus::{BpeModel, SentencePair};
use crate::downstream::DownstreamSystem;
use crate::error::{Error, Result};
use crate::rng;
use crate::translate::TranslationRecord;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_SOURCE_SUBWORDS: usize = 50;

/// One supervised example: `(<source, mt>, label)` plus the reference it
/// was labeled against and precomputed subword ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub source: Vec<String>,
    pub mt: Vec<String>,
    pub reference: Vec<String>,
    /// 1 = acceptable, 0 = unacceptable.
    pub label: u8,
    pub source_ids: Vec<u32>,
    pub mt_ids: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct Annotation {
    pub instances: Vec<LabeledInstance>,
    /// Records dropped because the downstream system failed on them.
    pub skipped: usize,
}

impl Annotation {
    pub fn acceptable_count(&self) -> usize {
        self.instances.iter().filter(|i| i.label == 1).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<LabeledInstance>,
    pub dev: Vec<LabeledInstance>,
    pub test: Vec<LabeledInstance>,
    pub seed: u64,
}

/// Keeps pairs whose source segments into at most `max_subwords` subwords.
pub fn filter_by_length(pairs: &[SentencePair], bpe: &BpeModel, max_subwords: usize) -> Vec<SentencePair> {
    pairs
        .iter()
        .filter(|p| bpe.apply(&p.source).len() <= max_subwords)
        .cloned()
        .collect()
}

/// Labels every record with `y = [task(mt) == task(reference)]`.
///
/// Records on which the task fails are skipped with a warning and counted.
/// The source side never influences the label.
pub fn annotate(
    records: &[TranslationRecord],
    task: &dyn DownstreamSystem,
    encoder: Option<&SubwordEncoder>,
) -> Annotation {
    let mts: Vec<&[String]> = records.iter().map(|r| r.mt.as_slice()).collect();
    let refs: Vec<&[String]> = records.iter().map(|r| r.reference.as_slice()).collect();
    let mt_out = task.run_batch(&mts);
    let ref_out = task.run_batch(&refs);

    let mut instances = Vec::with_capacity(records.len());
    let mut skipped = 0;
    for (idx, ((rec, m), r)) in records.iter().zip(mt_out).zip(ref_out).enumerate() {
        let verdict = match (m, r) {
            (Ok(m), Ok(r)) => task.compare(&m, &r),
            (Err(e), _) | (_, Err(e)) => Err(e),
        };
        match verdict {
            Ok(ok) => {
                let (source_ids, mt_ids) = match encoder {
                    Some(enc) => (enc.encode_source(&rec.source), enc.encode_target(&rec.mt)),
                    None => (Vec::new(), Vec::new()),
                };
                instances.push(LabeledInstance {
                    source: rec.source.clone(),
                    mt: rec.mt.clone(),
                    reference: rec.reference.clone(),
                    label: u8::from(ok),
                    source_ids,
                    mt_ids,
                });
            }
            Err(e) => {
                log::warn!("record {}: {} failed: {e}; skipped", idx + 1, task.name());
                skipped += 1;
            }
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} of {} records skipped", records.len());
    }
    Annotation { instances, skipped }
}

/// Seeded uniform shuffle, then dev, test and train in that order.
pub fn split_dataset(
    instances: &[LabeledInstance],
    dev_size: usize,
    test_size: usize,
    seed: u64,
) -> Result<DatasetSplit> {
    if dev_size + test_size > instances.len() {
        return Err(Error::InvalidArgument(format!(
            "dev ({dev_size}) + test ({test_size}) exceeds the {} available instances",
            instances.len()
        )));
    }
    let mut order: Vec<usize> = (0..instances.len()).collect();
    order.shuffle(&mut rng::seeded(seed));
    let pick = |idx: &[usize]| idx.iter().map(|&i| instances[i].clone()).collect::<Vec<_>>();
    Ok(DatasetSplit {
        dev: pick(&order[..dev_size]),
        test: pick(&order[dev_size..dev_size + test_size]),
        train: pick(&order[dev_size + test_size..]),
        seed,
    })
}

/// Drops randomly chosen majority-class instances until both classes are
/// equally frequent. Relative order of the kept instances is preserved.
pub fn downsample_majority(instances: &[LabeledInstance], seed: u64) -> Vec<LabeledInstance> {
    let pos: Vec<usize> = (0..instances.len()).filter(|&i| instances[i].label == 1).collect();
    let neg: Vec<usize> = (0..instances.len()).filter(|&i| instances[i].label == 0).collect();
    let (mut major, minor) = if pos.len() >= neg.len() { (pos, neg) } else { (neg, pos) };
    major.shuffle(&mut rng::seeded(seed));
    major.truncate(minor.len());
    let mut keep: Vec<usize> = major.into_iter().chain(minor).collect();
    keep.sort_unstable();
    keep.into_iter().map(|i| instances[i].clone()).collect()
}
