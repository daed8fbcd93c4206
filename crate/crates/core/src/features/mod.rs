//! The 17 black-box sentence-pair features and the resources they need.

mod ibm1;
mod lm;
mod quartile;

pub use ibm1::{ibm1_train, Ibm1Training, LexTable, NULL};
pub use lm::{NgramLm, BOS, DEFAULT_DISCOUNT, EOS, UNK};
pub use quartile::{QuartileEntry, QuartileTable};

use crate::corpus::SentencePair;
use crate::error::{Error, Result};
use crate::text::punctuation_count;
use crate::translate::TranslationRecord;
use rayon::prelude::*;
use std::collections::HashMap;
use std::io::{BufRead, Write};

pub const NUM_FEATURES: usize = 17;

pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8", "f9", "f10", "f11", "f12", "f13", "f14", "f15", "f16", "f17",
];

/// Raw (unstandardized) feature values in the order:
///
/// | idx | feature |
/// |-----|---------|
/// | f1  | source token count |
/// | f2  | target token count |
/// | f3  | mean source token length in characters |
/// | f4  | source LM log-probability (natural log) |
/// | f5  | target LM log-probability (natural log) |
/// | f6  | target type/token ratio |
/// | f7  | mean number of translations per source token with `t(.|w) > 0.2` |
/// | f8  | as f7 with threshold 0.01, each token weighted by 1 / source-corpus frequency |
/// | f9, f10 | fraction of in-corpus source unigrams in Q1 / Q4 |
/// | f11, f12 | same for bigrams |
/// | f13, f14 | same for trigrams |
/// | f15 | fraction of source tokens seen in the source corpus |
/// | f16 | source punctuation count |
/// | f17 | target punctuation count |
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector17(pub [f64; NUM_FEATURES]);

impl FeatureVector17 {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub struct FeatureResources {
    pub source_lm: NgramLm,
    pub target_lm: NgramLm,
    pub quartiles: QuartileTable,
    pub lex: LexTable,
    pub source_unigrams: HashMap<String, u64>,
}

pub fn unigram_counts<W: AsRef<[String]>>(corpus: &[W]) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for s in corpus {
        for w in s.as_ref() {
            *counts.entry(w.clone()).or_insert(0) += 1;
        }
    }
    counts
}

impl FeatureResources {
    /// Trains every resource on one parallel corpus.
    pub fn train(pairs: &[SentencePair], ibm1_iterations: usize) -> Result<Self> {
        let sources: Vec<&[String]> = pairs.iter().map(|p| p.source.as_slice()).collect();
        let targets: Vec<&[String]> = pairs.iter().map(|p| p.reference.as_slice()).collect();
        Ok(FeatureResources {
            source_lm: NgramLm::train(&sources)?,
            target_lm: NgramLm::train(&targets)?,
            quartiles: QuartileTable::build(&sources)?,
            lex: ibm1_train(pairs, ibm1_iterations)?.table,
            source_unigrams: unigram_counts(&sources),
        })
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn features(source: &[String], mt: &[String], res: &FeatureResources) -> FeatureVector17 {
    let mut f = [0.0; NUM_FEATURES];
    f[0] = source.len() as f64;
    f[1] = mt.len() as f64;
    f[2] = mean(source.iter().map(|w| w.chars().count() as f64));
    f[3] = res.source_lm.logprob(source);
    f[4] = res.target_lm.logprob(mt);
    f[5] = if mt.is_empty() {
        0.0
    } else {
        let types: std::collections::HashSet<&String> = mt.iter().collect();
        types.len() as f64 / mt.len() as f64
    };
    f[6] = mean(source.iter().map(|w| res.lex.translations_above(w, 0.2) as f64));
    f[7] = mean(source.iter().map(|w| {
        let freq = res.source_unigrams.get(w).copied().unwrap_or(0);
        if freq == 0 {
            0.0
        } else {
            res.lex.translations_above(w, 0.01) as f64 / freq as f64
        }
    }));
    for (k, entry) in res.quartiles.orders.iter().enumerate() {
        let d = entry.distribution(source);
        f[8 + 2 * k] = d[0];
        f[9 + 2 * k] = d[3];
    }
    f[14] = if source.is_empty() {
        0.0
    } else {
        source.iter().filter(|w| res.source_unigrams.contains_key(*w)).count() as f64 / source.len() as f64
    };
    f[15] = punctuation_count(source) as f64;
    f[16] = punctuation_count(mt) as f64;
    FeatureVector17(f)
}

pub fn extract_features17(record: &TranslationRecord, res: &FeatureResources) -> FeatureVector17 {
    features(&record.source, &record.mt, res)
}

pub fn extract_all(pairs: &[(&[String], &[String])], res: &FeatureResources) -> Vec<FeatureVector17> {
    pairs.par_iter().map(|(s, t)| features(s, t, res)).collect()
}

/// Writes the feature TSV: header `f1..f17<TAB>label`, one row per instance.
pub fn write_feature_tsv<W: Write>(mut out: W, rows: &[FeatureVector17], labels: &[u8]) -> Result<()> {
    if rows.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} feature rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    let io = |e| Error::io("<features>", e);
    writeln!(out, "{}\tlabel", FEATURE_NAMES.join("\t")).map_err(io)?;
    for (row, label) in rows.iter().zip(labels) {
        let cells: Vec<String> = row.0.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}\t{label}", cells.join("\t")).map_err(io)?;
    }
    Ok(())
}

pub fn read_feature_tsv<R: BufRead>(reader: R) -> Result<(Vec<FeatureVector17>, Vec<u8>)> {
    let mut lines = reader.lines();
    let expected = format!("{}\tlabel", FEATURE_NAMES.join("\t"));
    match lines.next() {
        Some(Ok(h)) if h == expected => {}
        _ => return Err(Error::parse("feature file", 1, "missing f1..f17 header")),
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in lines.enumerate() {
        let n = idx + 2;
        let line = line.map_err(|e| Error::parse("feature file", n, e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != NUM_FEATURES + 1 {
            return Err(Error::parse(
                "feature file",
                n,
                format!("expected {} columns", NUM_FEATURES + 1),
            ));
        }
        let mut f = [0.0; NUM_FEATURES];
        for (slot, cell) in f.iter_mut().zip(&cells) {
            *slot = cell
                .parse()
                .map_err(|_| Error::parse("feature file", n, format!("bad number {cell:?}")))?;
        }
        let label = match cells[NUM_FEATURES] {
            "0" => 0,
            "1" => 1,
            other => return Err(Error::parse("feature file", n, format!("bad label {other:?}"))),
        };
        rows.push(FeatureVector17(f));
        labels.push(label);
    }
    Ok((rows, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn resources() -> FeatureResources {
        let pairs = vec![
            SentencePair::new(toks("a b c ."), toks("x y z .")),
            SentencePair::new(toks("a c"), toks("x z")),
            SentencePair::new(toks("b , b"), toks("y , y")),
        ];
        FeatureResources::train(&pairs, 3).unwrap()
    }

    #[test]
    fn counts_and_punctuation() {
        let res = resources();
        let f = features(&toks("a b c"), &toks("x y"), &res);
        assert_eq!(f.0[0], 3.0);
        assert_eq!(f.0[1], 2.0);
        let f = features(&toks(". , a"), &toks("x"), &res);
        assert_eq!(f.0[15], 2.0);
        assert_eq!(f.0[16], 0.0);
    }

    #[test]
    fn empty_mt_is_defined() {
        let res = resources();
        let f = features(&toks("a b"), &[], &res);
        assert_eq!(f.0[1], 0.0);
        assert_eq!(f.0[5], 0.0);
        assert_eq!(f.0[4], res.target_lm.logprob::<String>(&[]));
        assert!(f.0.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn ranges_and_quartile_partition() {
        let res = resources();
        let f = features(&toks("a b zz c"), &toks("x x"), &res);
        for v in &f.0[8..15] {
            assert!((0.0..=1.0).contains(v));
        }
        assert_eq!(f.0[14], 0.75);
        assert_eq!(f.0[5], 0.5);
        let d = res.quartiles.orders[0].distribution(&toks("a b zz c"));
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(d[0], f.0[8]);
        assert_eq!(d[3], f.0[9]);
    }

    #[test]
    fn batch_extraction_is_order_invariant() {
        let res = resources();
        let a = (toks("a b"), toks("x y"));
        let b = (toks("c ."), toks("z"));
        let fwd = extract_all(&[(&a.0, &a.1), (&b.0, &b.1)], &res);
        let rev = extract_all(&[(&b.0, &b.1), (&a.0, &a.1)], &res);
        assert_eq!(fwd[0], rev[1]);
        assert_eq!(fwd[1], rev[0]);
    }

    #[test]
    fn tsv_roundtrip() {
        let res = resources();
        let rows = vec![
            features(&toks("a b"), &toks("x"), &res),
            features(&toks("c"), &[], &res),
        ];
        let mut buf = Vec::new();
        write_feature_tsv(&mut buf, &rows, &[1, 0]).unwrap();
        let (back, labels) = read_feature_tsv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        assert_eq!(labels, vec![1, 0]);
        assert!(write_feature_tsv(Vec::new(), &rows, &[1]).is_err());
    }
}
