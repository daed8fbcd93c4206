use crate::error::{Error, Result};
use std::collections::HashMap;

/// Frequency quartiles of the n-gram types of one order.
///
/// With type frequencies sorted ascending `f_1 <= .. <= f_m`, the three
/// thresholds are the nearest-rank percentiles `t_k = f_ceil(k*m/4)`. A
/// frequency belongs to the first quartile `q` with `freq <= t_q`, else Q4,
/// so ties go to the lower quartile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuartileEntry {
    pub n: usize,
    pub thresholds: [u64; 3],
    counts: HashMap<Vec<String>, u64>,
}

impl QuartileEntry {
    pub fn build<W: AsRef<[String]>>(corpus: &[W], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n-gram order must be >= 1".into()));
        }
        let mut counts: HashMap<Vec<String>, u64> = HashMap::new();
        for sentence in corpus {
            for gram in sentence.as_ref().windows(n) {
                *counts.entry(gram.to_vec()).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            return Err(Error::EmptyCorpus(format!("corpus has no {n}-grams")));
        }
        let mut freqs: Vec<u64> = counts.values().copied().collect();
        freqs.sort_unstable();
        let m = freqs.len();
        let rank = |k: usize| freqs[(k * m).div_ceil(4) - 1];
        Ok(QuartileEntry {
            n,
            thresholds: [rank(1), rank(2), rank(3)],
            counts,
        })
    }

    pub fn frequency(&self, gram: &[String]) -> u64 {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// Quartile 1..=4 of a frequency.
    pub fn quartile_of(&self, freq: u64) -> u8 {
        self.thresholds
            .iter()
            .position(|&t| freq <= t)
            .map_or(4, |q| q as u8 + 1)
    }

    /// Quartile of an in-corpus n-gram, `None` for unseen ones.
    pub fn quartile(&self, gram: &[String]) -> Option<u8> {
        match self.frequency(gram) {
            0 => None,
            f => Some(self.quartile_of(f)),
        }
    }

    /// Fractions of the sentence's in-corpus n-grams in Q1..Q4.
    pub fn distribution(&self, tokens: &[String]) -> [f64; 4] {
        let mut hist = [0usize; 4];
        for gram in tokens.windows(self.n) {
            if let Some(q) = self.quartile(gram) {
                hist[q as usize - 1] += 1;
            }
        }
        let total: usize = hist.iter().sum();
        if total == 0 {
            return [0.0; 4];
        }
        hist.map(|h| h as f64 / total as f64)
    }

    pub fn types(&self) -> usize {
        self.counts.len()
    }
}

/// Quartile entries for uni-, bi- and trigrams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuartileTable {
    pub orders: [QuartileEntry; 3],
}

impl QuartileTable {
    pub fn build<W: AsRef<[String]>>(corpus: &[W]) -> Result<Self> {
        Ok(QuartileTable {
            orders: [
                QuartileEntry::build(corpus, 1)?,
                QuartileEntry::build(corpus, 2)?,
                QuartileEntry::build(corpus, 3)?,
            ],
        })
    }
}
