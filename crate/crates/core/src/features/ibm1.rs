//! IBM Model 1 lexical translation probabilities estimated by EM.

use crate::corpus::SentencePair;
use crate::error::{Error, Result};
use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

/// Empty source word every target word may align to.
pub const NULL: &str = "<null>";
const HEADER: &str = "#acceptkit-lex v1";

/// Sparse `t(target | source)` table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LexTable {
    rows: BTreeMap<String, BTreeMap<String, f64>>,
}

impl LexTable {
    pub fn prob(&self, source: &str, target: &str) -> f64 {
        self.rows
            .get(source)
            .and_then(|r| r.get(target))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn row(&self, source: &str) -> Option<&BTreeMap<String, f64>> {
        self.rows.get(source)
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    /// Number of targets with `t(target | source) > threshold`.
    pub fn translations_above(&self, source: &str, threshold: f64) -> usize {
        self.rows
            .get(source)
            .map_or(0, |r| r.values().filter(|&&p| p > threshold).count())
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{HEADER}")?;
        for (s, row) in &self.rows {
            for (t, p) in row {
                writeln!(out, "{s}\t{t}\t{p}")?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        match lines.next() {
            Some(Ok(h)) if h == HEADER => {}
            _ => return Err(Error::parse("lexical table", 1, "missing header")),
        }
        let mut table = LexTable::default();
        for (idx, line) in lines.enumerate() {
            let n = idx + 2;
            let line = line.map_err(|e| Error::parse("lexical table", n, e.to_string()))?;
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(Error::parse("lexical table", n, "expected source<TAB>target<TAB>prob"));
            }
            let p: f64 = parts[2]
                .parse()
                .map_err(|_| Error::parse("lexical table", n, "bad probability"))?;
            table
                .rows
                .entry(parts[0].to_string())
                .or_default()
                .insert(parts[1].to_string(), p);
        }
        Ok(table)
    }
}

#[derive(Debug, Clone)]
pub struct Ibm1Training {
    pub table: LexTable,
    /// Corpus log-likelihood `sum_f ln(sum_e t(f|e) / (l + 1))` before the
    /// first iteration and after each one.
    pub log_likelihoods: Vec<f64>,
}

struct Interner {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    fn id(&mut self, w: &str) -> u32 {
        if let Some(&i) = self.ids.get(w) {
            return i;
        }
        let i = self.names.len() as u32;
        self.ids.insert(w.to_string(), i);
        self.names.push(w.to_string());
        i
    }
}

/// Trains `t(target | source)` on `(source, reference)` pairs with a NULL
/// source word. Initialization is uniform over co-occurring target words.
pub fn ibm1_train(pairs: &[SentencePair], iterations: usize) -> Result<Ibm1Training> {
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus(
            "IBM Model 1 needs at least one sentence pair".into(),
        ));
    }
    if iterations == 0 {
        return Err(Error::InvalidArgument(
            "IBM Model 1 needs at least one iteration".into(),
        ));
    }
    let mut src = Interner {
        ids: HashMap::new(),
        names: Vec::new(),
    };
    let mut tgt = Interner {
        ids: HashMap::new(),
        names: Vec::new(),
    };
    let null = src.id(NULL);
    let corpus: Vec<(Vec<u32>, Vec<u32>)> = pairs
        .iter()
        .map(|p| {
            let mut s = vec![null];
            s.extend(p.source.iter().map(|w| src.id(w)));
            (s, p.reference.iter().map(|w| tgt.id(w)).collect())
        })
        .collect();

    let mut cooc: HashMap<u32, std::collections::BTreeSet<u32>> = HashMap::new();
    for (s, t) in &corpus {
        for &e in s {
            cooc.entry(e).or_default().extend(t.iter().copied());
        }
    }
    let mut t: HashMap<(u32, u32), f64> = HashMap::new();
    for (&e, fs) in &cooc {
        let p = 1.0 / fs.len() as f64;
        for &f in fs {
            t.insert((e, f), p);
        }
    }

    let mut log_likelihoods = Vec::with_capacity(iterations + 1);
    for _ in 0..iterations {
        let mut counts: HashMap<(u32, u32), f64> = HashMap::new();
        let mut totals: HashMap<u32, f64> = HashMap::new();
        let mut ll = 0.0;
        for (s, ts) in &corpus {
            for &f in ts {
                let denom: f64 = s.iter().map(|&e| t[&(e, f)]).sum();
                ll += (denom / s.len() as f64).ln();
                for &e in s {
                    let c = t[&(e, f)] / denom;
                    *counts.entry((e, f)).or_insert(0.0) += c;
                    *totals.entry(e).or_insert(0.0) += c;
                }
            }
        }
        log_likelihoods.push(ll);
        for ((e, f), c) in counts {
            t.insert((e, f), c / totals[&e]);
        }
    }
    log_likelihoods.push(corpus_log_likelihood(&corpus, &t));

    let mut table = LexTable::default();
    for (&(e, f), &p) in &t {
        table
            .rows
            .entry(src.names[e as usize].clone())
            .or_default()
            .insert(tgt.names[f as usize].clone(), p);
    }
    Ok(Ibm1Training { table, log_likelihoods })
}

fn corpus_log_likelihood(corpus: &[(Vec<u32>, Vec<u32>)], t: &HashMap<(u32, u32), f64>) -> f64 {
    corpus
        .iter()
        .flat_map(|(s, ts)| {
            ts.iter()
                .map(move |&f| (s.iter().map(|&e| t[&(e, f)]).sum::<f64>() / s.len() as f64).ln())
        })
        .sum()
}
