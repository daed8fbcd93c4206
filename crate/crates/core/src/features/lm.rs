//! Order-3 interpolated Kneser–Ney language model.
//!
//! Sentences are padded as `<s> <s> w1 .. wn </s>`. The prediction
//! vocabulary is every training word plus `</s>` and `<unk>`.
//!
//! ```text
//! P1(w)     = (c(w) + 1) / (N + |V|)
//! P2(w|v)   = max(N1+(.vw) - D, 0) / N1+(.v.) + D * T(v) / N1+(.v.) * P1(w)
//! P3(w|u v) = max(c(uvw) - D, 0) / c(uv.) + D * N1+(uv.) / c(uv.) * P2(w|v)
//! ```
//!
//! where `N1+(.vw)` counts distinct left extensions of the bigram `vw`,
//! `T(v)` counts distinct `w` with `N1+(.vw) > 0`, and a context with no
//! observations falls through to the next lower order.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::io::{BufRead, Write};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";
pub const DEFAULT_DISCOUNT: f64 = 0.75;

const UNK_ID: u32 = 0;
const EOS_ID: u32 = 1;
const BOS_ID: u32 = 2;
const HEADER: &str = "#acceptkit-lm v1";

#[derive(Debug, Clone, Copy, Default)]
struct ContextStats {
    total: u64,
    types: u64,
}

#[derive(Debug, Clone)]
pub struct NgramLm {
    discount: f64,
    words: Vec<String>,
    ids: HashMap<String, u32>,
    unigrams: Vec<u64>,
    unigram_total: u64,
    trigrams: HashMap<(u32, u32, u32), u64>,
    trigram_ctx: HashMap<(u32, u32), ContextStats>,
    continuation: HashMap<(u32, u32), u64>,
    bigram_ctx: HashMap<u32, ContextStats>,
}

impl NgramLm {
    fn empty(discount: f64) -> Self {
        let mut lm = NgramLm {
            discount,
            words: Vec::new(),
            ids: HashMap::new(),
            unigrams: Vec::new(),
            unigram_total: 0,
            trigrams: HashMap::new(),
            trigram_ctx: HashMap::new(),
            continuation: HashMap::new(),
            bigram_ctx: HashMap::new(),
        };
        for w in [UNK, EOS, BOS] {
            lm.intern(w);
        }
        lm
    }

    fn intern(&mut self, w: &str) -> u32 {
        if let Some(&id) = self.ids.get(w) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(w.to_string());
        self.ids.insert(w.to_string(), id);
        self.unigrams.push(0);
        id
    }

    fn id(&self, w: &str) -> u32 {
        self.ids.get(w).copied().unwrap_or(UNK_ID)
    }

    pub fn train<W: AsRef<[String]>>(corpus: &[W]) -> Result<Self> {
        Self::train_with_discount(corpus, DEFAULT_DISCOUNT)
    }

    pub fn train_with_discount<W: AsRef<[String]>>(corpus: &[W], discount: f64) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus(
                "cannot train a language model on an empty corpus".into(),
            ));
        }
        if !(discount > 0.0 && discount < 1.0) {
            return Err(Error::InvalidArgument(format!("discount {discount} outside (0, 1)")));
        }
        let mut lm = NgramLm::empty(discount);
        for sentence in corpus {
            let ids: Vec<u32> = sentence.as_ref().iter().map(|w| lm.intern(w)).collect();
            lm.add_sentence(&ids);
        }
        lm.finish();
        Ok(lm)
    }

    fn add_sentence(&mut self, ids: &[u32]) {
        let mut padded = vec![BOS_ID, BOS_ID];
        padded.extend_from_slice(ids);
        padded.push(EOS_ID);
        for &w in &padded[2..] {
            self.unigrams[w as usize] += 1;
        }
        for win in padded.windows(3) {
            *self.trigrams.entry((win[0], win[1], win[2])).or_insert(0) += 1;
        }
    }

    fn finish(&mut self) {
        self.unigram_total = self.unigrams.iter().sum();
        self.trigram_ctx.clear();
        self.continuation.clear();
        self.bigram_ctx.clear();
        for (&(u, v, w), &c) in &self.trigrams {
            let ctx = self.trigram_ctx.entry((u, v)).or_default();
            ctx.total += c;
            ctx.types += 1;
            *self.continuation.entry((v, w)).or_insert(0) += 1;
        }
        for (&(v, _), &n) in &self.continuation {
            let ctx = self.bigram_ctx.entry(v).or_default();
            ctx.total += n;
            ctx.types += 1;
        }
    }

    /// Size of the prediction vocabulary (words, `</s>` and `<unk>`).
    pub fn vocab_size(&self) -> usize {
        self.words.len() - 1
    }

    /// Words that can be predicted, including `</s>` and `<unk>`.
    pub fn prediction_vocab(&self) -> impl Iterator<Item = &str> {
        self.words
            .iter()
            .enumerate()
            .filter(|&(i, _)| i as u32 != BOS_ID)
            .map(|(_, w)| w.as_str())
    }

    pub fn contains(&self, w: &str) -> bool {
        self.ids.contains_key(w) && w != BOS && w != UNK
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    fn p1(&self, w: u32) -> f64 {
        let c = if w == BOS_ID { 0 } else { self.unigrams[w as usize] };
        (c as f64 + 1.0) / (self.unigram_total as f64 + self.vocab_size() as f64)
    }

    fn p2(&self, v: u32, w: u32) -> f64 {
        let lower = self.p1(w);
        match self.bigram_ctx.get(&v) {
            Some(ctx) if ctx.total > 0 => {
                let n = self.continuation.get(&(v, w)).copied().unwrap_or(0) as f64;
                let total = ctx.total as f64;
                (n - self.discount).max(0.0) / total + self.discount * ctx.types as f64 / total * lower
            }
            _ => lower,
        }
    }

    fn p3(&self, u: u32, v: u32, w: u32) -> f64 {
        let lower = self.p2(v, w);
        match self.trigram_ctx.get(&(u, v)) {
            Some(ctx) if ctx.total > 0 => {
                let c = self.trigrams.get(&(u, v, w)).copied().unwrap_or(0) as f64;
                let total = ctx.total as f64;
                (c - self.discount).max(0.0) / total + self.discount * ctx.types as f64 / total * lower
            }
            _ => lower,
        }
    }

    /// `P(word | context)` using the last two context words (fewer if the
    /// context is shorter). Unknown words are scored as `<unk>`.
    pub fn prob(&self, context: &[&str], word: &str) -> f64 {
        let w = self.id(word);
        match context {
            [] => self.p1(w),
            [v] => self.p2(self.id(v), w),
            [.., u, v] => self.p3(self.id(u), self.id(v), w),
        }
    }

    /// Natural-log probability of the padded sentence including `</s>`.
    pub fn logprob<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let mut u = BOS_ID;
        let mut v = BOS_ID;
        let mut total = 0.0;
        for w in tokens
            .iter()
            .map(|t| self.id(t.as_ref()))
            .chain(std::iter::once(EOS_ID))
        {
            total += self.p3(u, v, w).ln();
            u = v;
            v = w;
        }
        total
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{HEADER} order 3 discount {}", self.discount)?;
        let mut unigrams: Vec<(&str, u64)> = self
            .words
            .iter()
            .zip(&self.unigrams)
            .filter(|(w, _)| *w != BOS && *w != UNK && *w != EOS)
            .map(|(w, &c)| (w.as_str(), c))
            .collect();
        unigrams.sort();
        writeln!(out, "\\unigrams {}", unigrams.len())?;
        for (w, c) in unigrams {
            writeln!(out, "{w}\t{c}")?;
        }
        let mut trigrams: Vec<(String, u64)> = self
            .trigrams
            .iter()
            .map(|(&(u, v, w), &c)| {
                (
                    format!(
                        "{} {} {}",
                        self.words[u as usize], self.words[v as usize], self.words[w as usize]
                    ),
                    c,
                )
            })
            .collect();
        trigrams.sort();
        writeln!(out, "\\trigrams {}", trigrams.len())?;
        for (g, c) in trigrams {
            writeln!(out, "{g}\t{c}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::parse("language model", line, msg.to_string());
        let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = || -> Result<Option<(usize, String)>> {
            match lines.next() {
                Some((n, l)) => Ok(Some((
                    n,
                    l.map_err(|e| Error::parse("language model", n, e.to_string()))?,
                ))),
                None => Ok(None),
            }
        };
        let (_, header) = next()?.ok_or_else(|| bad(1, "missing header"))?;
        let discount: f64 = header
            .strip_prefix(HEADER)
            .and_then(|r| r.trim().strip_prefix("order 3 discount "))
            .and_then(|d| d.trim().parse().ok())
            .ok_or_else(|| bad(1, "bad header"))?;
        let mut lm = NgramLm::empty(discount);
        let section = |line: Option<(usize, String)>, name: &str| -> Result<usize> {
            let (n, l) = line.ok_or_else(|| bad(0, "truncated file"))?;
            l.strip_prefix(name)
                .and_then(|r| r.trim().parse().ok())
                .ok_or_else(|| bad(n, &format!("expected {name} section")))
        };
        let n_uni = section(next()?, "\\unigrams")?;
        let mut uni_counts = Vec::with_capacity(n_uni);
        for _ in 0..n_uni {
            let (n, l) = next()?.ok_or_else(|| bad(0, "truncated unigrams"))?;
            let (w, c) = l.split_once('\t').ok_or_else(|| bad(n, "expected word<TAB>count"))?;
            let c: u64 = c.parse().map_err(|_| bad(n, "bad count"))?;
            uni_counts.push((lm.intern(w), c));
        }
        let n_tri = section(next()?, "\\trigrams")?;
        for _ in 0..n_tri {
            let (n, l) = next()?.ok_or_else(|| bad(0, "truncated trigrams"))?;
            let (g, c) = l.split_once('\t').ok_or_else(|| bad(n, "expected ngram<TAB>count"))?;
            let c: u64 = c.parse().map_err(|_| bad(n, "bad count"))?;
            let parts: Vec<&str> = g.split(' ').collect();
            if parts.len() != 3 {
                return Err(bad(n, "trigram must have three words"));
            }
            let key = (lm.intern(parts[0]), lm.intern(parts[1]), lm.intern(parts[2]));
            lm.trigrams.insert(key, c);
        }
        for (id, c) in uni_counts {
            lm.unigrams[id as usize] = c;
        }
        // every trigram ending in </s> closes one sentence
        let eos: u64 = lm.trigrams.iter().filter(|(k, _)| k.2 == EOS_ID).map(|(_, &c)| c).sum();
        lm.unigrams[EOS_ID as usize] = eos;
        lm.finish();
        Ok(lm)
    }
}
