use crate::error::{Error, Result};
use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

/// Marker appended to the final symbol of every word.
pub const END_OF_WORD: &str = "</w>";

const HEADER: &str = "#bpe v1";

/// Ordered list of learned merge operations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    ranks: HashMap<(String, String), usize>,
}

#[derive(PartialEq, Eq)]
struct Candidate {
    count: u64,
    pair: Reverse<(String, String)>,
    ids: (u32, u32),
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count.cmp(&other.count).then_with(|| self.pair.cmp(&other.pair))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Symbols {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Symbols {
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(s.to_string());
        self.ids.insert(s.to_string(), id);
        id
    }
}

fn split_word(word: &str) -> Vec<String> {
    let mut symbols: Vec<String> = word.chars().map(String::from).collect();
    if let Some(last) = symbols.last_mut() {
        last.push_str(END_OF_WORD);
    }
    symbols
}

impl BpeModel {
    pub fn from_merges(merges: Vec<(String, String)>) -> Result<Self> {
        let mut ranks = HashMap::with_capacity(merges.len());
        for (rank, pair) in merges.iter().enumerate() {
            if ranks.insert(pair.clone(), rank).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate merge pair ({}, {})",
                    pair.0, pair.1
                )));
            }
        }
        Ok(BpeModel { merges, ranks })
    }

    /// Greedy BPE learning over word types. At each step the most frequent
    /// adjacent symbol pair is merged, ties broken by the lexicographically
    /// smallest `(left, right)`. Learning stops early once no pair occurs at
    /// least twice.
    pub fn learn<W: AsRef<[String]>>(corpus: &[W], num_merges: usize) -> Result<Self> {
        let mut word_index: HashMap<&str, usize> = HashMap::new();
        let mut word_list: Vec<&str> = Vec::new();
        let mut freqs: Vec<u64> = Vec::new();
        for sentence in corpus {
            for token in sentence.as_ref() {
                if token.is_empty() {
                    continue;
                }
                let idx = *word_index.entry(token.as_str()).or_insert_with(|| {
                    word_list.push(token.as_str());
                    freqs.push(0);
                    word_list.len() - 1
                });
                freqs[idx] += 1;
            }
        }
        if word_list.is_empty() {
            return Err(Error::EmptyCorpus("cannot learn BPE from an empty corpus".into()));
        }

        let mut symbols = Symbols {
            names: Vec::new(),
            ids: HashMap::new(),
        };
        let mut words: Vec<Vec<u32>> = word_list
            .iter()
            .map(|w| split_word(w).iter().map(|s| symbols.intern(s)).collect())
            .collect();

        let mut pair_counts: HashMap<(u32, u32), u64> = HashMap::new();
        let mut pair_words: HashMap<(u32, u32), BTreeSet<usize>> = HashMap::new();
        for (wi, word) in words.iter().enumerate() {
            for win in word.windows(2) {
                let key = (win[0], win[1]);
                *pair_counts.entry(key).or_insert(0) += freqs[wi];
                pair_words.entry(key).or_default().insert(wi);
            }
        }

        let candidate = |symbols: &Symbols, ids: (u32, u32), count: u64| Candidate {
            count,
            pair: Reverse((
                symbols.names[ids.0 as usize].clone(),
                symbols.names[ids.1 as usize].clone(),
            )),
            ids,
        };
        let mut heap: BinaryHeap<Candidate> = pair_counts
            .iter()
            .map(|(&ids, &count)| candidate(&symbols, ids, count))
            .collect();

        let mut merges = Vec::new();
        while merges.len() < num_merges {
            let Some(top) = heap.pop() else { break };
            let current = pair_counts.get(&top.ids).copied().unwrap_or(0);
            if current != top.count {
                continue;
            }
            if current < 2 {
                break;
            }
            let (left, right) = top.ids;
            let merged_name = format!("{}{}", symbols.names[left as usize], symbols.names[right as usize]);
            let merged = symbols.intern(&merged_name);
            merges.push(top.pair.0.clone());

            let affected = pair_words.remove(&top.ids).unwrap_or_default();
            let mut changed: BTreeSet<(u32, u32)> = BTreeSet::new();
            for wi in affected {
                let word = &words[wi];
                if !word.windows(2).any(|w| w[0] == left && w[1] == right) {
                    continue;
                }
                let freq = freqs[wi];
                for win in word.windows(2) {
                    let key = (win[0], win[1]);
                    if let Some(c) = pair_counts.get_mut(&key) {
                        *c -= freq;
                    }
                    changed.insert(key);
                }
                let mut next = Vec::with_capacity(word.len());
                let mut i = 0;
                while i < word.len() {
                    if i + 1 < word.len() && word[i] == left && word[i + 1] == right {
                        next.push(merged);
                        i += 2;
                    } else {
                        next.push(word[i]);
                        i += 1;
                    }
                }
                for win in next.windows(2) {
                    let key = (win[0], win[1]);
                    *pair_counts.entry(key).or_insert(0) += freq;
                    pair_words.entry(key).or_default().insert(wi);
                    changed.insert(key);
                }
                words[wi] = next;
            }
            for key in changed {
                let count = pair_counts.get(&key).copied().unwrap_or(0);
                if count == 0 {
                    pair_counts.remove(&key);
                } else {
                    heap.push(candidate(&symbols, key, count));
                }
            }
        }
        BpeModel::from_merges(merges)
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn num_merges(&self) -> usize {
        self.merges.len()
    }

    /// Segments one token: characters plus [`END_OF_WORD`], then learned
    /// merges in rank order.
    pub fn segment_token(&self, token: &str) -> Vec<String> {
        let mut symbols = split_word(token);
        loop {
            let best = symbols
                .windows(2)
                .filter_map(|w| self.ranks.get(&(w[0].clone(), w[1].clone())).copied())
                .min();
            let Some(rank) = best else { break };
            let (left, right) = &self.merges[rank];
            let mut next = Vec::with_capacity(symbols.len());
            let mut i = 0;
            while i < symbols.len() {
                if i + 1 < symbols.len() && &symbols[i] == left && &symbols[i + 1] == right {
                    next.push(format!("{left}{right}"));
                    i += 2;
                } else {
                    next.push(std::mem::take(&mut symbols[i]));
                    i += 1;
                }
            }
            symbols = next;
        }
        symbols
    }

    pub fn apply<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        tokens.iter().flat_map(|t| self.segment_token(t.as_ref())).collect()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{HEADER} {}", self.merges.len())?;
        for (l, r) in &self.merges {
            writeln!(out, "{l} {r}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| Error::parse("bpe model", 1, e.to_string()))?,
            None => return Err(Error::parse("bpe model", 1, "missing header")),
        };
        let declared: usize = header
            .strip_prefix(HEADER)
            .and_then(|rest| rest.trim().parse().ok())
            .ok_or_else(|| Error::parse("bpe model", 1, format!("bad header {header:?}")))?;
        let mut merges = Vec::with_capacity(declared);
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line.map_err(|e| Error::parse("bpe model", line_no, e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => {
                    merges.push((l.to_string(), r.to_string()))
                }
                _ => return Err(Error::parse("bpe model", line_no, "expected `left right`")),
            }
        }
        if merges.len() != declared {
            return Err(Error::parse(
                "bpe model",
                1,
                format!("header declares {declared} merges, found {}", merges.len()),
            ));
        }
        BpeModel::from_merges(merges)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_to(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

/// Rebuilds tokens from a subword sequence by splitting after each
/// end-of-word marker. A trailing fragment without a marker is kept as is.
pub fn desegment<S: AsRef<str>>(subwords: &[S]) -> Vec<String> {
    let mut words = Vec::new();
    let mut current = String::new();
    for sw in subwords {
        let sw = sw.as_ref();
        match sw.strip_suffix(END_OF_WORD) {
            Some(stem) => {
                current.push_str(stem);
                words.push(std::mem::take(&mut current));
            }
            None => current.push_str(sw),
        }
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corpus(words: &[(&str, usize)]) -> Vec<Vec<String>> {
        words
            .iter()
            .flat_map(|(w, n)| std::iter::repeat_n(vec![w.to_string()], *n))
            .collect()
    }

    #[test]
    fn zero_merges_is_character_split() {
        let model = BpeModel::learn(&corpus(&[("ab", 3)]), 0).unwrap();
        assert_eq!(model.num_merges(), 0);
        assert_eq!(model.apply(&["ab"]), vec!["a", "b</w>"]);
    }

    #[test]
    fn first_merge_is_most_frequent_pair() {
        // pairs: (a, b</w>) x3, (a, c</w>) x1
        let model = BpeModel::learn(&corpus(&[("ab", 3), ("ac", 1)]), 1).unwrap();
        assert_eq!(model.merges(), &[("a".to_string(), "b</w>".to_string())]);
    }

    #[test]
    fn stops_when_pairs_are_exhausted() {
        // "aa" x2: merge (a, a</w>) count 2; then the word is a single symbol.
        let model = BpeModel::learn(&corpus(&[("aa", 2)]), 5).unwrap();
        assert!(model.num_merges() < 5);
        assert_eq!(model.num_merges(), 1);
    }

    #[test]
    fn tie_break_is_lexicographic() {
        let model = BpeModel::learn(&corpus(&[("xy", 2), ("ab", 2)]), 1).unwrap();
        assert_eq!(model.merges()[0], ("a".to_string(), "b</w>".to_string()));
    }

    #[test]
    fn singleton_pairs_are_never_merged() {
        let model = BpeModel::learn(&corpus(&[("abc", 1)]), 10).unwrap();
        assert_eq!(model.num_merges(), 0);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let empty: Vec<Vec<String>> = vec![];
        assert!(BpeModel::learn(&empty, 3).is_err());
        assert!(BpeModel::learn(&[Vec::<String>::new()], 3).is_err());
    }

    #[test]
    fn unseen_tokens_still_segment() {
        let model = BpeModel::learn(&corpus(&[("low", 5), ("lower", 2), ("newest", 6)]), 10).unwrap();
        let sub = model.apply(&["zebra"]);
        assert_eq!(desegment(&sub), vec!["zebra"]);
        let sub = model.apply(&["lowest"]);
        assert_eq!(desegment(&sub), vec!["lowest"]);
    }

    #[test]
    fn merged_token_roundtrips() {
        let model = BpeModel::from_merges(vec![("a".into(), "b</w>".into())]).unwrap();
        assert_eq!(model.apply(&["ab"]), vec!["ab</w>"]);
        assert_eq!(desegment(&model.apply(&["ab", "ba"])), vec!["ab", "ba"]);
    }

    #[test]
    fn file_format_roundtrip_and_header() {
        let model = BpeModel::learn(&corpus(&[("low", 5), ("lower", 2), ("newest", 6)]), 8).unwrap();
        let mut buf = Vec::new();
        model.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("#bpe v1 {}\n", model.num_merges())));
        assert_eq!(BpeModel::read_from(buf.as_slice()).unwrap(), model);
        assert!(BpeModel::read_from("#bpe v1 2\na b\n".as_bytes()).is_err());
        assert!(BpeModel::read_from("#bpe v1 2\na b\na b\n".as_bytes()).is_err());
        assert!(BpeModel::read_from("bpe 1\na b\n".as_bytes()).is_err());
    }

    #[test]
    fn learning_is_deterministic() {
        let c = corpus(&[("hello", 4), ("help", 3), ("hell", 2), ("yellow", 3)]);
        let a = BpeModel::learn(&c, 20).unwrap();
        let b = BpeModel::learn(&c, 20).unwrap();
        assert_eq!(a.merges(), b.merges());
    }

    proptest! {
        #[test]
        fn segmentation_roundtrips(token in "[a-e]{1,12}", extra in proptest::collection::vec("[a-e]{1,6}", 1..20)) {
            let c: Vec<Vec<String>> = vec![extra];
            let model = BpeModel::learn(&c, 15).unwrap();
            let pieces = model.segment_token(&token);
            let joined: String = pieces.concat();
            prop_assert_eq!(joined.strip_suffix(END_OF_WORD).unwrap(), token.as_str());
        }
    }
}
