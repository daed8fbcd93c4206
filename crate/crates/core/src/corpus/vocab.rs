use crate::error::{Error, Result};
use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;

/// Dense subword ↔ id mapping with PAD = 0 and UNK = 1 reserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    id_of: HashMap<String, u32>,
    token_of: Vec<String>,
}

impl Vocab {
    /// Keeps the `max_size` most frequent subwords, ties broken
    /// lexicographically.
    pub fn build<W: AsRef<[String]>>(corpus: &[W], max_size: usize) -> Result<Self> {
        if max_size == 0 {
            return Err(Error::InvalidArgument("vocabulary max_size must be at least 1".into()));
        }
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for sentence in corpus {
            for sw in sentence.as_ref() {
                *counts.entry(sw.as_str()).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            return Err(Error::EmptyCorpus(
                "cannot build a vocabulary from an empty corpus".into(),
            ));
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(max_size);
        Ok(Self::from_tokens(ranked.into_iter().map(|(t, _)| t.to_string())))
    }

    /// Builds from non-reserved tokens in id order (first token gets id 2).
    pub fn from_tokens<I: IntoIterator<Item = String>>(tokens: I) -> Self {
        let mut token_of = vec![PAD.to_string(), UNK.to_string()];
        let mut id_of = HashMap::new();
        id_of.insert(PAD.to_string(), PAD_ID);
        id_of.insert(UNK.to_string(), UNK_ID);
        for t in tokens {
            if id_of.contains_key(&t) {
                continue;
            }
            id_of.insert(t.clone(), token_of.len() as u32);
            token_of.push(t);
        }
        Vocab { id_of, token_of }
    }

    pub fn len(&self) -> usize {
        self.token_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_of.is_empty()
    }

    pub fn id(&self, token: &str) -> u32 {
        self.id_of.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.token_of.get(id as usize).map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.id_of.contains_key(token)
    }

    pub fn encode<S: AsRef<str>>(&self, subwords: &[S]) -> Vec<u32> {
        subwords.iter().map(|s| self.id(s.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter().map(|&i| self.token(i).unwrap_or(UNK).to_string()).collect()
    }

    /// One subword per line; line `n` (0-based) holds id `n + 2`.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for t in &self.token_of[2..] {
            writeln!(out, "{t}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut tokens = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::parse("vocab", idx + 1, e.to_string()))?;
            if line.is_empty() || line == PAD || line == UNK || !seen.insert(line.clone()) {
                return Err(Error::parse(
                    "vocab",
                    idx + 1,
                    format!("invalid or duplicate entry {line:?}"),
                ));
            }
            tokens.push(line);
        }
        Ok(Self::from_tokens(tokens))
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
