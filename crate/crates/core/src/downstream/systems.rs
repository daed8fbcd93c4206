use super::{compare_outputs_with, DownstreamSystem, EntityComparison, EntityMultiset, EntityType, TaskOutput};
use crate::error::{Error, Result};
use crate::text::tokenize;
use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexiconKind {
    Subjectivity,
    Sentiment,
}

/// Token → polarity weight.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: HashMap<String, f64>,
    kind: LexiconKind,
}

impl Lexicon {
    pub fn new<I, S>(kind: LexiconKind, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut map = HashMap::new();
        for (token, weight) in entries {
            let token: String = token.into();
            if !weight.is_finite() {
                return Err(Error::InvalidArgument(format!("weight of {token:?} is not finite")));
            }
            map.insert(token.to_lowercase(), weight);
        }
        Ok(Lexicon { entries: map, kind })
    }

    /// Reads `token<TAB>weight` lines.
    pub fn read_from<R: BufRead>(kind: LexiconKind, reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::parse("lexicon", idx + 1, e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (token, weight) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse("lexicon", idx + 1, "expected token<TAB>weight"))?;
            let weight: f64 = weight
                .trim()
                .parse()
                .map_err(|_| Error::parse("lexicon", idx + 1, format!("bad weight {weight:?}")))?;
            if !weight.is_finite() {
                return Err(Error::parse("lexicon", idx + 1, "weight is not finite"));
            }
            entries.push((token.trim().to_string(), weight));
        }
        Lexicon::new(kind, entries)
    }

    pub fn load(kind: LexiconKind, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(kind, std::io::BufReader::new(file))
    }

    pub fn kind(&self) -> LexiconKind {
        self.kind
    }

    pub fn weight(&self, token: &str) -> f64 {
        self.entries.get(token).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Sign of the summed token weights against `threshold`.
pub fn classify_sentiment(lexicon: &Lexicon, tokens: &[String], threshold: f64) -> TaskOutput {
    let score: f64 = tokens.iter().map(|t| lexicon.weight(t)).sum();
    let label = if score > threshold {
        "positive"
    } else if score < -threshold {
        "negative"
    } else {
        "neutral"
    };
    TaskOutput::Label(label.into())
}

pub fn classify_subjectivity(lexicon: &Lexicon, tokens: &[String]) -> TaskOutput {
    let hit = tokens.iter().any(|t| lexicon.weight(t) != 0.0);
    TaskOutput::Label(if hit { "subjective" } else { "objective" }.into())
}

/// Phrase → entity type, matched greedily left to right, longest first.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: HashMap<Vec<String>, EntityType>,
    max_len: usize,
}

impl Gazetteer {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, EntityType)>,
        S: AsRef<str>,
    {
        let mut gaz = Gazetteer::default();
        for (phrase, kind) in entries {
            let tokens = tokenize(&phrase.as_ref().to_lowercase());
            if tokens.is_empty() {
                return Err(Error::InvalidArgument("empty gazetteer phrase".into()));
            }
            gaz.max_len = gaz.max_len.max(tokens.len());
            gaz.entries.insert(tokens, kind);
        }
        Ok(gaz)
    }

    /// Reads `phrase<TAB>type` lines.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::parse("gazetteer", idx + 1, e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (phrase, kind) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse("gazetteer", idx + 1, "expected phrase<TAB>type"))?;
            let kind: EntityType = kind
                .parse()
                .map_err(|e: Error| Error::parse("gazetteer", idx + 1, e.to_string()))?;
            if phrase.trim().is_empty() {
                return Err(Error::parse("gazetteer", idx + 1, "empty phrase"));
            }
            entries.push((phrase.to_string(), kind));
        }
        Gazetteer::new(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(file))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn extract_entities(gazetteer: &Gazetteer, tokens: &[String]) -> TaskOutput {
    let lowered: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let mut set = EntityMultiset::new();
    let mut i = 0;
    'outer: while i < lowered.len() {
        let longest = gazetteer.max_len.min(lowered.len() - i);
        for len in (1..=longest).rev() {
            if let Some(&kind) = gazetteer.entries.get(&lowered[i..i + len]) {
                set.insert(kind, &lowered[i..i + len].join(" "));
                i += len;
                continue 'outer;
            }
        }
        i += 1;
    }
    TaskOutput::Entities(set)
}

#[derive(Debug, Clone)]
pub struct SentimentSystem {
    lexicon: Lexicon,
    threshold: f64,
}

impl SentimentSystem {
    pub fn new(lexicon: Lexicon, threshold: f64) -> Result<Self> {
        if lexicon.kind() != LexiconKind::Sentiment {
            return Err(Error::InvalidArgument(
                "sentiment system needs a sentiment lexicon".into(),
            ));
        }
        if !(threshold.is_finite() && threshold >= 0.0) {
            return Err(Error::InvalidArgument(
                "sentiment threshold must be finite and >= 0".into(),
            ));
        }
        Ok(SentimentSystem { lexicon, threshold })
    }
}

impl DownstreamSystem for SentimentSystem {
    fn name(&self) -> &str {
        "sentiment"
    }

    fn run(&self, tokens: &[String]) -> Result<TaskOutput> {
        Ok(classify_sentiment(&self.lexicon, tokens, self.threshold))
    }
}

#[derive(Debug, Clone)]
pub struct SubjectivitySystem {
    lexicon: Lexicon,
}

impl SubjectivitySystem {
    pub fn new(lexicon: Lexicon) -> Result<Self> {
        if lexicon.kind() != LexiconKind::Subjectivity {
            return Err(Error::InvalidArgument(
                "subjectivity system needs a subjectivity lexicon".into(),
            ));
        }
        Ok(SubjectivitySystem { lexicon })
    }
}

impl DownstreamSystem for SubjectivitySystem {
    fn name(&self) -> &str {
        "subjectivity"
    }

    fn run(&self, tokens: &[String]) -> Result<TaskOutput> {
        Ok(classify_subjectivity(&self.lexicon, tokens))
    }

    fn binary_labels(&self) -> Option<[String; 2]> {
        Some(["objective".into(), "subjective".into()])
    }
}

#[derive(Debug, Clone)]
pub struct NerSystem {
    gazetteer: Gazetteer,
    comparison: EntityComparison,
}

impl NerSystem {
    pub fn new(gazetteer: Gazetteer) -> Self {
        NerSystem {
            gazetteer,
            comparison: EntityComparison::TypedSurface,
        }
    }

    pub fn with_comparison(mut self, comparison: EntityComparison) -> Self {
        self.comparison = comparison;
        self
    }
}

impl DownstreamSystem for NerSystem {
    fn name(&self) -> &str {
        "ner"
    }

    fn run(&self, tokens: &[String]) -> Result<TaskOutput> {
        Ok(extract_entities(&self.gazetteer, tokens))
    }

    fn compare(&self, a: &TaskOutput, b: &TaskOutput) -> Result<bool> {
        compare_outputs_with(a, b, self.comparison)
    }
}

/// Several tasks evaluated on the same sentence; output is the tuple of
/// component outputs.
pub struct CombinedSystem {
    name: String,
    parts: Vec<Box<dyn DownstreamSystem>>,
}

impl CombinedSystem {
    pub fn new(parts: Vec<Box<dyn DownstreamSystem>>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument(
                "combined task needs at least one component".into(),
            ));
        }
        let name = parts.iter().map(|p| p.name()).collect::<Vec<_>>().join("+");
        Ok(CombinedSystem { name, parts })
    }
}

impl DownstreamSystem for CombinedSystem {
    fn name(&self) -> &str {
        &self.name
    }

    fn run(&self, tokens: &[String]) -> Result<TaskOutput> {
        self.parts
            .iter()
            .map(|p| p.run(tokens))
            .collect::<Result<Vec<_>>>()
            .map(TaskOutput::Tuple)
    }

    fn compare(&self, a: &TaskOutput, b: &TaskOutput) -> Result<bool> {
        match (a, b) {
            (TaskOutput::Tuple(xs), TaskOutput::Tuple(ys)) if xs.len() == self.parts.len() && ys.len() == xs.len() => {
                let mut all = true;
                for ((p, x), y) in self.parts.iter().zip(xs).zip(ys) {
                    all &= p.compare(x, y)?;
                }
                Ok(all)
            }
            _ => Err(Error::Downstream(format!(
                "{} expects {}-tuples",
                self.name,
                self.parts.len()
            ))),
        }
    }
}
