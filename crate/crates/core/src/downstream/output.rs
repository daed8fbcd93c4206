use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityType {
    #[serde(rename = "PER")]
    Person,
    #[serde(rename = "LOC")]
    Location,
    #[serde(rename = "ORG")]
    Organization,
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityType::Person => "PER",
            EntityType::Location => "LOC",
            EntityType::Organization => "ORG",
        })
    }
}

impl FromStr for EntityType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "PER" | "PERSON" => Ok(EntityType::Person),
            "LOC" | "LOCATION" => Ok(EntityType::Location),
            "ORG" | "ORGANIZATION" => Ok(EntityType::Organization),
            other => Err(Error::InvalidArgument(format!("unknown entity type {other:?}"))),
        }
    }
}

/// Multiset of `(type, surface)` entries; equality counts multiplicity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMultiset {
    counts: BTreeMap<(EntityType, String), usize>,
}

impl EntityMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts one occurrence. Surfaces are lowercased; empty surfaces are ignored.
    pub fn insert(&mut self, kind: EntityType, surface: &str) {
        let surface = surface.trim().to_lowercase();
        if surface.is_empty() {
            return;
        }
        *self.counts.entry((kind, surface)).or_insert(0) += 1;
    }

    pub fn len(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, kind: EntityType, surface: &str) -> usize {
        self.counts.get(&(kind, surface.to_lowercase())).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (EntityType, &str)> + '_ {
        self.counts
            .iter()
            .flat_map(|((k, s), &n)| std::iter::repeat_n((*k, s.as_str()), n))
    }
}

impl FromIterator<(EntityType, String)> for EntityMultiset {
    fn from_iter<I: IntoIterator<Item = (EntityType, String)>>(iter: I) -> Self {
        let mut set = EntityMultiset::new();
        for (k, s) in iter {
            set.insert(k, &s);
        }
        set
    }
}

/// Result of running a downstream system on one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskOutput {
    Label(String),
    Entities(EntityMultiset),
    /// Outputs of several tasks run on the same sentence.
    Tuple(Vec<TaskOutput>),
}

/// Granularity of entity multiset comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntityComparison {
    #[default]
    TypedSurface,
    /// Only the total number of entities must agree.
    CountOnly,
}

/// Equality of two outputs of the same variant. Tuples compare
/// component-wise and are equal only when every component is.
pub fn compare_outputs(a: &TaskOutput, b: &TaskOutput) -> Result<bool> {
    compare_outputs_with(a, b, EntityComparison::TypedSurface)
}

pub fn compare_outputs_with(a: &TaskOutput, b: &TaskOutput, mode: EntityComparison) -> Result<bool> {
    match (a, b) {
        (TaskOutput::Label(x), TaskOutput::Label(y)) => Ok(x == y),
        (TaskOutput::Entities(x), TaskOutput::Entities(y)) => Ok(match mode {
            EntityComparison::TypedSurface => x == y,
            EntityComparison::CountOnly => x.len() == y.len(),
        }),
        (TaskOutput::Tuple(xs), TaskOutput::Tuple(ys)) => {
            if xs.len() != ys.len() {
                return Err(Error::Downstream(format!(
                    "tuple arity mismatch: {} vs {}",
                    xs.len(),
                    ys.len()
                )));
            }
            let mut all = true;
            for (x, y) in xs.iter().zip(ys) {
                all &= compare_outputs_with(x, y, mode)?;
            }
            Ok(all)
        }
        _ => Err(Error::Downstream(format!(
            "cannot compare outputs of different kinds: {a} vs {b}"
        ))),
    }
}

impl fmt::Display for TaskOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskOutput::Label(name) => write!(f, "LABEL {name}"),
            TaskOutput::Entities(set) => {
                f.write_str("ENTITIES ")?;
                let parts: Vec<String> = set.iter().map(|(k, s)| format!("{k}:{s}")).collect();
                f.write_str(&parts.join(";"))
            }
            TaskOutput::Tuple(items) => {
                let parts: Vec<String> = items.iter().map(|o| o.to_string()).collect();
                write!(f, "TUPLE {}", parts.join(" ||| "))
            }
        }
    }
}

/// Parses the plug-in line protocol: `LABEL <name>` or
/// `ENTITIES <type>:<surface>;<type>:<surface>;...`.
impl FromStr for TaskOutput {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let line = line.trim_end_matches(['\r', '\n']);
        if let Some(name) = line.strip_prefix("LABEL ") {
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::Downstream("empty label".into()));
            }
            return Ok(TaskOutput::Label(name.to_string()));
        }
        if line == "ENTITIES" {
            return Ok(TaskOutput::Entities(EntityMultiset::new()));
        }
        if let Some(body) = line.strip_prefix("ENTITIES ") {
            let mut set = EntityMultiset::new();
            for item in body.split(';').filter(|s| !s.trim().is_empty()) {
                let (kind, surface) = item
                    .split_once(':')
                    .ok_or_else(|| Error::Downstream(format!("bad entity {item:?}")))?;
                if surface.trim().is_empty() {
                    return Err(Error::Downstream(format!("empty surface in {item:?}")));
                }
                set.insert(kind.parse()?, surface);
            }
            return Ok(TaskOutput::Entities(set));
        }
        Err(Error::Downstream(format!("unrecognized output line {line:?}")))
    }
}
