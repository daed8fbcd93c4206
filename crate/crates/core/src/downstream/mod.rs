//! Executable downstream task systems and the comparison that defines
//! acceptability: a translation is acceptable for a task when the task's
//! output on the translation equals its output on the reference.

mod external;
mod output;
mod systems;

pub use external::ExternalSystem;
pub use output::{compare_outputs, compare_outputs_with, EntityComparison, EntityMultiset, EntityType, TaskOutput};
pub use systems::{
    classify_sentiment, classify_subjectivity, extract_entities, CombinedSystem, Gazetteer, Lexicon, LexiconKind,
    NerSystem, SentimentSystem, SubjectivitySystem,
};

use crate::error::Result;
use rayon::prelude::*;

/// A deterministic function from a target-language sentence to a task output.
pub trait DownstreamSystem: Send + Sync {
    fn name(&self) -> &str;

    fn run(&self, tokens: &[String]) -> Result<TaskOutput>;

    /// Runs over many sentences, preserving order.
    fn run_batch(&self, sentences: &[&[String]]) -> Vec<Result<TaskOutput>> {
        sentences.par_iter().map(|s| self.run(s)).collect()
    }

    /// The two labels of a binary classification task, if this is one.
    fn binary_labels(&self) -> Option<[String; 2]> {
        None
    }

    /// Equality of two outputs of this system.
    fn compare(&self, a: &TaskOutput, b: &TaskOutput) -> Result<bool> {
        compare_outputs(a, b)
    }

    /// Whether the outputs on `mt` and `reference` agree.
    fn acceptable(&self, mt: &[String], reference: &[String]) -> Result<bool> {
        self.compare(&self.run(mt)?, &self.run(reference)?)
    }
}
