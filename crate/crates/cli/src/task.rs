use crate::util::{require_file, usage};
use acceptkit::downstream::{
    CombinedSystem, DownstreamSystem, EntityComparison, ExternalSystem, Gazetteer, Lexicon, LexiconKind, NerSystem,
    SentimentSystem, SubjectivitySystem,
};
use anyhow::Result;
use clap::{Args, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum TaskKind {
    Sentiment,
    Subjectivity,
    Ner,
    External,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum EntityMatch {
    Typed,
    Count,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TaskArgs {
    /// Downstream task; repeat to combine tasks into a tuple output
    #[arg(long = "task", value_enum, required = true)]
    pub tasks: Vec<TaskKind>,
    /// Polarity lexicon (token<TAB>weight)
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Subjectivity lexicon; defaults to --lexicon
    #[arg(long)]
    pub subjectivity_lexicon: Option<PathBuf>,
    /// Sentiment neutrality threshold
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// Gazetteer (phrase<TAB>PER|LOC|ORG)
    #[arg(long)]
    pub gazetteer: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EntityMatch::Typed)]
    pub entity_match: EntityMatch,
    /// Shell command for the external task
    #[arg(long)]
    pub task_command: Option<String>,
    /// Binary labels of the external task, as NEGATIVE,POSITIVE
    #[arg(long)]
    pub task_labels: Option<String>,
}

impl TaskArgs {
    pub fn build(&self) -> Result<Box<dyn DownstreamSystem>> {
        let mut parts: Vec<Box<dyn DownstreamSystem>> = Vec::new();
        for kind in &self.tasks {
            parts.push(self.build_one(*kind)?);
        }
        if parts.len() == 1 {
            Ok(parts.pop().expect("one part"))
        } else {
            Ok(Box::new(CombinedSystem::new(parts)?))
        }
    }

    fn build_one(&self, kind: TaskKind) -> Result<Box<dyn DownstreamSystem>> {
        Ok(match kind {
            TaskKind::Sentiment => {
                let path = self
                    .lexicon
                    .as_ref()
                    .ok_or_else(|| usage("--task sentiment requires --lexicon"))?;
                require_file(path)?;
                Box::new(SentimentSystem::new(
                    Lexicon::load(LexiconKind::Sentiment, path)?,
                    self.threshold,
                )?)
            }
            TaskKind::Subjectivity => {
                let path = self
                    .subjectivity_lexicon
                    .as_ref()
                    .or(self.lexicon.as_ref())
                    .ok_or_else(|| usage("--task subjectivity requires --lexicon or --subjectivity-lexicon"))?;
                require_file(path)?;
                Box::new(SubjectivitySystem::new(Lexicon::load(
                    LexiconKind::Subjectivity,
                    path,
                )?)?)
            }
            TaskKind::Ner => {
                let path = self
                    .gazetteer
                    .as_ref()
                    .ok_or_else(|| usage("--task ner requires --gazetteer"))?;
                require_file(path)?;
                let mode = match self.entity_match {
                    EntityMatch::Typed => EntityComparison::TypedSurface,
                    EntityMatch::Count => EntityComparison::CountOnly,
                };
                Box::new(NerSystem::new(Gazetteer::load(path)?).with_comparison(mode))
            }
            TaskKind::External => {
                let cmd = self
                    .task_command
                    .as_ref()
                    .ok_or_else(|| usage("--task external requires --task-command"))?;
                let mut sys = ExternalSystem::new("external", cmd.clone());
                if let Some(labels) = &self.task_labels {
                    let (neg, pos) = labels
                        .split_once(',')
                        .ok_or_else(|| usage("--task-labels must look like NEGATIVE,POSITIVE"))?;
                    sys = sys.with_binary_labels(neg.trim(), pos.trim());
                }
                Box::new(sys)
            }
        })
    }
}
