use super::{DownstreamSystem, TaskOutput};
use crate::error::{Error, Result};
use std::io::Write;
use std::process::{Command, Stdio};

/// A downstream system run as a shell command: one sentence per stdin line,
/// one `LABEL ...` / `ENTITIES ...` line per sentence on stdout.
#[derive(Debug, Clone)]
pub struct ExternalSystem {
    name: String,
    command: String,
    labels: Option<[String; 2]>,
}

impl ExternalSystem {
    pub fn new(name: impl Into<String>, command: impl Into<String>) -> Self {
        ExternalSystem {
            name: name.into(),
            command: command.into(),
            labels: None,
        }
    }

    /// Declares the system a binary classifier over the given labels.
    pub fn with_binary_labels(mut self, negative: impl Into<String>, positive: impl Into<String>) -> Self {
        self.labels = Some([negative.into(), positive.into()]);
        self
    }

    fn invoke(&self, sentences: &[&[String]]) -> Result<Vec<String>> {
        let mut input = String::new();
        for s in sentences {
            input.push_str(&s.join(" "));
            input.push('\n');
        }
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Downstream(format!("cannot start {:?}: {e}", self.command)))?;
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let output = child
            .wait_with_output()
            .map_err(|e| Error::Downstream(format!("{:?}: {e}", self.command)))?;
        // a command that exits without reading stdin yields a broken pipe here
        let _ = writer.join();
        if !output.status.success() {
            return Err(Error::Downstream(format!(
                "{:?} exited with {}: {}",
                self.command,
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let stdout = String::from_utf8(output.stdout)
            .map_err(|_| Error::Downstream(format!("{:?} wrote non-UTF-8 output", self.command)))?;
        let lines: Vec<String> = stdout.lines().map(str::to_string).collect();
        if lines.len() != sentences.len() {
            return Err(Error::Downstream(format!(
                "{:?} returned {} lines for {} sentences",
                self.command,
                lines.len(),
                sentences.len()
            )));
        }
        Ok(lines)
    }
}

impl DownstreamSystem for ExternalSystem {
    fn name(&self) -> &str {
        &self.name
    }

    fn run(&self, tokens: &[String]) -> Result<TaskOutput> {
        let lines = self.invoke(&[tokens])?;
        lines[0].parse()
    }

    fn run_batch(&self, sentences: &[&[String]]) -> Vec<Result<TaskOutput>> {
        if sentences.is_empty() {
            return Vec::new();
        }
        match self.invoke(sentences) {
            Ok(lines) => lines.iter().map(|l| l.parse()).collect(),
            Err(e) => {
                let msg = e.to_string();
                sentences.iter().map(|_| Err(Error::Downstream(msg.clone()))).collect()
            }
        }
    }

    fn binary_labels(&self) -> Option<[String; 2]> {
        self.labels.clone()
    }
}
