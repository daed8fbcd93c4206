//! Detection metrics, the accept-all baseline and the cross-lingual
//! accuracy calculus `p_f = p_t p_d + (1 - p_t)(1 - p_d)`.

mod pipeline;

pub use pipeline::{simulate_labels, simulate_pipeline, write_decisions, write_review, Decision, PipelineReport};

use crate::error::{Error, Result};
use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};
use std::io::BufRead;

/// Counts with acceptable (1) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `(tp + tn) / total`, exact for rational `T`.
    pub fn accuracy<T: Num + FromPrimitive>(&self) -> Result<T> {
        self.rate(self.tp + self.tn)
    }

    pub fn error_rate<T: Num + FromPrimitive>(&self) -> Result<T> {
        self.rate(self.fp + self.fn_)
    }

    fn rate<T: Num + FromPrimitive>(&self, count: u64) -> Result<T> {
        if self.total() == 0 {
            return Err(Error::InvalidArgument("empty confusion matrix".into()));
        }
        let conv = |v: u64| T::from_u64(v).ok_or_else(|| Error::InvalidArgument("count not representable".into()));
        Ok(conv(count)? / conv(self.total())?)
    }

    pub fn precision(&self) -> Option<f64> {
        (self.tp + self.fp > 0).then(|| self.tp as f64 / (self.tp + self.fp) as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        (self.tp + self.fn_ > 0).then(|| self.tp as f64 / (self.tp + self.fn_) as f64)
    }

    /// F1 of the acceptable class; informational only.
    pub fn f1(&self) -> Option<f64> {
        let (p, r) = (self.precision()?, self.recall()?);
        (p + r > 0.0).then(|| 2.0 * p * r / (p + r))
    }
}

fn check_binary(v: &[u8], what: &str) -> Result<()> {
    match v.iter().find(|&&x| x > 1) {
        Some(x) => Err(Error::InvalidArgument(format!("{what} value {x} is not 0 or 1"))),
        None => Ok(()),
    }
}

pub fn confusion(predictions: &[u8], golds: &[u8]) -> Result<ConfusionMatrix> {
    if predictions.len() != golds.len() {
        return Err(Error::Shape(format!(
            "{} predictions but {} golds",
            predictions.len(),
            golds.len()
        )));
    }
    if golds.is_empty() {
        return Err(Error::InvalidArgument("no instances".into()));
    }
    check_binary(predictions, "prediction")?;
    check_binary(golds, "gold")?;
    let mut cm = ConfusionMatrix::default();
    for (&p, &g) in predictions.iter().zip(golds) {
        match (p, g) {
            (1, 1) => cm.tp += 1,
            (1, _) => cm.fp += 1,
            (_, 0) => cm.tn += 1,
            _ => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// Confusion matrix of the predictor that accepts everything.
pub fn baseline_accept_all(golds: &[u8]) -> Result<ConfusionMatrix> {
    confusion(&vec![1; golds.len()], golds)
}

/// Cross-lingual pipeline accuracy under the flip handler.
pub fn cross_lingual_accuracy<T: Num + PartialOrd + Copy>(p_t: T, p_d: T) -> Result<T> {
    let unit = |x: T| x >= T::zero() && x <= T::one();
    if !unit(p_t) || !unit(p_d) {
        return Err(Error::InvalidArgument("probabilities must lie in [0, 1]".into()));
    }
    Ok(p_t * p_d + (T::one() - p_t) * (T::one() - p_d))
}

/// Change in pipeline accuracy for a change `delta_p_d` in detection accuracy.
pub fn accuracy_gain<T: Num + Copy>(p_t: T, delta_p_d: T) -> T {
    (p_t + p_t - T::one()) * delta_p_d
}

/// Summary of a detector against gold acceptability labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub instances: u64,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub baseline: ConfusionMatrix,
    pub baseline_accuracy: f64,
    pub improvement: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn detection_report(predictions: &[u8], golds: &[u8]) -> Result<DetectionReport> {
    let cm = confusion(predictions, golds)?;
    let base = baseline_accept_all(golds)?;
    let accuracy: f64 = cm.accuracy()?;
    let baseline_accuracy: f64 = base.accuracy()?;
    Ok(DetectionReport {
        instances: cm.total(),
        confusion: cm,
        accuracy,
        baseline: base,
        baseline_accuracy,
        improvement: accuracy - baseline_accuracy,
        precision: cm.precision(),
        recall: cm.recall(),
        f1: cm.f1(),
    })
}

/// Reads `label[<TAB>score]` lines.
pub fn read_predictions<R: BufRead>(reader: R) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::parse("predictions", i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let first = line.split('\t').next().unwrap_or("").trim();
        match first {
            "0" => out.push(0),
            "1" => out.push(1),
            _ => {
                return Err(Error::parse(
                    "predictions",
                    i + 1,
                    format!("expected 0 or 1, got `{first}`"),
                ))
            }
        }
    }
    Ok(out)
}
