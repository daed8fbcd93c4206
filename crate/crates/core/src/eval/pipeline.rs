use super::{accuracy_gain, baseline_accept_all, confusion, cross_lingual_accuracy, ConfusionMatrix};
use crate::annotate::LabeledInstance;
use crate::downstream::{DownstreamSystem, TaskOutput};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Flip-handler simulation over one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub instances: u64,
    /// Binary task labels; the second one is the positive class of the
    /// per-strategy matrices.
    pub labels: [String; 2],
    /// Acceptable fraction, i.e. accuracy of the accept-all detector.
    pub baseline_accuracy: f64,
    /// Detection accuracy `p_d`.
    pub detector_accuracy: f64,
    /// Empirical downstream accuracy `p_t` on references.
    pub downstream_accuracy: f64,
    /// Fraction where the output on the translation matches the gold label.
    pub baseline_cross_lingual_accuracy: f64,
    pub flip_cross_lingual_accuracy: f64,
    /// `p_t p_d + (1 - p_t)(1 - p_d)` from the empirical rates.
    pub predicted_flip_accuracy: f64,
    /// `(2 p_t - 1)(p_d - baseline)`.
    pub predicted_gain: f64,
    pub detection: ConfusionMatrix,
    pub baseline_detection: ConfusionMatrix,
    pub baseline_strategy: ConfusionMatrix,
    pub flip_strategy: ConfusionMatrix,
    pub flipped: u64,
}

/// Per-instance outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub index: usize,
    pub detector: u8,
    pub acceptable: u8,
    pub mt_label: String,
    pub reference_label: String,
    pub gold_label: String,
    pub final_label: String,
}

fn label_matrix(pred: &[&str], gold: &[&str], positive: &str) -> ConfusionMatrix {
    let p: Vec<u8> = pred.iter().map(|&l| u8::from(l == positive)).collect();
    let g: Vec<u8> = gold.iter().map(|&l| u8::from(l == positive)).collect();
    confusion(&p, &g).expect("non-empty equal-length binary inputs")
}

/// Simulates the flip handler from task labels. Gold final labels default to
/// the labels on the references.
pub fn simulate_labels(
    predictions: &[u8],
    mt_labels: &[String],
    reference_labels: &[String],
    gold: Option<&[String]>,
    labels: &[String; 2],
) -> Result<(PipelineReport, Vec<Decision>)> {
    let n = predictions.len();
    if mt_labels.len() != n || reference_labels.len() != n || gold.is_some_and(|g| g.len() != n) {
        return Err(Error::Shape("pipeline inputs differ in length".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("no instances".into()));
    }
    let other = |l: &str| -> Result<&str> {
        if l == labels[0] {
            Ok(&labels[1])
        } else if l == labels[1] {
            Ok(&labels[0])
        } else {
            Err(Error::Downstream(format!("label `{l}` is not one of {labels:?}")))
        }
    };
    let gold: Vec<&str> = match gold {
        Some(g) => g.iter().map(String::as_str).collect(),
        None => reference_labels.iter().map(String::as_str).collect(),
    };
    let mut acceptable = Vec::with_capacity(n);
    let mut finals = Vec::with_capacity(n);
    let mut decisions = Vec::with_capacity(n);
    for i in 0..n {
        other(&mt_labels[i])?;
        other(&reference_labels[i])?;
        other(gold[i])?;
        let acc = u8::from(mt_labels[i] == reference_labels[i]);
        let fin = if predictions[i] == 1 {
            mt_labels[i].as_str()
        } else {
            other(&mt_labels[i])?
        };
        acceptable.push(acc);
        finals.push(fin);
        decisions.push(Decision {
            index: i,
            detector: predictions[i],
            acceptable: acc,
            mt_label: mt_labels[i].clone(),
            reference_label: reference_labels[i].clone(),
            gold_label: gold[i].to_string(),
            final_label: fin.to_string(),
        });
    }
    let detection = confusion(predictions, &acceptable)?;
    let baseline_detection = baseline_accept_all(&acceptable)?;
    let frac = |hits: usize| hits as f64 / n as f64;
    let p_d: f64 = detection.accuracy()?;
    let base_d: f64 = baseline_detection.accuracy()?;
    let p_t = frac((0..n).filter(|&i| reference_labels[i] == gold[i]).count());
    let mt: Vec<&str> = mt_labels.iter().map(String::as_str).collect();
    let report = PipelineReport {
        instances: n as u64,
        labels: labels.clone(),
        baseline_accuracy: base_d,
        detector_accuracy: p_d,
        downstream_accuracy: p_t,
        baseline_cross_lingual_accuracy: frac((0..n).filter(|&i| mt[i] == gold[i]).count()),
        flip_cross_lingual_accuracy: frac((0..n).filter(|&i| finals[i] == gold[i]).count()),
        predicted_flip_accuracy: cross_lingual_accuracy(p_t, p_d)?,
        predicted_gain: accuracy_gain(p_t, p_d - base_d),
        detection,
        baseline_detection,
        baseline_strategy: label_matrix(&mt, &gold, &labels[1]),
        flip_strategy: label_matrix(&finals, &gold, &labels[1]),
        flipped: predictions.iter().filter(|&&p| p == 0).count() as u64,
    };
    Ok((report, decisions))
}

fn as_label(out: TaskOutput) -> Result<String> {
    match out {
        TaskOutput::Label(l) => Ok(l),
        other => Err(Error::Downstream(format!("expected a label output, got {other}"))),
    }
}

/// Runs `task` on translations and references, then simulates the flip handler.
pub fn simulate_pipeline(
    predictions: &[u8],
    instances: &[LabeledInstance],
    task: &dyn DownstreamSystem,
    gold: Option<&[String]>,
) -> Result<(PipelineReport, Vec<Decision>)> {
    let labels = task
        .binary_labels()
        .ok_or_else(|| Error::InvalidArgument(format!("task `{}` is not a binary classifier", task.name())))?;
    if predictions.len() != instances.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} instances",
            predictions.len(),
            instances.len()
        )));
    }
    let mts: Vec<&[String]> = instances.iter().map(|d| d.mt.as_slice()).collect();
    let refs: Vec<&[String]> = instances.iter().map(|d| d.reference.as_slice()).collect();
    let run = |xs: &[&[String]]| -> Result<Vec<String>> {
        task.run_batch(xs).into_iter().map(|r| r.and_then(as_label)).collect()
    };
    let mt_labels = run(&mts)?;
    let ref_labels = run(&refs)?;
    simulate_labels(predictions, &mt_labels, &ref_labels, gold, &labels)
}

/// TSV of every decision with a header line.
pub fn write_decisions<W: Write>(mut out: W, decisions: &[Decision]) -> std::io::Result<()> {
    writeln!(
        out,
        "index\tdetector\tacceptable\tmt_label\treference_label\tgold_label\tfinal_label"
    )?;
    for d in decisions {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            d.index, d.detector, d.acceptable, d.mt_label, d.reference_label, d.gold_label, d.final_label
        )?;
    }
    Ok(())
}

/// `index<TAB>source<TAB>mt` for every instance predicted unacceptable.
pub fn write_review<W: Write>(mut out: W, instances: &[LabeledInstance], predictions: &[u8]) -> std::io::Result<()> {
    for (i, (d, &p)) in instances.iter().zip(predictions).enumerate() {
        if p == 0 {
            writeln!(out, "{i}\t{}\t{}", d.source.join(" "), d.mt.join(" "))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::downstream::{Lexicon, LexiconKind, SubjectivitySystem};

    fn labels() -> [String; 2] {
        ["neg".into(), "pos".into()]
    }

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn perfect_detector_fixes_everything() {
        let mt = s(&["pos", "neg", "neg", "pos"]);
        let rf = s(&["pos", "pos", "neg", "neg"]);
        let preds = [1, 0, 1, 0];
        let (r, d) = simulate_labels(&preds, &mt, &rf, None, &labels()).unwrap();
        assert_eq!(r.flip_cross_lingual_accuracy, 1.0);
        assert_eq!(r.baseline_cross_lingual_accuracy, 0.5);
        assert_eq!(r.detector_accuracy, 1.0);
        assert_eq!(d[1].final_label, "pos");
        assert_eq!(r.flipped, 2);
    }

    #[test]
    fn accept_all_detector_changes_nothing() {
        let mt = s(&["pos", "neg", "neg"]);
        let rf = s(&["pos", "pos", "neg"]);
        let (r, _) = simulate_labels(&[1, 1, 1], &mt, &rf, None, &labels()).unwrap();
        assert_eq!(r.flip_cross_lingual_accuracy, r.baseline_cross_lingual_accuracy);
        assert_eq!(r.flip_strategy, r.baseline_strategy);
    }

    #[test]
    fn gold_labels_and_formula() {
        let mt = s(&["pos", "neg"]);
        let rf = s(&["pos", "pos"]);
        let gold = s(&["neg", "pos"]);
        let (r, _) = simulate_labels(&[1, 0], &mt, &rf, Some(&gold), &labels()).unwrap();
        assert_eq!(r.downstream_accuracy, 0.5);
        assert_eq!(r.predicted_flip_accuracy, 0.5);
    }

    #[test]
    fn rejects_unknown_labels_and_non_binary_tasks() {
        assert!(simulate_labels(&[1], &s(&["x"]), &s(&["pos"]), None, &labels()).is_err());
        let sys = crate::downstream::NerSystem::new(crate::downstream::Gazetteer::default());
        assert!(simulate_pipeline(&[], &[], &sys, None).is_err());
    }

    #[test]
    fn runs_a_real_task() {
        let lex = Lexicon::new(LexiconKind::Subjectivity, [("great", 1.0)]).unwrap();
        let sys = SubjectivitySystem::new(lex).unwrap();
        let inst = |mt: &[&str], rf: &[&str]| LabeledInstance {
            source: s(&["x"]),
            mt: s(mt),
            reference: s(rf),
            label: 0,
            source_ids: vec![],
            mt_ids: vec![],
        };
        let data = vec![inst(&["a", "great"], &["a", "great"]), inst(&["a"], &["great"])];
        let (r, _) = simulate_pipeline(&[1, 0], &data, &sys, None).unwrap();
        assert_eq!(r.flip_cross_lingual_accuracy, 1.0);
        let mut buf = Vec::new();
        write_review(&mut buf, &data, &[1, 0]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1\tx\ta\n");
    }
}
