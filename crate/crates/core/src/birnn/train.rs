use super::adam::{AdamHyper, AdamState};
use super::model::{backward, forward, loss, predict};
use super::params::{BirnnParams, Gradients};
use super::BirnnConfig;
use crate::annotate::LabeledInstance;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Examples per gradient chunk; chunks are reduced in index order.
const CHUNK: usize = 8;
const DROPOUT_SALT: u64 = 0xD209_0C7A_5EED_0001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_accuracy: f64,
    pub best: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    /// Snapshot with the best development accuracy.
    pub params: BirnnParams<T>,
    pub log: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_dev_accuracy: f64,
}

pub fn evaluate_accuracy<T: Real>(
    params: &BirnnParams<T>,
    config: &BirnnConfig,
    data: &[LabeledInstance],
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyCorpus("no evaluation instances".into()));
    }
    let correct: usize = data
        .par_iter()
        .map(|d| predict(params, config, &d.source_ids, &d.mt_ids).map(|(l, _)| usize::from(l == d.label)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(correct as f64 / data.len() as f64)
}

/// Mini-batch Adam with early stopping on development accuracy.
pub fn train<T: Real>(
    train: &[LabeledInstance],
    dev: &[LabeledInstance],
    config: &BirnnConfig,
) -> Result<TrainOutcome<T>> {
    if train.is_empty() || dev.is_empty() {
        return Err(Error::EmptyCorpus(
            "training and development splits must be non-empty".into(),
        ));
    }
    let mut params = BirnnParams::<T>::init(config)?;
    let mut adam = AdamState::new(&params);
    let hyper = AdamHyper::from_config(config);
    let mut best = params.clone();
    let mut best_acc = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut stale = 0usize;
    let mut log = Vec::new();
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng::stream(config.seed, epoch as u64));
        let dropout_seed = rng::stream_seed(config.seed ^ DROPOUT_SALT, epoch as u64);
        let mut loss_sum = 0.0f64;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let base = b * config.batch_size;
            let scale = T::one() / T::of(batch.len() as f64);
            let parts = batch
                .par_chunks(CHUNK)
                .enumerate()
                .map(|(c, idx)| {
                    let mut g = Gradients::zeros(config);
                    let mut l = 0.0f64;
                    for (k, &i) in idx.iter().enumerate() {
                        let d = &train[i];
                        let mut r = rng::stream(dropout_seed, (base + c * CHUNK + k) as u64);
                        let tr = forward(&params, config, &d.source_ids, &d.mt_ids, Some(&mut r))?;
                        l += loss(tr.p, d.label).as_f64();
                        backward(&tr, &params, d.label, scale, &mut g);
                    }
                    Ok((g, l))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut iter = parts.into_iter();
            let (mut grads, mut l) = iter.next().expect("non-empty batch");
            for (g, x) in iter {
                grads.add_assign(&g);
                l += x;
            }
            loss_sum += l;
            adam.step(&mut params, &grads, &hyper)?;
        }
        if !params.is_finite() {
            return Err(Error::Training(format!("non-finite parameters after epoch {epoch}")));
        }
        let acc = evaluate_accuracy(&params, config, dev)?;
        let improved = acc > best_acc;
        if improved {
            best_acc = acc;
            best_epoch = epoch;
            best.clone_from(&params);
            stale = 0;
        } else {
            stale += 1;
        }
        let rec = EpochRecord {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            dev_accuracy: acc,
            best: improved,
        };
        log::info!(
            "epoch {} loss {:.6} dev {:.4}{}",
            rec.epoch,
            rec.train_loss,
            rec.dev_accuracy,
            if improved { " *" } else { "" }
        );
        log.push(rec);
        if stale >= config.patience {
            break;
        }
    }
    Ok(TrainOutcome {
        params: best,
        log,
        best_epoch,
        best_dev_accuracy: best_acc,
    })
}

/// One JSON object per epoch.
pub fn write_log<W: Write>(mut out: W, log: &[EpochRecord]) -> std::io::Result<()> {
    for r in log {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
