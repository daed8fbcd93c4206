use crate::util::{create_dir, json_line, open, require_file, usage, write_output, Provenance};
use crate::*;
use acceptkit::annotate::{
    annotate, downsample_majority, read_dataset, split_dataset, write_dataset, Annotation, DatasetHeader,
    LabeledInstance, SubwordEncoder,
};
use acceptkit::biquest::{feature_rows, train_biquest, Kernel, SvmModel, SvmParams};
use acceptkit::birnn::{self, BirnnConfig, BirnnParams};
use acceptkit::corpus::{load_parallel, BpeModel, SentencePair, Vocab};
use acceptkit::downstream::DownstreamSystem;
use acceptkit::eval::{detection_report, read_predictions, simulate_pipeline, write_decisions, write_review};
use acceptkit::features::{
    extract_all, ibm1_train, read_feature_tsv, unigram_counts, write_feature_tsv, FeatureResources, FeatureVector17,
    LexTable, NgramLm, QuartileTable, NUM_FEATURES,
};
use acceptkit::rng;
use acceptkit::scalar::Real;
use acceptkit::translate::{translate_batch, MtAdapter, NoiseConfig, TranslationRecord};
use anyhow::Result;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;
use std::io::{BufRead, Read};
use std::path::Path;

pub fn run(cli: &Cli) -> Result<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::BpeLearn(a) => bpe_learn(a, &Provenance::new("bpe-learn", seed, a)),
        Command::BpeApply(a) => bpe_apply(a, &Provenance::new("bpe-apply", seed, a)),
        Command::Vocab(a) => vocab(a, &Provenance::new("vocab", seed, a)),
        Command::Translate(a) => translate(a, seed, &Provenance::new("translate", seed, a)),
        Command::Annotate(a) => annotate_cmd(a, seed, &Provenance::new("annotate", seed, a)),
        Command::Split(a) => split(a, seed, &Provenance::new("split", seed, a)),
        Command::LmTrain(a) => lm_train(a, &Provenance::new("lm-train", seed, a)),
        Command::Ibm1Train(a) => ibm1(a, &Provenance::new("ibm1-train", seed, a)),
        Command::Features(a) => features(a, &Provenance::new("features", seed, a)),
        Command::TrainBiquest(a) => train_biquest_cmd(a, seed, &Provenance::new("train-biquest", seed, a)),
        Command::TrainBirnn(a) => train_birnn_cmd(a, seed, &Provenance::new("train-birnn", seed, a)),
        Command::Predict(a) => predict(a, &Provenance::new("predict", seed, a)),
        Command::Eval(a) => eval(a, &Provenance::new("eval", seed, a)),
        Command::Pipeline(a) => pipeline(a, seed, &Provenance::new("pipeline", seed, a)),
    }
}

fn read_lines(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut out = Vec::new();
    for line in open(path)?.lines() {
        let line = line.map_err(|e| acceptkit::Error::io(path, e))?;
        out.push(line.split_whitespace().map(String::from).collect());
    }
    Ok(out)
}

fn load_pairs(path: &Path) -> Result<Vec<SentencePair>> {
    require_file(path)?;
    Ok(load_parallel(path)?)
}

fn load_dataset(path: &Path) -> Result<(DatasetHeader, Vec<LabeledInstance>)> {
    require_file(path)?;
    Ok(read_dataset(open(path)?)?)
}

fn bpe_learn(a: &BpeLearnArgs, prov: &Provenance) -> Result<()> {
    let pairs = load_pairs(&a.pairs)?;
    let corpus: Vec<&[String]> = match a.side {
        Side::Source => pairs.iter().map(|p| p.source.as_slice()).collect(),
        Side::Target => pairs.iter().map(|p| p.reference.as_slice()).collect(),
        Side::Joint => pairs
            .iter()
            .map(|p| p.source.as_slice())
            .chain(pairs.iter().map(|p| p.reference.as_slice()))
            .collect(),
    };
    let bpe = BpeModel::learn(&corpus, a.merges)?;
    write_output(&a.out, prov, |w| Ok(bpe.write_to(w)?))
}

fn bpe_apply(a: &BpeApplyArgs, prov: &Provenance) -> Result<()> {
    require_file(&a.model)?;
    require_file(&a.input)?;
    let bpe = BpeModel::load(&a.model)?;
    let lines = read_lines(&a.input)?;
    let segmented: Vec<Vec<String>> = lines.par_iter().map(|l| bpe.apply(l)).collect();
    write_output(&a.out, prov, |w| {
        for s in &segmented {
            writeln!(w, "{}", s.join(" "))?;
        }
        Ok(())
    })
}

fn vocab(a: &VocabArgs, prov: &Provenance) -> Result<()> {
    require_file(&a.input)?;
    let v = Vocab::build(&read_lines(&a.input)?, a.size)?;
    write_output(&a.out, prov, |w| Ok(v.write_to(w)?))
}

fn build_adapter(mt: &MtArgs, seed: u64) -> Result<MtAdapter> {
    Ok(match mt.adapter {
        AdapterKind::File => {
            let path = mt
                .mt_file
                .clone()
                .ok_or_else(|| usage("--adapter file requires --mt-file"))?;
            require_file(&path)?;
            MtAdapter::File(path)
        }
        AdapterKind::Command => MtAdapter::Command(
            mt.mt_command
                .clone()
                .ok_or_else(|| usage("--adapter command requires --mt-command"))?,
        ),
        AdapterKind::Noise => {
            let substitution_lexicon = match &mt.substitutions {
                Some(p) => {
                    require_file(p)?;
                    NoiseConfig::read_substitutions(open(p)?)?
                }
                None => Default::default(),
            };
            let config = NoiseConfig {
                drop_prob: mt.drop,
                swap_prob: mt.swap,
                substitute_prob: mt.substitute,
                substitution_lexicon,
                seed,
            };
            config.validate()?;
            MtAdapter::Noise(config)
        }
    })
}

fn translate(a: &TranslateArgs, seed: u64, prov: &Provenance) -> Result<()> {
    let pairs = load_pairs(&a.pairs)?;
    let adapter = build_adapter(&a.mt, seed)?;
    let records = translate_batch(&adapter, &pairs)?;
    write_output(&a.out, prov, |w| {
        for r in &records {
            writeln!(w, "{}", r.mt.join(" "))?;
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct AnnotationSummary {
    records: usize,
    filtered_by_length: usize,
    skipped: usize,
    instances: usize,
    acceptable: usize,
    unacceptable: usize,
    acceptable_fraction: f64,
}

struct Annotated {
    annotation: Annotation,
    header: DatasetHeader,
    encoder: SubwordEncoder,
    summary: AnnotationSummary,
}

fn annotate_records(
    pairs: &[SentencePair],
    records: Vec<TranslationRecord>,
    task: &dyn DownstreamSystem,
    enc: &EncodingArgs,
    prov: &Provenance,
) -> Result<Annotated> {
    let encoder = SubwordEncoder::fit(pairs, enc.merges, enc.vocab_size, !enc.separate_bpe)?;
    let total = records.len();
    let kept: Vec<TranslationRecord> = records
        .into_iter()
        .filter(|r| encoder.source_bpe.apply(&r.source).len() <= enc.max_source_subwords)
        .collect();
    let filtered = total - kept.len();
    let annotation = annotate(&kept, task, Some(&encoder));
    let [sb, tb, sv, tv] = encoder.digests();
    let mut header = DatasetHeader::new(task.name(), prov.seed);
    header.config_digest = prov.config_digest.clone();
    header.source_bpe_digest = sb;
    header.target_bpe_digest = tb;
    header.source_vocab_digest = sv;
    header.target_vocab_digest = tv;
    header.source_vocab_size = encoder.source_vocab.len();
    header.target_vocab_size = encoder.target_vocab.len();
    header.skipped = annotation.skipped;
    let n = annotation.instances.len();
    let acc = annotation.acceptable_count();
    let summary = AnnotationSummary {
        records: total,
        filtered_by_length: filtered,
        skipped: annotation.skipped,
        instances: n,
        acceptable: acc,
        unacceptable: n - acc,
        acceptable_fraction: if n == 0 { 0.0 } else { acc as f64 / n as f64 },
    };
    Ok(Annotated {
        annotation,
        header,
        encoder,
        summary,
    })
}

fn save_encoder(dir: &Path, enc: &SubwordEncoder, prov: &Provenance) -> Result<()> {
    create_dir(dir)?;
    write_output(&dir.join("source.bpe"), prov, |w| Ok(enc.source_bpe.write_to(w)?))?;
    write_output(&dir.join("target.bpe"), prov, |w| Ok(enc.target_bpe.write_to(w)?))?;
    write_output(&dir.join("source.vocab"), prov, |w| Ok(enc.source_vocab.write_to(w)?))?;
    write_output(&dir.join("target.vocab"), prov, |w| Ok(enc.target_vocab.write_to(w)?))
}

fn annotate_cmd(a: &AnnotateArgs, _seed: u64, prov: &Provenance) -> Result<()> {
    require_file(&a.mt)?;
    let task = a.task.build()?;
    let pairs = load_pairs(&a.pairs)?;
    let records = translate_batch(&MtAdapter::File(a.mt.clone()), &pairs)?;
    let done = annotate_records(&pairs, records, task.as_ref(), &a.encoding, prov)?;
    if let Some(dir) = &a.encoder_dir {
        save_encoder(dir, &done.encoder, prov)?;
    }
    write_output(&a.out, prov, |w| {
        Ok(write_dataset(w, &done.header, &done.annotation.instances)?)
    })?;
    json_line(&mut std::io::stdout(), &done.summary)
}

fn split(a: &SplitArgs, seed: u64, prov: &Provenance) -> Result<()> {
    let (mut header, data) = load_dataset(&a.data)?;
    let mut s = split_dataset(&data, a.dev, a.test, seed)?;
    if a.downsample {
        s.train = downsample_majority(&s.train, seed);
    }
    header.seed = seed;
    header.config_digest = prov.config_digest.clone();
    create_dir(&a.out_dir)?;
    for (name, part) in [("train", &s.train), ("dev", &s.dev), ("test", &s.test)] {
        write_output(&a.out_dir.join(format!("{name}.jsonl")), prov, |w| {
            Ok(write_dataset(w, &header, part)?)
        })?;
    }
    Ok(())
}

fn lm_train(a: &LmTrainArgs, prov: &Provenance) -> Result<()> {
    let pairs = load_pairs(&a.pairs)?;
    let corpus: Vec<&[String]> = pairs
        .iter()
        .map(|p| match a.side {
            LmSide::Source => p.source.as_slice(),
            LmSide::Target => p.reference.as_slice(),
        })
        .collect();
    let lm = NgramLm::train(&corpus)?;
    write_output(&a.out, prov, |w| Ok(lm.write_to(w)?))
}

fn ibm1(a: &Ibm1TrainArgs, prov: &Provenance) -> Result<()> {
    let pairs = load_pairs(&a.pairs)?;
    let t = ibm1_train(&pairs, a.iterations)?;
    for (i, ll) in t.log_likelihoods.iter().enumerate() {
        log::info!("iteration {i}: log-likelihood {ll}");
    }
    write_output(&a.out, prov, |w| Ok(t.table.write_to(w)?))
}

fn load_or<T>(path: Option<&Path>, read: impl Fn(&Path) -> Result<T>, train: impl FnOnce() -> Result<T>) -> Result<T> {
    match path {
        Some(p) => {
            require_file(p)?;
            read(p)
        }
        None => train(),
    }
}

struct ResourceFiles<'a> {
    source_lm: Option<&'a Path>,
    target_lm: Option<&'a Path>,
    lex: Option<&'a Path>,
}

fn resources(pairs: &[SentencePair], ibm1_iterations: usize, files: ResourceFiles) -> Result<FeatureResources> {
    let sources: Vec<&[String]> = pairs.iter().map(|p| p.source.as_slice()).collect();
    let targets: Vec<&[String]> = pairs.iter().map(|p| p.reference.as_slice()).collect();
    Ok(FeatureResources {
        source_lm: load_or(
            files.source_lm,
            |p| Ok(NgramLm::read_from(open(p)?)?),
            || Ok(NgramLm::train(&sources)?),
        )?,
        target_lm: load_or(
            files.target_lm,
            |p| Ok(NgramLm::read_from(open(p)?)?),
            || Ok(NgramLm::train(&targets)?),
        )?,
        quartiles: QuartileTable::build(&sources)?,
        lex: load_or(
            files.lex,
            |p| Ok(LexTable::read_from(open(p)?)?),
            || Ok(ibm1_train(pairs, ibm1_iterations)?.table),
        )?,
        source_unigrams: unigram_counts(&sources),
    })
}

fn instance_features(data: &[LabeledInstance], res: &FeatureResources) -> Vec<FeatureVector17> {
    let pairs: Vec<(&[String], &[String])> = data.iter().map(|d| (d.source.as_slice(), d.mt.as_slice())).collect();
    extract_all(&pairs, res)
}

fn features(a: &FeaturesArgs, prov: &Provenance) -> Result<()> {
    let pairs = load_pairs(&a.pairs)?;
    let (_, data) = load_dataset(&a.data)?;
    let files = ResourceFiles {
        source_lm: a.source_lm.as_deref(),
        target_lm: a.target_lm.as_deref(),
        lex: a.lex.as_deref(),
    };
    let res = resources(&pairs, a.ibm1_iterations, files)?;
    let rows = instance_features(&data, &res);
    let labels: Vec<u8> = data.iter().map(|d| d.label).collect();
    write_output(&a.out, prov, |w| Ok(write_feature_tsv(w, &rows, &labels)?))
}

fn svm_params(a: &SvmArgs) -> SvmParams<f64> {
    let mut p = SvmParams::defaults(NUM_FEATURES);
    p.c = a.c;
    p.tol = a.tol;
    p.kernel = match a.kernel {
        KernelKind::Linear => Kernel::Linear,
        KernelKind::Rbf => Kernel::Rbf {
            gamma: a.gamma.unwrap_or(1.0 / NUM_FEATURES as f64),
        },
    };
    p
}

fn subsample(n: usize, max: Option<usize>, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    if let Some(m) = max.filter(|&m| m < n) {
        idx.shuffle(&mut rng::seeded(seed));
        idx.truncate(m);
        idx.sort_unstable();
    }
    idx
}

fn fit_biquest(rows: &[FeatureVector17], labels: &[u8], a: &SvmArgs, seed: u64) -> Result<SvmModel<f64>> {
    let idx = subsample(rows.len(), a.max_train, seed);
    let all = feature_rows::<f64>(rows);
    let x: Vec<Vec<f64>> = idx.iter().map(|&i| all[i].clone()).collect();
    let y: Vec<u8> = idx.iter().map(|&i| labels[i]).collect();
    let fit = train_biquest(&x, &y, &svm_params(a))?;
    log::info!(
        "SMO: {} iterations, {} support vectors, objective {}",
        fit.iterations,
        fit.model.coef.len(),
        fit.objective
    );
    Ok(fit.model)
}

fn train_biquest_cmd(a: &TrainBiquestArgs, seed: u64, prov: &Provenance) -> Result<()> {
    require_file(&a.features)?;
    let (rows, labels) = read_feature_tsv(open(&a.features)?)?;
    let model = fit_biquest(&rows, &labels, &a.svm, seed)?;
    write_output(&a.out, prov, |w| Ok(model.write_to(w)?))
}

fn birnn_config(a: &BirnnArgs, src_vocab: usize, tgt_vocab: usize, seed: u64) -> BirnnConfig {
    BirnnConfig {
        max_len: a.max_len,
        embed_dim: a.embed_dim,
        hidden_dim: a.hidden_dim,
        proj_dim: a.proj_dim,
        penult_dim: a.penult_dim,
        dropout: a.dropout,
        batch_size: a.batch_size,
        lr: a.lr,
        patience: a.patience,
        max_epochs: a.max_epochs,
        seed,
        ..BirnnConfig::new(src_vocab, tgt_vocab)
    }
}

fn vocab_sizes(header: &DatasetHeader, sets: &[&[LabeledInstance]]) -> (usize, usize) {
    let max = |f: fn(&LabeledInstance) -> &Vec<u32>| {
        sets.iter()
            .flat_map(|s| s.iter())
            .flat_map(|d| f(d).iter().copied())
            .max()
            .map_or(2, |m| m as usize + 1)
    };
    let src = header.source_vocab_size.max(max(|d| &d.source_ids));
    let tgt = header.target_vocab_size.max(max(|d| &d.mt_ids));
    (src, tgt)
}

struct BirnnRun {
    bytes: Vec<u8>,
    log: Vec<birnn::EpochRecord>,
    test_predictions: Vec<(u8, f64)>,
}

fn run_birnn<T: Real>(
    train: &[LabeledInstance],
    dev: &[LabeledInstance],
    test: &[LabeledInstance],
    config: &BirnnConfig,
) -> Result<BirnnRun> {
    let out = birnn::train::<T>(train, dev, config)?;
    let test_predictions = predict_birnn(&out.params, config, test)?;
    Ok(BirnnRun {
        bytes: birnn::io::to_bytes(&out.params, config),
        log: out.log,
        test_predictions,
    })
}

fn predict_birnn<T: Real>(
    params: &BirnnParams<T>,
    config: &BirnnConfig,
    data: &[LabeledInstance],
) -> Result<Vec<(u8, f64)>> {
    Ok(data
        .par_iter()
        .map(|d| birnn::predict(params, config, &d.source_ids, &d.mt_ids).map(|(l, p)| (l, p.as_f64())))
        .collect::<acceptkit::Result<Vec<_>>>()?)
}

fn train_birnn_cmd(a: &TrainBirnnArgs, seed: u64, prov: &Provenance) -> Result<()> {
    let (header, train) = load_dataset(&a.train)?;
    let (_, dev) = load_dataset(&a.dev)?;
    let (sv, tv) = vocab_sizes(&header, &[&train, &dev]);
    let config = birnn_config(&a.birnn, sv, tv, seed);
    config.validate()?;
    let run = if a.birnn.f64 {
        run_birnn::<f64>(&train, &dev, &[], &config)?
    } else {
        run_birnn::<f32>(&train, &dev, &[], &config)?
    };
    write_output(&a.out, prov, |w| Ok(w.write_all(&run.bytes)?))?;
    if let Some(path) = &a.log {
        write_output(path, prov, |w| Ok(birnn::train::write_log(w, &run.log)?))?;
    }
    Ok(())
}

fn write_predictions(path: &Path, prov: &Provenance, preds: &[(u8, f64)]) -> Result<()> {
    write_output(path, prov, |w| {
        for (l, s) in preds {
            writeln!(w, "{l}\t{s}")?;
        }
        Ok(())
    })
}

fn predict(a: &PredictArgs, prov: &Provenance) -> Result<()> {
    require_file(&a.model)?;
    require_file(&a.input)?;
    let mut bytes = Vec::new();
    open(&a.model)?
        .read_to_end(&mut bytes)
        .map_err(|e| acceptkit::Error::io(&a.model, e))?;
    let preds = if bytes.starts_with(birnn::io::MAGIC) {
        let (_, data) = load_dataset(&a.input)?;
        if bytes.get(12) == Some(&8) {
            let (p, c) = birnn::io::from_bytes::<f64>(&bytes)?;
            predict_birnn(&p, &c, &data)?
        } else {
            let (p, c) = birnn::io::from_bytes::<f32>(&bytes)?;
            predict_birnn(&p, &c, &data)?
        }
    } else {
        let model = SvmModel::<f64>::read_from(&bytes[..])?;
        let (rows, _) = read_feature_tsv(open(&a.input)?)?;
        model.predict_batch(&feature_rows(&rows))?
    };
    write_predictions(&a.out, prov, &preds)
}

fn gold_labels(path: &Path) -> Result<Vec<u8>> {
    require_file(path)?;
    let mut first = [0u8; 1];
    let n = open(path)?
        .read(&mut first)
        .map_err(|e| acceptkit::Error::io(path, e))?;
    if n == 1 && first[0] == b'{' {
        Ok(load_dataset(path)?.1.iter().map(|d| d.label).collect())
    } else {
        Ok(read_feature_tsv(open(path)?)?.1)
    }
}

fn eval(a: &EvalArgs, prov: &Provenance) -> Result<()> {
    require_file(&a.pred)?;
    let preds = read_predictions(open(&a.pred)?)?;
    let golds = gold_labels(&a.gold)?;
    let report = detection_report(&preds, &golds)?;
    match &a.out {
        Some(p) => write_output(p, prov, |w| json_line(w, &report)),
        None => json_line(&mut std::io::stdout(), &report),
    }
}

#[derive(Serialize)]
struct DetectorResult {
    detection: acceptkit::eval::DetectionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pipeline: Option<acceptkit::eval::PipelineReport>,
}

#[derive(Serialize)]
struct PipelineSummary<'a> {
    seed: u64,
    config_digest: &'a str,
    task: String,
    annotation: &'a AnnotationSummary,
    train: usize,
    dev: usize,
    test: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    birnn: Option<DetectorResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    biquest: Option<DetectorResult>,
}

fn pipeline(a: &PipelineArgs, seed: u64, prov: &Provenance) -> Result<()> {
    let task = a.task.build()?;
    let pairs = load_pairs(&a.pairs)?;
    let adapter = build_adapter(&a.mt, seed)?;
    let records = translate_batch(&adapter, &pairs)?;
    let done = annotate_records(&pairs, records, task.as_ref(), &a.encoding, prov)?;
    let s = split_dataset(&done.annotation.instances, a.dev, a.test, seed)?;
    let dir = &a.out_dir;
    create_dir(dir)?;
    save_encoder(&dir.join("encoder"), &done.encoder, prov)?;
    write_output(&dir.join("data.jsonl"), prov, |w| {
        Ok(write_dataset(w, &done.header, &done.annotation.instances)?)
    })?;
    for (name, part) in [("train", &s.train), ("dev", &s.dev), ("test", &s.test)] {
        write_output(&dir.join(format!("{name}.jsonl")), prov, |w| {
            Ok(write_dataset(w, &done.header, part)?)
        })?;
    }
    let golds: Vec<u8> = s.test.iter().map(|d| d.label).collect();
    let binary = task.binary_labels().is_some();
    let finish = |name: &str, preds: &[(u8, f64)]| -> Result<DetectorResult> {
        write_predictions(&dir.join(format!("{name}.predictions.tsv")), prov, preds)?;
        let labels: Vec<u8> = preds.iter().map(|p| p.0).collect();
        write_output(&dir.join(format!("{name}.review.tsv")), prov, |w| {
            Ok(write_review(w, &s.test, &labels)?)
        })?;
        let pipeline = if binary {
            let (report, decisions) = simulate_pipeline(&labels, &s.test, task.as_ref(), None)?;
            write_output(&dir.join(format!("{name}.decisions.tsv")), prov, |w| {
                Ok(write_decisions(w, &decisions)?)
            })?;
            Some(report)
        } else {
            None
        };
        Ok(DetectorResult {
            detection: detection_report(&labels, &golds)?,
            pipeline,
        })
    };

    let birnn_result = if a.detector != DetectorKind::Biquest {
        let (sv, tv) = (done.encoder.source_vocab.len(), done.encoder.target_vocab.len());
        let config = birnn_config(&a.birnn, sv, tv, seed);
        config.validate()?;
        let run = if a.birnn.f64 {
            run_birnn::<f64>(&s.train, &s.dev, &s.test, &config)?
        } else {
            run_birnn::<f32>(&s.train, &s.dev, &s.test, &config)?
        };
        write_output(&dir.join("birnn.bin"), prov, |w| Ok(w.write_all(&run.bytes)?))?;
        write_output(&dir.join("birnn.log.jsonl"), prov, |w| {
            Ok(birnn::train::write_log(w, &run.log)?)
        })?;
        Some(finish("birnn", &run.test_predictions)?)
    } else {
        None
    };

    let biquest_result = if a.detector != DetectorKind::Birnn {
        let train_pairs: Vec<SentencePair> = s
            .train
            .iter()
            .map(|d| SentencePair::new(d.source.clone(), d.reference.clone()))
            .collect();
        let files = ResourceFiles {
            source_lm: None,
            target_lm: None,
            lex: None,
        };
        let res = resources(&train_pairs, a.ibm1_iterations, files)?;
        let train_rows = instance_features(&s.train, &res);
        let train_labels: Vec<u8> = s.train.iter().map(|d| d.label).collect();
        let model = fit_biquest(&train_rows, &train_labels, &a.svm, seed)?;
        write_output(&dir.join("biquest.svm"), prov, |w| Ok(model.write_to(w)?))?;
        let test_rows = feature_rows::<f64>(&instance_features(&s.test, &res));
        let preds = model.predict_batch(&test_rows)?;
        Some(finish("biquest", &preds)?)
    } else {
        None
    };

    let summary = PipelineSummary {
        seed,
        config_digest: &prov.config_digest,
        task: task.name().to_string(),
        annotation: &done.summary,
        train: s.train.len(),
        dev: s.dev.len(),
        test: s.test.len(),
        birnn: birnn_result,
        biquest: biquest_result,
    };
    write_output(&dir.join("report.json"), prov, |w| json_line(w, &summary))?;
    json_line(&mut std::io::stdout(), &summary)
}
