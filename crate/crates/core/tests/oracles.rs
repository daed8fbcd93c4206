mod common;

use acceptkit::annotate::annotate;
use acceptkit::biquest::{svm_train, SvmParams};
use acceptkit::birnn::{adam_step, forward, AdamHyper, BirnnConfig, BirnnParams};
use acceptkit::corpus::SentencePair;
use acceptkit::downstream::{EntityType, Gazetteer, Lexicon, LexiconKind, NerSystem, SentimentSystem};
use acceptkit::features::{features, ibm1_train, FeatureResources, NgramLm};
use acceptkit::rng;
use acceptkit::translate::{noise_channel, NoiseConfig, TranslationRecord};
use common::*;

#[test]
fn noise_seed_42_matches_hand_replayed_generator() {
    let reference: Vec<String> = (0..10).map(|i| format!("w{i}")).collect();
    let cfg = NoiseConfig {
        drop_prob: 0.5,
        seed: 42,
        ..Default::default()
    };
    let got = noise_channel(&reference, &cfg, &mut rng::seeded(42));

    let mut r = OracleRng::new(42);
    let mut expected = Vec::new();
    for w in &reference {
        let _substitute = r.uniform();
        if r.uniform() >= 0.5 {
            expected.push(w.clone());
        }
    }
    assert_eq!(got, expected);
    assert!(!got.is_empty() && got.len() < 10);
}

#[test]
fn library_rng_matches_oracle_stream() {
    let mut a = rng::seeded(7);
    let mut b = OracleRng::new(7);
    for _ in 0..100 {
        assert_eq!(rng::uniform(&mut a), b.uniform());
    }
}

#[test]
fn lm_single_word_corpus_by_hand() {
    // P(a | <s> <s>) = P(</s> | <s> a) = 0.25 + 0.75 * (0.25 + 0.75 * 0.4)
    let lm = NgramLm::train(&[toks("a")]).unwrap();
    let expected = 2.0 * 0.6625f64.ln();
    assert!((lm.logprob(&toks("a")) - expected).abs() < 1e-12);
}

#[test]
fn lm_matches_count_oracle() {
    let corpus = vec![
        toks("the cat sat"),
        toks("the cat ran home"),
        toks("a dog sat"),
        toks("the dog"),
    ];
    let lm = NgramLm::train(&corpus).unwrap();
    let oracle = OracleLm::train(&corpus);
    for s in ["the cat sat", "a cat ran", "zebra sat", "", "the the the dog home"] {
        let t = toks(s);
        assert!((lm.logprob(&t) - oracle.logprob(&t)).abs() < 1e-12, "{s}");
    }
    for (ctx, w) in [
        (vec![], "cat"),
        (vec!["the"], "dog"),
        (vec!["the", "cat"], "sat"),
        (vec!["x", "y"], "z"),
    ] {
        let o = match ctx.as_slice() {
            [] => oracle.p1(w),
            [v] => oracle.p2(v, w),
            [u, v] => oracle.p3(u, v, w),
            _ => unreachable!(),
        };
        assert!((lm.prob(&ctx, w) - o).abs() < 1e-12);
    }
}

fn pairs(raw: &[(&str, &str)]) -> Vec<SentencePair> {
    raw.iter().map(|(s, t)| SentencePair::new(toks(s), toks(t))).collect()
}

fn plain(raw: &[(&str, &str)]) -> Vec<(Vec<String>, Vec<String>)> {
    raw.iter().map(|(s, t)| (toks(s), toks(t))).collect()
}

#[test]
fn ibm1_matches_em_oracle() {
    let raw = [("a", "x"), ("a b", "x y"), ("b c", "y z"), ("c", "z")];
    for iters in 1..=4 {
        let got = ibm1_train(&pairs(&raw), iters).unwrap();
        let (t, lls) = ibm1_oracle(&plain(&raw), iters);
        for ((e, f), p) in &t {
            assert!((got.table.prob(e, f) - p).abs() < 1e-12, "t({f}|{e}) after {iters}");
        }
        assert_eq!(got.log_likelihoods.len(), lls.len());
        for (a, b) in got.log_likelihoods.iter().zip(&lls) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn ibm1_prefers_consistent_translation() {
    let raw = [("a", "x"), ("a b", "x y")];
    let got = ibm1_train(&pairs(&raw), 20).unwrap();
    assert!(got.table.prob("a", "x") > got.table.prob("a", "y"));
    let single = ibm1_train(&pairs(&[("a", "x")]), 1).unwrap();
    assert_eq!(single.table.prob("a", "x"), 1.0);
    assert_eq!(single.table.prob("<null>", "x"), 1.0);
}

#[test]
fn seventeen_features_match_straight_line_oracle() {
    let raw = [
        ("das haus ist gross .", "the house is big ."),
        ("das auto , rot", "the car , red"),
    ];
    let res = FeatureResources::train(&pairs(&raw), 1).unwrap();
    let cases = [
        ("das haus , rot .", "the house red ."),
        ("ein neues wort", "a new word"),
        ("das haus ist gross .", ""),
    ];
    for (s, m) in cases {
        let (s, m) = (toks(s), toks(m));
        let got = features(&s, &m, &res);
        let want = features_oracle(&plain(&raw), 1, &s, &m);
        for (k, (g, w)) in got.0.iter().zip(&want).enumerate() {
            assert!((g - w).abs() < 1e-12, "f{} = {g} vs {w}", k + 1);
        }
    }
}

#[test]
fn birnn_forward_matches_oracle() {
    let mut cfg = BirnnConfig::tiny(7, 7);
    cfg.seed = 11;
    let mut params: BirnnParams<f64> = BirnnParams::init(&cfg).unwrap();
    let mut r = rng::seeded(99);
    for t in params.tensors_mut() {
        for v in t.iter_mut() {
            *v = 2.0 * rng::uniform(&mut r) - 1.0;
        }
    }
    for (s, t) in [
        (vec![1u32, 2, 3, 4], vec![5u32, 6, 1]),
        (vec![2, 0, 3, 6, 5], vec![0, 4]),
        (vec![], vec![3]),
    ] {
        let got = forward(&params, &cfg, &s, &t, None).unwrap().p;
        let want = birnn_forward_oracle(&params, cfg.max_len, &s, &t);
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }
}

#[test]
fn adam_two_steps_match_recurrence() {
    let h = AdamHyper {
        lr: 0.1,
        beta1: 0.9,
        beta2: 0.999,
        eps: 1e-8,
    };
    let g = 0.5f64;
    let (mut p, mut m, mut v) = ([1.0f64], [0.0], [0.0]);
    adam_step(&mut p, &[g], &mut m, &mut v, &h, 1).unwrap();
    adam_step(&mut p, &[g], &mut m, &mut v, &h, 2).unwrap();
    // m1 = .05, v1 = .00025; m2 = .095, v2 = .00049975
    let m2 = 0.9 * 0.05 + 0.1 * 0.5;
    let v2 = 0.999 * 0.00025 + 0.001 * 0.25;
    let step1 = 0.1 * (0.05 / 0.1) / ((0.00025f64 / 0.001).sqrt() + 1e-8);
    let step2 = 0.1 * (m2 / (1.0 - 0.81)) / ((v2 / (1.0 - 0.998001f64)).sqrt() + 1e-8);
    assert!((m[0] - m2).abs() < 1e-15);
    assert!((v[0] - v2).abs() < 1e-15);
    assert!((p[0] - (1.0 - step1 - step2)).abs() < 1e-12);
}

#[test]
fn smo_matches_brute_force_dual() {
    for (k, inst) in svm_fixtures().iter().enumerate() {
        let params = SvmParams {
            kernel: inst.kernel,
            c: inst.c,
            tol: 1e-3,
            max_iter: 10_000_000,
        };
        let fit = svm_train(&inst.x, &inst.y, &params).unwrap();
        let best = brute_force_dual(inst);
        assert!(
            (fit.objective - best).abs() < 1e-4,
            "instance {k}: {} vs {best}",
            fit.objective
        );
        assert!(fit.kkt_max_violation(&inst.x, &inst.y) <= 1e-2, "instance {k}");
        assert!(fit.equality_residual(&inst.y) < 1e-9);
    }
}

fn record(src: &str, mt: &str, reference: &str) -> TranslationRecord {
    TranslationRecord {
        source: toks(src),
        mt: toks(mt),
        reference: toks(reference),
    }
}

#[test]
fn annotate_examples() {
    let lex = Lexicon::new(LexiconKind::Sentiment, [("good", 1.0), ("bad", -1.0)]).unwrap();
    let senti = SentimentSystem::new(lex, 0.0).unwrap();
    let out = annotate(
        &[
            record("s", "bad service", "good service"),
            record("s", "good service", "good service"),
        ],
        &senti,
        None,
    );
    assert_eq!(out.instances.iter().map(|i| i.label).collect::<Vec<_>>(), vec![0, 1]);

    let gaz = Gazetteer::new([("china", EntityType::Location)]).unwrap();
    let ner = NerSystem::new(gaz);
    let out = annotate(&[record("s", "it rocks", "china rocks")], &ner, None);
    assert_eq!(out.instances[0].label, 0);
}
