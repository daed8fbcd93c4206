//! BiRNN acceptability detector.
//!
//! ```text
//! x_i = W_e s_i                          (dropout on embeddings in training)
//! g_i = [GRU_fwd(x)_i ; GRU_bwd(x)_i]
//! h_i = ReLU(W_g g_i + b_g)              (separate per language)
//! a   = softmax(h_i . w)                 (over source then target positions)
//! u   = sum_i a_i h_i
//! v   = ReLU(W_u u + b_u)
//! p   = sigmoid(w_v . v + b_v)
//! ```
//!
//! GRU step: `z = s(W_z x + U_z h + b_z)`, `r = s(W_r x + U_r h + b_r)`,
//! `c = tanh(W_h x + U_h (r * h) + b_h)`, `h' = (1 - z) * h + z * c`.
//!
//! Sequences longer than `max_len` are truncated; PAD ids are skipped by
//! the recurrences and excluded from attention.

pub mod adam;
pub mod io;
pub mod model;
pub mod params;
pub mod tensor;
pub mod train;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use model::{backward, forward, loss, predict, ForwardTrace};
pub use params::{BirnnParams, Gradients};
pub use train::{evaluate_accuracy, train, EpochRecord, TrainOutcome};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirnnConfig {
    pub max_len: usize,
    pub src_vocab: usize,
    pub tgt_vocab: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub proj_dim: usize,
    pub penult_dim: usize,
    pub dropout: f64,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub patience: usize,
    pub max_epochs: usize,
    pub seed: u64,
}

impl BirnnConfig {
    /// Full-size defaults: L = 64, 256/256/512/1024, dropout 0.1, batch 128, lr 5e-4.
    pub fn new(src_vocab: usize, tgt_vocab: usize) -> Self {
        BirnnConfig {
            max_len: 64,
            src_vocab,
            tgt_vocab,
            embed_dim: 256,
            hidden_dim: 256,
            proj_dim: 512,
            penult_dim: 1024,
            dropout: 0.1,
            batch_size: 128,
            lr: 5e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            patience: 5,
            max_epochs: 100,
            seed: 0,
        }
    }

    /// L = 4 with dimensions 2/3/4/5.
    pub fn tiny(src_vocab: usize, tgt_vocab: usize) -> Self {
        BirnnConfig {
            max_len: 4,
            embed_dim: 2,
            hidden_dim: 3,
            proj_dim: 4,
            penult_dim: 5,
            ..Self::new(src_vocab, tgt_vocab)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("max_len", self.max_len),
            ("src_vocab", self.src_vocab),
            ("tgt_vocab", self.tgt_vocab),
            ("embed_dim", self.embed_dim),
            ("hidden_dim", self.hidden_dim),
            ("proj_dim", self.proj_dim),
            ("penult_dim", self.penult_dim),
            ("batch_size", self.batch_size),
            ("max_epochs", self.max_epochs),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument("dropout must lie in [0, 1)".into()));
        }
        if !(self.lr > 0.0 && self.eps > 0.0) || !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2)
        {
            return Err(Error::InvalidArgument("invalid Adam hyperparameters".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn zero_params(c: &BirnnConfig) -> BirnnParams<f64> {
        BirnnParams::zeros(c)
    }

    #[test]
    fn config_validation() {
        assert!(BirnnConfig::new(10, 10).validate().is_ok());
        let mut c = BirnnConfig::tiny(7, 7);
        c.dropout = 1.0;
        assert!(c.validate().is_err());
        let mut c = BirnnConfig::tiny(7, 7);
        c.hidden_dim = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_network() {
        let c = BirnnConfig::tiny(7, 7);
        let p = zero_params(&c);
        let tr = forward(&p, &c, &[2, 3], &[4, 5, 6], None).unwrap();
        assert_eq!(tr.p, 0.5);
        assert!(tr.alpha.iter().all(|&a| (a - 0.2).abs() < 1e-15));
        assert_eq!(predict(&p, &c, &[2], &[3]).unwrap(), (1, 0.5));
        for y in [0u8, 1] {
            let mut g = Gradients::zeros(&c);
            backward(&tr, &p, y, 1.0, &mut g);
            assert_eq!(g.body.bv[0], 0.5 - f64::from(y));
        }
    }

    #[test]
    fn loss_values() {
        assert!((loss(0.5f64, 0) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((loss(0.5f64, 1) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((loss(0.9f64, 0) - std::f64::consts::LN_10).abs() < 1e-9);
        assert!(loss(1.0f64, 1).abs() < 1e-12);
        assert!(loss(0.0f64, 1).is_finite());
    }

    #[test]
    fn attention_normalizes_and_padding_is_inert() {
        let c = BirnnConfig::tiny(7, 7);
        let p = BirnnParams::<f64>::init(&c).unwrap();
        let a = forward(&p, &c, &[2, 3, 0, 0], &[4, 0], None).unwrap();
        let b = forward(&p, &c, &[2, 3], &[4], None).unwrap();
        assert_eq!(a.p, b.p);
        assert_eq!(a.alpha.len(), 3);
        assert!((a.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(a.p > 0.0 && a.p < 1.0);
        let mut g = Gradients::zeros(&c);
        backward(&a, &p, 1, 1.0, &mut g);
        assert!(!g.src_embed.contains_key(&0) && !g.tgt_embed.contains_key(&0));
    }

    #[test]
    fn truncation_and_errors() {
        let c = BirnnConfig::tiny(7, 7);
        let p = BirnnParams::<f64>::init(&c).unwrap();
        let long = forward(&p, &c, &[2, 3, 4, 5, 6, 6], &[1], None).unwrap();
        let cut = forward(&p, &c, &[2, 3, 4, 5], &[1], None).unwrap();
        assert_eq!(long.p, cut.p);
        assert!(forward(&p, &c, &[7], &[1], None).is_err());
        assert!(forward(&p, &c, &[], &[0], None).is_err());
    }

    #[test]
    fn dropout_only_in_train_mode() {
        let mut c = BirnnConfig::tiny(7, 7);
        c.dropout = 0.5;
        let p = BirnnParams::<f64>::init(&c).unwrap();
        let a = predict(&p, &c, &[2, 3, 4], &[5, 6]).unwrap();
        let b = predict(&p, &c, &[2, 3, 4], &[5, 6]).unwrap();
        assert_eq!(a, b);
        let mut r = rng::seeded(1);
        let t = forward(&p, &c, &[2, 3, 4], &[5, 6], Some(&mut r)).unwrap();
        let masks = t.src.dropout.unwrap();
        assert!(masks.iter().flatten().all(|&m| m == 0.0 || m == 2.0));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let c = BirnnConfig::tiny(7, 7);
        let mut p = BirnnParams::<f64>::init(&c).unwrap();
        let mut r = rng::seeded(99);
        for t in p.tensors_mut() {
            for v in t.iter_mut() {
                *v = rng::uniform(&mut r) - 0.5;
            }
        }
        let (s, t, y) = ([2u32, 5, 1], [3u32, 6, 4, 2], 1u8);
        let tr = forward(&p, &c, &s, &t, None).unwrap();
        let mut g = Gradients::zeros(&c);
        backward(&tr, &p, y, 1.0, &mut g);
        let mut analytic: Vec<Vec<f64>> = vec![
            Gradients::dense_embed(&g.src_embed, 7, 2).data,
            Gradients::dense_embed(&g.tgt_embed, 7, 2).data,
        ];
        analytic.extend(g.body.tensors().iter().map(|x| x.data.to_vec()));
        let h = 1e-4;
        let names: Vec<String> = p.tensors().iter().map(|x| x.name.clone()).collect();
        for (k, name) in names.iter().enumerate() {
            for (i, &a) in analytic[k].iter().enumerate() {
                let orig = p.tensors_mut()[k][i];
                p.tensors_mut()[k][i] = orig + h;
                let lp = loss(forward(&p, &c, &s, &t, None).unwrap().p, y);
                p.tensors_mut()[k][i] = orig - h;
                let lm = loss(forward(&p, &c, &s, &t, None).unwrap().p, y);
                p.tensors_mut()[k][i] = orig;
                let num = (lp - lm) / (2.0 * h);
                let rel = (a - num).abs() / a.abs().max(num.abs()).max(1e-6);
                assert!(rel < 1e-4, "{name}[{i}]: analytic {a} numeric {num}");
            }
        }
    }
}
