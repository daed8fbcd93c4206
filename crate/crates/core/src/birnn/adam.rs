use super::params::{BirnnParams, Gradients};
use super::BirnnConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamHyper {
    pub fn from_config(c: &BirnnConfig) -> Self {
        AdamHyper {
            lr: c.lr,
            beta1: c.beta1,
            beta2: c.beta2,
            eps: c.eps,
        }
    }
}

/// One Adam update of a flat tensor at step `t >= 1`.
pub fn adam_step<T: Real>(param: &mut [T], grad: &[T], m: &mut [T], v: &mut [T], h: &AdamHyper, t: u64) -> Result<()> {
    if grad.len() != param.len() || m.len() != param.len() || v.len() != param.len() {
        return Err(Error::Shape(format!(
            "adam: param {}, grad {}, m {}, v {}",
            param.len(),
            grad.len(),
            m.len(),
            v.len()
        )));
    }
    if t == 0 {
        return Err(Error::InvalidArgument("adam step counter starts at 1".into()));
    }
    let (b1, b2) = (T::of(h.beta1), T::of(h.beta2));
    let c1 = T::one() - T::of(h.beta1.powi(t as i32));
    let c2 = T::one() - T::of(h.beta2.powi(t as i32));
    let (lr, eps) = (T::of(h.lr), T::of(h.eps));
    for i in 0..param.len() {
        let g = grad[i];
        m[i] = b1 * m[i] + (T::one() - b1) * g;
        v[i] = b2 * v[i] + (T::one() - b2) * g * g;
        let mh = m[i] / c1;
        let vh = v[i] / c2;
        param[i] -= lr * mh / (vh.sqrt() + eps);
    }
    Ok(())
}

/// Moments for every parameter tensor, in [`BirnnParams::tensors`] order.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    pub m: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
    pub t: u64,
}

impl<T: Real> AdamState<T> {
    pub fn new(params: &BirnnParams<T>) -> Self {
        let zeros: Vec<Vec<T>> = params.tensors().iter().map(|t| vec![T::zero(); t.data.len()]).collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    /// Applies one update. Embedding rows without a gradient get a zero gradient.
    pub fn step(&mut self, params: &mut BirnnParams<T>, grads: &Gradients<T>, h: &AdamHyper) -> Result<()> {
        self.t += 1;
        let t = self.t;
        let dim = params.src_embed.cols;
        let vocab = [params.src_embed.rows, params.tgt_embed.rows];
        let body_grads: Vec<&[T]> = grads.body.tensors().into_iter().map(|g| g.data).collect();
        let mut targets = params.tensors_mut();
        if targets.len() != self.m.len() || body_grads.len() + 2 != targets.len() {
            return Err(Error::Shape("adam state does not match parameters".into()));
        }
        let zero_row = vec![T::zero(); dim];
        for (k, sparse) in [&grads.src_embed, &grads.tgt_embed].into_iter().enumerate() {
            let (p, m, v) = (&mut *targets[k], &mut self.m[k], &mut self.v[k]);
            if p.len() != vocab[k] * dim || m.len() != p.len() {
                return Err(Error::Shape("embedding size mismatch".into()));
            }
            for r in 0..vocab[k] {
                let g = sparse.get(&(r as u32)).map_or(&zero_row[..], |g| &g[..]);
                let span = r * dim..(r + 1) * dim;
                adam_step(&mut p[span.clone()], g, &mut m[span.clone()], &mut v[span], h, t)?;
            }
        }
        for (k, g) in body_grads.into_iter().enumerate() {
            adam_step(&mut *targets[k + 2], g, &mut self.m[k + 2], &mut self.v[k + 2], h, t)?;
        }
        Ok(())
    }
}
