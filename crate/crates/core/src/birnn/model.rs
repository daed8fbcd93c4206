use super::params::{BirnnParams, Gradients, Gru, Side};
use super::tensor::{add_assign, dot, Matrix};
use super::BirnnConfig;
use crate::corpus::PAD_ID;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::scalar::{relu, sigmoid, Real};
use std::collections::BTreeMap;

/// Probability floor used by [`loss`].
pub const PROB_CLAMP: f64 = 1e-12;

/// Activations of one GRU direction, indexed by processing step.
#[derive(Debug, Clone)]
pub struct GruTrace<T> {
    pub z: Vec<Vec<T>>,
    pub r: Vec<Vec<T>>,
    pub c: Vec<Vec<T>>,
    pub h: Vec<Vec<T>>,
}

/// Activations of one language side over its unmasked positions.
#[derive(Debug, Clone)]
pub struct SideTrace<T> {
    pub ids: Vec<u32>,
    /// Inverted-dropout multipliers, present in train mode.
    pub dropout: Option<Vec<Vec<T>>>,
    pub x: Vec<Vec<T>>,
    pub fwd: GruTrace<T>,
    pub bwd: GruTrace<T>,
    pub g: Vec<Vec<T>>,
    pub h: Vec<Vec<T>>,
}

/// Everything the backward pass needs. `alpha` covers the source
/// positions followed by the target positions; PAD positions are absent.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    pub src: SideTrace<T>,
    pub tgt: SideTrace<T>,
    pub alpha: Vec<T>,
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub p: T,
}

/// Truncates to `max_len`, checks the vocabulary range and drops PAD.
fn prepare(ids: &[u32], vocab: usize, max_len: usize, side: &str) -> Result<Vec<u32>> {
    if let Some(&bad) = ids.iter().find(|&&i| i as usize >= vocab) {
        return Err(Error::InvalidArgument(format!(
            "{side} id {bad} outside vocabulary of {vocab}"
        )));
    }
    Ok(ids.iter().take(max_len).copied().filter(|&i| i != PAD_ID).collect())
}

fn gru_forward<T: Real>(gru: &Gru<T>, xs: &[Vec<T>], reverse: bool) -> GruTrace<T> {
    let n = xs.len();
    let hd = gru.bz.len();
    let mut tr = GruTrace {
        z: Vec::with_capacity(n),
        r: Vec::with_capacity(n),
        c: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
    };
    let mut prev = vec![T::zero(); hd];
    for s in 0..n {
        let x = &xs[if reverse { n - 1 - s } else { s }];
        let mut z = gru.bz.clone();
        gru.wz.mul_add(x, &mut z);
        gru.uz.mul_add(&prev, &mut z);
        z.iter_mut().for_each(|v| *v = sigmoid(*v));
        let mut r = gru.br.clone();
        gru.wr.mul_add(x, &mut r);
        gru.ur.mul_add(&prev, &mut r);
        r.iter_mut().for_each(|v| *v = sigmoid(*v));
        let rh: Vec<T> = r.iter().zip(&prev).map(|(&a, &b)| a * b).collect();
        let mut c = gru.bh.clone();
        gru.wh.mul_add(x, &mut c);
        gru.uh.mul_add(&rh, &mut c);
        c.iter_mut().for_each(|v| *v = v.tanh());
        let h: Vec<T> = (0..hd).map(|k| (T::one() - z[k]) * prev[k] + z[k] * c[k]).collect();
        prev.clone_from(&h);
        tr.z.push(z);
        tr.r.push(r);
        tr.c.push(c);
        tr.h.push(h);
    }
    tr
}

/// Backpropagation through time. `dh_out[s]` is the loss gradient on the
/// output of step `s`; input gradients are added to `dxs` by position.
fn gru_backward<T: Real>(
    gru: &Gru<T>,
    grad: &mut Gru<T>,
    xs: &[Vec<T>],
    tr: &GruTrace<T>,
    reverse: bool,
    dh_out: &[Vec<T>],
    dxs: &mut [Vec<T>],
) {
    let n = xs.len();
    let hd = gru.bz.len();
    let zeros = vec![T::zero(); hd];
    let mut carry = vec![T::zero(); hd];
    for s in (0..n).rev() {
        let pos = if reverse { n - 1 - s } else { s };
        let x = &xs[pos];
        let prev = if s == 0 { &zeros } else { &tr.h[s - 1] };
        let (z, r, c) = (&tr.z[s], &tr.r[s], &tr.c[s]);
        let dh: Vec<T> = (0..hd).map(|k| dh_out[s][k] + carry[k]).collect();
        let mut dprev: Vec<T> = (0..hd).map(|k| dh[k] * (T::one() - z[k])).collect();
        let dac: Vec<T> = (0..hd).map(|k| dh[k] * z[k] * (T::one() - c[k] * c[k])).collect();
        let daz: Vec<T> = (0..hd)
            .map(|k| dh[k] * (c[k] - prev[k]) * z[k] * (T::one() - z[k]))
            .collect();
        let rh: Vec<T> = (0..hd).map(|k| r[k] * prev[k]).collect();
        grad.wh.outer_add(&dac, x);
        grad.uh.outer_add(&dac, &rh);
        add_assign(&mut grad.bh, &dac);
        let dx = &mut dxs[pos];
        gru.wh.tmul_add(&dac, dx);
        let mut drh = vec![T::zero(); hd];
        gru.uh.tmul_add(&dac, &mut drh);
        let mut dar = vec![T::zero(); hd];
        for k in 0..hd {
            dprev[k] += drh[k] * r[k];
            dar[k] = drh[k] * prev[k] * r[k] * (T::one() - r[k]);
        }
        grad.wz.outer_add(&daz, x);
        grad.uz.outer_add(&daz, prev);
        add_assign(&mut grad.bz, &daz);
        gru.wz.tmul_add(&daz, dx);
        gru.uz.tmul_add(&daz, &mut dprev);
        grad.wr.outer_add(&dar, x);
        grad.ur.outer_add(&dar, prev);
        add_assign(&mut grad.br, &dar);
        gru.wr.tmul_add(&dar, dx);
        gru.ur.tmul_add(&dar, &mut dprev);
        carry = dprev;
    }
}

fn side_forward<T: Real>(
    side: &Side<T>,
    embed: &Matrix<T>,
    ids: Vec<u32>,
    dropout: Option<(&mut Rng, f64)>,
) -> SideTrace<T> {
    let mut x: Vec<Vec<T>> = ids.iter().map(|&i| embed.row(i as usize).to_vec()).collect();
    let masks = dropout.map(|(r, p)| {
        let keep = T::of(1.0 / (1.0 - p));
        x.iter_mut()
            .map(|row| {
                row.iter_mut()
                    .map(|v| {
                        let m = if rng::uniform(r) < p { T::zero() } else { keep };
                        *v *= m;
                        m
                    })
                    .collect()
            })
            .collect()
    });
    let fwd = gru_forward(&side.fwd, &x, false);
    let bwd = gru_forward(&side.bwd, &x, true);
    let n = x.len();
    let mut g = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    for i in 0..n {
        let gi: Vec<T> = fwd.h[i].iter().chain(&bwd.h[n - 1 - i]).copied().collect();
        let mut hi = side.bg.clone();
        side.wg.mul_add(&gi, &mut hi);
        hi.iter_mut().for_each(|v| *v = relu(*v));
        g.push(gi);
        h.push(hi);
    }
    SideTrace {
        ids,
        dropout: masks,
        x,
        fwd,
        bwd,
        g,
        h,
    }
}

/// Runs the network. Dropout is applied when `train_rng` is given.
pub fn forward<T: Real>(
    params: &BirnnParams<T>,
    config: &BirnnConfig,
    src_ids: &[u32],
    tgt_ids: &[u32],
    mut train_rng: Option<&mut Rng>,
) -> Result<ForwardTrace<T>> {
    let s = prepare(src_ids, params.src_embed.rows, config.max_len, "source")?;
    let t = prepare(tgt_ids, params.tgt_embed.rows, config.max_len, "target")?;
    if s.is_empty() && t.is_empty() {
        return Err(Error::InvalidArgument("both sequences are empty".into()));
    }
    let p_drop = config.dropout;
    let body = &params.body;
    let src = side_forward(
        &body.src,
        &params.src_embed,
        s,
        train_rng.as_deref_mut().filter(|_| p_drop > 0.0).map(|r| (r, p_drop)),
    );
    let tgt = side_forward(
        &body.tgt,
        &params.tgt_embed,
        t,
        train_rng.filter(|_| p_drop > 0.0).map(|r| (r, p_drop)),
    );

    let scores: Vec<T> = src.h.iter().chain(&tgt.h).map(|h| dot(h, &body.w)).collect();
    let max = scores.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = scores.iter().map(|&e| (e - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    let alpha: Vec<T> = exps.iter().map(|&e| e / total).collect();
    let mut u = vec![T::zero(); body.w.len()];
    for (a, h) in alpha.iter().zip(src.h.iter().chain(&tgt.h)) {
        for (uk, &hk) in u.iter_mut().zip(h) {
            *uk += *a * hk;
        }
    }
    let mut v = body.bu.clone();
    body.wu.mul_add(&u, &mut v);
    v.iter_mut().for_each(|x| *x = relu(*x));
    let p = sigmoid(dot(&body.wv, &v) + body.bv[0]);
    Ok(ForwardTrace {
        src,
        tgt,
        alpha,
        u,
        v,
        p,
    })
}

/// Cross-entropy with probabilities clamped to `[1e-12, 1 - 1e-12]`.
pub fn loss<T: Real>(p: T, y: u8) -> T {
    let eps = T::of(PROB_CLAMP);
    let q = if y == 1 { p } else { T::one() - p };
    -q.max(eps).ln()
}

fn side_backward<T: Real>(
    side: &Side<T>,
    grad: &mut Side<T>,
    embed_grad: &mut BTreeMap<u32, Vec<T>>,
    tr: &SideTrace<T>,
    dh: &[Vec<T>],
) {
    let n = tr.x.len();
    if n == 0 {
        return;
    }
    let hd = side.fwd.bz.len();
    let mut dfwd = Vec::with_capacity(n);
    let mut dbwd = vec![Vec::new(); n];
    for i in 0..n {
        let dpre: Vec<T> = dh[i]
            .iter()
            .zip(&tr.h[i])
            .map(|(&d, &h)| if h > T::zero() { d } else { T::zero() })
            .collect();
        grad.wg.outer_add(&dpre, &tr.g[i]);
        add_assign(&mut grad.bg, &dpre);
        let mut dg = vec![T::zero(); 2 * hd];
        side.wg.tmul_add(&dpre, &mut dg);
        dbwd[n - 1 - i] = dg[hd..].to_vec();
        dg.truncate(hd);
        dfwd.push(dg);
    }
    let mut dx = vec![vec![T::zero(); tr.x[0].len()]; n];
    gru_backward(&side.fwd, &mut grad.fwd, &tr.x, &tr.fwd, false, &dfwd, &mut dx);
    gru_backward(&side.bwd, &mut grad.bwd, &tr.x, &tr.bwd, true, &dbwd, &mut dx);
    for (i, mut d) in dx.into_iter().enumerate() {
        if let Some(masks) = &tr.dropout {
            d.iter_mut().zip(&masks[i]).for_each(|(a, &m)| *a *= m);
        }
        match embed_grad.get_mut(&tr.ids[i]) {
            Some(row) => add_assign(row, &d),
            None => {
                embed_grad.insert(tr.ids[i], d);
            }
        }
    }
}

/// Adds `scale * dLoss/dParams` for one example to `grads`.
pub fn backward<T: Real>(trace: &ForwardTrace<T>, params: &BirnnParams<T>, y: u8, scale: T, grads: &mut Gradients<T>) {
    let body = &params.body;
    let g = &mut grads.body;
    let dlogit = (trace.p - T::of(f64::from(y))) * scale;
    g.bv[0] += dlogit;
    let mut dv = vec![T::zero(); trace.v.len()];
    for (k, &v) in trace.v.iter().enumerate() {
        g.wv[k] += dlogit * v;
        if v > T::zero() {
            dv[k] = dlogit * body.wv[k];
        }
    }
    g.wu.outer_add(&dv, &trace.u);
    add_assign(&mut g.bu, &dv);
    let mut du = vec![T::zero(); trace.u.len()];
    body.wu.tmul_add(&dv, &mut du);

    let hs: Vec<&Vec<T>> = trace.src.h.iter().chain(&trace.tgt.h).collect();
    let dalpha: Vec<T> = hs.iter().map(|h| dot(h, &du)).collect();
    let mean: T = trace.alpha.iter().zip(&dalpha).map(|(&a, &d)| a * d).sum();
    let mut dh: Vec<Vec<T>> = Vec::with_capacity(hs.len());
    for (i, h) in hs.iter().enumerate() {
        let de = trace.alpha[i] * (dalpha[i] - mean);
        for (gw, &hk) in g.w.iter_mut().zip(h.iter()) {
            *gw += de * hk;
        }
        dh.push(
            du.iter()
                .zip(&body.w)
                .map(|(&d, &w)| trace.alpha[i] * d + de * w)
                .collect(),
        );
    }
    let ns = trace.src.h.len();
    side_backward(&body.src, &mut g.src, &mut grads.src_embed, &trace.src, &dh[..ns]);
    side_backward(&body.tgt, &mut g.tgt, &mut grads.tgt_embed, &trace.tgt, &dh[ns..]);
}

/// Label (`p >= 0.5` is acceptable) and probability, without dropout.
pub fn predict<T: Real>(
    params: &BirnnParams<T>,
    config: &BirnnConfig,
    src_ids: &[u32],
    tgt_ids: &[u32],
) -> Result<(u8, T)> {
    let p = forward(params, config, src_ids, tgt_ids, None)?.p;
    Ok((u8::from(p >= T::of(0.5)), p))
}
