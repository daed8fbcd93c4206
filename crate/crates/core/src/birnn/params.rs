use super::tensor::{add_assign, Matrix};
use super::BirnnConfig;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::scalar::Real;
use std::collections::BTreeMap;

/// One GRU direction: gates `z` (update), `r` (reset) and candidate `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gru<T> {
    pub wz: Matrix<T>,
    pub wr: Matrix<T>,
    pub wh: Matrix<T>,
    pub uz: Matrix<T>,
    pub ur: Matrix<T>,
    pub uh: Matrix<T>,
    pub bz: Vec<T>,
    pub br: Vec<T>,
    pub bh: Vec<T>,
}

/// Per-language encoder: bidirectional GRU and the projection `W_g`, `b_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Side<T> {
    pub fwd: Gru<T>,
    pub bwd: Gru<T>,
    pub wg: Matrix<T>,
    pub bg: Vec<T>,
}

/// Every dense parameter except the embedding tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Body<T> {
    pub src: Side<T>,
    pub tgt: Side<T>,
    /// Attention vector shared by both languages.
    pub w: Vec<T>,
    pub wu: Matrix<T>,
    pub bu: Vec<T>,
    pub wv: Vec<T>,
    /// Output bias, stored as a length-1 vector.
    pub bv: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirnnParams<T> {
    pub src_embed: Matrix<T>,
    pub tgt_embed: Matrix<T>,
    pub body: Body<T>,
}

/// Gradients with sparse embedding rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub src_embed: BTreeMap<u32, Vec<T>>,
    pub tgt_embed: BTreeMap<u32, Vec<T>>,
    pub body: Body<T>,
}

/// Borrowed view of one named tensor.
pub struct TensorRef<'a, T> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a [T],
}

impl<T: Real> Gru<T> {
    fn zeros(e: usize, h: usize) -> Self {
        Gru {
            wz: Matrix::zeros(h, e),
            wr: Matrix::zeros(h, e),
            wh: Matrix::zeros(h, e),
            uz: Matrix::zeros(h, h),
            ur: Matrix::zeros(h, h),
            uh: Matrix::zeros(h, h),
            bz: vec![T::zero(); h],
            br: vec![T::zero(); h],
            bh: vec![T::zero(); h],
        }
    }

    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a, T>>) {
        for (n, m) in [
            ("wz", &self.wz),
            ("wr", &self.wr),
            ("wh", &self.wh),
            ("uz", &self.uz),
            ("ur", &self.ur),
            ("uh", &self.uh),
        ] {
            out.push(matrix_ref(format!("{prefix}.{n}"), m));
        }
        for (n, v) in [("bz", &self.bz), ("br", &self.br), ("bh", &self.bh)] {
            out.push(vector_ref(format!("{prefix}.{n}"), v));
        }
    }

    fn visit_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [T]>) {
        for m in [
            &mut self.wz,
            &mut self.wr,
            &mut self.wh,
            &mut self.uz,
            &mut self.ur,
            &mut self.uh,
        ] {
            out.push(&mut m.data);
        }
        for v in [&mut self.bz, &mut self.br, &mut self.bh] {
            out.push(v);
        }
    }
}

impl<T: Real> Side<T> {
    fn zeros(c: &BirnnConfig) -> Self {
        Side {
            fwd: Gru::zeros(c.embed_dim, c.hidden_dim),
            bwd: Gru::zeros(c.embed_dim, c.hidden_dim),
            wg: Matrix::zeros(c.proj_dim, 2 * c.hidden_dim),
            bg: vec![T::zero(); c.proj_dim],
        }
    }

    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a, T>>) {
        self.fwd.visit(&format!("{prefix}.fwd"), out);
        self.bwd.visit(&format!("{prefix}.bwd"), out);
        out.push(matrix_ref(format!("{prefix}.wg"), &self.wg));
        out.push(vector_ref(format!("{prefix}.bg"), &self.bg));
    }

    fn visit_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [T]>) {
        self.fwd.visit_mut(out);
        self.bwd.visit_mut(out);
        out.push(&mut self.wg.data);
        out.push(&mut self.bg);
    }
}

impl<T: Real> Body<T> {
    pub fn zeros(c: &BirnnConfig) -> Self {
        Body {
            src: Side::zeros(c),
            tgt: Side::zeros(c),
            w: vec![T::zero(); c.proj_dim],
            wu: Matrix::zeros(c.penult_dim, c.proj_dim),
            bu: vec![T::zero(); c.penult_dim],
            wv: vec![T::zero(); c.penult_dim],
            bv: vec![T::zero()],
        }
    }

    /// Named tensors in a fixed order.
    pub fn tensors(&self) -> Vec<TensorRef<'_, T>> {
        let mut out = Vec::new();
        self.src.visit("src", &mut out);
        self.tgt.visit("tgt", &mut out);
        out.push(vector_ref("w".into(), &self.w));
        out.push(matrix_ref("wu".into(), &self.wu));
        out.push(vector_ref("bu".into(), &self.bu));
        out.push(vector_ref("wv".into(), &self.wv));
        out.push(vector_ref("bv".into(), &self.bv));
        out
    }

    /// Mutable tensors in the same order as [`Body::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::new();
        self.src.visit_mut(&mut out);
        self.tgt.visit_mut(&mut out);
        out.push(&mut self.w);
        out.push(&mut self.wu.data);
        out.push(&mut self.bu);
        out.push(&mut self.wv);
        out.push(&mut self.bv);
        out
    }

    pub fn add_assign(&mut self, other: &Body<T>) {
        let theirs = other.tensors();
        for (mine, t) in self.tensors_mut().into_iter().zip(theirs) {
            add_assign(mine, t.data);
        }
    }
}

fn matrix_ref<T>(name: String, m: &Matrix<T>) -> TensorRef<'_, T> {
    TensorRef {
        name,
        shape: vec![m.rows, m.cols],
        data: &m.data,
    }
}

fn vector_ref<T>(name: String, v: &[T]) -> TensorRef<'_, T> {
    TensorRef {
        name,
        shape: vec![v.len()],
        data: v,
    }
}

impl<T: Real> BirnnParams<T> {
    pub fn zeros(c: &BirnnConfig) -> Self {
        BirnnParams {
            src_embed: Matrix::zeros(c.src_vocab, c.embed_dim),
            tgt_embed: Matrix::zeros(c.tgt_vocab, c.embed_dim),
            body: Body::zeros(c),
        }
    }

    /// Glorot-uniform matrices, zero biases.
    pub fn init(c: &BirnnConfig) -> Result<Self> {
        c.validate()?;
        let mut p = Self::zeros(c);
        let mut r = rng::stream(c.seed, 0);
        glorot(&mut p.src_embed.data, c.src_vocab, c.embed_dim, &mut r);
        glorot(&mut p.tgt_embed.data, c.tgt_vocab, c.embed_dim, &mut r);
        let shapes: Vec<(String, Vec<usize>)> = p.body.tensors().into_iter().map(|t| (t.name, t.shape)).collect();
        for ((name, shape), data) in shapes.into_iter().zip(p.body.tensors_mut()) {
            let leaf = name.rsplit('.').next().unwrap_or(&name);
            if leaf.starts_with('b') {
                continue;
            }
            let (fan_out, fan_in) = match shape.as_slice() {
                [r, c] => (*r, *c),
                [n] => (1, *n),
                _ => unreachable!(),
            };
            glorot(data, fan_in, fan_out, &mut r);
        }
        Ok(p)
    }

    /// Every tensor, embeddings first.
    pub fn tensors(&self) -> Vec<TensorRef<'_, T>> {
        let mut out = vec![
            matrix_ref("src_embed".into(), &self.src_embed),
            matrix_ref("tgt_embed".into(), &self.tgt_embed),
        ];
        out.extend(self.body.tensors());
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = vec![&mut self.src_embed.data, &mut self.tgt_embed.data];
        out.extend(self.body.tensors_mut());
        out
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.data.iter().all(|v| v.is_finite()))
    }

    /// Checks tensor shapes against a config.
    pub fn check_shapes(&self, c: &BirnnConfig) -> Result<()> {
        let expected = Self::zeros(c);
        for (a, b) in self.tensors().iter().zip(expected.tensors()) {
            if a.shape != b.shape || a.data.len() != b.data.len() {
                return Err(Error::Shape(format!(
                    "tensor {} has shape {:?}, expected {:?}",
                    a.name, a.shape, b.shape
                )));
            }
        }
        Ok(())
    }
}

impl<T: Real> Gradients<T> {
    pub fn zeros(c: &BirnnConfig) -> Self {
        Gradients {
            src_embed: BTreeMap::new(),
            tgt_embed: BTreeMap::new(),
            body: Body::zeros(c),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients<T>) {
        for (mine, theirs) in [
            (&mut self.src_embed, &other.src_embed),
            (&mut self.tgt_embed, &other.tgt_embed),
        ] {
            for (id, row) in theirs {
                match mine.get_mut(id) {
                    Some(r) => add_assign(r, row),
                    None => {
                        mine.insert(*id, row.clone());
                    }
                }
            }
        }
        self.body.add_assign(&other.body);
    }

    /// Dense copy of an embedding gradient.
    pub fn dense_embed(rows: &BTreeMap<u32, Vec<T>>, vocab: usize, dim: usize) -> Matrix<T> {
        let mut m = Matrix::zeros(vocab, dim);
        for (&id, row) in rows {
            m.row_mut(id as usize).copy_from_slice(row);
        }
        m
    }
}

fn glorot<T: Real>(data: &mut [T], fan_in: usize, fan_out: usize, r: &mut Rng) {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in data {
        *v = T::of((2.0 * rng::uniform(r) - 1.0) * limit);
    }
}
