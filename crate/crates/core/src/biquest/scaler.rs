use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-column standardization fitted on training rows. Constant columns
/// pass through unchanged and are flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
    pub constant: Vec<bool>,
}

impl<T: Real> Scaler<T> {
    pub fn fit(rows: &[Vec<T>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidArgument("scaler needs at least 2 training rows".into()));
        }
        let dim = rows[0].len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("ragged feature rows".into()));
        }
        let n = T::of(rows.len() as f64);
        let mut mean = vec![T::zero(); dim];
        for r in rows {
            for (m, &v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![T::zero(); dim];
        for r in rows {
            for ((s, &v), &m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let mut std = Vec::with_capacity(dim);
        let mut constant = Vec::with_capacity(dim);
        for (s, &m) in var.iter().zip(&mean) {
            let sd = (*s / n).sqrt();
            let is_const = sd.is_nan() || sd <= T::epsilon() * m.abs().max(T::one());
            constant.push(is_const);
            std.push(if is_const { T::one() } else { sd });
        }
        Ok(Scaler { mean, std, constant })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, row: &[T]) -> Result<Vec<T>> {
        if row.len() != self.dim() {
            return Err(Error::Shape(format!(
                "expected {} features, got {}",
                self.dim(),
                row.len()
            )));
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                if self.constant[k] {
                    v
                } else {
                    (v - self.mean[k]) / self.std[k]
                }
            })
            .collect())
    }

    pub fn fit_transform(rows: &[Vec<T>]) -> Result<(Self, Vec<Vec<T>>)> {
        let scaler = Self::fit(rows)?;
        let out = rows.iter().map(|r| scaler.transform(r)).collect::<Result<_>>()?;
        Ok((scaler, out))
    }
}
