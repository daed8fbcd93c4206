use super::scaler::Scaler;
use super::smo::{self, CachedRows, DenseGram};
use crate::error::{Error, Result};
use crate::scalar::Real;
use rayon::prelude::*;
use std::io::{BufRead, Write};

const HEADER: &str = "#acceptkit-svm v1";
/// Largest training set for which the full Gram matrix is materialized.
const DENSE_LIMIT: usize = 6000;
const CACHE_ROWS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel<T> {
    Linear,
    Rbf { gamma: T },
}

impl<T: Real> Kernel<T> {
    pub fn eval(&self, a: &[T], b: &[T]) -> T {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(&x, &y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: T = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SvmParams<T> {
    pub kernel: Kernel<T>,
    pub c: T,
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> SvmParams<T> {
    /// RBF with `gamma = 1 / dim`, `C = 1`, `tol = 1e-3`.
    pub fn defaults(dim: usize) -> Self {
        SvmParams {
            kernel: Kernel::Rbf {
                gamma: T::one() / T::of(dim.max(1) as f64),
            },
            c: T::one(),
            tol: T::of(1e-3),
            max_iter: 10_000_000,
        }
    }
}

/// Trained binary SVM. `coef[k] = alpha_k * y_k` for each support vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel<T> {
    pub kernel: Kernel<T>,
    pub c: T,
    pub dim: usize,
    pub support_vectors: Vec<Vec<T>>,
    pub coef: Vec<T>,
    pub bias: T,
    pub scaler: Option<Scaler<T>>,
}

/// Model plus the full dual solution over the training set.
#[derive(Debug, Clone)]
pub struct SvmFit<T> {
    pub model: SvmModel<T>,
    pub alpha: Vec<T>,
    pub objective: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Trains on already-prepared rows with labels in {-1, +1}.
pub fn svm_train<T: Real>(x: &[Vec<T>], y: &[T], params: &SvmParams<T>) -> Result<SvmFit<T>> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::EmptyCorpus("no training rows".into()));
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::Shape("ragged feature rows".into()));
    }
    if y.iter().any(|&v| v != T::one() && v != -T::one()) {
        return Err(Error::InvalidArgument("labels must be -1 or +1".into()));
    }
    if !(y.iter().any(|&v| v > T::zero()) && y.iter().any(|&v| v < T::zero())) {
        return Err(Error::InvalidArgument("both classes must be present".into()));
    }
    if params.c.is_nan() || params.c <= T::zero() || params.tol.is_nan() || params.tol <= T::zero() {
        return Err(Error::InvalidArgument("C and tol must be positive".into()));
    }
    let kernel = params.kernel;
    let k = |i: usize, j: usize| kernel.eval(&x[i], &x[j]);
    let sol = if x.len() <= DENSE_LIMIT {
        smo::solve(
            &mut DenseGram::new(x.len(), k),
            y,
            params.c,
            params.tol,
            params.max_iter,
        )
    } else {
        smo::solve(
            &mut CachedRows::new(x.len(), k, CACHE_ROWS),
            y,
            params.c,
            params.tol,
            params.max_iter,
        )
    };
    let mut support_vectors = Vec::new();
    let mut coef = Vec::new();
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > T::zero() {
            support_vectors.push(x[i].clone());
            coef.push(a * y[i]);
        }
    }
    Ok(SvmFit {
        model: SvmModel {
            kernel,
            c: params.c,
            dim,
            support_vectors,
            coef,
            bias: sol.bias,
            scaler: None,
        },
        alpha: sol.alpha,
        objective: sol.objective,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

impl<T: Real> SvmFit<T> {
    /// Largest KKT violation of the training set under the trained decision function.
    pub fn kkt_max_violation(&self, x: &[Vec<T>], y: &[T]) -> T {
        let c = self.model.c;
        let mut worst = T::zero();
        for ((row, &yi), &a) in x.iter().zip(y).zip(&self.alpha) {
            let m = yi * self.model.raw_decision(row);
            let v = if a <= T::zero() {
                (T::one() - m).max(T::zero())
            } else if a >= c {
                (m - T::one()).max(T::zero())
            } else {
                (m - T::one()).abs()
            };
            worst = worst.max(v);
        }
        worst
    }

    /// `|sum alpha_i y_i|`.
    pub fn equality_residual(&self, y: &[T]) -> T {
        self.alpha.iter().zip(y).map(|(&a, &yi)| a * yi).sum::<T>().abs()
    }
}

impl<T: Real> SvmModel<T> {
    /// Decision value on a row already in model space (after scaling).
    pub fn raw_decision(&self, x: &[T]) -> T {
        self.support_vectors
            .iter()
            .zip(&self.coef)
            .map(|(sv, &c)| c * self.kernel.eval(sv, x))
            .sum::<T>()
            + self.bias
    }

    /// Returns the label (1 = acceptable, ties included) and the signed decision value.
    pub fn predict(&self, x: &[T]) -> Result<(u8, T)> {
        if x.len() != self.dim {
            return Err(Error::Shape(format!("expected {} features, got {}", self.dim, x.len())));
        }
        let d = match &self.scaler {
            Some(s) => self.raw_decision(&s.transform(x)?),
            None => self.raw_decision(x),
        };
        Ok((u8::from(d >= T::zero()), d))
    }

    pub fn predict_batch(&self, rows: &[Vec<T>]) -> Result<Vec<(u8, T)>> {
        rows.par_iter().map(|r| self.predict(r)).collect()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let join = |v: &[T]| v.iter().map(|x| x.as_f64().to_string()).collect::<Vec<_>>().join(" ");
        writeln!(out, "{HEADER}")?;
        match self.kernel {
            Kernel::Linear => writeln!(out, "kernel linear")?,
            Kernel::Rbf { gamma } => writeln!(out, "kernel rbf {}", gamma.as_f64())?,
        }
        writeln!(out, "c {}", self.c.as_f64())?;
        writeln!(out, "bias {}", self.bias.as_f64())?;
        writeln!(out, "dim {}", self.dim)?;
        match &self.scaler {
            None => writeln!(out, "scaler none")?,
            Some(s) => {
                writeln!(out, "scaler standard")?;
                writeln!(out, "mean {}", join(&s.mean))?;
                writeln!(out, "std {}", join(&s.std))?;
                let flags: Vec<&str> = s.constant.iter().map(|&c| if c { "1" } else { "0" }).collect();
                writeln!(out, "constant {}", flags.join(" "))?;
            }
        }
        writeln!(out, "sv {}", self.coef.len())?;
        for (sv, c) in self.support_vectors.iter().zip(&self.coef) {
            writeln!(out, "{}\t{}", c.as_f64(), join(sv))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        const CTX: &str = "svm model";
        let lines: Vec<String> = reader
            .lines()
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::parse(CTX, 0, e.to_string()))?;
        let mut pos = 0usize;
        let mut next = |key: &str| -> Result<(usize, String)> {
            let line = lines
                .get(pos)
                .ok_or_else(|| Error::parse(CTX, pos + 1, format!("missing `{key}`")))?;
            pos += 1;
            Ok((pos, line.clone()))
        };
        let (_, header) = next("header")?;
        if header != HEADER {
            return Err(Error::parse(CTX, 1, "missing header"));
        }
        let field = |n: usize, line: &str, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' ').or(if r.is_empty() { Some("") } else { None }))
                .map(str::to_string)
                .ok_or_else(|| Error::parse(CTX, n, format!("expected `{key}`")))
        };
        let num = |n: usize, s: &str| -> Result<T> {
            s.parse::<f64>()
                .map(T::of)
                .map_err(|_| Error::parse(CTX, n, format!("bad number `{s}`")))
        };
        let nums = |n: usize, s: &str| -> Result<Vec<T>> { s.split_whitespace().map(|t| num(n, t)).collect() };

        let (n, line) = next("kernel")?;
        let spec = field(n, &line, "kernel")?;
        let kernel = match spec.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["linear"] => Kernel::Linear,
            ["rbf", g] => Kernel::Rbf { gamma: num(n, g)? },
            _ => return Err(Error::parse(CTX, n, "unknown kernel")),
        };
        let (n, line) = next("c")?;
        let c = num(n, &field(n, &line, "c")?)?;
        let (n, line) = next("bias")?;
        let bias = num(n, &field(n, &line, "bias")?)?;
        let (n, line) = next("dim")?;
        let dim: usize = field(n, &line, "dim")?
            .parse()
            .map_err(|_| Error::parse(CTX, n, "bad dim"))?;
        let (n, line) = next("scaler")?;
        let scaler = match field(n, &line, "scaler")?.as_str() {
            "none" => None,
            "standard" => {
                let (n, line) = next("mean")?;
                let mean = nums(n, &field(n, &line, "mean")?)?;
                let (n, line) = next("std")?;
                let std = nums(n, &field(n, &line, "std")?)?;
                let (n, line) = next("constant")?;
                let constant = field(n, &line, "constant")?
                    .split_whitespace()
                    .map(|t| match t {
                        "0" => Ok(false),
                        "1" => Ok(true),
                        _ => Err(Error::parse(CTX, n, "bad constant flag")),
                    })
                    .collect::<Result<Vec<_>>>()?;
                if mean.len() != dim || std.len() != dim || constant.len() != dim {
                    return Err(Error::parse(CTX, n, "scaler dimension mismatch"));
                }
                Some(Scaler { mean, std, constant })
            }
            _ => return Err(Error::parse(CTX, n, "unknown scaler")),
        };
        let (n, line) = next("sv")?;
        let count: usize = field(n, &line, "sv")?
            .parse()
            .map_err(|_| Error::parse(CTX, n, "bad support vector count"))?;
        let mut support_vectors = Vec::with_capacity(count);
        let mut coef = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, line) = next("support vector")?;
            let (c, rest) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(CTX, n, "expected coef<TAB>vector"))?;
            let sv = nums(n, rest)?;
            if sv.len() != dim {
                return Err(Error::parse(CTX, n, "support vector dimension mismatch"));
            }
            coef.push(num(n, c)?);
            support_vectors.push(sv);
        }
        if pos != lines.len() {
            return Err(Error::parse(CTX, pos + 1, "trailing data"));
        }
        Ok(SvmModel {
            kernel,
            c,
            dim,
            support_vectors,
            coef,
            bias,
            scaler,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(f))
    }
}
