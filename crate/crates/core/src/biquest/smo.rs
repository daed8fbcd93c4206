//! Sequential minimal optimization for the soft-margin SVM dual
//!
//! ```text
//! min  1/2 a'Qa - e'a   s.t.  y'a = 0,  0 <= a_i <= C,   Q_ij = y_i y_j K_ij
//! ```
//!
//! Each step picks the maximal KKT-violating pair
//! `i = argmax_{I_up} -y_t G_t`, `j = argmin_{I_low} -y_t G_t` (lowest
//! index on ties), solves the two-variable subproblem analytically and
//! clips to the box. The solver stops once `m - M < tol`.

use crate::scalar::Real;
use std::collections::HashMap;
use std::collections::VecDeque;

/// Source of kernel values over the training set.
pub trait KernelRows<T: Clone> {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn diag(&self, i: usize) -> T;
    /// Row `i` of the kernel matrix.
    fn row(&mut self, i: usize) -> &[T];
}

/// Fully materialized Gram matrix.
pub struct DenseGram<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> DenseGram<T> {
    pub fn new(n: usize, mut k: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = k(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        DenseGram { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }
}

impl<T: Real> KernelRows<T> for DenseGram<T> {
    fn len(&self) -> usize {
        self.n
    }
    fn diag(&self, i: usize) -> T {
        self.data[i * self.n + i]
    }
    fn row(&mut self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Kernel rows computed on demand with a bounded FIFO row cache.
pub struct CachedRows<T, F> {
    n: usize,
    kernel: F,
    diag: Vec<T>,
    cache: HashMap<usize, Vec<T>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<T: Real, F: Fn(usize, usize) -> T + Sync> CachedRows<T, F> {
    pub fn new(n: usize, kernel: F, capacity: usize) -> Self {
        let diag = (0..n).map(|i| kernel(i, i)).collect();
        CachedRows {
            n,
            kernel,
            diag,
            cache: HashMap::new(),
            order: VecDeque::new(),
            capacity: capacity.max(2),
        }
    }
}

impl<T: Real, F: Fn(usize, usize) -> T + Sync> KernelRows<T> for CachedRows<T, F> {
    fn len(&self) -> usize {
        self.n
    }
    fn diag(&self, i: usize) -> T {
        self.diag[i]
    }
    fn row(&mut self, i: usize) -> &[T] {
        if !self.cache.contains_key(&i) {
            use rayon::prelude::*;
            let k = &self.kernel;
            let row: Vec<T> = (0..self.n).into_par_iter().map(|j| k(i, j)).collect();
            if self.order.len() >= self.capacity {
                if let Some(old) = self.order.pop_front() {
                    self.cache.remove(&old);
                }
            }
            self.order.push_back(i);
            self.cache.insert(i, row);
        }
        &self.cache[&i]
    }
}

#[derive(Debug, Clone)]
pub struct SmoSolution<T> {
    pub alpha: Vec<T>,
    /// Bias `b` of the decision function `sum_i a_i y_i K(x_i, x) + b`.
    pub bias: T,
    /// Dual objective `sum a - 1/2 a'Qa` (to be maximized).
    pub objective: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs SMO. `y` holds labels in {-1, +1}.
pub fn solve<T: Real, K: KernelRows<T>>(kernel: &mut K, y: &[T], c: T, tol: T, max_iter: usize) -> SmoSolution<T> {
    let n = y.len();
    assert_eq!(kernel.len(), n, "kernel and label sizes differ");
    let tau = T::of(1e-12);
    let mut alpha = vec![T::zero(); n];
    let mut grad = vec![-T::one(); n];
    let in_up = |a: T, yt: T| (yt > T::zero() && a < c) || (yt < T::zero() && a > T::zero());
    let in_low = |a: T, yt: T| (yt < T::zero() && a < c) || (yt > T::zero() && a > T::zero());

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut i = usize::MAX;
        let mut m = T::neg_infinity();
        let mut j = usize::MAX;
        let mut big_m = T::infinity();
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > m {
                m = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < big_m {
                big_m = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || m - big_m < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let row_i: Vec<T> = kernel.row(i).to_vec();
        let row_j: Vec<T> = kernel.row(j).to_vec();
        let (kii, kjj, kij) = (kernel.diag(i), kernel.diag(j), row_i[j]);
        let qij = y[i] * y[j] * kij;
        let (old_i, old_j) = (alpha[i], alpha[j]);

        if y[i] != y[j] {
            let mut quad = kii + kjj + T::of(2.0) * qij;
            if quad <= T::zero() {
                quad = tau;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > T::zero() {
                if alpha[j] < T::zero() {
                    alpha[j] = T::zero();
                    alpha[i] = diff;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = -diff;
            }
            if diff > T::zero() {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = kii + kjj - T::of(2.0) * qij;
            if quad <= T::zero() {
                quad = tau;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < T::zero() {
                alpha[j] = T::zero();
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = sum;
            }
        }

        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * row_i[t] * di + y[j] * row_j[t] * dj);
        }
    }
    if !converged {
        log::warn!("SMO stopped after {max_iter} iterations without reaching tolerance");
    }

    // rho: mean of y*G over free variables, else midpoint of the feasible interval
    let mut ub = T::infinity();
    let mut lb = T::neg_infinity();
    let mut sum_free = T::zero();
    let mut n_free = 0usize;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < T::zero() {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= T::zero() {
            if y[t] > T::zero() {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / T::of(n_free as f64)
    } else {
        (ub + lb) / T::of(2.0)
    };
    let objective = alpha.iter().zip(&grad).map(|(&a, &g)| -a * (g - T::one())).sum::<T>() / T::of(2.0);
    SmoSolution {
        alpha,
        bias: -rho,
        objective,
        iterations,
        converged,
    }
}
