//! Straight-line reference implementations shared by the integration suites.
#![allow(dead_code)]

use acceptkit::biquest::Kernel;
use acceptkit::birnn::BirnnParams;
use std::collections::{BTreeMap, BTreeSet, HashMap};

pub fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

// ---------------------------------------------------------------- rng

/// SplitMix64 seeding into xoshiro256++, written out by hand.
pub struct OracleRng {
    s: [u64; 4],
}

impl OracleRng {
    pub fn new(seed: u64) -> Self {
        let mut x = seed;
        let mut s = [0u64; 4];
        for slot in &mut s {
            x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = x;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            *slot = z ^ (z >> 31);
        }
        OracleRng { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let out = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        out
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / 9_007_199_254_740_992.0
    }
}

// ---------------------------------------------------------------- language model

/// Interpolated Kneser-Ney trigram model recomputed from raw counts.
pub struct OracleLm {
    unigram: BTreeMap<String, u64>,
    vocab: usize,
    tri: BTreeMap<(String, String, String), u64>,
    d: f64,
}

impl OracleLm {
    pub fn train(corpus: &[Vec<String>]) -> Self {
        let mut unigram = BTreeMap::new();
        let mut tri = BTreeMap::new();
        let mut words = BTreeSet::new();
        for s in corpus {
            let mut p = vec!["<s>".to_string(), "<s>".to_string()];
            p.extend(s.iter().cloned());
            p.push("</s>".into());
            for w in &p[2..] {
                *unigram.entry(w.clone()).or_insert(0) += 1;
                words.insert(w.clone());
            }
            for i in 2..p.len() {
                *tri.entry((p[i - 2].clone(), p[i - 1].clone(), p[i].clone()))
                    .or_insert(0) += 1;
            }
        }
        words.insert("</s>".into());
        words.insert("<unk>".into());
        OracleLm {
            unigram,
            vocab: words.len(),
            tri,
            d: 0.75,
        }
    }

    fn norm(&self, w: &str) -> String {
        if w == "<s>" || w == "</s>" || self.unigram.contains_key(w) {
            w.to_string()
        } else {
            "<unk>".to_string()
        }
    }

    pub fn p1(&self, w: &str) -> f64 {
        let n: u64 = self.unigram.values().sum();
        let c = self.unigram.get(&self.norm(w)).copied().unwrap_or(0);
        (c as f64 + 1.0) / (n as f64 + self.vocab as f64)
    }

    pub fn p2(&self, v: &str, w: &str) -> f64 {
        let (v, w) = (self.norm(v), self.norm(w));
        let left = |a: &str, b: &str| self.tri.keys().filter(|(_, x, y)| x == a && y == b).count() as f64;
        let seconds: BTreeSet<&String> = self.tri.keys().filter(|(_, x, _)| *x == v).map(|(_, _, y)| y).collect();
        let total: f64 = seconds.iter().map(|y| left(&v, y)).sum();
        let lower = self.p1(&w);
        if total == 0.0 {
            return lower;
        }
        (left(&v, &w) - self.d).max(0.0) / total + self.d * seconds.len() as f64 / total * lower
    }

    pub fn p3(&self, u: &str, v: &str, w: &str) -> f64 {
        let (u, v, w) = (self.norm(u), self.norm(v), self.norm(w));
        let row: Vec<(&String, u64)> = self
            .tri
            .iter()
            .filter(|((a, b, _), _)| *a == u && *b == v)
            .map(|((_, _, c), &n)| (c, n))
            .collect();
        let total: u64 = row.iter().map(|(_, n)| n).sum();
        let lower = self.p2(&v, &w);
        if total == 0 {
            return lower;
        }
        let c = row.iter().find(|(x, _)| **x == w).map_or(0, |(_, n)| *n) as f64;
        (c - self.d).max(0.0) / total as f64 + self.d * row.len() as f64 / total as f64 * lower
    }

    pub fn logprob(&self, s: &[String]) -> f64 {
        let mut p = vec!["<s>".to_string(), "<s>".to_string()];
        p.extend(s.iter().cloned());
        p.push("</s>".into());
        (2..p.len()).map(|i| self.p3(&p[i - 2], &p[i - 1], &p[i]).ln()).sum()
    }
}

// ---------------------------------------------------------------- IBM model 1

pub type TTable = BTreeMap<(String, String), f64>;

/// EM for `t(f | e)` with a NULL source word; returns the table and the
/// log-likelihood before each iteration plus the final one.
pub fn ibm1_oracle(pairs: &[(Vec<String>, Vec<String>)], iterations: usize) -> (TTable, Vec<f64>) {
    let null = "<null>".to_string();
    let sents: Vec<(Vec<String>, Vec<String>)> = pairs
        .iter()
        .map(|(e, f)| {
            let mut s = vec![null.clone()];
            s.extend(e.iter().cloned());
            (s, f.clone())
        })
        .collect();
    let mut targets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (e, f) in &sents {
        for ew in e {
            targets.entry(ew.clone()).or_default().extend(f.iter().cloned());
        }
    }
    let mut t = TTable::new();
    for (e, fs) in &targets {
        for f in fs {
            t.insert((e.clone(), f.clone()), 1.0 / fs.len() as f64);
        }
    }
    let ll = |t: &TTable| -> f64 {
        let mut total = 0.0;
        for (e, f) in &sents {
            for fw in f {
                let s: f64 = e.iter().map(|ew| t[&(ew.clone(), fw.clone())]).sum();
                total += (s / e.len() as f64).ln();
            }
        }
        total
    };
    let mut lls = Vec::new();
    for _ in 0..iterations {
        lls.push(ll(&t));
        let mut count = TTable::new();
        let mut total: BTreeMap<String, f64> = BTreeMap::new();
        for (e, f) in &sents {
            for fw in f {
                let z: f64 = e.iter().map(|ew| t[&(ew.clone(), fw.clone())]).sum();
                for ew in e {
                    let c = t[&(ew.clone(), fw.clone())] / z;
                    *count.entry((ew.clone(), fw.clone())).or_insert(0.0) += c;
                    *total.entry(ew.clone()).or_insert(0.0) += c;
                }
            }
        }
        for ((e, f), c) in count {
            t.insert((e.clone(), f), c / total[&e]);
        }
    }
    lls.push(ll(&t));
    (t, lls)
}

// ---------------------------------------------------------------- features

fn quartile_fractions(corpus: &[Vec<String>], n: usize, s: &[String]) -> (f64, f64) {
    let mut counts: BTreeMap<Vec<String>, u64> = BTreeMap::new();
    for c in corpus {
        if c.len() >= n {
            for i in 0..=c.len() - n {
                *counts.entry(c[i..i + n].to_vec()).or_insert(0) += 1;
            }
        }
    }
    let mut f: Vec<u64> = counts.values().copied().collect();
    f.sort();
    let m = f.len() as f64;
    let th: Vec<u64> = (1..=3).map(|k| f[((k as f64 * m) / 4.0).ceil() as usize - 1]).collect();
    let (mut q1, mut q4, mut seen) = (0.0, 0.0, 0.0);
    if s.len() >= n {
        for i in 0..=s.len() - n {
            if let Some(&c) = counts.get(&s[i..i + n]) {
                seen += 1.0;
                if c <= th[0] {
                    q1 += 1.0;
                } else if c > th[2] {
                    q4 += 1.0;
                }
            }
        }
    }
    if seen == 0.0 {
        (0.0, 0.0)
    } else {
        (q1 / seen, q4 / seen)
    }
}

fn punct(s: &[String]) -> f64 {
    s.iter()
        .flat_map(|w| w.chars())
        .filter(|c| c.is_ascii_punctuation() || "，。、；：？！“”‘’（）《》【】「」『』…—～·〈〉．".contains(*c))
        .count() as f64
}

/// All 17 features of `(source, mt)` against resources trained on `pairs`.
pub fn features_oracle(
    pairs: &[(Vec<String>, Vec<String>)],
    iterations: usize,
    src: &[String],
    mt: &[String],
) -> [f64; 17] {
    let sources: Vec<Vec<String>> = pairs.iter().map(|p| p.0.clone()).collect();
    let targets: Vec<Vec<String>> = pairs.iter().map(|p| p.1.clone()).collect();
    let slm = OracleLm::train(&sources);
    let tlm = OracleLm::train(&targets);
    let (t, _) = ibm1_oracle(pairs, iterations);
    let freq = |w: &String| sources.iter().flatten().filter(|x| *x == w).count() as f64;
    let above = |w: &String, th: f64| t.iter().filter(|((e, _), &p)| e == w && p > th).count() as f64;
    let mean = |v: Vec<f64>| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };

    let mut f = [0.0; 17];
    f[0] = src.len() as f64;
    f[1] = mt.len() as f64;
    f[2] = mean(src.iter().map(|w| w.chars().count() as f64).collect());
    f[3] = slm.logprob(src);
    f[4] = tlm.logprob(mt);
    f[5] = if mt.is_empty() {
        0.0
    } else {
        mt.iter().collect::<BTreeSet<_>>().len() as f64 / mt.len() as f64
    };
    f[6] = mean(src.iter().map(|w| above(w, 0.2)).collect());
    f[7] = mean(
        src.iter()
            .map(|w| if freq(w) == 0.0 { 0.0 } else { above(w, 0.01) / freq(w) })
            .collect(),
    );
    for n in 1..=3 {
        let (q1, q4) = quartile_fractions(&sources, n, src);
        f[6 + 2 * n] = q1;
        f[7 + 2 * n] = q4;
    }
    f[14] = if src.is_empty() {
        0.0
    } else {
        src.iter().filter(|w| freq(w) > 0.0).count() as f64 / src.len() as f64
    };
    f[15] = punct(src);
    f[16] = punct(mt);
    f
}

// ---------------------------------------------------------------- BiRNN forward

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Probability from the documented equations, reading tensors by name.
pub fn birnn_forward_oracle(params: &BirnnParams<f64>, max_len: usize, src: &[u32], tgt: &[u32]) -> f64 {
    let named: HashMap<String, (Vec<usize>, Vec<f64>)> = params
        .tensors()
        .into_iter()
        .map(|t| (t.name, (t.shape, t.data.to_vec())))
        .collect();
    let get = |n: &str| &named[n];
    let matvec = |n: &str, x: &[f64]| -> Vec<f64> {
        let (shape, data) = get(n);
        (0..shape[0])
            .map(|r| (0..shape[1]).map(|c| data[r * shape[1] + c] * x[c]).sum())
            .collect()
    };
    let vecof = |n: &str| get(n).1.clone();

    let gru = |prefix: &str, xs: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let hd = vecof(&format!("{prefix}.bz")).len();
        let mut h = vec![0.0; hd];
        let mut out = Vec::new();
        for x in xs {
            let wz = matvec(&format!("{prefix}.wz"), x);
            let uz = matvec(&format!("{prefix}.uz"), &h);
            let bz = vecof(&format!("{prefix}.bz"));
            let wr = matvec(&format!("{prefix}.wr"), x);
            let ur = matvec(&format!("{prefix}.ur"), &h);
            let br = vecof(&format!("{prefix}.br"));
            let z: Vec<f64> = (0..hd).map(|k| sig(wz[k] + uz[k] + bz[k])).collect();
            let r: Vec<f64> = (0..hd).map(|k| sig(wr[k] + ur[k] + br[k])).collect();
            let rh: Vec<f64> = (0..hd).map(|k| r[k] * h[k]).collect();
            let wh = matvec(&format!("{prefix}.wh"), x);
            let uh = matvec(&format!("{prefix}.uh"), &rh);
            let bh = vecof(&format!("{prefix}.bh"));
            let c: Vec<f64> = (0..hd).map(|k| (wh[k] + uh[k] + bh[k]).tanh()).collect();
            h = (0..hd).map(|k| (1.0 - z[k]) * h[k] + z[k] * c[k]).collect();
            out.push(h.clone());
        }
        out
    };

    let side = |name: &str, ids: &[u32]| -> Vec<Vec<f64>> {
        let (shape, emb) = get(&format!("{name}_embed"));
        let xs: Vec<Vec<f64>> = ids
            .iter()
            .take(max_len)
            .filter(|&&i| i != 0)
            .map(|&i| emb[i as usize * shape[1]..(i as usize + 1) * shape[1]].to_vec())
            .collect();
        let fwd = gru(&format!("{name}.fwd"), &xs);
        let rev: Vec<Vec<f64>> = xs.iter().rev().cloned().collect();
        let mut bwd = gru(&format!("{name}.bwd"), &rev);
        bwd.reverse();
        let bg = vecof(&format!("{name}.bg"));
        (0..xs.len())
            .map(|i| {
                let g: Vec<f64> = fwd[i].iter().chain(&bwd[i]).copied().collect();
                let a = matvec(&format!("{name}.wg"), &g);
                a.iter().zip(&bg).map(|(x, b)| (x + b).max(0.0)).collect()
            })
            .collect()
    };

    let hs: Vec<Vec<f64>> = side("src", src).into_iter().chain(side("tgt", tgt)).collect();
    let w = vecof("w");
    let e: Vec<f64> = hs.iter().map(|h| h.iter().zip(&w).map(|(a, b)| a * b).sum()).collect();
    let z: f64 = e.iter().map(|x| x.exp()).sum();
    let mut u = vec![0.0; w.len()];
    for (ei, h) in e.iter().zip(&hs) {
        for k in 0..u.len() {
            u[k] += ei.exp() / z * h[k];
        }
    }
    let bu = vecof("bu");
    let v: Vec<f64> = matvec("wu", &u)
        .iter()
        .zip(&bu)
        .map(|(a, b)| (a + b).max(0.0))
        .collect();
    let wv = vecof("wv");
    sig(v.iter().zip(&wv).map(|(a, b)| a * b).sum::<f64>() + vecof("bv")[0])
}

// ---------------------------------------------------------------- SVM dual

pub struct SvmInstance {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub kernel: Kernel<f64>,
    pub c: f64,
}

/// Seeded 2-D instances of 2 to 12 points, alternating kernels and C.
pub fn svm_fixtures() -> Vec<SvmInstance> {
    let mut rng = OracleRng::new(2024);
    let mut out = Vec::new();
    for n in 2..=12 {
        for variant in 0..2 {
            let x: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0])
                .collect();
            let mut y: Vec<f64> = x
                .iter()
                .map(|p| {
                    if p[0] + 0.3 * p[1] + 0.4 * (rng.uniform() - 0.5) > 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect();
            y[0] = 1.0;
            y[1] = -1.0;
            let kernel = if variant == 0 {
                Kernel::Linear
            } else {
                Kernel::Rbf {
                    gamma: 0.5 + n as f64 / 8.0,
                }
            };
            let c = [0.5, 1.0, 4.0][(n + variant) % 3];
            out.push(SvmInstance { x, y, kernel, c });
        }
    }
    out
}

/// Maximum of `sum a - 1/2 a'Qa` over `0 <= a <= C`, `y'a = 0`, found by
/// solving the stationarity system on every face of the box.
pub fn brute_force_dual(inst: &SvmInstance) -> f64 {
    use nalgebra::{DMatrix, DVector};
    let n = inst.y.len();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| inst.y[i] * inst.y[j] * inst.kernel.eval(&inst.x[i], &inst.x[j]))
                .collect()
        })
        .collect();
    let objective = |a: &[f64]| -> f64 {
        let quad: f64 = (0..n).map(|i| (0..n).map(|j| a[i] * q[i][j] * a[j]).sum::<f64>()).sum();
        a.iter().sum::<f64>() - 0.5 * quad
    };
    let mut best = f64::NEG_INFINITY;
    let mut state = vec![0u8; n];
    loop {
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut a: Vec<f64> = state.iter().map(|&s| if s == 1 { inst.c } else { 0.0 }).collect();
        let mut feasible = true;
        if !free.is_empty() {
            let k = free.len();
            let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
            let mut rhs = DVector::<f64>::zeros(k + 1);
            for (r, &i) in free.iter().enumerate() {
                for (cc, &j) in free.iter().enumerate() {
                    m[(r, cc)] = q[i][j];
                }
                m[(r, k)] = inst.y[i];
                m[(k, r)] = inst.y[i];
                rhs[r] = 1.0 - (0..n).filter(|&j| state[j] != 2).map(|j| q[i][j] * a[j]).sum::<f64>();
            }
            rhs[k] = -(0..n).filter(|&j| state[j] != 2).map(|j| inst.y[j] * a[j]).sum::<f64>();
            match m.lu().solve(&rhs) {
                Some(sol) => {
                    for (r, &i) in free.iter().enumerate() {
                        a[i] = sol[r];
                    }
                }
                None => feasible = false,
            }
        }
        if feasible {
            let eq: f64 = a.iter().zip(&inst.y).map(|(x, y)| x * y).sum();
            feasible = eq.abs() < 1e-9
                && a.iter()
                    .all(|&v| v.is_finite() && (-1e-12..=inst.c + 1e-12).contains(&v));
        }
        if feasible {
            best = best.max(objective(&a));
        }
        let mut i = 0;
        while i < n && state[i] == 2 {
            state[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        state[i] += 1;
    }
    best
}
