//! Brute-force dense oracle used by the integration tests.
//!
//! Everything here works on full n^k component arrays with textbook
//! formulas: antisymmetrization over the whole symmetric group, factorial
//! normalizations written out explicitly, signs from inversion counts.
//! Deliberately no sharing with the compressed implementation beyond the
//! increasing-set storage order.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::Rng;
use vortint_core::geom::multi_index::{index_sets, indices_from_mask};
use vortint_core::{AltTensor, Variance};

pub struct Dense {
    pub n: usize,
    pub k: usize,
    pub a: Vec<f64>,
}

pub fn factorial(k: usize) -> usize {
    (1..=k).product::<usize>().max(1)
}

pub fn perm_sign(p: &[usize]) -> f64 {
    let mut inv = 0usize;
    for i in 0..p.len() {
        for j in (i + 1)..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn all_perms(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(items: &mut Vec<usize>, start: usize, out: &mut Vec<(Vec<usize>, f64)>) {
        if start == items.len() {
            out.push((items.clone(), perm_sign(items)));
            return;
        }
        for i in start..items.len() {
            items.swap(start, i);
            rec(items, start + 1, out);
            items.swap(start, i);
        }
    }
    let mut items: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    rec(&mut items, 0, &mut out);
    out
}

pub fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    loop {
        out.push(cur.clone());
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            cur[i] += 1;
            if cur[i] < n {
                break;
            }
            cur[i] = 0;
            i += 1;
        }
    }
}

impl Dense {
    pub fn zeros(n: usize, k: usize) -> Self {
        Dense {
            n,
            k,
            a: vec![0.0; n.pow(k as u32)],
        }
    }

    pub fn idx(&self, tuple: &[usize]) -> usize {
        let mut i = 0usize;
        let mut stride = 1usize;
        for &t in tuple {
            i += t * stride;
            stride *= self.n;
        }
        i
    }

    pub fn get(&self, tuple: &[usize]) -> f64 {
        self.a[self.idx(tuple)]
    }

    pub fn set(&mut self, tuple: &[usize], v: f64) {
        let i = self.idx(tuple);
        self.a[i] = v;
    }

    pub fn from_compressed(t: &AltTensor) -> Dense {
        let n = t.dim();
        let k = t.degree();
        let mut d = Dense::zeros(n, k);
        let perms = all_perms(k);
        for (pos, &mask) in index_sets(n, k).iter().enumerate() {
            let c = t.components()[pos];
            if c == 0.0 {
                continue;
            }
            let base = indices_from_mask(mask);
            for (perm, sign) in &perms {
                let tuple: Vec<usize> = perm.iter().map(|&i| base[i]).collect();
                d.set(&tuple, sign * c);
            }
        }
        d
    }
}

pub fn dense_wedge(a: &Dense, b: &Dense) -> Dense {
    assert_eq!(a.n, b.n);
    let (n, p, q) = (a.n, a.k, b.k);
    let mut out = Dense::zeros(n, p + q);
    let perms = all_perms(p + q);
    let norm = 1.0 / (factorial(p) * factorial(q)) as f64;
    for big in tuples(n, p + q) {
        let mut acc = 0.0;
        for (perm, sign) in &perms {
            let left: Vec<usize> = perm[..p].iter().map(|&t| big[t]).collect();
            let right: Vec<usize> = perm[p..].iter().map(|&t| big[t]).collect();
            acc += sign * a.get(&left) * b.get(&right);
        }
        out.set(&big, acc * norm);
    }
    out
}

/// First-slot contraction with the 1/p! weight.
pub fn dense_contract(x: &Dense, y: &Dense) -> Dense {
    assert_eq!(x.n, y.n);
    assert!(x.k <= y.k);
    let (n, p, d) = (x.n, x.k, y.k - x.k);
    let mut out = Dense::zeros(n, d);
    let norm = 1.0 / factorial(p) as f64;
    for l in tuples(n, d) {
        let mut acc = 0.0;
        for j in tuples(n, p) {
            let full: Vec<usize> = j.iter().chain(l.iter()).copied().collect();
            acc += x.get(&j) * y.get(&full);
        }
        out.set(&l, acc * norm);
    }
    out
}

pub fn dense_pairing(x: &Dense, y: &Dense) -> f64 {
    assert_eq!(x.k, y.k);
    let norm = 1.0 / factorial(x.k) as f64;
    x.a.iter().zip(&y.a).map(|(a, b)| a * b).sum::<f64>() * norm
}

/// Apply a matrix to every slot: y_I = sum_J prod_t m[I_t, J_t] x_J.
pub fn dense_transform(x: &Dense, m: &DMatrix<f64>) -> Dense {
    let (n, k) = (x.n, x.k);
    let mut out = Dense::zeros(n, k);
    for i in tuples(n, k) {
        let mut acc = 0.0;
        for j in tuples(n, k) {
            let mut w = x.get(&j);
            if w == 0.0 {
                continue;
            }
            for t in 0..k {
                w *= m[(i[t], j[t])];
            }
            acc += w;
        }
        out.set(&i, acc);
    }
    out
}

pub fn dense_evaluate(x: &Dense, cols: &DMatrix<f64>) -> f64 {
    let mut acc = 0.0;
    for i in tuples(x.n, x.k) {
        let mut w = x.get(&i);
        if w == 0.0 {
            continue;
        }
        for (t, &row) in i.iter().enumerate() {
            w *= cols[(row, t)];
        }
        acc += w;
    }
    acc
}

/// Max difference between a dense array and a compressed tensor over the
/// increasing tuples (all the independent components).
pub fn max_diff_compressed(d: &Dense, t: &AltTensor) -> f64 {
    assert_eq!(d.n, t.dim());
    assert_eq!(d.k, t.degree());
    let mut worst: f64 = 0.0;
    for (pos, &mask) in index_sets(d.n, d.k).iter().enumerate() {
        let tuple = indices_from_mask(mask);
        worst = worst.max((d.get(&tuple) - t.components()[pos]).abs());
    }
    worst
}

pub fn random_alt(rng: &mut StdRng, n: usize, k: usize, variance: Variance) -> AltTensor {
    let m = index_sets(n, k).len();
    let coeffs: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    AltTensor::from_coeffs(n, k, variance, coeffs).unwrap()
}

pub fn random_spd(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(n, n) * (n as f64)
}
