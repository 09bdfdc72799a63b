//! Gauss-Legendre lines and simplex rules.

use crate::error::{Error, Result};

/// Nodes and weights on [-1, 1].
#[derive(Clone, Debug)]
pub struct Quad1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre rule of the given node count, any order >= 1. Nodes are
/// Legendre roots found by Newton from the Chebyshev initial guess.
pub fn gauss_legendre(order: usize) -> Result<Quad1d> {
    if order == 0 {
        return Err(Error::Invalid("quadrature order must be at least 1".into()));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(Quad1d { nodes, weights })
}

/// The rule mapped to [lo, hi].
pub fn gauss_legendre_on(order: usize, lo: f64, hi: f64) -> Result<Quad1d> {
    let base = gauss_legendre(order)?;
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    Ok(Quad1d {
        nodes: base.nodes.iter().map(|&x| mid + half * x).collect(),
        weights: base.weights.iter().map(|&w| w * half).collect(),
    })
}

/// Quadrature on the unit simplex {x_i >= 0, sum x_i <= 1} in s dimensions.
/// Points are cartesian (the first barycentric coordinate dropped); weights
/// sum to the simplex volume 1/s!.
#[derive(Clone, Debug)]
pub struct SimplexRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Simplex rule exact through polynomial degree 2k+1.
pub fn simplex_rule(sdim: usize, k: usize) -> Result<SimplexRule> {
    if sdim == 0 {
        return Ok(SimplexRule {
            points: vec![vec![]],
            weights: vec![1.0],
            degree: usize::MAX,
        });
    }
    let s = sdim;
    let d = 2 * k + 1;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for i in 0..=k {
        let denom = (d + s - 2 * i) as f64;
        // (-1)^i 2^{-2k} (d+s-2i)^d / (i! (d+s-i)!)
        let mut coeff = denom.powi(d as i32) * 0.25f64.powi(k as i32);
        for j in 1..=i {
            coeff /= j as f64;
        }
        for j in 1..=(d + s - i) {
            coeff /= j as f64;
        }
        if i % 2 == 1 {
            coeff = -coeff;
        }
        for beta in compositions(k - i, s + 1) {
            let bary: Vec<f64> = beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect();
            points.push(bary[1..].to_vec());
            weights.push(coeff);
        }
    }
    Ok(SimplexRule {
        points,
        weights,
        degree: d,
    })
}

/// All tuples of `parts` nonnegative integers summing to `total`.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for head in 0..=total {
            prefix.push(head);
            rec(total - head, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}
