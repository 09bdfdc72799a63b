//! Small numeric helpers shared across modules.

/// Pairwise-tree sum over `terms` in their given order. Deterministic:
/// the reduction tree depends only on the length, so repeated evaluation
/// is bit-identical regardless of how the terms were produced.
pub fn tree_sum(mut terms: Vec<f64>) -> f64 {
    let mut len = terms.len();
    if len == 0 {
        return 0.0;
    }
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            terms[i] = terms[2 * i] + terms[2 * i + 1];
        }
        if len % 2 == 1 {
            terms[half] = terms[len - 1];
            len = half + 1;
        } else {
            len = half;
        }
    }
    terms[0]
}

/// 4th-order central difference of a scalar function of one variable.
pub fn central_diff4(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// 4th-order central difference for vector-valued functions; `out[i]` holds
/// the derivative of component i.
pub fn central_diff4_vec(mut f: impl FnMut(f64) -> Vec<f64>, x: f64, h: f64) -> Vec<f64> {
    let fp2 = f(x + 2.0 * h);
    let fp1 = f(x + h);
    let fm1 = f(x - h);
    let fm2 = f(x - 2.0 * h);
    (0..fp2.len())
        .map(|i| (-fp2[i] + 8.0 * fp1[i] - 8.0 * fm1[i] + fm2[i]) / (12.0 * h))
        .collect()
}

/// Least-squares line fit `y ≈ slope·x + intercept`, returning
/// (slope, intercept, r²). Degenerate inputs (fewer than two points,
/// zero variance in x) give r² = 0 and slope 0.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len().min(ys.len());
    if m < 2 {
        return (0.0, ys.first().copied().unwrap_or(0.0), 0.0);
    }
    let n = m as f64;
    let mx = xs[..m].iter().sum::<f64>() / n;
    let my = ys[..m].iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..m {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return (0.0, my, 0.0);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy <= 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// Fitted slope of log(err) against log(scale): the observed convergence
/// order over refinement levels. Non-positive entries are skipped; returns
/// (order, r², points_used).
pub fn fit_order(scales: &[f64], errors: &[f64]) -> (f64, f64, usize) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&s, &e) in scales.iter().zip(errors.iter()) {
        if s > 0.0 && e > 0.0 && e.is_finite() {
            xs.push(s.ln());
            ys.push(e.ln());
        }
    }
    let (slope, _, r2) = line_fit(&xs, &ys);
    (slope, r2, xs.len())
}
