//! Cross-checks of the compressed exterior algebra against the dense oracle.

mod common;

use common::*;
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use vortint_core::{AltTensor, MetricChart, Variance};

const TOL: f64 = 1e-12;

fn degree_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for p in 0..=n {
        for q in 0..=(n - p) {
            out.push((p, q));
        }
    }
    out
}

#[test]
fn wedge_matches_dense_expansion() {
    let mut rng = StdRng::seed_from_u64(11);
    for n in 2..=4 {
        for (p, q) in degree_pairs(n) {
            for _ in 0..4 {
                let a = random_alt(&mut rng, n, p, Variance::Covariant);
                let b = random_alt(&mut rng, n, q, Variance::Covariant);
                let fast = a.wedge(&b).unwrap();
                let slow = dense_wedge(&Dense::from_compressed(&a), &Dense::from_compressed(&b));
                let diff = max_diff_compressed(&slow, &fast);
                assert!(diff < TOL, "n={n} p={p} q={q}: max diff {diff:e}");
            }
        }
    }
    // Spot checks at the top dimensions, where the permutation sums get big.
    for (n, p, q) in [(5, 2, 2), (5, 1, 3), (6, 2, 3), (6, 1, 1)] {
        let a = random_alt(&mut rng, n, p, Variance::Covariant);
        let b = random_alt(&mut rng, n, q, Variance::Covariant);
        let fast = a.wedge(&b).unwrap();
        let slow = dense_wedge(&Dense::from_compressed(&a), &Dense::from_compressed(&b));
        let diff = max_diff_compressed(&slow, &fast);
        assert!(diff < TOL, "n={n} p={p} q={q}: max diff {diff:e}");
    }
}

#[test]
fn contraction_matches_dense_expansion() {
    let mut rng = StdRng::seed_from_u64(12);
    for n in 2..=4 {
        for k in 0..=n {
            for p in 0..=k {
                for _ in 0..4 {
                    let x = random_alt(&mut rng, n, p, Variance::Contravariant);
                    let y = random_alt(&mut rng, n, k, Variance::Covariant);
                    let fast = x.contract(&y).unwrap();
                    let slow =
                        dense_contract(&Dense::from_compressed(&x), &Dense::from_compressed(&y));
                    let diff = max_diff_compressed(&slow, &fast);
                    assert!(diff < TOL, "n={n} p={p} k={k}: max diff {diff:e}");
                }
            }
        }
    }
    for (n, p, k) in [(5, 2, 4), (6, 3, 5), (6, 1, 6)] {
        let x = random_alt(&mut rng, n, p, Variance::Contravariant);
        let y = random_alt(&mut rng, n, k, Variance::Covariant);
        let fast = x.contract(&y).unwrap();
        let slow = dense_contract(&Dense::from_compressed(&x), &Dense::from_compressed(&y));
        let diff = max_diff_compressed(&slow, &fast);
        assert!(diff < TOL, "n={n} p={p} k={k}: max diff {diff:e}");
    }
}

#[test]
fn pairing_matches_dense_full_contraction() {
    let mut rng = StdRng::seed_from_u64(13);
    for n in 2..=5 {
        for k in 0..=n {
            let x = random_alt(&mut rng, n, k, Variance::Contravariant);
            let y = random_alt(&mut rng, n, k, Variance::Covariant);
            let fast = x.pairing(&y).unwrap();
            let slow = dense_pairing(&Dense::from_compressed(&x), &Dense::from_compressed(&y));
            assert!((fast - slow).abs() < TOL, "n={n} k={k}: {fast} vs {slow}");
        }
    }
}

#[test]
fn raising_and_lowering_match_slotwise_transport() {
    let mut rng = StdRng::seed_from_u64(14);
    for n in 2..=5 {
        let m = random_spd(&mut rng, n);
        let g = {
            let m = m.clone();
            MetricChart::custom(n, move |_| m.clone())
        };
        let pt = vec![0.0; n];
        for k in 1..=n.min(4) {
            let x = random_alt(&mut rng, n, k, Variance::Contravariant);
            let fast = g.flat(&x, &pt).unwrap();
            let slow = dense_transform(&Dense::from_compressed(&x), &m);
            let diff = max_diff_compressed(&slow, &fast);
            assert!(diff < 1e-10, "flat n={n} k={k}: max diff {diff:e}");

            let roundtrip = g.sharp(&fast, &pt).unwrap();
            let mut back = roundtrip.clone();
            back.add_scaled(&x, -1.0).unwrap();
            assert!(back.norm_inf() < 1e-10, "sharp∘flat n={n} k={k}");
        }
    }
}

#[test]
fn evaluation_matches_dense_multilinear_sum() {
    let mut rng = StdRng::seed_from_u64(15);
    for n in 2..=6 {
        for k in 1..=n.min(4) {
            let x = random_alt(&mut rng, n, k, Variance::Covariant);
            let cols = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
            let fast = x.evaluate(&cols).unwrap();
            let slow = dense_evaluate(&Dense::from_compressed(&x), &cols);
            assert!((fast - slow).abs() < TOL, "n={n} k={k}: {fast} vs {slow}");
        }
    }
}

#[test]
fn dense_expansion_is_alternating() {
    // Sanity check on the oracle itself: expanded arrays vanish on repeated
    // indices and flip under adjacent transposition.
    let mut rng = StdRng::seed_from_u64(16);
    let x = random_alt(&mut rng, 4, 3, Variance::Covariant);
    let d = Dense::from_compressed(&x);
    for t in tuples(4, 3) {
        let mut swapped = t.clone();
        swapped.swap(0, 1);
        assert!((d.get(&t) + d.get(&swapped)).abs() < TOL);
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            assert_eq!(d.get(&t), 0.0);
        }
    }
}
