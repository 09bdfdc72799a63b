//! Increasing multi-indices as bitmasks.
//!
//! A degree-k index set over dimension n is a u8 with exactly k bits set,
//! bit i meaning coordinate i. Listing the masks of fixed popcount in
//! ascending numeric order gives colexicographic order, and the position of
//! a mask in that list has the closed form rank(S) = sum_j C(c_j, j+1)
//! where c_0 < c_1 < ... are the set bit positions. Component storage
//! everywhere in this crate follows that order.

use std::sync::OnceLock;

pub const MAX_DIM: usize = 6;

const BINOM_N: usize = 13;

static BINOM: OnceLock<[[usize; BINOM_N]; BINOM_N]> = OnceLock::new();
static RANK: OnceLock<[usize; 64]> = OnceLock::new();
static SETS: OnceLock<Vec<Vec<Vec<u8>>>> = OnceLock::new();

fn binom_table() -> &'static [[usize; BINOM_N]; BINOM_N] {
    BINOM.get_or_init(|| {
        let mut t = [[0usize; BINOM_N]; BINOM_N];
        for n in 0..BINOM_N {
            t[n][0] = 1;
            for k in 1..=n {
                t[n][k] = t[n - 1][k - 1] + if k <= n - 1 { t[n - 1][k] } else { 0 };
            }
        }
        t
    })
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n || n >= BINOM_N {
        return 0;
    }
    binom_table()[n][k]
}

/// Position of `mask` among all masks of the same popcount, any dimension.
pub fn rank(mask: u8) -> usize {
    let table = RANK.get_or_init(|| {
        let mut t = [0usize; 64];
        for (m, slot) in t.iter_mut().enumerate() {
            let mut r = 0usize;
            let mut seen = 0usize;
            for bit in 0..6 {
                if m & (1 << bit) != 0 {
                    seen += 1;
                    r += binomial(bit, seen);
                }
            }
            *slot = r;
        }
        t
    });
    table[(mask & 0x3f) as usize]
}

/// All degree-`degree` index sets over `dim` coordinates, ascending masks.
pub fn index_sets(dim: usize, degree: usize) -> &'static [u8] {
    let sets = SETS.get_or_init(|| {
        let mut all = vec![vec![Vec::new(); MAX_DIM + 1]; MAX_DIM + 1];
        for (n, row) in all.iter_mut().enumerate() {
            for mask in 0u8..(1 << n) {
                row[mask.count_ones() as usize].push(mask);
            }
        }
        all
    });
    assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
    if degree > dim {
        return &[];
    }
    &sets[dim][degree]
}

pub fn mask_from_indices(indices: &[usize]) -> u8 {
    let mut m = 0u8;
    for &i in indices {
        debug_assert!(i < MAX_DIM + 2);
        m |= 1 << i;
    }
    m
}

pub fn indices_from_mask(mask: u8) -> Vec<usize> {
    (0..8).filter(|i| mask & (1 << i) != 0).collect()
}

/// Sign of the shuffle sorting the concatenation (a ascending, b ascending)
/// into one ascending list. Masks must be disjoint.
pub fn merge_sign(a: u8, b: u8) -> f64 {
    debug_assert_eq!(a & b, 0, "merge_sign on overlapping masks");
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of sorting an arbitrary index list ascending; None if any repeat.
pub fn sort_sign(indices: &[usize]) -> Option<f64> {
    let mut sign = 1.0;
    let mut v = indices.to_vec();
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            match v[i].cmp(&v[j]) {
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Greater => {
                    v.swap(i, j);
                    sign = -sign;
                }
                std::cmp::Ordering::Less => {}
            }
        }
    }
    Some(sign)
}
