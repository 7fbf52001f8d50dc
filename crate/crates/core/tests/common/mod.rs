//! Brute-force oracles shared by the integration tests. Nothing here calls into the
//! library beyond reading a mapping's image and marks.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Counts pairs `(x, y)` with `f(x) = y`, `x ∈ A`, `y ∈ B`, once by scanning `x`
/// and once by scanning `y` against every `x`.
pub fn fmtp_counts(image: &[usize], a: &[bool], b: &[bool]) -> (usize, usize) {
    let n = image.len();
    let by_source = (0..n).filter(|&x| a[x] && b[image[x]]).count();
    let mut by_target = 0;
    for y in (0..n).filter(|&y| b[y]) {
        for x in 0..n {
            if a[x] && image[x] == y {
                by_target += 1;
            }
        }
    }
    (by_source, by_target)
}

/// Length of every cycle, found by walking `n` steps and then around.
pub fn cycle_lengths(image: &[usize]) -> Vec<usize> {
    let n = image.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        let mut v = s;
        for _ in 0..n {
            v = image[v];
        }
        if seen[v] {
            continue;
        }
        let mut len = 0;
        let mut w = v;
        loop {
            seen[w] = true;
            len += 1;
            w = image[w];
            if w == v {
                break;
            }
        }
        out.push(len);
    }
    out
}

/// `n(n-1)...(n-r+1) / (r n^r)`.
pub fn cycle_mean(n: u64, r: u64) -> BigRational {
    let mut num = BigInt::from(1);
    for i in 0..r {
        num *= BigInt::from(n - i);
    }
    let den = BigInt::from(r) * BigInt::from(n).pow(r as u32);
    BigRational::new(num, den)
}

pub fn tv<K: Ord + Clone>(a: &BTreeMap<K, BigRational>, b: &BTreeMap<K, BigRational>) -> BigRational {
    let mut keys: Vec<&K> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let zero = BigRational::zero();
    let sum: BigRational = keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&zero) - b.get(k).unwrap_or(&zero)).abs())
        .sum();
    sum / BigRational::from_integer(BigInt::from(2))
}

/// `p`-fold product of a distribution on `0..len`.
pub fn power(d: &[BigRational], p: usize) -> BTreeMap<Vec<usize>, BigRational> {
    let mut out = BTreeMap::from([(Vec::new(), BigRational::from_integer(BigInt::from(1)))]);
    for _ in 0..p {
        let mut next = BTreeMap::new();
        for (t, w) in &out {
            for (i, x) in d.iter().enumerate() {
                let mut t = t.clone();
                t.push(i);
                next.insert(t, w * x);
            }
        }
        out = next;
    }
    out
}

/// A random distribution on `len` points with denominators below 64.
pub fn random_distribution(len: usize, mut next: impl FnMut() -> u64) -> Vec<BigRational> {
    let weights: Vec<i64> = (0..len).map(|_| (next() % 7) as i64 + 1).collect();
    let total: i64 = weights.iter().sum();
    weights.into_iter().map(|w| q(w, total)).collect()
}
