//! Seeded random mappings and cycle counts.
//!
//! The generator is ChaCha8 seeded with `seed_from_u64`. Images are drawn first, one
//! `gen_range(0..n)` per element in id order, then marks per predicate in the given
//! order, one `gen_range(0..den)` per element (marked when below `num`).

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::structure::{Element, FiniteMapping, Signature};

fn fill(rng: &mut ChaCha8Rng, n: usize) -> Vec<Element> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

/// Uniform random endofunction on `0..n`; `densities` lists predicates with their
/// marking probabilities.
pub fn random_mapping(n: usize, seed: u64, densities: &[(String, Rational)]) -> Result<FiniteMapping> {
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let image = fill(&mut rng, n);
    let mut names = Vec::new();
    let mut marks = Vec::new();
    for (name, q) in densities {
        if *q < Rational::zero() || *q > Rational::one() {
            return Err(Error::InvalidArgument(format!("density of `{name}` must lie in [0,1]")));
        }
        let num = q.numer().to_u64().ok_or_else(|| Error::InvalidArgument("density numerator too large".into()))?;
        let den = q.denom().to_u64().ok_or_else(|| Error::InvalidArgument("density denominator too large".into()))?;
        marks.push((0..n).filter(|_| rng.gen_range(0..den) < num).collect());
        names.push(name.clone());
    }
    FiniteMapping::new(Signature::new("f", names)?, image, marks)
}

/// Number of cycles of each length `1..=r_max` (index `r - 1`).
pub fn count_cycles(image: &[Element], r_max: usize) -> Vec<usize> {
    const NEW: u32 = u32::MAX;
    let n = image.len();
    let mut visit = vec![NEW; n];
    let mut counts = vec![0; r_max];
    for start in 0..n {
        if visit[start] != NEW {
            continue;
        }
        let mut v = start;
        while visit[v] == NEW {
            visit[v] = start as u32;
            v = image[v];
        }
        if visit[v] == start as u32 {
            let mut len = 1;
            let mut w = image[v];
            while w != v {
                len += 1;
                w = image[w];
            }
            if len <= r_max {
                counts[len - 1] += 1;
            }
        }
    }
    counts
}

/// Exact mean number of `r`-cycles in a uniform random mapping on `n` points:
/// `n(n-1)...(n-r+1) / (r n^r)`.
pub fn exact_cycle_mean(n: usize, r: usize) -> Rational {
    assert!(r >= 1);
    if r > n {
        return Rational::zero();
    }
    let falling: BigInt = (0..r).map(|i| BigInt::from(n - i)).product();
    Rational::new(falling, BigInt::from(r) * BigInt::from(n).pow(r as u32))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleRow {
    pub r: usize,
    /// Total count over all samples divided by the sample count.
    pub empirical: Rational,
    pub exact: Rational,
}

/// Sample `i` uses stream `i` of the generator seeded with `seed`.
pub fn cycle_statistics(n: usize, samples: usize, r_max: usize, seed: u64) -> Result<Vec<CycleRow>> {
    if n == 0 || samples == 0 || r_max == 0 {
        return Err(Error::InvalidArgument("n, samples and rmax must be positive".into()));
    }
    let mut totals = vec![0usize; r_max];
    for i in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let image = fill(&mut rng, n);
        for (t, c) in totals.iter_mut().zip(count_cycles(&image, r_max)) {
            *t += c;
        }
    }
    Ok((1..=r_max)
        .map(|r| CycleRow {
            r,
            empirical: Rational::new(BigInt::from(totals[r - 1]), BigInt::from(samples)),
            exact: exact_cycle_mean(n, r),
        })
        .collect())
}
