//! Elementary equivalence up to a rank, and the distances built from tuple classes.
//!
//! A rank-`r` formula with `p` free variables defines a union of `r`-round game
//! classes of `p`-tuples, and each class is definable at rank `r`. So the largest
//! gap in satisfaction probability equals the total variation distance between the
//! class distributions, which is what gets computed here.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::structure::{Element, FiniteMapping};
use crate::types::game::{full_game, Game};
use crate::types::{TypeSession, DEFAULT_STATE_BUDGET};

/// `a ≡_r b`: Duplicator survives `r` rounds of the unrestricted game.
pub fn ef_equivalent(a: &FiniteMapping, b: &FiniteMapping, r: usize) -> Result<bool> {
    ef_equivalent_with_budget(a, b, r, DEFAULT_STATE_BUDGET)
}

pub fn ef_equivalent_with_budget(a: &FiniteMapping, b: &FiniteMapping, r: usize, budget: usize) -> Result<bool> {
    full_game(a, &[], b, &[], r, budget)
}

/// Total variation distance between the distributions of local `r`-round classes of
/// `p`-tuples. For `p = 1` these are the rank-`r` local types.
pub fn ldist(a: &FiniteMapping, b: &FiniteMapping, p: usize, r: usize) -> Result<Rational> {
    ldist_with_budget(a, b, p, r, DEFAULT_STATE_BUDGET)
}

pub fn ldist_with_budget(a: &FiniteMapping, b: &FiniteMapping, p: usize, r: usize, budget: usize) -> Result<Rational> {
    if !a.same_signature(b) {
        return Err(Error::SignatureMismatch);
    }
    if p == 0 {
        return Err(Error::InvalidArgument("ldist needs p >= 1".into()));
    }
    if p == 1 {
        let session = TypeSession::with_budget(budget);
        let da = session.type_distribution(a, r)?;
        let db = session.type_distribution(b, r)?;
        return Ok(da.total_variation(&db));
    }
    class_distance(a, b, p, r, false, budget)
}

/// Largest gap `|<phi,a> - <phi,b>|` over formulas with `p` free variables and
/// quantifier rank at most `r`.
pub fn fo_dist(a: &FiniteMapping, b: &FiniteMapping, p: usize, r: usize) -> Result<Rational> {
    fo_dist_with_budget(a, b, p, r, DEFAULT_STATE_BUDGET)
}

pub fn fo_dist_with_budget(a: &FiniteMapping, b: &FiniteMapping, p: usize, r: usize, budget: usize) -> Result<Rational> {
    if !ef_equivalent_with_budget(a, b, r, budget)? {
        return Ok(Rational::one());
    }
    if p == 0 {
        return Ok(Rational::zero());
    }
    class_distance(a, b, p, r, true, budget)
}

/// `Σ_{p+r>k} 2^{-(p+r)} = (k+3)/2^k`.
pub fn truncation_tail(k: usize) -> Rational {
    Rational::new(BigInt::from(k + 3), BigInt::one() << k)
}

/// Partial sum of `Σ 2^{-(p+r)} fo_dist(a,b,p,r)` over `p + r <= k`, and that sum plus
/// the largest possible remainder.
pub fn dist_fo_truncated(a: &FiniteMapping, b: &FiniteMapping, k: usize) -> Result<(Rational, Rational)> {
    let mut lower = Rational::zero();
    for s in 0..=k {
        let weight = Rational::new(BigInt::one(), BigInt::one() << s);
        for p in 0..=s {
            let d = fo_dist(a, b, p, s - p)?;
            lower += &weight * d;
        }
    }
    let upper = &lower + truncation_tail(k);
    Ok((lower, upper))
}

struct Classes<'a> {
    structs: [&'a FiniteMapping; 2],
    games: HashMap<(usize, usize), Game<'a>>,
    r: usize,
    full: bool,
    budget: usize,
    reps: HashMap<Vec<u64>, Vec<(usize, Vec<Element>, usize)>>,
    counts: Vec<[u64; 2]>,
}

impl<'a> Classes<'a> {
    fn key(&self, s: usize, t: &[Element]) -> Vec<u64> {
        let m = self.structs[s];
        let colors = crate::types::colors_at(m, self.r);
        let mut key: Vec<u64> = t.iter().map(|&v| colors[v] as u64).collect();
        for &x in t {
            for &y in t {
                key.push(((x == y) as u64) | (((m.f(x) == y) as u64) << 1));
            }
        }
        key
    }

    fn add(&mut self, s: usize, t: Vec<Element>) -> Result<()> {
        let key = self.key(s, &t);
        let bucket = self.reps.get(&key).cloned().unwrap_or_default();
        for (rs, rt, class) in bucket {
            let (lo, hi) = if rs <= s { (rs, s) } else { (s, rs) };
            let (ta, tb) = if rs <= s { (&rt, &t) } else { (&t, &rt) };
            let structs = self.structs;
            let (r, full, budget) = (self.r, self.full, self.budget);
            let game = self
                .games
                .entry((lo, hi))
                .or_insert_with(|| Game::new(structs[lo], structs[hi], r, full, budget));
            if game.duplicator_wins(ta, tb, r)? {
                self.counts[class][s] += 1;
                return Ok(());
            }
        }
        let class = self.counts.len();
        let mut c = [0, 0];
        c[s] = 1;
        self.counts.push(c);
        self.reps.entry(key).or_default().push((s, t, class));
        Ok(())
    }
}

fn class_distance(a: &FiniteMapping, b: &FiniteMapping, p: usize, r: usize, full: bool, budget: usize) -> Result<Rational> {
    let limit = crate::logic::DEFAULT_ASSIGNMENT_BUDGET;
    for m in [a, b] {
        if (m.len() as u128).checked_pow(p as u32).map_or(true, |t| t > limit) {
            return Err(Error::BudgetExceeded(format!("{}^{p} tuples", m.len())));
        }
    }
    let mut classes = Classes {
        structs: [a, b],
        games: HashMap::new(),
        r,
        full,
        budget,
        reps: HashMap::new(),
        counts: Vec::new(),
    };
    for s in 0..2 {
        let n = classes.structs[s].len();
        let mut t = vec![0; p];
        loop {
            classes.add(s, t.clone())?;
            let mut i = p;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                t[i] += 1;
                if t[i] < n {
                    break;
                }
                t[i] = 0;
            }
            if t.iter().all(|&x| x == 0) {
                break;
            }
        }
    }
    let na = BigInt::from(a.len()).pow(p as u32);
    let nb = BigInt::from(b.len()).pow(p as u32);
    let mut l1 = Rational::zero();
    for c in &classes.counts {
        let qa = Rational::new(BigInt::from(c[0]), na.clone());
        let qb = Rational::new(BigInt::from(c[1]), nb.clone());
        l1 += (qa - qb).abs();
    }
    Ok(l1 / Rational::from_integer(BigInt::from(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn ef_examples() {
        let c3 = FiniteMapping::cycle(3);
        for r in 0..4 {
            assert!(ef_equivalent(&c3, &c3, r).unwrap());
        }
        assert!(ef_equivalent(&FiniteMapping::star(100), &FiniteMapping::star(2), 2).unwrap());
        assert!(!ef_equivalent(&FiniteMapping::star(2), &FiniteMapping::star(1), 2).unwrap());
    }

    #[test]
    fn ldist_examples() {
        let c3 = FiniteMapping::cycle(3);
        assert_eq!(ldist(&c3, &c3, 1, 2).unwrap(), ratio(0, 1));
        assert_eq!(ldist(&c3, &FiniteMapping::fixed_point(), 1, 0).unwrap(), ratio(1, 1));
        assert_eq!(ldist(&FiniteMapping::star(3), &FiniteMapping::star(4), 1, 1).unwrap(), ratio(1, 20));
        assert_eq!(ldist(&c3, &c3, 2, 1).unwrap(), ratio(0, 1));
    }

    #[test]
    fn fo_dist_examples() {
        let c3 = FiniteMapping::cycle(3);
        assert_eq!(fo_dist(&c3, &FiniteMapping::fixed_point(), 0, 1).unwrap(), ratio(1, 1));
        let c5 = FiniteMapping::cycle(5);
        let relabeled = FiniteMapping::unmarked(vec![3, 0, 4, 2, 1]).unwrap();
        for p in 0..3 {
            for r in 0..3 {
                assert_eq!(fo_dist(&c5, &relabeled, p, r).unwrap(), ratio(0, 1));
            }
        }
    }

    #[test]
    fn fo_dist_counts_tuple_classes() {
        // Both are 1-equivalent; pairs with x1 = x2 have mass 1/n.
        let a = FiniteMapping::identity(2);
        let b = FiniteMapping::identity(4);
        assert_eq!(fo_dist(&a, &b, 2, 0).unwrap(), ratio(1, 4));
    }

    #[test]
    fn truncation() {
        let c3 = FiniteMapping::cycle(3);
        let (lo, hi) = dist_fo_truncated(&c3, &c3, 2).unwrap();
        assert_eq!(lo, ratio(0, 1));
        assert_eq!(hi, truncation_tail(2));
        assert_eq!(truncation_tail(0), ratio(3, 1));
        let (lo0, _) = dist_fo_truncated(&c3, &FiniteMapping::fixed_point(), 0).unwrap();
        assert_eq!(lo0, fo_dist(&c3, &FiniteMapping::fixed_point(), 0, 0).unwrap());
    }

    #[test]
    fn mismatched_signatures() {
        let marked = FiniteMapping::cycle(3).mark_element(0, "P").unwrap();
        assert_eq!(ldist(&marked, &FiniteMapping::cycle(3), 1, 1), Err(Error::SignatureMismatch));
        assert_eq!(ef_equivalent(&marked, &FiniteMapping::cycle(3), 1), Err(Error::SignatureMismatch));
    }
}
