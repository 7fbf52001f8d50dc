//! Memoized Ehrenfeucht–Fraïssé game search, in the local variant (moves adjacent to
//! chosen elements) and the full variant (moves anywhere).
//!
//! Two reductions keep the branching small. Sibling subtrees that are isomorphic and
//! contain no chosen element are interchangeable, so only one of them is tried; in
//! the full game the same holds for untouched isomorphic components. Responses are
//! pruned by refinement colors, which are necessary conditions for winning.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use super::color::{colors, components, tree_codes};
use crate::error::{Error, Result};
use crate::structure::FiniteMapping;

pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    A,
    B,
}

pub(crate) struct Game<'a> {
    a: &'a FiniteMapping,
    b: &'a FiniteMapping,
    full: bool,
    colors_a: Vec<Arc<Vec<u32>>>,
    colors_b: Vec<Arc<Vec<u32>>>,
    memo: HashMap<Vec<(u32, u32)>, bool>,
    budget: usize,
}

impl<'a> Game<'a> {
    pub fn new(a: &'a FiniteMapping, b: &'a FiniteMapping, rounds: usize, full: bool, budget: usize) -> Self {
        let colors_a = (0..=rounds).map(|k| colors(a, k)).collect();
        let colors_b = (0..=rounds).map(|k| colors(b, k)).collect();
        Game { a, b, full, colors_a, colors_b, memo: HashMap::new(), budget }
    }

    /// Duplicator wins `rounds` rounds from the position pairing `va[i]` with `vb[i]`.
    pub fn duplicator_wins(&mut self, va: &[usize], vb: &[usize], rounds: usize) -> Result<bool> {
        assert_eq!(va.len(), vb.len());
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(va.len() + rounds);
        for (&x, &y) in va.iter().zip(vb) {
            if !self.consistent(&pairs, x, y, rounds) {
                return Ok(false);
            }
            pairs.push((x, y));
        }
        self.solve(&mut pairs, rounds)
    }

    fn consistent(&self, pairs: &[(usize, usize)], x: usize, y: usize, rest: usize) -> bool {
        if self.colors_a[rest][x] != self.colors_b[rest][y] {
            return false;
        }
        let (fa, fb) = (self.a.f(x), self.b.f(y));
        pairs.iter().all(|&(p, q)| {
            (x == p) == (y == q) && (fa == p) == (fb == q) && (self.a.f(p) == x) == (self.b.f(q) == y)
        })
    }

    fn solve(&mut self, pairs: &mut Vec<(usize, usize)>, m: usize) -> Result<bool> {
        if m == 0 {
            return Ok(true);
        }
        let mut key: Vec<(u32, u32)> = pairs.iter().map(|&(x, y)| (x as u32, y as u32)).collect();
        key.sort_unstable();
        key.dedup();
        key.push((u32::MAX, m as u32));
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        if self.memo.len() >= self.budget {
            return Err(Error::BudgetExceeded(format!("game search over {} states", self.budget)));
        }
        let won = self.spoiler_side(pairs, m, Side::A)? && self.spoiler_side(pairs, m, Side::B)?;
        self.memo.insert(key, won);
        Ok(won)
    }

    fn spoiler_side(&mut self, pairs: &mut Vec<(usize, usize)>, m: usize, side: Side) -> Result<bool> {
        let (s, o) = match side {
            Side::A => (self.a, self.b),
            Side::B => (self.b, self.a),
        };
        let pick = |p: &(usize, usize)| if side == Side::A { (p.0, p.1) } else { (p.1, p.0) };
        let ts: Vec<usize> = pairs.iter().map(|p| pick(p).0).collect();
        let to: Vec<usize> = pairs.iter().map(|p| pick(p).1).collect();
        for x in self.moves(s, &ts) {
            let responses = self.responses(s, o, &ts, &to, x);
            let mut answered = false;
            for y in responses {
                let (pa, pb) = if side == Side::A { (x, y) } else { (y, x) };
                if !self.consistent(pairs, pa, pb, m - 1) {
                    continue;
                }
                pairs.push((pa, pb));
                let r = self.solve(pairs, m - 1);
                pairs.pop();
                if r? {
                    answered = true;
                    break;
                }
            }
            if !answered {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Spoiler's candidate moves in `s`, up to interchangeable elements.
    fn moves(&self, s: &FiniteMapping, ts: &[usize]) -> Vec<usize> {
        let mut cands = Vec::new();
        if self.full {
            let comps = components(s);
            let touched: HashSet<usize> = ts.iter().map(|&t| comps.of[t]).collect();
            let mut classes = HashSet::new();
            for (c, members) in comps.members.iter().enumerate() {
                if touched.contains(&c) || classes.insert(comps.class[c]) {
                    cands.extend_from_slice(members);
                }
            }
        } else {
            for &t in ts {
                cands.push(s.f(t));
                cands.extend_from_slice(s.pre(t));
            }
            cands.sort_unstable();
            cands.dedup();
        }
        cands.retain(|x| !ts.contains(x));
        reduce_twins(s, ts, cands)
    }

    /// Duplicator's candidate answers in `o` to Spoiler playing `x` in `s`.
    fn responses(&self, s: &FiniteMapping, o: &FiniteMapping, ts: &[usize], to: &[usize], x: usize) -> Vec<usize> {
        if let Some(i) = ts.iter().position(|&t| s.f(t) == x) {
            return vec![o.f(to[i])];
        }
        let fx = s.f(x);
        let cands: Vec<usize> = if let Some(i) = ts.iter().position(|&t| t == fx) {
            o.pre(to[i]).iter().copied().filter(|y| !to.contains(y)).collect()
        } else if self.full {
            let comps = components(o);
            let touched: HashSet<usize> = to.iter().map(|&t| comps.of[t]).collect();
            let mut classes = HashSet::new();
            let mut out = Vec::new();
            for (c, members) in comps.members.iter().enumerate() {
                if touched.contains(&c) || classes.insert(comps.class[c]) {
                    out.extend(members.iter().copied().filter(|y| !to.contains(y)));
                }
            }
            out
        } else {
            Vec::new()
        };
        reduce_twins(o, to, cands)
    }
}

/// True when `x` is off every cycle and its subtree holds none of `ts`.
fn subtree_free(s: &FiniteMapping, ts: &[usize], x: usize) -> bool {
    let cp = s.cyclic_part();
    if cp.is_cyclic(x) {
        return false;
    }
    let hx = cp.height[x];
    ts.iter().all(|&t| cp.height[t] < hx || s.iterate(t, cp.height[t] - hx) != x)
}

fn reduce_twins(s: &FiniteMapping, ts: &[usize], cands: Vec<usize>) -> Vec<usize> {
    let tree = tree_codes(s);
    let mut seen = HashSet::new();
    cands
        .into_iter()
        .filter(|&x| !subtree_free(s, ts, x) || seen.insert((s.f(x), tree[x])))
        .collect()
}

/// Local game from tuples `va`, `vb`.
pub fn local_game(
    a: &FiniteMapping,
    va: &[usize],
    b: &FiniteMapping,
    vb: &[usize],
    rounds: usize,
    budget: usize,
) -> Result<bool> {
    if !a.same_signature(b) {
        return Ok(false);
    }
    Game::new(a, b, rounds, false, budget).duplicator_wins(va, vb, rounds)
}

/// Full game from tuples `va`, `vb` (empty tuples decide elementary equivalence up to `rounds`).
pub fn full_game(
    a: &FiniteMapping,
    va: &[usize],
    b: &FiniteMapping,
    vb: &[usize],
    rounds: usize,
    budget: usize,
) -> Result<bool> {
    if !a.same_signature(b) {
        return Err(Error::SignatureMismatch);
    }
    Game::new(a, b, rounds, true, budget).duplicator_wins(va, vb, rounds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn local(a: &FiniteMapping, v: usize, b: &FiniteMapping, w: usize, r: usize) -> bool {
        local_game(a, &[v], b, &[w], r, DEFAULT_STATE_BUDGET).unwrap()
    }

    // Unreduced local game, used as an oracle for the reductions.
    fn naive_local(a: &FiniteMapping, b: &FiniteMapping, pairs: &mut Vec<(usize, usize)>, m: usize) -> bool {
        let ok = |pairs: &[(usize, usize)], x: usize, y: usize| -> bool {
            (a.f(x) == x) == (b.f(y) == y)
                && a.mark_words(x) == b.mark_words(y)
                && pairs.iter().all(|&(p, q)| {
                    (x == p) == (y == q) && (a.f(x) == p) == (b.f(y) == q) && (a.f(p) == x) == (b.f(q) == y)
                })
        };
        if m == 0 {
            return true;
        }
        for side in 0..2 {
            let (s, o) = if side == 0 { (a, b) } else { (b, a) };
            let mut xs: Vec<usize> = Vec::new();
            for &(p, q) in pairs.iter() {
                let t = if side == 0 { p } else { q };
                xs.push(s.f(t));
                xs.extend_from_slice(s.pre(t));
            }
            for x in xs {
                let mut found = false;
                for y in 0..o.len() {
                    let (pa, pb) = if side == 0 { (x, y) } else { (y, x) };
                    let adjacent = pairs.iter().any(|&(p, q)| {
                        let t = if side == 0 { q } else { p };
                        o.f(t) == y || o.f(y) == t
                    });
                    if !adjacent || !ok(pairs, pa, pb) {
                        continue;
                    }
                    pairs.push((pa, pb));
                    let w = naive_local(a, b, pairs, m - 1);
                    pairs.pop();
                    if w {
                        found = true;
                        break;
                    }
                }
                if !found {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn cycles_five_and_seven() {
        let c5 = FiniteMapping::cycle(5);
        let c7 = FiniteMapping::cycle(7);
        assert!(local(&c5, 0, &c7, 0, 1));
        assert!(local(&c5, 0, &c7, 0, 3));
        assert!(!local(&c5, 0, &c7, 0, 4));
    }

    #[test]
    fn star_center_and_leaf() {
        let s = FiniteMapping::star(3);
        assert!(local(&s, 1, &s, 2, 3));
        assert!(!local(&s, 0, &s, 1, 1));
        assert!(!local(&s, 0, &s, 1, 0));
    }

    #[test]
    fn full_game_counts_leaves_up_to_rounds() {
        let s100 = FiniteMapping::star(100);
        let s2 = FiniteMapping::star(2);
        let s1 = FiniteMapping::star(1);
        assert!(full_game(&s100, &[], &s2, &[], 2, DEFAULT_STATE_BUDGET).unwrap());
        assert!(!full_game(&s2, &[], &s1, &[], 2, DEFAULT_STATE_BUDGET).unwrap());
        assert!(!full_game(&s100, &[], &s2, &[], 3, DEFAULT_STATE_BUDGET).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let a = FiniteMapping::cycle(9);
        let b = FiniteMapping::cycle(11);
        let r = full_game(&a, &[], &b, &[], 4, 3);
        assert!(matches!(r, Err(Error::BudgetExceeded(_))));
    }

    use proptest::prelude::*;

    fn arb(max_n: usize) -> impl Strategy<Value = FiniteMapping> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(0..n, n).prop_map(|img| FiniteMapping::unmarked(img).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn reductions_agree_with_naive_search(a in arb(7), b in arb(7), r in 0usize..3) {
            let v = 0;
            let w = 0;
            let fast = local(&a, v, &b, w, r);
            let init_ok = a.mark_words(v) == b.mark_words(w) && (a.f(v) == v) == (b.f(w) == w);
            let slow = init_ok && naive_local(&a, &b, &mut vec![(v, w)], r);
            prop_assert_eq!(fast, slow);
        }
    }
}
