//! The standard `r`-approximation: prune equivalent siblings and duplicate components
//! down to `r` representatives each.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::structure::{Canonizer, Element, FiniteMapping};

/// Classes of tree nodes under the layered relation: same marks, and the same children
/// classes counted up to `r`. Cyclic elements get a class too (for their attached tree).
fn sibling_classes(f: &FiniteMapping, r: usize) -> Vec<u32> {
    let cp = f.cyclic_part();
    let n = f.len();
    let mut order: Vec<Element> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(cp.height[v]));
    let mut canon = Canonizer::new();
    let mut class = vec![u32::MAX; n];
    for v in order {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for &u in f.pre(v) {
            if !cp.is_cyclic(u) {
                *counts.entry(class[u]).or_default() += 1;
            }
        }
        let children = counts.into_iter().flat_map(|(c, k)| std::iter::repeat(c).take(k.min(r))).collect();
        class[v] = canon.intern(f.mark_words(v), children);
    }
    class
}

pub fn standard_r_approximation(f: &FiniteMapping, r: usize) -> Result<FiniteMapping> {
    let cp = f.cyclic_part();
    let n = f.len();
    let class = sibling_classes(f, r);

    // Walk down from the cycles; a tree node survives when its parent does and it is
    // among the r lowest ids of its class below that parent.
    let mut keep: Vec<bool> = (0..n).map(|v| cp.is_cyclic(v)).collect();
    let mut frontier: Vec<Element> = (0..n).filter(|&v| keep[v]).collect();
    while let Some(v) = frontier.pop() {
        let mut seen: BTreeMap<u32, usize> = BTreeMap::new();
        let mut kids: Vec<Element> = f.pre(v).iter().copied().filter(|&u| !cp.is_cyclic(u)).collect();
        kids.sort_unstable();
        for u in kids {
            let c = seen.entry(class[u]).or_default();
            if *c < r {
                *c += 1;
                keep[u] = true;
                frontier.push(u);
            }
        }
    }
    let kept: Vec<Element> = (0..n).filter(|&v| keep[v]).collect();
    let pruned = f.restrict(&kept)?;

    let mut canon = Canonizer::new();
    let codes = canon.component_codes(&pruned);
    let comps = pruned.connected_components();
    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by_key(|&c| comps[c][0]);
    let mut copies: BTreeMap<&Vec<u32>, usize> = BTreeMap::new();
    let mut survivors = Vec::new();
    for c in order {
        let k = copies.entry(&codes[c]).or_default();
        // A structure needs at least one component, even at rank 0.
        if *k < r.max(1) {
            *k += 1;
            survivors.extend_from_slice(&comps[c]);
        }
    }
    if survivors.len() == pruned.len() {
        return Ok(pruned);
    }
    pruned.restrict(&survivors)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::equivalence::ef_equivalent;
    use crate::sample::random_mapping;
    use crate::structure::isomorphic;

    #[test]
    fn star_keeps_two_leaves() {
        let star = FiniteMapping::star(100);
        let out = standard_r_approximation(&star, 2).unwrap();
        assert_eq!(out.len(), 3);
        assert!(isomorphic(&out, &FiniteMapping::star(2)));
        assert!(ef_equivalent(&star, &out, 2).unwrap());
    }

    #[test]
    fn duplicate_cycles_pruned() {
        let five = FiniteMapping::cycle(3).repeat(5);
        let out = standard_r_approximation(&five, 2).unwrap();
        assert!(isomorphic(&out, &FiniteMapping::cycle(3).repeat(2)));
        assert!(ef_equivalent(&five, &out, 2).unwrap());
    }

    #[test]
    fn minimal_input_unchanged() {
        let c3 = FiniteMapping::cycle(3);
        assert_eq!(standard_r_approximation(&c3, 3).unwrap(), c3);
    }

    #[test]
    fn zero_rank_keeps_one_bare_component() {
        let f = FiniteMapping::star(4).repeat(3);
        let out = standard_r_approximation(&f, 0).unwrap();
        assert_eq!(out, FiniteMapping::fixed_point());
    }

    #[test]
    fn marks_separate_siblings() {
        let star = FiniteMapping::star(5).mark_element(1, "P").unwrap();
        let out = standard_r_approximation(&star, 1).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out.marked_by_name("P").unwrap().len(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn equivalent_smaller_and_idempotent(seed in 0u64..10_000, n in 1usize..40, r in 1usize..3) {
            let f = random_mapping(n, seed, &[]).unwrap();
            let out = standard_r_approximation(&f, r).unwrap();
            prop_assert!(out.len() <= f.len());
            prop_assert_eq!(standard_r_approximation(&out, r).unwrap(), out.clone());
            prop_assert!(ef_equivalent(&f, &out, r).unwrap());
        }

        #[test]
        fn duplication_does_not_grow_output(seed in 0u64..10_000, n in 1usize..30, r in 1usize..3) {
            let f = random_mapping(n, seed, &[]).unwrap();
            let once = standard_r_approximation(&f.repeat(r), r).unwrap();
            let more = standard_r_approximation(&f.repeat(r + 1), r).unwrap();
            prop_assert!(isomorphic(&once, &more));
        }

        #[test]
        fn higher_rank_core_compresses_to_lower(seed in 0u64..10_000, n in 1usize..30, r in 1usize..3) {
            let f = random_mapping(n, seed, &[]).unwrap();
            let hi = standard_r_approximation(&f, r + 1).unwrap();
            let lo = standard_r_approximation(&f, r).unwrap();
            prop_assert!(isomorphic(&standard_r_approximation(&hi, r).unwrap(), &lo));
        }
    }
}
