//! Isomorphism codes for rooted trees and whole components.

use std::collections::HashMap;

use super::{Element, FiniteMapping};

/// Interns (marks, sorted child codes) pairs; codes are comparable only within one canonizer.
#[derive(Default)]
pub struct Canonizer {
    table: HashMap<(Vec<u64>, Vec<u32>), u32>,
}

impl Canonizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, marks: &[u64], mut children: Vec<u32>) -> u32 {
        children.sort_unstable();
        let next = self.table.len() as u32;
        *self.table.entry((marks.to_vec(), children)).or_insert(next)
    }

    /// Per element: the code of the tree hanging below it. For cyclic elements the
    /// cyclic preimage is left out, so the code describes the attached tree only.
    pub fn tree_codes(&mut self, m: &FiniteMapping) -> Vec<u32> {
        let cp = m.cyclic_part();
        let n = m.len();
        let mut order: Vec<Element> = (0..n).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(cp.height[v]));
        let mut code = vec![u32::MAX; n];
        for v in order {
            let children = m
                .pre(v)
                .iter()
                .filter(|&&u| !cp.is_cyclic(u))
                .map(|&u| code[u])
                .collect();
            code[v] = self.intern(m.mark_words(v), children);
        }
        code
    }

    /// Per component (ordered as in `connected_components`): the lexicographically
    /// least rotation of the tree codes along its cycle.
    pub fn component_codes(&mut self, m: &FiniteMapping) -> Vec<Vec<u32>> {
        let tree = self.tree_codes(m);
        let cp = m.cyclic_part();
        m.connected_components()
            .iter()
            .map(|comp| {
                let start = *comp.iter().find(|&&v| cp.is_cyclic(v)).expect("every component has a cycle");
                let mut seq = Vec::with_capacity(cp.cycle_len[start]);
                let mut v = start;
                loop {
                    seq.push(tree[v]);
                    v = m.f(v);
                    if v == start {
                        break;
                    }
                }
                least_rotation(&seq)
            })
            .collect()
    }

    /// Sorted multiset of component codes.
    pub fn form(&mut self, m: &FiniteMapping) -> Vec<Vec<u32>> {
        let mut codes = self.component_codes(m);
        codes.sort();
        codes
    }
}

pub(crate) fn least_rotation(seq: &[u32]) -> Vec<u32> {
    let l = seq.len();
    (0..l)
        .map(|s| seq[s..].iter().chain(&seq[..s]).copied().collect::<Vec<u32>>())
        .min()
        .unwrap_or_default()
}

/// Canonical form against a fresh canonizer; only equal inputs up to isomorphism
/// produce equal forms when computed with the same canonizer, so prefer `isomorphic`.
pub fn canonical_form(m: &FiniteMapping, canon: &mut Canonizer) -> Vec<Vec<u32>> {
    canon.form(m)
}

pub fn isomorphic(a: &FiniteMapping, b: &FiniteMapping) -> bool {
    if a.len() != b.len() || !a.same_signature(b) {
        return false;
    }
    let mut canon = Canonizer::new();
    canon.form(a) == canon.form(b)
}
