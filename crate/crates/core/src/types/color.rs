//! Refinement colors. `color(F, k)[v]` is a process-wide id such that equal rank-k
//! local types always get equal colors; the converse need not hold, so colors only
//! bucket candidates before game search.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::structure::{Canonizer, FiniteMapping};

fn interner() -> &'static Mutex<HashMap<Vec<u64>, u32>> {
    static TABLE: OnceLock<Mutex<HashMap<Vec<u64>, u32>>> = OnceLock::new();
    TABLE.get_or_init(Default::default)
}

fn intern_all(keys: Vec<Vec<u64>>) -> Vec<u32> {
    let mut table = interner().lock().unwrap();
    keys.into_iter()
        .map(|k| {
            let next = table.len() as u32;
            *table.entry(k).or_insert(next)
        })
        .collect()
}

/// Lazily filled per-structure data used by the game solvers.
#[derive(Default)]
pub struct StructureCaches {
    colors: Mutex<Vec<Arc<Vec<u32>>>>,
    tree: OnceLock<Vec<u32>>,
    components: OnceLock<Components>,
}

pub(crate) struct Components {
    pub of: Vec<usize>,
    pub members: Vec<Vec<usize>>,
    /// Isomorphism class per component, local to this structure.
    pub class: Vec<u32>,
}

fn base_key(m: &FiniteMapping, v: usize) -> Vec<u64> {
    let mut key = vec![0, (m.f(v) == v) as u64];
    key.extend_from_slice(m.mark_words(v));
    key
}

fn step_key(m: &FiniteMapping, prev: &[u32], k: usize, v: usize) -> Vec<u64> {
    let w = m.f(v);
    let cyc = m.cyclic_part().cycle_len[v];
    let mut pre: Vec<u64> = m.pre(v).iter().filter(|&&u| u != v).map(|&u| prev[u] as u64).collect();
    let count = pre.len().min(k) as u64;
    pre.sort_unstable();
    pre.dedup();
    let mut key = vec![
        1,
        k as u64,
        prev[v] as u64,
        prev[w] as u64,
        (m.f(w) == v) as u64,
        count,
        if cyc <= k + 1 { cyc as u64 } else { 0 },
    ];
    key.extend(pre);
    key
}

pub(crate) fn colors(m: &FiniteMapping, k: usize) -> Arc<Vec<u32>> {
    let caches = &m.inner().caches;
    let mut levels = caches.colors.lock().unwrap();
    if levels.is_empty() {
        let keys = (0..m.len()).map(|v| base_key(m, v)).collect();
        levels.push(Arc::new(intern_all(keys)));
    }
    while levels.len() <= k {
        let j = levels.len();
        let prev = levels[j - 1].clone();
        let keys = (0..m.len()).map(|v| step_key(m, &prev, j, v)).collect();
        levels.push(Arc::new(intern_all(keys)));
    }
    levels[k].clone()
}

pub(crate) fn tree_codes(m: &FiniteMapping) -> &[u32] {
    m.inner().caches.tree.get_or_init(|| Canonizer::new().tree_codes(m))
}

pub(crate) fn components(m: &FiniteMapping) -> &Components {
    m.inner().caches.components.get_or_init(|| {
        let mut canon = Canonizer::new();
        let codes = canon.component_codes(m);
        let of = m.component_ids();
        let members = m.connected_components();
        let mut seen: HashMap<Vec<u32>, u32> = HashMap::new();
        let class = codes
            .into_iter()
            .map(|c| {
                let next = seen.len() as u32;
                *seen.entry(c).or_insert(next)
            })
            .collect();
        Components { of, members, class }
    })
}
