//! Closing short cycles that the cycle-cut product unrolled.

use crate::error::{Error, Result};
use crate::structure::{cut_predicate_cycle, is_type_predicate, u_index, u_name, FiniteMapping};

/// An element marked `U_i` and `T..z<l>` with `(i+1) mod l = 0` is sent `l-1` steps
/// back along its cycle-marked preimages, so every block of `l` consecutive cut
/// indices closes into an `l`-cycle. Cut and type predicates are dropped.
pub fn rewire(f: &FiniteMapping, cut_length: usize, clean_rank: usize) -> Result<FiniteMapping> {
    let sig = f.signature();
    let mut u_pred = Vec::with_capacity(cut_length);
    for i in 0..cut_length {
        let name = u_name(i);
        u_pred.push(sig.index_of(&name).ok_or(Error::MissingCutPredicates(name))?);
    }
    let n = f.len();
    let mut level = vec![usize::MAX; n];
    for (i, &p) in u_pred.iter().enumerate() {
        for v in f.marked(p) {
            if level[v] != usize::MAX {
                return Err(Error::MissingCutPredicates(format!("element {v} carries two cut indices")));
            }
            level[v] = i;
        }
    }
    if let Some(v) = level.iter().position(|&l| l == usize::MAX) {
        return Err(Error::MissingCutPredicates(format!("element {v} carries no cut index")));
    }

    let mut cycle = vec![0usize; n];
    for (p, name) in sig.predicates().iter().enumerate() {
        let Some(l) = cut_predicate_cycle(name) else { continue };
        if cut_length % l != 0 {
            return Err(Error::InvalidArgument(format!("cycle length {l} does not divide {cut_length}")));
        }
        if l > clean_rank + 1 {
            return Err(Error::InvalidArgument(format!("`{name}` records a cycle longer than rank {clean_rank} sees")));
        }
        for v in f.marked(p) {
            if cycle[v] != 0 {
                return Err(Error::InvalidArgument(format!("element {v} carries two cycle marks")));
            }
            cycle[v] = l;
        }
    }

    let mut image = f.image().to_vec();
    for v in 0..n {
        let l = cycle[v];
        if l == 0 || (level[v] + 1) % l != 0 {
            continue;
        }
        let mut w = v;
        for _ in 1..l {
            let back: Vec<usize> = f.pre(w).iter().copied().filter(|&u| cycle[u] != 0).collect();
            if back.len() != 1 {
                return Err(Error::InvalidArgument(format!("element {w} has {} cycle-marked preimages", back.len())));
            }
            w = back[0];
        }
        image[v] = w;
    }
    let dropped: Vec<String> = sig
        .predicates()
        .iter()
        .filter(|name| u_index(name).is_some() || is_type_predicate(name))
        .cloned()
        .collect();
    f.with_image(image)?.drop_predicates(&dropped)
}
