//! Product with a directed `m`-cycle, marking the cycle index and the original type.

use super::{Element, FiniteMapping, Signature};
use crate::error::{Error, Result};
use crate::types::TypeSession;

/// Name of the predicate marking cycle index `i`.
pub fn u_name(i: usize) -> String {
    format!("U{i}")
}

/// Cycle length recorded in a type predicate name `T<idx>z<len>`, if any.
pub fn cut_predicate_cycle(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('T')?;
    let (idx, len) = rest.split_once('z')?;
    if idx.is_empty() || !idx.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    len.parse().ok().filter(|&l: &usize| l > 0)
}

pub(crate) fn is_type_predicate(name: &str) -> bool {
    name.strip_prefix('T').is_some_and(|rest| {
        let idx = rest.split_once('z').map_or(rest, |(i, _)| i);
        !idx.is_empty() && idx.bytes().all(|b| b.is_ascii_digit())
    }) && (cut_predicate_cycle(name).is_some() || !name.contains('z'))
}

pub(crate) fn u_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('U')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// `F × Z_m` with `(x, i) ↦ (f(x), i+1 mod m)`; element `(x, i)` gets id `x·m + i`.
///
/// Adds `U0..U{m-1}` for the second coordinate and one `T<idx>` predicate per rank
/// `type_rank` type of `F`, numbered by first appearance. Types lying on a cycle of
/// length `l ≤ type_rank + 1` are named `T<idx>z<l>`, so the cycle can be restored
/// from the marks alone.
pub fn cycle_cut_product(f: &FiniteMapping, m: usize, type_rank: usize, session: &TypeSession) -> Result<FiniteMapping> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("cut length must be at least 2, got {m}")));
    }
    let n = f.len();
    let types = session.types_of(f, type_rank)?;
    let cp = f.cyclic_part();
    let mut first: Vec<(u32, usize)> = Vec::new();
    let mut type_index = Vec::with_capacity(n);
    for (x, t) in types.iter().enumerate() {
        let idx = match first.iter().position(|&(id, _)| id == t.id()) {
            Some(i) => i,
            None => {
                first.push((t.id(), x));
                first.len() - 1
            }
        };
        type_index.push(idx);
    }
    let mut names: Vec<String> = f.signature().predicates().to_vec();
    names.extend((0..m).map(u_name));
    let t_base = names.len();
    for (idx, &(_, x)) in first.iter().enumerate() {
        let len = cp.cycle_len[x];
        names.push(if len > 0 && len <= type_rank + 1 { format!("T{idx}z{len}") } else { format!("T{idx}") });
    }
    let sig = Signature::new(f.signature().function(), names)?;

    let image: Vec<Element> = (0..n * m).map(|id| f.f(id / m) * m + (id % m + 1) % m).collect();
    let mut marks: Vec<Vec<Element>> = f.mark_sets().into_iter().map(|set| {
        set.iter().flat_map(|&x| (0..m).map(move |i| x * m + i)).collect()
    }).collect();
    marks.extend((0..m).map(|i| (0..n).map(|x| x * m + i).collect()));
    marks.resize(t_base + first.len(), Vec::new());
    for x in 0..n {
        marks[t_base + type_index[x]].extend((0..m).map(|i| x * m + i));
    }
    FiniteMapping::new(sig, image, marks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle_lengths(m: &FiniteMapping) -> Vec<usize> {
        let cp = m.cyclic_part();
        let mut out: Vec<usize> = Vec::new();
        let mut seen = vec![false; m.len()];
        for v in cp.cyclic_elements() {
            if !seen[v] {
                let mut w = v;
                loop {
                    seen[w] = true;
                    w = m.f(w);
                    if w == v {
                        break;
                    }
                }
                out.push(cp.cycle_len[v]);
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn three_cycle_times_six() {
        let s = TypeSession::new();
        let p = cycle_cut_product(&FiniteMapping::cycle(3), 6, 2, &s).unwrap();
        assert_eq!(p.len(), 18);
        assert_eq!(cycle_lengths(&p), vec![6, 6, 6]);
        assert!(p.signature().predicates().contains(&"T0z3".to_string()));
    }

    #[test]
    fn fixed_point_times_two() {
        let s = TypeSession::new();
        let p = cycle_cut_product(&FiniteMapping::fixed_point(), 2, 1, &s).unwrap();
        assert_eq!(p.image(), &[1, 0]);
        assert_eq!(cut_predicate_cycle(&p.signature().predicates()[2]), Some(1));
    }

    #[test]
    fn u_marks_advance_along_f() {
        let s = TypeSession::new();
        let g = FiniteMapping::unmarked(vec![1, 2, 2, 0, 3]).unwrap();
        let m = 4;
        let p = cycle_cut_product(&g, m, 1, &s).unwrap();
        for v in 0..p.len() {
            let us: Vec<usize> = (0..m).filter(|&i| p.has_mark(v, g.signature().len() + i)).collect();
            assert_eq!(us.len(), 1);
            assert!(p.has_mark(p.f(v), g.signature().len() + (us[0] + 1) % m));
        }
        assert!(cycle_lengths(&p).iter().all(|&l| l % m == 0));
    }

    #[test]
    fn predicate_name_parsing() {
        assert_eq!(cut_predicate_cycle("T12z3"), Some(3));
        assert_eq!(cut_predicate_cycle("T12"), None);
        assert_eq!(cut_predicate_cycle("Tz3"), None);
        assert!(is_type_predicate("T4") && is_type_predicate("T4z2"));
        assert!(!is_type_predicate("Tx") && !is_type_predicate("U1"));
        assert_eq!(u_index("U07"), Some(7));
        assert_eq!(u_index("U"), None);
    }
}
