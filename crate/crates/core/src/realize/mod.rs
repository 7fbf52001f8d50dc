//! Building a finite mapping whose local type statistics are prescribed by a rational
//! type measure, checking such a mapping against a type assignment, and the steps
//! that turn realized pieces back into an approximation of the input.

mod merge;
mod pipeline;
mod rewire;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::fmtp::{analyze, check_realizability_preconditions};
use crate::rational::lcm_denominators;
use crate::structure::{Element, FiniteMapping};
use crate::types::{LocalType, TypeMeasure, TypeSession};

pub use merge::{find_hubs, find_terminals, merge};
pub use pipeline::{pipeline, PipelineConfig, PipelineReport, Schedule, StageReport};
pub use rewire::rewire;

/// Largest domain `realize` will build.
pub const MAX_REALIZED: usize = 10_000_000;

#[derive(Clone, Debug)]
pub struct Realization {
    pub mapping: FiniteMapping,
    /// Index into the measure's entries for every element.
    pub zeta: Vec<usize>,
}

impl Realization {
    pub fn upsilon(&self, mu: &TypeMeasure) -> Vec<LocalType> {
        self.zeta.iter().map(|&k| mu.entries()[k].0.clone()).collect()
    }
}

/// Realize `μ̂` at rank `r`, refusing roots on cycles of length `2..=μ̂.rank()`.
pub fn realize(mu: &TypeMeasure, r: usize, multiplier: usize, session: &TypeSession) -> Result<Realization> {
    realize_with(mu, r, multiplier, mu.rank(), session)
}

struct Class {
    cands: Vec<Element>,
    adm: Vec<usize>,
    count: Vec<usize>,
}

/// Greedy construction of `g`. Element `i` of type `τ` goes to a `j` whose rank-`r`
/// type is the image type of `τ`; `j` is eligible while it has fewer than
/// `adm⁻(ζ(j), π_r τ)` such preimages, or always when that value is at least `r`.
/// Targets still short of `min(r, adm⁻)` go first, then fewest preimages, then id.
pub fn realize_with(
    mu: &TypeMeasure,
    r: usize,
    multiplier: usize,
    cut_length: usize,
    session: &TypeSession,
) -> Result<Realization> {
    if multiplier == 0 {
        return Err(Error::InvalidArgument("multiplier must be at least 1".into()));
    }
    let report = check_realizability_preconditions(mu, cut_length, r, session)?;
    if let Some(why) = report.failure() {
        return Err(Error::PreconditionFailed(why));
    }
    let sig = mu.entries()[0].0.witness().signature().clone();
    if mu.types().any(|t| t.witness().signature() != &sig) {
        return Err(Error::SignatureMismatch);
    }
    let base = lcm_denominators(mu.entries().iter().map(|(_, q)| q));
    let n = (base * BigInt::from(multiplier))
        .to_usize()
        .filter(|&n| n <= MAX_REALIZED)
        .ok_or_else(|| Error::BudgetExceeded(format!("realization larger than {MAX_REALIZED}")))?;

    let mut zeta = Vec::with_capacity(n);
    for (k, (_, q)) in mu.entries().iter().enumerate() {
        let c = (q * BigInt::from(n)).to_integer().to_usize().expect("bounded by n");
        zeta.extend(std::iter::repeat(k).take(c));
    }

    let an = analyze(mu, r, session)?;
    let adm: HashMap<(usize, usize), usize> =
        an.pre.iter().enumerate().flat_map(|(k, p)| p.iter().map(move |&(t, c)| ((k, t), c))).collect();
    let mut by_proj: HashMap<usize, Vec<Element>> = HashMap::new();
    for (j, &k) in zeta.iter().enumerate() {
        by_proj.entry(an.proj[k]).or_default().push(j);
    }

    let mut classes: HashMap<(usize, usize), Class> = HashMap::new();
    let mut g = Vec::with_capacity(n);
    for (i, &k) in zeta.iter().enumerate() {
        let (t1, t2) = (an.proj[k], an.image[k]);
        let class = classes.entry((t1, t2)).or_insert_with(|| {
            let cands = by_proj.get(&t2).cloned().unwrap_or_default();
            let adm = cands.iter().map(|&j| adm.get(&(zeta[j], t1)).copied().unwrap_or(0)).collect();
            let count = vec![0; cands.len()];
            Class { cands, adm, count }
        });
        let mut best: Option<((bool, usize, Element), usize)> = None;
        for (x, &j) in class.cands.iter().enumerate() {
            let (a, c) = (class.adm[x], class.count[x]);
            if a < r && c >= a {
                continue;
            }
            let key = (c >= a.min(r), c, j);
            if best.as_ref().map_or(true, |(b, _)| key < *b) {
                best = Some((key, x));
            }
        }
        let Some((_, x)) = best else {
            return Err(Error::Stuck {
                element: i,
                diagnostics: format!(
                    "support entry {k}: no eligible target among {} elements of the image type",
                    class.cands.len()
                ),
            });
        };
        class.count[x] += 1;
        g.push(class.cands[x]);
    }

    // Post hoc: capped preimage counts must match adm⁻ everywhere.
    let mut got: HashMap<(Element, usize), usize> = HashMap::new();
    for (&(t1, _), class) in &classes {
        for (x, &j) in class.cands.iter().enumerate() {
            if class.count[x] > 0 {
                *got.entry((j, t1)).or_default() += class.count[x];
            }
        }
    }
    for (j, &k) in zeta.iter().enumerate() {
        for &(t, a) in &an.pre[k] {
            let c = got.get(&(j, t)).copied().unwrap_or(0);
            if a.min(r) != c.min(r) {
                return Err(Error::Stuck {
                    element: j,
                    diagnostics: format!("preimage count {c} of type index {t} disagrees with adm- {a}"),
                });
            }
        }
    }
    for (&(j, t), &c) in &got {
        if r > 0 && c > 0 && !an.pre[zeta[j]].iter().any(|&(u, _)| u == t) {
            return Err(Error::Stuck { element: j, diagnostics: format!("unexpected preimages of type index {t}") });
        }
    }

    let marks: Vec<Vec<Element>> = (0..sig.len())
        .map(|p| (0..n).filter(|&i| {
            let t = &mu.entries()[zeta[i]].0;
            t.witness().has_mark(t.root(), p)
        }).collect())
        .collect();
    Ok(Realization { mapping: FiniteMapping::new(sig, g, marks)?, zeta })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpsilonReport {
    pub marks: bool,
    pub acyclic: bool,
    pub propagate: bool,
    pub back: bool,
}

impl UpsilonReport {
    pub fn holds(&self) -> bool {
        self.marks && self.acyclic && self.propagate && self.back
    }
}

/// Local conditions under which every `v` has rank-`r` type `π_r(Υ(v))`: marks agree,
/// no cycles of length `2..=cut_length`, images carry the forced type, and capped
/// preimage counts match `adm⁻`.
pub fn verify_upsilon(
    f: &FiniteMapping,
    upsilon: &[LocalType],
    r: usize,
    cut_length: usize,
    session: &TypeSession,
) -> Result<UpsilonReport> {
    if upsilon.len() != f.len() {
        return Err(Error::InvalidArgument(format!("{} types for {} elements", upsilon.len(), f.len())));
    }
    for t in upsilon {
        if t.rank() < 2 * r + 1 {
            return Err(Error::RankTooLow { needed: 2 * r + 1, got: t.rank() });
        }
    }
    let marks = upsilon.iter().enumerate().all(|(v, t)| {
        t.witness().same_signature(f) && t.witness().mark_words(t.root()) == f.mark_words(v)
    });

    let short = |len: usize| len > 1 && len <= cut_length;
    let cp = f.cyclic_part();
    let acyclic = (0..f.len()).all(|v| !short(cp.cycle_len[v]))
        && upsilon.iter().all(|t| !short(t.witness().cyclic_part().cycle_len[t.root()]));

    let mut proj: HashMap<u32, LocalType> = HashMap::new();
    let mut image: HashMap<u32, LocalType> = HashMap::new();
    let mut pre: HashMap<u32, Vec<(LocalType, usize)>> = HashMap::new();
    for t in upsilon {
        if proj.contains_key(&t.id()) {
            continue;
        }
        proj.insert(t.id(), session.project(t, r)?);
        let w = t.witness();
        image.insert(t.id(), session.local_type(w, w.f(t.root()), r)?);
        pre.insert(t.id(), session.preimage_types(t, r)?);
    }
    let propagate = (0..f.len()).all(|v| image[&upsilon[v].id()] == proj[&upsilon[f.f(v)].id()]);

    let mut back = true;
    'outer: for v in 0..f.len() {
        let mut counts: Vec<(u32, usize)> = Vec::new();
        for &u in f.pre(v) {
            let id = proj[&upsilon[u].id()].id();
            match counts.iter_mut().find(|(t, _)| *t == id) {
                Some((_, c)) => *c += 1,
                None => counts.push((id, 1)),
            }
        }
        let expected = &pre[&upsilon[v].id()];
        for (t, a) in expected {
            let c = counts.iter().find(|(id, _)| *id == t.id()).map_or(0, |&(_, c)| c);
            if (*a).min(r) != c.min(r) {
                back = false;
                break 'outer;
            }
        }
        for &(id, c) in &counts {
            if r > 0 && c > 0 && !expected.iter().any(|(t, _)| t.id() == id) {
                back = false;
                break 'outer;
            }
        }
    }
    Ok(UpsilonReport { marks, acyclic, propagate, back })
}
