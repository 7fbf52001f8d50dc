//! Terminal types, hub types, and gluing copies of a realized piece onto a base.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::structure::{Element, FiniteMapping};
use crate::types::{LocalType, TypeMeasure, TypeSession};

/// Positive-mass types whose rank-`r` image type has zero projected mass.
pub fn find_terminals(mu: &TypeMeasure, r: usize, session: &TypeSession) -> Result<Vec<LocalType>> {
    if mu.rank() < r + 1 {
        return Err(Error::RankTooLow { needed: r + 1, got: mu.rank() });
    }
    let projected = mu.project(r, session)?;
    let mut out = Vec::new();
    for t in mu.types() {
        let w = t.witness();
        let image = session.local_type(w, w.f(t.root()), r)?;
        if projected.mass_of(&image).is_zero() {
            out.push(t.clone());
        }
    }
    Ok(out)
}

/// For each terminal, the pool type of lowest id with more than `r` preimages of the
/// terminal's rank-`r` projection.
pub fn find_hubs(
    pool: &[LocalType],
    terminals: &[LocalType],
    r: usize,
    session: &TypeSession,
) -> Result<Vec<(LocalType, LocalType)>> {
    let mut out = Vec::with_capacity(terminals.len());
    for term in terminals {
        let t = session.project(term, r)?;
        let mut best: Option<&LocalType> = None;
        for h in pool {
            if h.rank() < 2 * r + 1 || best.is_some_and(|b| b.id() <= h.id()) {
                continue;
            }
            if session.adm_minus(h, &t)? > r {
                best = Some(h);
            }
        }
        let hub = best.ok_or(Error::NoHubAvailable(term.id() as usize))?;
        out.push((term.clone(), hub.clone()));
    }
    Ok(out)
}

/// `E ⊎ F2 × [n_close] × [n_away]`. Copy `(i, j)` of `F2` occupies the block after `E`
/// numbered `i·n_away + j`; inside it terminal `v` maps to `hubs[v][i]`, everything
/// else keeps the copy's own image.
pub fn merge(
    e: &FiniteMapping,
    f2: &FiniteMapping,
    hubs: &BTreeMap<Element, Vec<Element>>,
    n_close: usize,
    n_away: usize,
    r: usize,
) -> Result<FiniteMapping> {
    if !e.same_signature(f2) {
        return Err(Error::SignatureMismatch);
    }
    if n_close == 0 || n_away == 0 {
        return Err(Error::InvalidArgument("copy counts must be positive".into()));
    }
    let mut used = BTreeSet::new();
    for (&v, hs) in hubs {
        f2.check_element(v)?;
        if hs.len() < n_close {
            return Err(Error::InsufficientHubs(v));
        }
        for &h in &hs[..n_close] {
            e.check_element(h)?;
            used.insert(h);
        }
    }
    let used: Vec<Element> = used.into_iter().collect();
    for (x, &a) in used.iter().enumerate() {
        let dist = e.distances_from(a);
        for &b in &used[x + 1..] {
            if dist[b].is_some_and(|d| d <= 2 * r) {
                return Err(Error::HubsTooClose(a, b));
            }
        }
    }
    let base = e.len();
    let m = f2.len();
    let mut out = e.disjoint_union(&f2.repeat(n_close * n_away))?;
    if hubs.is_empty() {
        return Ok(out);
    }
    let mut image = out.image().to_vec();
    for i in 0..n_close {
        for j in 0..n_away {
            let offset = base + (i * n_away + j) * m;
            for (&v, hs) in hubs {
                image[offset + v] = hs[i];
            }
        }
    }
    out = out.with_image(image)?;
    Ok(out)
}
