//! Rank-r local types, represented by pointed witnesses and compared by the local game.

mod color;
pub mod game;

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{ratio, Rational};
use crate::structure::{Element, FiniteMapping};

pub(crate) use color::StructureCaches;
pub use game::DEFAULT_STATE_BUDGET;

pub(crate) fn colors_at(m: &FiniteMapping, k: usize) -> std::sync::Arc<Vec<u32>> {
    color::colors(m, k)
}

/// A local type: rank plus a pointed witness. `id` is assigned by the session that
/// produced it, so only compare types coming from one session.
#[derive(Clone)]
pub struct LocalType {
    rank: usize,
    witness: FiniteMapping,
    root: Element,
    id: u32,
}

impl LocalType {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn witness(&self) -> &FiniteMapping {
        &self.witness
    }

    pub fn root(&self) -> Element {
        self.root
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    /// The witness cut down to the ball of radius `rank + 1` around the root. Elements
    /// at distance at most `rank` keep their image, which is all the game can see.
    pub fn witness_ball(&self) -> (FiniteMapping, Element) {
        let ball = self.witness.ball(self.root, self.rank + 1).expect("root in range");
        let root = ball.binary_search(&self.root).expect("root in its ball");
        (self.witness.restrict(&ball).expect("non-empty ball"), root)
    }
}

impl PartialEq for LocalType {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.id == other.id
    }
}

impl Eq for LocalType {}

impl std::hash::Hash for LocalType {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.rank, self.id).hash(state)
    }
}

impl fmt::Debug for LocalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}@{}", self.id, self.rank)
    }
}

/// Distribution over rank-`rank` types, in order of first appearance.
#[derive(Clone, Debug)]
pub struct TypeMeasure {
    rank: usize,
    entries: Vec<(LocalType, Rational)>,
}

impl TypeMeasure {
    /// Checks positivity, distinctness and total mass 1.
    pub fn new(rank: usize, entries: Vec<(LocalType, Rational)>) -> Result<Self> {
        let mut total = Rational::zero();
        for (i, (t, q)) in entries.iter().enumerate() {
            if t.rank != rank {
                return Err(Error::RankMismatch(t.rank, rank));
            }
            if *q <= Rational::zero() {
                return Err(Error::Infeasible("non-positive mass".into()));
            }
            if entries[..i].iter().any(|(u, _)| u == t) {
                return Err(Error::Infeasible("repeated type in measure".into()));
            }
            total += q;
        }
        if !total.is_one() {
            return Err(Error::Infeasible(format!("masses sum to {total}")));
        }
        Ok(TypeMeasure { rank, entries })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entries(&self) -> &[(LocalType, Rational)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass_of(&self, t: &LocalType) -> Rational {
        self.entries.iter().find(|(u, _)| u == t).map_or_else(Rational::zero, |(_, q)| q.clone())
    }

    pub fn types(&self) -> impl Iterator<Item = &LocalType> {
        self.entries.iter().map(|(t, _)| t)
    }

    pub fn total(&self) -> Rational {
        self.entries.iter().fold(Rational::zero(), |acc, (_, q)| acc + q)
    }

    /// Push forward along the projection to rank `r`.
    pub fn project(&self, r: usize, session: &TypeSession) -> Result<TypeMeasure> {
        let mut out: Vec<(LocalType, Rational)> = Vec::new();
        for (t, q) in &self.entries {
            let p = session.project(t, r)?;
            match out.iter_mut().find(|(u, _)| *u == p) {
                Some((_, acc)) => *acc += q,
                None => out.push((p, q.clone())),
            }
        }
        Ok(TypeMeasure { rank: r, entries: out })
    }

    /// Total variation (half L1) against another measure of the same session.
    pub fn total_variation(&self, other: &TypeMeasure) -> Rational {
        let mut l1 = Rational::zero();
        for (t, q) in &self.entries {
            l1 += num_traits::Signed::abs(&(q - other.mass_of(t)));
        }
        for (t, q) in &other.entries {
            if self.entries.iter().all(|(u, _)| u != t) {
                l1 += q;
            }
        }
        l1 / Rational::from_integer(2.into())
    }

    /// Same support and masses, ignoring order.
    pub fn same_distribution(&self, other: &TypeMeasure) -> bool {
        self.rank == other.rank && self.total_variation(other).is_zero()
    }
}

struct Entry {
    witness: FiniteMapping,
    root: Element,
}

#[derive(Default)]
struct Registry {
    entries: Vec<Entry>,
    buckets: HashMap<(usize, u32), Vec<u32>>,
}

/// Session-scoped registry assigning canonical ids to local types. Insert-if-absent
/// runs under one lock, so concurrent callers see a single id per type.
pub struct TypeSession {
    registry: Mutex<Registry>,
    budget: usize,
}

impl Default for TypeSession {
    fn default() -> Self {
        Self::new()
    }
}

impl TypeSession {
    pub fn new() -> Self {
        Self::with_budget(DEFAULT_STATE_BUDGET)
    }

    pub fn with_budget(budget: usize) -> Self {
        TypeSession { registry: Mutex::new(Registry::default()), budget }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Number of distinct types registered so far, over all ranks.
    pub fn len(&self) -> usize {
        self.registry.lock().unwrap().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn local_type(&self, m: &FiniteMapping, v: Element, r: usize) -> Result<LocalType> {
        m.check_element(v)?;
        let color = color::colors(m, r)[v];
        self.canonicalize(m, v, r, color)
    }

    fn canonicalize(&self, m: &FiniteMapping, v: Element, r: usize, color: u32) -> Result<LocalType> {
        let mut reg = self.registry.lock().unwrap();
        let candidates = reg.buckets.get(&(r, color)).cloned().unwrap_or_default();
        for id in candidates {
            let e = &reg.entries[id as usize];
            if game::local_game(&e.witness, &[e.root], m, &[v], r, self.budget)? {
                return Ok(LocalType { rank: r, witness: e.witness.clone(), root: e.root, id });
            }
        }
        let id = reg.entries.len() as u32;
        reg.entries.push(Entry { witness: m.clone(), root: v });
        reg.buckets.entry((r, color)).or_default().push(id);
        Ok(LocalType { rank: r, witness: m.clone(), root: v, id })
    }

    /// Types of every element. Sibling elements with isomorphic subtrees are images of
    /// each other under an automorphism, so they reuse the first sibling's type.
    pub fn types_of(&self, m: &FiniteMapping, r: usize) -> Result<Vec<LocalType>> {
        let colors = color::colors(m, r);
        let tree = color::tree_codes(m);
        let cp = m.cyclic_part();
        let mut twins: HashMap<(Element, u32), usize> = HashMap::new();
        let mut out: Vec<LocalType> = Vec::with_capacity(m.len());
        for v in 0..m.len() {
            if !cp.is_cyclic(v) {
                if let Some(&u) = twins.get(&(m.f(v), tree[v])) {
                    let t = out[u].clone();
                    out.push(t);
                    continue;
                }
                twins.insert((m.f(v), tree[v]), v);
            }
            out.push(self.canonicalize(m, v, r, colors[v])?);
        }
        Ok(out)
    }

    pub fn type_distribution(&self, m: &FiniteMapping, r: usize) -> Result<TypeMeasure> {
        let types = self.types_of(m, r)?;
        Ok(distribution_of(r, &types))
    }

    pub fn types_equal(&self, a: &LocalType, b: &LocalType) -> Result<bool> {
        if a.rank != b.rank {
            return Err(Error::RankMismatch(a.rank, b.rank));
        }
        game::local_game(&a.witness, &[a.root], &b.witness, &[b.root], a.rank, self.budget)
    }

    pub fn project(&self, t: &LocalType, r: usize) -> Result<LocalType> {
        if r > t.rank {
            return Err(Error::RankIncrease { from: t.rank, to: r });
        }
        if r == t.rank {
            return Ok(t.clone());
        }
        self.local_type(&t.witness, t.root, r)
    }

    pub fn transport(&self, t: &LocalType) -> Result<LocalType> {
        if t.rank == 0 {
            return Err(Error::RankZero);
        }
        self.local_type(&t.witness, t.witness.f(t.root), t.rank - 1)
    }

    pub fn adm_plus(&self, tau: &LocalType, t: &LocalType) -> Result<u8> {
        if tau.rank < t.rank + 1 {
            return Err(Error::RankTooLow { needed: t.rank + 1, got: tau.rank });
        }
        let image = self.local_type(&tau.witness, tau.witness.f(tau.root), t.rank)?;
        Ok((image == *t) as u8)
    }

    pub fn adm_minus(&self, tau: &LocalType, t: &LocalType) -> Result<usize> {
        if tau.rank < 2 * t.rank + 1 {
            return Err(Error::RankTooLow { needed: 2 * t.rank + 1, got: tau.rank });
        }
        let mut count = 0;
        for &u in tau.witness.pre(tau.root) {
            if self.local_type(&tau.witness, u, t.rank)? == *t {
                count += 1;
                if count == t.rank + 1 {
                    break;
                }
            }
        }
        Ok(count)
    }

    /// Rank-`r` types of the root's preimages inside its witness, with counts capped at
    /// `r + 1`, in order of first appearance.
    pub fn preimage_types(&self, tau: &LocalType, r: usize) -> Result<Vec<(LocalType, usize)>> {
        if tau.rank < 2 * r + 1 {
            return Err(Error::RankTooLow { needed: 2 * r + 1, got: tau.rank });
        }
        let m = &tau.witness;
        let tree = color::tree_codes(m);
        let cp = m.cyclic_part();
        let mut seen: HashMap<u32, usize> = HashMap::new();
        let mut out: Vec<(LocalType, usize)> = Vec::new();
        for &u in m.pre(tau.root) {
            let t = match (cp.is_cyclic(u), seen.get(&tree[u])) {
                (false, Some(&i)) => out[i].0.clone(),
                _ => self.local_type(m, u, r)?,
            };
            let i = match out.iter().position(|(s, _)| *s == t) {
                Some(i) => i,
                None => {
                    out.push((t, 0));
                    out.len() - 1
                }
            };
            if !cp.is_cyclic(u) {
                seen.insert(tree[u], i);
            }
            out[i].1 = (out[i].1 + 1).min(r + 1);
        }
        Ok(out)
    }
}

/// Group per-element types into a measure with mass count/n.
pub fn distribution_of(r: usize, types: &[LocalType]) -> TypeMeasure {
    let n = types.len();
    let mut index: HashMap<u32, usize> = HashMap::new();
    let mut entries: Vec<(LocalType, usize)> = Vec::new();
    for t in types {
        match index.get(&t.id) {
            Some(&i) => entries[i].1 += 1,
            None => {
                index.insert(t.id, entries.len());
                entries.push((t.clone(), 1));
            }
        }
    }
    TypeMeasure { rank: r, entries: entries.into_iter().map(|(t, c)| (t, ratio(c, n))).collect() }
}
