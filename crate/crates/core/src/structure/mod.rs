//! Finite mappings: a domain `0..n`, one total function and unary marks.

mod canon;
mod cut;
mod residual;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

pub use canon::{canonical_form, isomorphic, Canonizer};
pub use cut::{cut_predicate_cycle, cycle_cut_product, u_name};
pub(crate) use cut::{is_type_predicate, u_index};
pub use residual::{residualize, Cut, CutKind, Residualization};

pub type Element = usize;

/// Function symbol name plus ordered predicate names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    function: String,
    predicates: Vec<String>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

const RESERVED: &[&str] = &["exists", "forall", "true", "false"];

impl Signature {
    pub fn new(function: impl Into<String>, predicates: Vec<String>) -> Result<Self> {
        let function = function.into();
        if !is_identifier(&function) || RESERVED.contains(&function.as_str()) {
            return Err(Error::InvalidSignature(format!("bad function name `{function}`")));
        }
        for (i, p) in predicates.iter().enumerate() {
            if !is_identifier(p) || RESERVED.contains(&p.as_str()) {
                return Err(Error::InvalidSignature(format!("bad predicate name `{p}`")));
            }
            if *p == function {
                return Err(Error::InvalidSignature(format!("predicate `{p}` shadows the function")));
            }
            if predicates[..i].contains(p) {
                return Err(Error::DuplicatePredicate(p.clone()));
            }
        }
        Ok(Signature { function, predicates })
    }

    /// `f` with no predicates.
    pub fn plain() -> Self {
        Signature { function: "f".into(), predicates: Vec::new() }
    }

    pub fn with_predicates<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        Self::new("f", names.iter().map(|s| s.as_ref().to_string()).collect())
    }

    pub fn function(&self) -> &str {
        &self.function
    }

    pub fn predicates(&self) -> &[String] {
        &self.predicates
    }

    pub fn len(&self) -> usize {
        self.predicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p == name)
    }

    pub fn extended(&self, extra: &[String]) -> Result<Self> {
        let mut predicates = self.predicates.clone();
        predicates.extend(extra.iter().cloned());
        Signature::new(self.function.clone(), predicates)
    }

    pub(crate) fn words(&self) -> usize {
        self.predicates.len().div_ceil(64)
    }
}

/// Cyclic elements and distance to them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicPart {
    /// Length of the cycle through `v`, 0 when `v` is not on a cycle.
    pub cycle_len: Vec<usize>,
    pub height: Vec<usize>,
}

impl CyclicPart {
    pub fn is_cyclic(&self, v: Element) -> bool {
        self.cycle_len[v] > 0
    }

    pub fn cyclic_elements(&self) -> Vec<Element> {
        (0..self.cycle_len.len()).filter(|&v| self.cycle_len[v] > 0).collect()
    }
}

pub(crate) struct Inner {
    sig: Arc<Signature>,
    image: Vec<Element>,
    words: usize,
    bits: Vec<u64>,
    preimages: OnceLock<(Vec<usize>, Vec<Element>)>,
    cyclic: OnceLock<CyclicPart>,
    pub(crate) caches: crate::types::StructureCaches,
}

/// Immutable finite mapping; clones share storage.
#[derive(Clone)]
pub struct FiniteMapping {
    inner: Arc<Inner>,
}

impl PartialEq for FiniteMapping {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.sig == other.inner.sig
                && self.inner.image == other.inner.image
                && self.inner.bits == other.inner.bits)
    }
}

impl Eq for FiniteMapping {}

impl fmt::Debug for FiniteMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteMapping(n={}, f={:?}", self.len(), self.inner.image)?;
        for (i, p) in self.signature().predicates().iter().enumerate() {
            write!(f, ", {p}={:?}", self.marked(i))?;
        }
        write!(f, ")")
    }
}

/// Unvalidated description, as read from a file or assembled by hand.
#[derive(Debug, Clone, Default)]
pub struct RawMapping {
    pub function: Option<String>,
    pub predicates: Vec<String>,
    pub image: Vec<usize>,
    pub marks: BTreeMap<String, Vec<usize>>,
}

impl RawMapping {
    pub fn validate(&self) -> Result<FiniteMapping> {
        let sig = Signature::new(
            self.function.clone().unwrap_or_else(|| "f".into()),
            self.predicates.clone(),
        )?;
        let mut ext = vec![Vec::new(); sig.len()];
        for (name, elems) in &self.marks {
            let i = sig.index_of(name).ok_or_else(|| Error::UnknownPredicate(name.clone()))?;
            ext[i] = elems.clone();
        }
        FiniteMapping::new(sig, self.image.clone(), ext)
    }
}

impl FiniteMapping {
    /// `marks[i]` lists the elements carrying predicate `i`.
    pub fn new(sig: Signature, image: Vec<Element>, marks: Vec<Vec<Element>>) -> Result<Self> {
        let n = image.len();
        if n == 0 {
            return Err(Error::EmptyDomain);
        }
        if let Some((v, &w)) = image.iter().enumerate().find(|(_, &w)| w >= n) {
            return Err(Error::OutOfRangeImage { element: v, image: w, n });
        }
        if marks.len() > sig.len() {
            return Err(Error::InvalidSignature("more mark sets than predicates".into()));
        }
        let words = sig.words();
        let mut bits = vec![0u64; n * words];
        for (p, elems) in marks.iter().enumerate() {
            for &v in elems {
                if v >= n {
                    return Err(Error::ElementOutOfRange { element: v, n });
                }
                bits[v * words + p / 64] |= 1 << (p % 64);
            }
        }
        Ok(Self::from_bits(Arc::new(sig), image, bits))
    }

    /// No marks at all.
    pub fn unmarked(image: Vec<Element>) -> Result<Self> {
        Self::new(Signature::plain(), image, Vec::new())
    }

    pub(crate) fn from_bits(sig: Arc<Signature>, image: Vec<Element>, bits: Vec<u64>) -> Self {
        let words = sig.words();
        debug_assert_eq!(bits.len(), image.len() * words);
        FiniteMapping {
            inner: Arc::new(Inner {
                sig,
                image,
                words,
                bits,
                preimages: OnceLock::new(),
                cyclic: OnceLock::new(),
                caches: Default::default(),
            }),
        }
    }

    /// `i ↦ i+1 mod n`.
    pub fn cycle(n: usize) -> Self {
        Self::unmarked((0..n).map(|i| (i + 1) % n).collect()).expect("n > 0")
    }

    pub fn fixed_point() -> Self {
        Self::cycle(1)
    }

    /// Center 0 (a fixed point) with `leaves` leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Self {
        Self::unmarked(vec![0; leaves + 1]).unwrap()
    }

    pub fn identity(n: usize) -> Self {
        Self::unmarked((0..n).collect()).expect("n > 0")
    }

    pub(crate) fn inner(&self) -> &Inner {
        &self.inner
    }

    pub fn ptr_eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    pub fn len(&self) -> usize {
        self.inner.image.len()
    }

    /// Never true; the domain is non-empty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn signature(&self) -> &Signature {
        &self.inner.sig
    }

    pub fn same_signature(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner.sig, &other.inner.sig) || self.inner.sig == other.inner.sig
    }

    #[inline]
    pub fn f(&self, v: Element) -> Element {
        self.inner.image[v]
    }

    pub fn image(&self) -> &[Element] {
        &self.inner.image
    }

    pub fn iterate(&self, mut v: Element, k: usize) -> Element {
        for _ in 0..k {
            v = self.f(v);
        }
        v
    }

    #[inline]
    pub fn mark_words(&self, v: Element) -> &[u64] {
        let w = self.inner.words;
        &self.inner.bits[v * w..(v + 1) * w]
    }

    #[inline]
    pub fn has_mark(&self, v: Element, p: usize) -> bool {
        self.mark_words(v)[p / 64] >> (p % 64) & 1 == 1
    }

    pub fn marks_of(&self, v: Element) -> Vec<usize> {
        (0..self.signature().len()).filter(|&p| self.has_mark(v, p)).collect()
    }

    pub fn marked(&self, p: usize) -> Vec<Element> {
        (0..self.len()).filter(|&v| self.has_mark(v, p)).collect()
    }

    pub fn marked_by_name(&self, name: &str) -> Result<Vec<Element>> {
        let p = self.signature().index_of(name).ok_or_else(|| Error::UnknownPredicate(name.into()))?;
        Ok(self.marked(p))
    }

    pub fn check_element(&self, v: Element) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::ElementOutOfRange { element: v, n: self.len() })
        }
    }

    fn preimage_table(&self) -> &(Vec<usize>, Vec<Element>) {
        self.inner.preimages.get_or_init(|| {
            let n = self.len();
            let mut start = vec![0usize; n + 1];
            for &w in &self.inner.image {
                start[w + 1] += 1;
            }
            for i in 0..n {
                start[i + 1] += start[i];
            }
            let mut fill = start.clone();
            let mut list = vec![0; n];
            for (v, &w) in self.inner.image.iter().enumerate() {
                list[fill[w]] = v;
                fill[w] += 1;
            }
            (start, list)
        })
    }

    /// Preimages of `v` in ascending order (unchecked).
    #[inline]
    pub fn pre(&self, v: Element) -> &[Element] {
        let (start, list) = self.preimage_table();
        &list[start[v]..start[v + 1]]
    }

    pub fn preimage(&self, v: Element) -> Result<&[Element]> {
        self.check_element(v)?;
        Ok(self.pre(v))
    }

    /// Image plus preimages, deduplicated; may contain `v` itself when `v` is fixed.
    pub fn neighbors(&self, v: Element) -> Vec<Element> {
        let mut out = Vec::with_capacity(self.pre(v).len() + 1);
        out.push(self.f(v));
        for &u in self.pre(v) {
            if u != self.f(v) {
                out.push(u);
            }
        }
        out
    }

    fn bfs(&self, v: Element, limit: Option<usize>) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[v] = Some(0);
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            if limit.is_some_and(|l| d >= l) {
                continue;
            }
            let mut visit = |w: Element| {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            };
            visit(self.f(u));
            for &w in self.pre(u) {
                visit(w);
            }
        }
        dist
    }

    /// Gaifman distance; `None` across components.
    pub fn distance(&self, u: Element, v: Element) -> Result<Option<usize>> {
        self.check_element(u)?;
        self.check_element(v)?;
        Ok(self.bfs(u, None)[v])
    }

    /// All distances from `v`.
    pub fn distances_from(&self, v: Element) -> Vec<Option<usize>> {
        self.bfs(v, None)
    }

    pub fn ball(&self, v: Element, r: usize) -> Result<Vec<Element>> {
        self.check_element(v)?;
        Ok(self
            .bfs(v, Some(r))
            .iter()
            .enumerate()
            .filter_map(|(u, d)| d.map(|_| u))
            .collect())
    }

    /// Component index per element; components numbered by their smallest element.
    pub fn component_ids(&self) -> Vec<usize> {
        let n = self.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for v in 0..n {
            let a = find(&mut parent, v);
            let b = find(&mut parent, self.f(v));
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi] = lo;
            }
        }
        let mut id = vec![usize::MAX; n];
        let mut next = 0;
        let mut out = vec![0; n];
        for v in 0..n {
            let root = find(&mut parent, v);
            if id[root] == usize::MAX {
                id[root] = next;
                next += 1;
            }
            out[v] = id[root];
        }
        out
    }

    pub fn connected_components(&self) -> Vec<Vec<Element>> {
        let ids = self.component_ids();
        let count = ids.iter().max().map_or(0, |m| m + 1);
        let mut parts = vec![Vec::new(); count];
        for (v, &c) in ids.iter().enumerate() {
            parts[c].push(v);
        }
        parts
    }

    pub fn cyclic_part(&self) -> &CyclicPart {
        self.inner.cyclic.get_or_init(|| {
            let n = self.len();
            // 0 = unvisited, 1 = on current path, 2 = done
            let mut state = vec![0u8; n];
            let mut cycle_len = vec![0usize; n];
            let mut path = Vec::new();
            for s in 0..n {
                if state[s] != 0 {
                    continue;
                }
                let mut v = s;
                while state[v] == 0 {
                    state[v] = 1;
                    path.push(v);
                    v = self.f(v);
                }
                if state[v] == 1 {
                    let pos = path.iter().position(|&u| u == v).unwrap();
                    let len = path.len() - pos;
                    for &u in &path[pos..] {
                        cycle_len[u] = len;
                    }
                }
                for &u in &path {
                    state[u] = 2;
                }
                path.clear();
            }
            let mut height = vec![usize::MAX; n];
            let mut queue = VecDeque::new();
            for v in 0..n {
                if cycle_len[v] > 0 {
                    height[v] = 0;
                    queue.push_back(v);
                }
            }
            while let Some(v) = queue.pop_front() {
                for &u in self.pre(v) {
                    if height[u] == usize::MAX {
                        height[u] = height[v] + 1;
                        queue.push_back(u);
                    }
                }
            }
            CyclicPart { cycle_len, height }
        })
    }

    pub fn disjoint_union(&self, other: &Self) -> Result<Self> {
        if !self.same_signature(other) {
            return Err(Error::SignatureMismatch);
        }
        let shift = self.len();
        let mut image = self.inner.image.clone();
        image.extend(other.inner.image.iter().map(|&w| w + shift));
        let mut bits = self.inner.bits.clone();
        bits.extend_from_slice(&other.inner.bits);
        Ok(Self::from_bits(self.inner.sig.clone(), image, bits))
    }

    /// `copies` disjoint copies of `self` (copy `c` occupies `c*n..(c+1)*n`).
    pub fn repeat(&self, copies: usize) -> Self {
        assert!(copies > 0);
        let n = self.len();
        let mut image = Vec::with_capacity(n * copies);
        let mut bits = Vec::with_capacity(self.inner.bits.len() * copies);
        for c in 0..copies {
            image.extend(self.inner.image.iter().map(|&w| w + c * n));
            bits.extend_from_slice(&self.inner.bits);
        }
        Self::from_bits(self.inner.sig.clone(), image, bits)
    }

    /// Restriction to `xs`, re-indexed in ascending order; images leaving the set become fixed.
    pub fn restrict(&self, xs: &[Element]) -> Result<Self> {
        let mut xs = xs.to_vec();
        xs.sort_unstable();
        xs.dedup();
        if xs.is_empty() {
            return Err(Error::EmptyRestriction);
        }
        let n = self.len();
        let mut index = vec![usize::MAX; n];
        for (i, &v) in xs.iter().enumerate() {
            self.check_element(v)?;
            index[v] = i;
        }
        let image = xs
            .iter()
            .enumerate()
            .map(|(i, &v)| if index[self.f(v)] != usize::MAX { index[self.f(v)] } else { i })
            .collect();
        let mut bits = Vec::with_capacity(xs.len() * self.inner.words);
        for &v in &xs {
            bits.extend_from_slice(self.mark_words(v));
        }
        Ok(Self::from_bits(self.inner.sig.clone(), image, bits))
    }

    pub fn mark_element(&self, v: Element, name: &str) -> Result<Self> {
        self.check_element(v)?;
        if self.signature().index_of(name).is_some() {
            return Err(Error::DuplicatePredicate(name.into()));
        }
        let sig = self.signature().extended(&[name.to_string()])?;
        let mut marks: Vec<Vec<Element>> =
            (0..self.signature().len()).map(|q| self.marked(q)).collect();
        marks.push(vec![v]);
        Self::new(sig, self.inner.image.clone(), marks)
    }

    /// Same signature and marks, new function.
    pub fn with_image(&self, image: Vec<Element>) -> Result<Self> {
        let n = self.len();
        if image.len() != n {
            return Err(Error::InvalidSignature("image length changed".into()));
        }
        if let Some((v, &w)) = image.iter().enumerate().find(|(_, &w)| w >= n) {
            return Err(Error::OutOfRangeImage { element: v, image: w, n });
        }
        Ok(Self::from_bits(self.inner.sig.clone(), image, self.inner.bits.clone()))
    }

    /// Rebuild with another signature; `marks` lists extensions for the new predicates.
    pub fn with_signature(&self, sig: Signature, marks: Vec<Vec<Element>>) -> Result<Self> {
        Self::new(sig, self.inner.image.clone(), marks)
    }

    /// Remove the named predicates (names not present are ignored).
    pub fn drop_predicates(&self, names: &[String]) -> Result<Self> {
        let keep: Vec<usize> = (0..self.signature().len())
            .filter(|&p| !names.contains(&self.signature().predicates()[p]))
            .collect();
        let sig = Signature::new(
            self.signature().function(),
            keep.iter().map(|&p| self.signature().predicates()[p].clone()).collect(),
        )?;
        let marks = keep.iter().map(|&p| self.marked(p)).collect();
        Self::new(sig, self.inner.image.clone(), marks)
    }

    /// Extensions of every predicate, in signature order.
    pub fn mark_sets(&self) -> Vec<Vec<Element>> {
        (0..self.signature().len()).map(|p| self.marked(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> FiniteMapping {
        FiniteMapping::unmarked(vec![1, 2, 2]).unwrap()
    }

    // Shortest a+b with f^a(u) = f^b(v), by brute force over a, b <= n.
    fn distance_oracle(m: &FiniteMapping, u: usize, v: usize) -> Option<usize> {
        let n = m.len();
        let mut best = None;
        for a in 0..=n {
            for b in 0..=n {
                if m.iterate(u, a) == m.iterate(v, b) && best.map_or(true, |x| a + b < x) {
                    best = Some(a + b);
                }
            }
        }
        best
    }

    #[test]
    fn validate_examples() {
        let fixed = RawMapping { image: vec![0], ..Default::default() }.validate().unwrap();
        assert_eq!(fixed.len(), 1);
        assert_eq!(fixed.f(0), 0);
        let bad = RawMapping { image: vec![5, 0], ..Default::default() }.validate();
        assert_eq!(bad, Err(Error::OutOfRangeImage { element: 0, image: 5, n: 2 }));
        let mut marks = BTreeMap::new();
        marks.insert("M1".to_string(), vec![0]);
        let c3 = RawMapping {
            function: None,
            predicates: vec!["M1".into()],
            image: vec![1, 2, 0],
            marks,
        }
        .validate()
        .unwrap();
        assert_eq!(c3.marked(0), vec![0]);
        assert_eq!(RawMapping::default().validate(), Err(Error::EmptyDomain));
        let mut unknown = BTreeMap::new();
        unknown.insert("Q".to_string(), vec![0]);
        let raw = RawMapping { image: vec![0], marks: unknown, ..Default::default() };
        assert_eq!(raw.validate(), Err(Error::UnknownPredicate("Q".into())));
    }

    #[test]
    fn signature_rules() {
        assert!(Signature::with_predicates(&["P", "P"]).is_err());
        assert!(Signature::new("f", vec!["f".into()]).is_err());
        assert!(Signature::with_predicates(&[""]).is_err());
    }

    #[test]
    fn preimage_examples() {
        assert_eq!(FiniteMapping::fixed_point().preimage(0).unwrap(), &[0]);
        assert_eq!(FiniteMapping::star(3).preimage(0).unwrap(), &[0, 1, 2, 3]);
        let c3 = FiniteMapping::cycle(3);
        let scan: Vec<usize> = (0..3).filter(|&u| c3.f(u) == 0).collect();
        assert_eq!(c3.preimage(0).unwrap(), scan.as_slice());
        assert!(c3.preimage(3).is_err());
    }

    #[test]
    fn distance_examples() {
        let c4 = FiniteMapping::cycle(4);
        assert_eq!(c4.distance(0, 2).unwrap(), distance_oracle(&c4, 0, 2));
        assert_eq!(c4.distance(0, 2).unwrap(), Some(2));
        assert_eq!(c4.distance(1, 1).unwrap(), Some(0));
        let two = FiniteMapping::identity(2);
        assert_eq!(two.distance(0, 1).unwrap(), None);
    }

    #[test]
    fn ball_examples() {
        let star = FiniteMapping::star(3);
        assert_eq!(star.ball(2, 0).unwrap(), vec![2]);
        assert_eq!(star.ball(1, 1).unwrap(), vec![0, 1]);
        assert_eq!(star.ball(0, 1).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn component_examples() {
        let u = FiniteMapping::cycle(3).disjoint_union(&FiniteMapping::fixed_point()).unwrap();
        let sizes: Vec<usize> = u.connected_components().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 1]);
        assert_eq!(FiniteMapping::cycle(7).connected_components().len(), 1);
        let m = FiniteMapping::unmarked(vec![1, 1, 1]).unwrap();
        assert_eq!(m.connected_components(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn cyclic_part_examples() {
        let c3 = FiniteMapping::cycle(3);
        assert_eq!(c3.cyclic_part().cyclic_elements(), vec![0, 1, 2]);
        assert_eq!(c3.cyclic_part().height, vec![0, 0, 0]);
        let m = FiniteMapping::unmarked(vec![1, 2, 1]).unwrap();
        assert_eq!(m.cyclic_part().cyclic_elements(), vec![1, 2]);
        assert_eq!(m.cyclic_part().height[0], 1);
        assert_eq!(m.cyclic_part().cycle_len, vec![0, 2, 2]);
        let id = FiniteMapping::identity(5);
        assert_eq!(id.cyclic_part().cyclic_elements().len(), 5);
    }

    #[test]
    fn union_and_restrict_examples() {
        let u = FiniteMapping::cycle(3).disjoint_union(&FiniteMapping::fixed_point()).unwrap();
        assert_eq!(u.len(), 4);
        assert_eq!(u.f(3), 3);
        let marked = FiniteMapping::fixed_point().mark_element(0, "P").unwrap();
        assert_eq!(u.disjoint_union(&marked), Err(Error::SignatureMismatch));

        let r = path3().restrict(&[0, 1]).unwrap();
        assert_eq!(r.image(), &[1, 1]);
        assert_eq!(path3().restrict(&[0, 1, 2]).unwrap(), path3());
        assert_eq!(path3().restrict(&[]), Err(Error::EmptyRestriction));
    }

    #[test]
    fn mark_element_examples() {
        let c3 = FiniteMapping::cycle(3).mark_element(0, "P").unwrap();
        assert_eq!(c3.marked_by_name("P").unwrap(), vec![0]);
        assert_eq!(c3.mark_element(1, "P"), Err(Error::DuplicatePredicate("P".into())));
        for u in 0..3 {
            for v in 0..3 {
                assert_eq!(c3.distance(u, v), FiniteMapping::cycle(3).distance(u, v));
            }
        }
    }

    fn arb_mapping(max_n: usize) -> impl Strategy<Value = FiniteMapping> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(0..n, n).prop_map(|img| FiniteMapping::unmarked(img).unwrap())
        })
    }

    proptest! {
        #[test]
        fn preimages_partition_domain(m in arb_mapping(30)) {
            let total: usize = (0..m.len()).map(|v| m.pre(v).len()).sum();
            prop_assert_eq!(total, m.len());
        }

        #[test]
        fn distance_is_a_metric(m in arb_mapping(12)) {
            let n = m.len();
            let d = |u, v| m.distance(u, v).unwrap();
            for u in 0..n {
                prop_assert_eq!(d(u, u), Some(0));
                for v in 0..n {
                    prop_assert_eq!(d(u, v), d(v, u));
                    prop_assert_eq!(d(u, v), distance_oracle(&m, u, v));
                    if u != v { prop_assert_ne!(d(u, v), Some(0)); }
                    for w in 0..n {
                        if let (Some(a), Some(b), Some(c)) = (d(u, v), d(v, w), d(u, w)) {
                            prop_assert!(c <= a + b);
                        }
                    }
                }
            }
        }

        #[test]
        fn heights_vanish_exactly_on_cycles(m in arb_mapping(30)) {
            let cp = m.cyclic_part();
            for v in 0..m.len() {
                prop_assert_eq!(cp.height[v] == 0, cp.is_cyclic(v));
                if cp.height[v] > 0 {
                    prop_assert_eq!(cp.height[m.f(v)] + 1, cp.height[v]);
                }
            }
        }

        #[test]
        fn union_adds_components(a in arb_mapping(12), b in arb_mapping(12)) {
            let u = a.disjoint_union(&b).unwrap();
            prop_assert_eq!(
                u.connected_components().len(),
                a.connected_components().len() + b.connected_components().len()
            );
        }
    }
}
