//! Cutting large components into small ones, remembering the cuts as marks.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Element, FiniteMapping, Signature};
use crate::error::{Error, Result};
use crate::logic::{Formula, Interpretation, Term};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutKind {
    /// One cycle edge `a → b` removed.
    Cycle,
    /// All edges into `b` from its other preimages removed.
    Tree,
}

/// Cut `index`: elements of `a` carry `A<index>` and used to map to `b`, which carries `B<index>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub index: usize,
    pub kind: CutKind,
    pub a: Vec<Element>,
    pub b: Element,
}

#[derive(Clone, Debug)]
pub struct Residualization {
    pub mapping: FiniteMapping,
    pub interpretation: Interpretation,
    pub cuts: Vec<Cut>,
}

impl Residualization {
    /// Undo the cuts directly, without evaluating the interpretation.
    pub fn restore(&self) -> Result<FiniteMapping> {
        let mut image = self.mapping.image().to_vec();
        for c in &self.cuts {
            for &a in &c.a {
                image[a] = c.b;
            }
        }
        let names: Vec<String> = self.interpretation.dropped.iter().cloned().collect();
        self.mapping.with_image(image)?.drop_predicates(&names)
    }
}

fn a_name(k: usize) -> String {
    format!("A{k}")
}

fn b_name(k: usize) -> String {
    format!("B{k}")
}

/// `|set| > eps * n`, exactly.
fn too_big(size: usize, eps: &Rational, n: usize) -> bool {
    Rational::from_integer(BigInt::from(size)) > eps * Rational::from_integer(BigInt::from(n))
}

/// Proper descendant counts `|E(u)|` through off-cycle elements, plus the cycle flags.
fn descendant_counts(image: &[Element]) -> (Vec<usize>, Vec<bool>) {
    let current = FiniteMapping::unmarked(image.to_vec()).expect("non-empty");
    let cp = current.cyclic_part();
    let mut order: Vec<Element> = (0..image.len()).collect();
    order.sort_unstable_by_key(|&v| std::cmp::Reverse(cp.height[v]));
    let mut count = vec![0usize; image.len()];
    for v in order {
        if !cp.is_cyclic(v) {
            count[image[v]] += count[v] + 1;
        }
    }
    let cyclic = (0..image.len()).map(|v| cp.is_cyclic(v)).collect();
    (count, cyclic)
}

/// Make every component of size at most `⌈eps·n⌉ + 1`, lowest ids first.
pub fn residualize(f: &FiniteMapping, eps: &Rational) -> Result<Residualization> {
    if *eps <= Rational::zero() || *eps >= Rational::one() {
        return Err(Error::InvalidArgument(format!("eps must lie in (0,1), got {eps}")));
    }
    let n = f.len();
    let mut image = f.image().to_vec();
    let mut cuts: Vec<Cut> = Vec::new();

    let cp = f.cyclic_part();
    for members in f.connected_components() {
        if !too_big(members.len(), eps, n) {
            continue;
        }
        let v = *members.iter().find(|&&v| cp.is_cyclic(v)).expect("every component has a cycle");
        if cp.cycle_len[v] >= 2 {
            cuts.push(Cut { index: cuts.len() + 1, kind: CutKind::Cycle, a: vec![v], b: image[v] });
            image[v] = v;
        }
    }

    loop {
        let (count, cyclic) = descendant_counts(&image);
        let mut children: Vec<Vec<Element>> = vec![Vec::new(); n];
        for v in 0..n {
            if !cyclic[v] {
                children[image[v]].push(v);
            }
        }
        let pick = (0..n).find(|&u| {
            too_big(count[u], eps, n) && children[u].iter().all(|&x| !too_big(count[x], eps, n))
        });
        let Some(u) = pick else { break };
        let w = std::mem::take(&mut children[u]);
        for &x in &w {
            image[x] = x;
        }
        cuts.push(Cut { index: cuts.len() + 1, kind: CutKind::Tree, a: w, b: u });
    }

    let mut names = f.signature().predicates().to_vec();
    let mut marks = f.mark_sets();
    for c in &cuts {
        names.push(a_name(c.index));
        names.push(b_name(c.index));
        marks.push(c.a.clone());
        marks.push(vec![c.b]);
    }
    let sig = Signature::new(f.signature().function(), names)?;
    let mapping = FiniteMapping::new(sig, image, marks)?;
    Ok(Residualization { mapping, interpretation: cut_interpretation(&cuts), cuts })
}

/// `(f(x1)=x2 & !OR A_k(x1)) | OR (A_k(x1) & B_k(x2))`, dropping the cut marks.
fn cut_interpretation(cuts: &[Cut]) -> Interpretation {
    if cuts.is_empty() {
        return Interpretation::trivial();
    }
    let cut_here = Formula::any(cuts.iter().map(|c| Formula::pred(a_name(c.index), "x1")));
    let rejoin = Formula::any(
        cuts.iter().map(|c| Formula::pred(a_name(c.index), "x1").and(Formula::pred(b_name(c.index), "x2"))),
    );
    let eta = Formula::Eq(Term::apply("x1", 1), Term::var("x2")).and(cut_here.not()).or(rejoin);
    let mut interp = Interpretation::with_eta(eta);
    for c in cuts {
        interp.dropped.insert(a_name(c.index));
        interp.dropped.insert(b_name(c.index));
    }
    interp
}
