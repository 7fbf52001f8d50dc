//! Basic interpretations: a definable function `eta(x1, x2)` plus predicate
//! redefinitions `kappa[P](x1)`, applied to structures and, dually, to formulas.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::{Formula, Term};
use super::eval::Compiled;
use crate::error::{Error, Result};
use crate::structure::{Element, FiniteMapping, Signature};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    /// Two free variables `x1`, `x2`; defines the graph of the new function.
    pub eta: Formula,
    /// Target predicate name to a formula in `x1`.
    pub kappa: BTreeMap<String, Formula>,
    /// Predicates removed from the signature.
    pub dropped: BTreeSet<String>,
}

impl Default for Interpretation {
    fn default() -> Self {
        Self::trivial()
    }
}

impl Interpretation {
    /// `eta = f(x1)=x2`, nothing redefined.
    pub fn trivial() -> Self {
        Interpretation { eta: Formula::maps_to("x1", "x2"), kappa: BTreeMap::new(), dropped: BTreeSet::new() }
    }

    pub fn with_eta(eta: Formula) -> Self {
        Interpretation { eta, ..Self::trivial() }
    }

    pub fn is_trivial_eta(&self) -> bool {
        self.eta == Formula::maps_to("x1", "x2")
    }

    /// Signature of the image structure.
    pub fn target_signature(&self, source: &Signature) -> Result<Signature> {
        let mut names: Vec<String> =
            source.predicates().iter().filter(|p| !self.dropped.contains(*p)).cloned().collect();
        for k in self.kappa.keys() {
            if !names.contains(k) {
                names.push(k.clone());
            }
        }
        Signature::new(source.function(), names)
    }
}

/// The structure defined by `interp` inside `m`, on the same domain.
pub fn apply_interpretation(interp: &Interpretation, m: &FiniteMapping) -> Result<FiniteMapping> {
    let n = m.len();
    let image = if interp.is_trivial_eta() {
        m.image().to_vec()
    } else {
        let eta = Compiled::new(&interp.eta, m.signature())?;
        if eta.free_variables().iter().any(|v| v != "x1" && v != "x2") {
            return Err(Error::InvalidArgument("eta may only mention x1 and x2 freely".into()));
        }
        let position = |name: &str| eta.free_variables().iter().position(|v| v == name);
        let (p1, p2) = (position("x1"), position("x2"));
        let mut image = Vec::with_capacity(n);
        let mut values = vec![0; eta.free_variables().len()];
        for u in 0..n {
            let mut found = Vec::new();
            for v in 0..n {
                if let Some(i) = p1 {
                    values[i] = u;
                }
                if let Some(i) = p2 {
                    values[i] = v;
                }
                if eta.holds(m, &values) {
                    found.push(v);
                    if found.len() > 1 {
                        break;
                    }
                }
            }
            if found.len() != 1 {
                let images = if found.is_empty() { 0 } else { count_images(&eta, m, u, p1, p2) };
                return Err(Error::EtaNotFunctional { element: u, images });
            }
            image.push(found[0]);
        }
        image
    };

    let target = interp.target_signature(m.signature())?;
    let mut marks = Vec::with_capacity(target.len());
    for name in target.predicates() {
        match interp.kappa.get(name) {
            Some(kappa) => {
                let c = Compiled::new(kappa, m.signature())?;
                if c.free_variables().iter().any(|v| v != "x1") {
                    return Err(Error::InvalidArgument(format!("kappa for `{name}` may only mention x1 freely")));
                }
                let unary = !c.free_variables().is_empty();
                let ext: Vec<Element> =
                    (0..n).filter(|&v| if unary { c.holds(m, &[v]) } else { c.holds(m, &[]) }).collect();
                marks.push(ext);
            }
            None => marks.push(m.marked_by_name(name)?),
        }
    }
    FiniteMapping::new(target, image, marks)
}

fn count_images(eta: &Compiled, m: &FiniteMapping, u: Element, p1: Option<usize>, p2: Option<usize>) -> usize {
    let mut values = vec![0; eta.free_variables().len()];
    (0..m.len())
        .filter(|&v| {
            if let Some(i) = p1 {
                values[i] = u;
            }
            if let Some(i) = p2 {
                values[i] = v;
            }
            eta.holds(m, &values)
        })
        .count()
}

struct Fresh {
    used: BTreeSet<String>,
    next: usize,
}

impl Fresh {
    fn name(&mut self) -> String {
        loop {
            let candidate = format!("z{}", self.next);
            self.next += 1;
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}

fn collect_names(phi: &Formula, out: &mut BTreeSet<String>) {
    match phi {
        Formula::True | Formula::False => {}
        Formula::Eq(a, b) => {
            out.insert(a.var.clone());
            out.insert(b.var.clone());
        }
        Formula::Pred(_, t) => {
            out.insert(t.var.clone());
        }
        Formula::Not(a) => collect_names(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            collect_names(a, out);
            collect_names(b, out);
        }
        Formula::Exists(v, g, body) | Formula::Forall(v, g, body) => {
            out.insert(v.clone());
            if let Some(g) = g {
                out.insert(g.var.clone());
            }
            collect_names(body, out);
        }
    }
}

/// Simultaneous substitution of variables by variables, renaming every binder of
/// `psi` to a fresh name so nothing gets captured.
fn substitute(psi: &Formula, map: &HashMap<String, String>, fresh: &mut Fresh) -> Formula {
    let term = |t: &Term, map: &HashMap<String, String>| Term {
        var: map.get(&t.var).cloned().unwrap_or_else(|| t.var.clone()),
        depth: t.depth,
    };
    match psi {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Eq(a, b) => Formula::Eq(term(a, map), term(b, map)),
        Formula::Pred(p, t) => Formula::Pred(p.clone(), term(t, map)),
        Formula::Not(a) => substitute(a, map, fresh).not(),
        Formula::And(a, b) => substitute(a, map, fresh).and(substitute(b, map, fresh)),
        Formula::Or(a, b) => substitute(a, map, fresh).or(substitute(b, map, fresh)),
        Formula::Implies(a, b) => substitute(a, map, fresh).implies(substitute(b, map, fresh)),
        Formula::Exists(v, g, body) | Formula::Forall(v, g, body) => {
            let g = g.as_ref().map(|g| term(g, map));
            let renamed = fresh.name();
            let mut inner = map.clone();
            inner.insert(v.clone(), renamed.clone());
            let body = Box::new(substitute(body, &inner, fresh));
            if matches!(psi, Formula::Exists(..)) {
                Formula::Exists(renamed, g, body)
            } else {
                Formula::Forall(renamed, g, body)
            }
        }
    }
}

/// The formula `I(phi)` with `I(A) |= phi(a)` iff `A |= I(phi)(a)`.
pub fn translate(interp: &Interpretation, phi: &Formula) -> Result<Formula> {
    if !phi.is_clean() {
        return Err(Error::NotClean);
    }
    let mut used = BTreeSet::new();
    collect_names(phi, &mut used);
    collect_names(&interp.eta, &mut used);
    for k in interp.kappa.values() {
        collect_names(k, &mut used);
    }
    let mut fresh = Fresh { used, next: 1 };
    let trivial = interp.is_trivial_eta();
    Ok(translate_rec(interp, phi, trivial, &mut fresh))
}

fn eta_at(interp: &Interpretation, x: &str, y: &str, fresh: &mut Fresh) -> Formula {
    let map = HashMap::from([("x1".to_string(), x.to_string()), ("x2".to_string(), y.to_string())]);
    substitute(&interp.eta, &map, fresh)
}

fn translate_rec(interp: &Interpretation, phi: &Formula, trivial: bool, fresh: &mut Fresh) -> Formula {
    match phi {
        Formula::True | Formula::False => phi.clone(),
        Formula::Eq(a, b) if a.depth + b.depth == 0 || trivial => phi.clone(),
        Formula::Eq(a, b) => {
            let (from, to) = if a.depth == 1 { (&a.var, &b.var) } else { (&b.var, &a.var) };
            eta_at(interp, from, to, fresh)
        }
        Formula::Pred(p, t) => match interp.kappa.get(p) {
            Some(kappa) => {
                let map = HashMap::from([("x1".to_string(), t.var.clone())]);
                substitute(kappa, &map, fresh)
            }
            None => phi.clone(),
        },
        Formula::Not(a) => translate_rec(interp, a, trivial, fresh).not(),
        Formula::And(a, b) => translate_rec(interp, a, trivial, fresh).and(translate_rec(interp, b, trivial, fresh)),
        Formula::Or(a, b) => translate_rec(interp, a, trivial, fresh).or(translate_rec(interp, b, trivial, fresh)),
        Formula::Implies(a, b) => {
            translate_rec(interp, a, trivial, fresh).implies(translate_rec(interp, b, trivial, fresh))
        }
        Formula::Exists(v, g, body) | Formula::Forall(v, g, body) => {
            let exists = matches!(phi, Formula::Exists(..));
            let body = translate_rec(interp, body, trivial, fresh);
            match g {
                Some(g) if !trivial => {
                    let near = eta_at(interp, &g.var, v, fresh).or(eta_at(interp, v, &g.var, fresh));
                    if exists {
                        Formula::exists(v, near.and(body))
                    } else {
                        Formula::forall(v, near.implies(body))
                    }
                }
                _ => {
                    let body = Box::new(body);
                    if exists {
                        Formula::Exists(v.clone(), g.clone(), body)
                    } else {
                        Formula::Forall(v.clone(), g.clone(), body)
                    }
                }
            }
        }
    }
}
