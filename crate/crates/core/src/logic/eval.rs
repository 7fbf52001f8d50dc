//! Brute-force satisfaction over a finite mapping.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

use super::ast::{Formula, Term};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::structure::{Element, FiniteMapping, Signature};

/// Default cap on the number of assignments `stone_pairing` will enumerate.
pub const DEFAULT_ASSIGNMENT_BUDGET: u128 = 10_000_000;

#[derive(Clone, Copy, Debug)]
struct Slot {
    index: usize,
    depth: usize,
}

#[derive(Debug)]
enum Node {
    Const(bool),
    Eq(Slot, Slot),
    Pred(usize, Slot),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Quant { exists: bool, slot: usize, guard: Option<Slot>, body: Box<Node> },
}

/// A formula with variables resolved to environment slots. Free variables take
/// slots `0..free.len()` in the order of `free`.
#[derive(Debug)]
pub struct Compiled {
    free: Vec<String>,
    slots: usize,
    root: Node,
}

impl Compiled {
    pub fn new(phi: &Formula, sig: &Signature) -> Result<Self> {
        let free = phi.free_variables();
        let mut scope: Vec<(String, usize)> = free.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut slots = free.len();
        let root = compile(phi, sig, &mut scope, &mut slots)?;
        Ok(Compiled { free, slots, root })
    }

    pub fn free_variables(&self) -> &[String] {
        &self.free
    }

    /// `values[i]` is the element assigned to `free_variables()[i]`.
    pub fn holds(&self, m: &FiniteMapping, values: &[Element]) -> bool {
        debug_assert_eq!(values.len(), self.free.len());
        let mut env = vec![0; self.slots.max(1)];
        env[..values.len()].copy_from_slice(values);
        eval(&self.root, m, &mut env)
    }
}

fn compile(phi: &Formula, sig: &Signature, scope: &mut Vec<(String, usize)>, slots: &mut usize) -> Result<Node> {
    let term = |t: &Term, scope: &Vec<(String, usize)>| -> Result<Slot> {
        scope
            .iter()
            .rev()
            .find(|(v, _)| *v == t.var)
            .map(|&(_, index)| Slot { index, depth: t.depth })
            .ok_or_else(|| Error::UnboundVariable(t.var.clone()))
    };
    Ok(match phi {
        Formula::True => Node::Const(true),
        Formula::False => Node::Const(false),
        Formula::Eq(a, b) => Node::Eq(term(a, scope)?, term(b, scope)?),
        Formula::Pred(p, t) => {
            let idx = sig.index_of(p).ok_or_else(|| Error::UnknownPredicate(p.clone()))?;
            Node::Pred(idx, term(t, scope)?)
        }
        Formula::Not(a) => Node::Not(Box::new(compile(a, sig, scope, slots)?)),
        Formula::And(a, b) => {
            Node::And(Box::new(compile(a, sig, scope, slots)?), Box::new(compile(b, sig, scope, slots)?))
        }
        Formula::Or(a, b) => {
            Node::Or(Box::new(compile(a, sig, scope, slots)?), Box::new(compile(b, sig, scope, slots)?))
        }
        Formula::Implies(a, b) => {
            Node::Implies(Box::new(compile(a, sig, scope, slots)?), Box::new(compile(b, sig, scope, slots)?))
        }
        Formula::Exists(v, g, body) | Formula::Forall(v, g, body) => {
            let guard = match g {
                Some(g) => Some(term(g, scope)?),
                None => None,
            };
            let slot = *slots;
            *slots += 1;
            scope.push((v.clone(), slot));
            let body = compile(body, sig, scope, slots);
            scope.pop();
            Node::Quant { exists: matches!(phi, Formula::Exists(..)), slot, guard, body: Box::new(body?) }
        }
    })
}

fn value(m: &FiniteMapping, env: &[Element], s: Slot) -> Element {
    m.iterate(env[s.index], s.depth)
}

fn eval(node: &Node, m: &FiniteMapping, env: &mut Vec<Element>) -> bool {
    match node {
        Node::Const(b) => *b,
        Node::Eq(a, b) => value(m, env, *a) == value(m, env, *b),
        Node::Pred(p, t) => m.has_mark(value(m, env, *t), *p),
        Node::Not(a) => !eval(a, m, env),
        Node::And(a, b) => eval(a, m, env) && eval(b, m, env),
        Node::Or(a, b) => eval(a, m, env) || eval(b, m, env),
        Node::Implies(a, b) => !eval(a, m, env) || eval(b, m, env),
        Node::Quant { exists, slot, guard, body } => {
            let check = |y: Element, env: &mut Vec<Element>| {
                env[*slot] = y;
                eval(body, m, env)
            };
            match guard {
                Some(g) => {
                    let around = value(m, env, *g);
                    let near = m.neighbors(around);
                    if *exists {
                        near.into_iter().any(|y| check(y, env))
                    } else {
                        near.into_iter().all(|y| check(y, env))
                    }
                }
                None => {
                    if *exists {
                        (0..m.len()).any(|y| check(y, env))
                    } else {
                        (0..m.len()).all(|y| check(y, env))
                    }
                }
            }
        }
    }
}

/// Tarskian satisfaction of `phi` in `m` under `assignment`.
pub fn evaluate(m: &FiniteMapping, phi: &Formula, assignment: &BTreeMap<String, Element>) -> Result<bool> {
    let c = Compiled::new(phi, m.signature())?;
    let mut values = Vec::with_capacity(c.free.len());
    for v in &c.free {
        let e = *assignment.get(v).ok_or_else(|| Error::UnboundVariable(v.clone()))?;
        m.check_element(e)?;
        values.push(e);
    }
    Ok(c.holds(m, &values))
}

/// `|phi(m)| / n^p`, enumerating all assignments.
pub fn stone_pairing(m: &FiniteMapping, phi: &Formula) -> Result<Rational> {
    stone_pairing_with_budget(m, phi, DEFAULT_ASSIGNMENT_BUDGET)
}

pub fn stone_pairing_with_budget(m: &FiniteMapping, phi: &Formula, budget: u128) -> Result<Rational> {
    let c = Compiled::new(phi, m.signature())?;
    let n = m.len();
    let p = c.free.len();
    let total = (n as u128).checked_pow(p as u32).filter(|&t| t <= budget);
    let Some(total) = total else {
        return Err(Error::BudgetExceeded(format!("{n}^{p} assignments exceed {budget}")));
    };
    let mut values = vec![0; p];
    let mut hits: u128 = 0;
    for _ in 0..total {
        if c.holds(m, &values) {
            hits += 1;
        }
        for slot in values.iter_mut().rev() {
            *slot += 1;
            if *slot < n {
                break;
            }
            *slot = 0;
        }
    }
    if p == 0 {
        return Ok(if hits > 0 { Rational::one() } else { Rational::from_integer(0.into()) });
    }
    Ok(Rational::new(BigInt::from(hits), BigInt::from(total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse;
    use crate::rational::ratio;

    fn holds(m: &FiniteMapping, text: &str, x1: Element) -> bool {
        let phi = parse(text, m.signature()).unwrap();
        evaluate(m, &phi, &BTreeMap::from([("x1".to_string(), x1)])).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        assert!(holds(&FiniteMapping::cycle(2), "f(f(x1))=x1", 0));
        assert!(holds(&FiniteMapping::fixed_point(), "f(x1)=x1", 0));
        assert!(!holds(&FiniteMapping::cycle(3), "exists y (f(y)=x1 & f(x1)=y)", 0));
    }

    #[test]
    fn missing_assignment_is_reported() {
        let m = FiniteMapping::cycle(3);
        let phi = parse("f(x1)=x2", m.signature()).unwrap();
        let r = evaluate(&m, &phi, &BTreeMap::from([("x1".to_string(), 0)]));
        assert_eq!(r, Err(Error::UnboundVariable("x2".into())));
    }

    #[test]
    fn pairing_examples() {
        let m = FiniteMapping::identity(4);
        let eq = parse("x1=x2", m.signature()).unwrap();
        assert_eq!(stone_pairing(&m, &eq).unwrap(), ratio(1, 4));

        let sig = Signature::with_predicates(&["M1"]).unwrap();
        let marked = FiniteMapping::new(sig.clone(), vec![0, 1, 2, 3, 4], vec![vec![1, 3]]).unwrap();
        let m1 = parse("M1(x1)", &sig).unwrap();
        assert_eq!(stone_pairing(&marked, &m1).unwrap(), ratio(2, 5));

        let c3 = FiniteMapping::cycle(3);
        let onto = parse("exists y f(y)=x1", c3.signature()).unwrap();
        assert_eq!(stone_pairing(&c3, &onto).unwrap(), ratio(1, 1));
    }

    #[test]
    fn sentences_pair_to_zero_or_one() {
        let c3 = FiniteMapping::cycle(3);
        let fixed = parse("exists y f(y)=y", c3.signature()).unwrap();
        assert_eq!(stone_pairing(&c3, &fixed).unwrap(), ratio(0, 1));
        assert_eq!(stone_pairing(&FiniteMapping::star(2), &fixed).unwrap(), ratio(1, 1));
    }

    #[test]
    fn budget_guard() {
        let m = FiniteMapping::identity(100);
        let phi = parse("x1=x2 & x3=x4", m.signature()).unwrap();
        assert!(matches!(stone_pairing_with_budget(&m, &phi, 1000), Err(Error::BudgetExceeded(_))));
    }
}
