use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// `f^depth(var)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub var: String,
    pub depth: usize,
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term { var: name.into(), depth: 0 }
    }

    pub fn apply(name: impl Into<String>, depth: usize) -> Self {
        Term { var: name.into(), depth }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Pred(String, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// Bound variable, optional guard term (the variable then ranges over the
    /// Gaifman neighbors of the guard), body.
    Exists(String, Option<Term>, Box<Formula>),
    Forall(String, Option<Term>, Box<Formula>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankKind {
    Quantifier,
    Local,
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Self {
        Formula::Eq(a, b)
    }

    /// `f(x) = y`.
    pub fn maps_to(x: &str, y: &str) -> Self {
        Formula::Eq(Term::apply(x, 1), Term::var(y))
    }

    pub fn pred(name: impl Into<String>, var: &str) -> Self {
        Formula::Pred(name.into(), Term::var(var))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Formula) -> Self {
        Formula::Implies(Box::new(self), Box::new(other))
    }

    pub fn exists(var: &str, body: Formula) -> Self {
        Formula::Exists(var.into(), None, Box::new(body))
    }

    pub fn exists_near(var: &str, guard: &str, body: Formula) -> Self {
        Formula::Exists(var.into(), Some(Term::var(guard)), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Self {
        Formula::Forall(var.into(), None, Box::new(body))
    }

    pub fn forall_near(var: &str, guard: &str, body: Formula) -> Self {
        Formula::Forall(var.into(), Some(Term::var(guard)), Box::new(body))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn all(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn any(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    /// Free variables, sorted by their numeric suffix for `x<i>` names.
    pub fn free_variables(&self) -> Vec<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        let mut v: Vec<String> = out.into_iter().collect();
        v.sort_by_key(|name| (variable_index(name).unwrap_or(usize::MAX), name.clone()));
        v
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<String>| {
            if !bound.contains(&t.var) {
                out.insert(t.var.clone());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Formula::Pred(_, t) => term(t, bound),
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, g, body) | Formula::Forall(v, g, body) => {
                if let Some(g) = g {
                    term(g, bound);
                }
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// No iterated terms, and `f` only in atoms `f(x)=y`.
    pub fn is_clean(&self) -> bool {
        match self {
            Formula::True | Formula::False => true,
            Formula::Eq(a, b) => a.depth + b.depth <= 1,
            Formula::Pred(_, t) => t.depth == 0,
            Formula::Not(a) => a.is_clean(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => a.is_clean() && b.is_clean(),
            Formula::Exists(_, g, body) | Formula::Forall(_, g, body) => {
                g.as_ref().map_or(true, |g| g.depth == 0) && body.is_clean()
            }
        }
    }

    pub fn is_guarded(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Pred(..) => true,
            Formula::Not(a) => a.is_guarded(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => a.is_guarded() && b.is_guarded(),
            Formula::Exists(_, g, body) | Formula::Forall(_, g, body) => g.is_some() && body.is_guarded(),
        }
    }

    /// Quantifier nesting depth of this clean form.
    pub fn rank(&self, kind: RankKind) -> Result<usize> {
        if !self.is_clean() {
            return Err(Error::NotClean);
        }
        if kind == RankKind::Local && !self.is_guarded() {
            return Err(Error::NotGuarded);
        }
        Ok(self.depth())
    }

    fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Pred(..) => 0,
            Formula::Not(a) => a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => a.depth().max(b.depth()),
            Formula::Exists(_, _, body) | Formula::Forall(_, _, body) => 1 + body.depth(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Pred(..) => 1,
            Formula::Not(a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => 1 + a.size() + b.size(),
            Formula::Exists(_, _, body) | Formula::Forall(_, _, body) => 1 + body.size(),
        }
    }

    /// Render with `f` as the function symbol.
    pub fn to_text(&self, function: &str) -> String {
        let mut s = String::new();
        self.write(function, 0, &mut s);
        s
    }

    fn write(&self, fname: &str, ctx: u8, out: &mut String) {
        let paren = |level: u8, out: &mut String, body: &dyn Fn(&mut String)| {
            if ctx > level {
                out.push('(');
                body(out);
                out.push(')');
            } else {
                body(out);
            }
        };
        match self {
            Formula::True => out.push_str("true"),
            Formula::False => out.push_str("false"),
            Formula::Eq(a, b) => {
                write_term(a, fname, out);
                out.push('=');
                write_term(b, fname, out);
            }
            Formula::Pred(p, t) => {
                out.push_str(p);
                out.push('(');
                write_term(t, fname, out);
                out.push(')');
            }
            Formula::Not(a) => {
                out.push('!');
                a.write(fname, 3, out);
            }
            Formula::And(a, b) => paren(2, out, &|out| {
                a.write(fname, 2, out);
                out.push_str(" & ");
                b.write(fname, 3, out);
            }),
            Formula::Or(a, b) => paren(1, out, &|out| {
                a.write(fname, 1, out);
                out.push_str(" | ");
                b.write(fname, 2, out);
            }),
            Formula::Implies(a, b) => paren(0, out, &|out| {
                a.write(fname, 1, out);
                out.push_str(" -> ");
                b.write(fname, 0, out);
            }),
            Formula::Exists(v, g, body) | Formula::Forall(v, g, body) => {
                out.push_str(if matches!(self, Formula::Exists(..)) { "exists " } else { "forall " });
                out.push_str(v);
                if let Some(g) = g {
                    out.push_str(" ~ ");
                    write_term(g, fname, out);
                }
                out.push_str(" (");
                body.write(fname, 0, out);
                out.push(')');
            }
        }
    }
}

fn write_term(t: &Term, fname: &str, out: &mut String) {
    for _ in 0..t.depth {
        out.push_str(fname);
        out.push('(');
    }
    out.push_str(&t.var);
    for _ in 0..t.depth {
        out.push(')');
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text("f"))
    }
}

/// `x7` → `Some(7)`.
pub fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

/// Distance at most `r` between `x1` and `x2`, written with guarded quantifiers only.
pub fn build_delta(r: usize) -> Formula {
    fn reach(from: &str, level: usize) -> Formula {
        let here = Formula::eq(Term::var(from), Term::var("x2"));
        if level == 0 {
            return here;
        }
        let next = format!("y{level}");
        here.or(Formula::exists_near(&next, from, reach(&next, level - 1)))
    }
    reach("x1", r)
}
