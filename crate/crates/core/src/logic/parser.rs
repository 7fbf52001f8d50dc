//! Recursive-descent parser; see `docs/grammar.md` for the concrete syntax.

use super::ast::{variable_index, Formula, Term};
use crate::error::{Error, Result};
use crate::structure::Signature;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Eq,
    Neq,
    Not,
    And,
    Or,
    Arrow,
    Tilde,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'=' => Tok::Eq,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'~' => Tok::Tilde,
            b'!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Neq
            }
            b'!' => Tok::Not,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(Error::Syntax { position: i, message: format!("unexpected character `{}`", c as char) })
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sig: &'a Signature,
    bound: Vec<String>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn error(&self, message: &str) -> Error {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            t => format!("{t:?}"),
        };
        Error::Syntax { position: self.offset(), message: format!("{message}, found {found}") }
    }

    fn formula(&mut self) -> Result<Formula> {
        let left = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let right = self.formula()?;
            return Ok(left.implies(right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut f = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            f = f.or(self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            f = f.and(self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(self.unary()?.not())
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(word) if word == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(word) if word == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(word) if word == "exists" || word == "forall" => {
                self.bump();
                let var = match self.bump() {
                    Tok::Ident(v) if self.is_variable_name(&v) => v,
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("expected a variable name"));
                    }
                };
                let guard = if *self.peek() == Tok::Tilde {
                    self.bump();
                    Some(self.term()?)
                } else {
                    None
                };
                self.bound.push(var.clone());
                let body = self.unary();
                self.bound.pop();
                let body = Box::new(body?);
                Ok(if word == "exists" {
                    Formula::Exists(var, guard, body)
                } else {
                    Formula::Forall(var, guard, body)
                })
            }
            Tok::Ident(word) if self.sig.index_of(&word).is_some() => {
                self.bump();
                self.expect(Tok::LParen, "`(`").map_err(|_| Error::Arity(word.clone()))?;
                if *self.peek() == Tok::RParen {
                    return Err(Error::Arity(word));
                }
                let t = self.term()?;
                if *self.peek() == Tok::Comma {
                    return Err(Error::Arity(word));
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Formula::Pred(word, t))
            }
            Tok::Ident(_) => {
                let a = self.term()?;
                let negated = match self.bump() {
                    Tok::Eq => false,
                    Tok::Neq => true,
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("expected `=` or `!=`"));
                    }
                };
                let b = self.term()?;
                let atom = Formula::Eq(a, b);
                Ok(if negated { atom.not() } else { atom })
            }
            _ => Err(self.error("expected a formula")),
        }
    }

    fn is_variable_name(&self, v: &str) -> bool {
        v != self.sig.function()
            && self.sig.index_of(v).is_none()
            && !matches!(v, "exists" | "forall" | "true" | "false")
    }

    fn term(&mut self) -> Result<Term> {
        match self.bump() {
            Tok::Ident(w) if w == self.sig.function() => {
                self.expect(Tok::LParen, "`(`").map_err(|_| Error::Arity(w.clone()))?;
                if *self.peek() == Tok::RParen {
                    return Err(Error::Arity(w));
                }
                let inner = self.term()?;
                if *self.peek() == Tok::Comma {
                    return Err(Error::Arity(w));
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Term { var: inner.var, depth: inner.depth + 1 })
            }
            Tok::Ident(w) if self.sig.index_of(&w).is_some() => {
                Err(Error::Syntax { position: self.toks[self.pos - 1].1, message: format!("predicate `{w}` used as a term") })
            }
            Tok::Ident(w) if self.is_variable_name(&w) => {
                if !self.bound.contains(&w) && variable_index(&w).is_none() {
                    return Err(Error::UnknownSymbol(w));
                }
                Ok(Term::var(w))
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected a term"))
            }
        }
    }
}

/// Parse `text` over `sig`. Unbound variables must be named `x1`, `x2`, ...
pub fn parse(text: &str, sig: &Signature) -> Result<Formula> {
    let mut p = Parser { toks: lex(text)?, pos: 0, sig, bound: Vec::new() };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.error("trailing input"));
    }
    Ok(f)
}
