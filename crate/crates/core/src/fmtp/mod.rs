//! Mass transport on finite mappings and companion certificates for rational type
//! measures.
//!
//! For a measure `μ` of rank `R` and a rank `r` with `R >= 2r+1`, a companion `s`
//! assigns to each `(τ, t)` a value agreeing with `adm⁻(τ, t)` below `r` and at least
//! `r` otherwise, such that for all rank-`r` types `t1, t2`
//!
//! ```text
//! Σ_{τ1 ≺ t1} adm⁺(τ1, t2) μ(τ1) = Σ_{τ2 ≺ t2} s(τ2, t1) μ(τ2).
//! ```
//!
//! Each equation mentions its own free values `s(τ2, t1)` only, so feasibility is
//! decided per equation in closed form.

mod approx;
pub mod simplex;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rational::{int, to_text, Rational};
use crate::structure::{Element, FiniteMapping};
use crate::types::{LocalType, TypeMeasure, TypeSession};

pub use approx::{approximate_measure, approximate_measure_with, ApproxOptions, Approximation};

/// Both sides of `ν(A ∩ f⁻¹(B)) = Σ_{y∈B} ν(f⁻¹(y) ∩ A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FmtpSides {
    pub left: Rational,
    pub right: Rational,
}

impl FmtpSides {
    pub fn holds(&self) -> bool {
        self.left == self.right
    }
}

pub fn check_fmtp(f: &FiniteMapping, a: &[Element], b: &[Element]) -> Result<FmtpSides> {
    for &v in a.iter().chain(b) {
        f.check_element(v)?;
    }
    let n = f.len();
    let mut in_a = vec![false; n];
    let mut in_b = vec![false; n];
    for &v in a {
        in_a[v] = true;
    }
    for &v in b {
        in_b[v] = true;
    }
    let left = (0..n).filter(|&x| in_a[x] && in_b[f.f(x)]).count();
    let right: usize = (0..n).filter(|&y| in_b[y]).map(|y| f.pre(y).iter().filter(|&&x| in_a[x]).count()).sum();
    Ok(FmtpSides { left: crate::rational::ratio(left, n), right: crate::rational::ratio(right, n) })
}

/// A failed balance equation, or a companion value that disagrees with `adm⁻`.
#[derive(Clone, Debug)]
pub struct Violation {
    pub t1: LocalType,
    pub t2: LocalType,
    pub lhs: Rational,
    pub rhs: Rational,
    pub reason: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} for (t{}, t{}): {} vs {}",
            self.reason,
            self.t1.id(),
            self.t2.id(),
            to_text(&self.lhs),
            to_text(&self.rhs)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompanionEntry {
    /// Index into the certified measure's entries.
    pub tau: usize,
    /// Index into `types`.
    pub t: usize,
    pub value: Rational,
}

/// Companion values `s(τ, t)`; pairs not listed have value 0.
#[derive(Clone, Debug)]
pub struct CompanionCertificate {
    pub big_rank: usize,
    pub r: usize,
    pub types: Vec<LocalType>,
    pub entries: Vec<CompanionEntry>,
}

#[derive(Clone, Debug)]
pub enum Certification {
    Certified(CompanionCertificate),
    Violated(Violation),
}

impl Certification {
    pub fn certificate(&self) -> Option<&CompanionCertificate> {
        match self {
            Certification::Certified(c) => Some(c),
            Certification::Violated(_) => None,
        }
    }

    pub fn violation(&self) -> Option<&Violation> {
        match self {
            Certification::Certified(_) => None,
            Certification::Violated(v) => Some(v),
        }
    }
}

fn check_rank(big_rank: usize, r: usize) -> Result<()> {
    if big_rank < 2 * r + 1 {
        return Err(Error::RankTooLow { needed: 2 * r + 1, got: big_rank });
    }
    Ok(())
}

fn intern(types: &mut Vec<LocalType>, t: LocalType) -> usize {
    match types.iter().position(|u| *u == t) {
        Some(i) => i,
        None => {
            types.push(t);
            types.len() - 1
        }
    }
}

/// Rank-`r` data of a measure's support: projections, image types and capped
/// preimage counts, all indexing into `types`.
pub(crate) struct Analysis {
    pub types: Vec<LocalType>,
    pub proj: Vec<usize>,
    pub image: Vec<usize>,
    pub pre: Vec<Vec<(usize, usize)>>,
}

pub(crate) fn analyze(mu: &TypeMeasure, r: usize, session: &TypeSession) -> Result<Analysis> {
    let mut types = Vec::new();
    let mut proj = Vec::new();
    let mut image = Vec::new();
    let mut pre = Vec::new();
    for (tau, _) in mu.entries() {
        let p = session.project(tau, r)?;
        proj.push(intern(&mut types, p));
    }
    for (tau, _) in mu.entries() {
        let w = tau.witness();
        let i = session.local_type(w, w.f(tau.root()), r)?;
        image.push(intern(&mut types, i));
    }
    for (tau, _) in mu.entries() {
        let counts = session.preimage_types(tau, r)?;
        pre.push(counts.into_iter().map(|(t, c)| (intern(&mut types, t), c)).collect());
    }
    Ok(Analysis { types, proj, image, pre })
}

/// One balance equation `(t1, t2)`. `lhs` lists support indices on the left;
/// `fixed` and `vars` split the right-hand side by whether `s` is pinned.
#[derive(Default, Debug)]
pub(crate) struct Equation {
    pub lhs: Vec<usize>,
    pub fixed: Vec<(usize, usize)>,
    pub vars: Vec<usize>,
}

impl Equation {
    /// Coefficient of `μ(τ)` in `lhs - fixed - r·vars`.
    pub fn coefficients(&self, r: usize, k: usize) -> Vec<Rational> {
        let mut a = vec![Rational::zero(); k];
        for &i in &self.lhs {
            a[i] += int(1);
        }
        for &(i, c) in &self.fixed {
            a[i] -= int(c);
        }
        for &i in &self.vars {
            a[i] -= int(r);
        }
        a
    }
}

pub(crate) fn equations(an: &Analysis, r: usize) -> BTreeMap<(usize, usize), Equation> {
    let mut eqs: BTreeMap<(usize, usize), Equation> = BTreeMap::new();
    for k in 0..an.proj.len() {
        eqs.entry((an.proj[k], an.image[k])).or_default().lhs.push(k);
        if r == 0 {
            for t1 in 0..an.types.len() {
                eqs.entry((t1, an.proj[k])).or_default().vars.push(k);
            }
            continue;
        }
        for &(t1, c) in &an.pre[k] {
            let e = eqs.entry((t1, an.proj[k])).or_default();
            if c < r {
                e.fixed.push((k, c));
            } else {
                e.vars.push(k);
            }
        }
    }
    eqs
}

fn sum(mu: &TypeMeasure, ks: impl IntoIterator<Item = usize>) -> Rational {
    ks.into_iter().fold(Rational::zero(), |acc, k| acc + &mu.entries()[k].1)
}

/// Solve the companion system for `μ` at rank `r`, or report the first failed
/// equation.
pub fn restricted_fmtp_certificate(mu: &TypeMeasure, r: usize, session: &TypeSession) -> Result<Certification> {
    check_rank(mu.rank(), r)?;
    let an = analyze(mu, r, session)?;
    let eqs = equations(&an, r);
    let mut values: HashMap<(usize, usize), Rational> = HashMap::new();
    for (&(t1, t2), e) in &eqs {
        let lhs = sum(mu, e.lhs.iter().copied());
        let fixed = e.fixed.iter().fold(Rational::zero(), |acc, &(k, c)| acc + int(c) * &mu.entries()[k].1);
        let violated = |rhs: Rational, reason: &str| Violation {
            t1: an.types[t1].clone(),
            t2: an.types[t2].clone(),
            lhs: lhs.clone(),
            rhs,
            reason: reason.to_string(),
        };
        if e.vars.is_empty() {
            if lhs != fixed {
                return Ok(Certification::Violated(violated(fixed, "balance fails")));
            }
            continue;
        }
        let var_mass = sum(mu, e.vars.iter().copied());
        let floor = &fixed + int(r) * &var_mass;
        if lhs < floor {
            return Ok(Certification::Violated(violated(floor, "right side already exceeds left")));
        }
        let value = int(r) + (&lhs - &floor) / &var_mass;
        for &k in &e.vars {
            values.insert((k, t1), value.clone());
        }
    }
    let mut entries = Vec::new();
    for (k, pre) in an.pre.iter().enumerate() {
        let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
        for &(t, c) in pre {
            if c < r {
                row.insert(t, int(c));
            }
        }
        for t in 0..an.types.len() {
            if let Some(v) = values.get(&(k, t)) {
                row.insert(t, v.clone());
            }
        }
        entries.extend(row.into_iter().filter(|(_, v)| !v.is_zero()).map(|(t, value)| CompanionEntry { tau: k, t, value }));
    }
    Ok(Certification::Certified(CompanionCertificate { big_rank: mu.rank(), r, types: an.types, entries }))
}

impl CompanionCertificate {
    pub fn value(&self, tau: usize, t: usize) -> Rational {
        self.entries
            .iter()
            .find(|e| e.tau == tau && e.t == t)
            .map_or_else(Rational::zero, |e| e.value.clone())
    }

    /// Re-check the caps and every balance equation against `μ`, recomputing all
    /// `adm` values through the session. `Ok(None)` means the certificate holds.
    pub fn verify(&self, mu: &TypeMeasure, session: &TypeSession) -> Result<Option<Violation>> {
        let r = self.r;
        check_rank(mu.rank(), r)?;
        if mu.rank() != self.big_rank {
            return Err(Error::RankMismatch(mu.rank(), self.big_rank));
        }
        if let Some(e) = self.entries.iter().find(|e| e.tau >= mu.len() || e.t >= self.types.len()) {
            return Err(Error::InvalidArgument(format!("certificate entry ({}, {}) out of range", e.tau, e.t)));
        }
        let mut types = self.types.clone();
        let mut proj = Vec::new();
        let mut image = Vec::new();
        for (tau, _) in mu.entries() {
            proj.push(intern(&mut types, session.project(tau, r)?));
            let w = tau.witness();
            image.push(intern(&mut types, session.local_type(w, w.f(tau.root()), r)?));
            for (t, _) in session.preimage_types(tau, r)? {
                intern(&mut types, t);
            }
        }
        let lookup: HashMap<(usize, usize), &Rational> = self.entries.iter().map(|e| ((e.tau, e.t), &e.value)).collect();
        let zero = Rational::zero();
        let cap = int(r);
        for (k, (tau, _)) in mu.entries().iter().enumerate() {
            for (t, ty) in types.iter().enumerate() {
                let adm = int(session.adm_minus(tau, ty)?);
                let s = *lookup.get(&(k, t)).unwrap_or(&&zero);
                let ok = if *s < cap || adm < cap { *s == adm } else { true };
                if s.is_negative() || !ok {
                    return Ok(Some(Violation {
                        t1: ty.clone(),
                        t2: types[proj[k]].clone(),
                        lhs: adm,
                        rhs: s.clone(),
                        reason: format!("companion value of support entry {k} disagrees with adm-"),
                    }));
                }
            }
        }
        let mut left: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        let mut right: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (k, (_, q)) in mu.entries().iter().enumerate() {
            *left.entry((proj[k], image[k])).or_default() += q;
        }
        for e in &self.entries {
            *right.entry((e.t, proj[e.tau])).or_default() += &e.value * &mu.entries()[e.tau].1;
        }
        let keys: BTreeSet<(usize, usize)> = left.keys().chain(right.keys()).copied().collect();
        for key in keys {
            let l = left.get(&key).unwrap_or(&zero);
            let rr = right.get(&key).unwrap_or(&zero);
            if l != rr {
                return Ok(Some(Violation {
                    t1: types[key.0].clone(),
                    t2: types[key.1].clone(),
                    lhs: l.clone(),
                    rhs: rr.clone(),
                    reason: "balance fails".into(),
                }));
            }
        }
        Ok(None)
    }

    /// SHA-256 over the ranks and entries, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut text = format!("{} {}\n", self.big_rank, self.r);
        for e in &self.entries {
            let _ = writeln!(text, "{} {} {}", e.tau, e.t, to_text(&e.value));
        }
        Sha256::digest(text.as_bytes()).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn pass(detail: impl Into<String>) -> Self {
        Check { passed: true, detail: detail.into() }
    }

    fn fail(detail: impl Into<String>) -> Self {
        Check { passed: false, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizabilityReport {
    pub clean: Check,
    pub short_cycles: Check,
    pub certificate: Check,
}

impl RealizabilityReport {
    pub fn passed(&self) -> bool {
        self.clean.passed && self.short_cycles.passed && self.certificate.passed
    }

    /// First failing check, as `name: detail`.
    pub fn failure(&self) -> Option<String> {
        [("clean", &self.clean), ("short cycles", &self.short_cycles), ("certificate", &self.certificate)]
            .into_iter()
            .find(|(_, c)| !c.passed)
            .map(|(name, c)| format!("{name}: {}", c.detail))
    }
}

/// Cleanness, absence of cycles of length in `(1, cut_length]` at witness roots,
/// and existence of a companion certificate.
pub fn check_realizability_preconditions(
    mu: &TypeMeasure,
    cut_length: usize,
    r: usize,
    session: &TypeSession,
) -> Result<RealizabilityReport> {
    check_rank(mu.rank(), r)?;
    let below = mu.rank() - 1;
    let projected = mu.project(below, session)?;
    let mut clean = Check::pass("every image type carries mass");
    for (k, (tau, _)) in mu.entries().iter().enumerate() {
        let t = session.transport(tau)?;
        if projected.mass_of(&t).is_zero() {
            clean = Check::fail(format!("image type of support entry {k} has zero mass"));
            break;
        }
    }
    let mut short_cycles = Check::pass(format!("no root on a cycle of length 2..={cut_length}"));
    for (k, (tau, _)) in mu.entries().iter().enumerate() {
        let len = tau.witness().cyclic_part().cycle_len[tau.root()];
        if len > 1 && len <= cut_length {
            short_cycles = Check::fail(format!("support entry {k} lies on a cycle of length {len}"));
            break;
        }
    }
    let certificate = match restricted_fmtp_certificate(mu, r, session)? {
        Certification::Certified(c) => Check::pass(format!("certificate {}", &c.fingerprint()[..16])),
        Certification::Violated(v) => Check::fail(v.to_string()),
    };
    Ok(RealizabilityReport { clean, short_cycles, certificate })
}

#[cfg(test)]
mod tests;
