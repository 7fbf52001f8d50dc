//! Nearby strictly positive measures satisfying the companion system.
//!
//! Variables are `x_τ = δ + x'_τ` with `x' >= 0`. Each balance equation with free
//! companion values becomes `Σ a_τ x_τ >= 0`, the others `Σ a_τ x_τ = 0`. Distance
//! to `μ` is `Σ (p_τ + q_τ)` with `x'_τ - p_τ + q_τ = μ(τ) - δ`.

use num_traits::{One, Zero};

use super::simplex::{minimize, LpOutcome};
use super::{analyze, check_rank, equations, restricted_fmtp_certificate, Certification, CompanionCertificate};
use crate::error::{Error, Result};
use crate::rational::{int, total_variation, Rational};
use crate::types::{TypeMeasure, TypeSession};

#[derive(Clone, Debug)]
pub struct ApproxOptions {
    /// Solve the program even when `μ` is already certified.
    pub force_lp: bool,
    /// How many times `δ` may be halved.
    pub max_retries: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions { force_lp: false, max_retries: 8 }
    }
}

#[derive(Clone, Debug)]
pub struct Approximation {
    pub measure: TypeMeasure,
    pub certificate: CompanionCertificate,
    pub distance: Rational,
    pub used_lp: bool,
}

/// A measure on the same support with positive rational masses, within total
/// variation `eps` of `μ`, that admits a companion certificate at rank `r`.
pub fn approximate_measure(mu: &TypeMeasure, eps: &Rational, r: usize, session: &TypeSession) -> Result<TypeMeasure> {
    Ok(approximate_measure_with(mu, eps, r, session, &ApproxOptions::default())?.measure)
}

pub fn approximate_measure_with(
    mu: &TypeMeasure,
    eps: &Rational,
    r: usize,
    session: &TypeSession,
    options: &ApproxOptions,
) -> Result<Approximation> {
    check_rank(mu.rank(), r)?;
    if *eps <= Rational::zero() {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if mu.is_empty() {
        return Err(Error::Infeasible("empty measure".into()));
    }
    let first = restricted_fmtp_certificate(mu, r, session)?;
    if let (Certification::Certified(c), false) = (&first, options.force_lp) {
        return Ok(Approximation { measure: mu.clone(), certificate: c.clone(), distance: Rational::zero(), used_lp: false });
    }

    let an = analyze(mu, r, session)?;
    let eqs = equations(&an, r);
    let k = mu.len();
    let masses: Vec<Rational> = mu.entries().iter().map(|(_, q)| q.clone()).collect();
    let mut delta = masses.iter().min().cloned().unwrap() / int(2);
    let rows: Vec<(Vec<Rational>, bool)> = eqs.values().map(|e| (e.coefficients(r, k), !e.vars.is_empty())).collect();
    let slacks = rows.iter().filter(|(_, ineq)| *ineq).count();
    let width = 3 * k + slacks;

    let mut last = String::from("program infeasible");
    for _ in 0..=options.max_retries {
        let mut a: Vec<Vec<Rational>> = Vec::new();
        let mut b: Vec<Rational> = Vec::new();
        let mut row = vec![Rational::zero(); width];
        for v in row.iter_mut().take(k) {
            *v = Rational::one();
        }
        a.push(row);
        b.push(Rational::one() - int(k) * &delta);
        for i in 0..k {
            let mut row = vec![Rational::zero(); width];
            row[i] = Rational::one();
            row[k + i] = -Rational::one();
            row[2 * k + i] = Rational::one();
            a.push(row);
            b.push(&masses[i] - &delta);
        }
        let mut slack = 3 * k;
        for (coef, ineq) in &rows {
            let mut row = vec![Rational::zero(); width];
            row[..k].clone_from_slice(coef);
            if *ineq {
                row[slack] = -Rational::one();
                slack += 1;
            }
            let total: Rational = coef.iter().sum();
            a.push(row);
            b.push(-(&delta * total));
        }
        let mut c = vec![Rational::zero(); width];
        for v in c.iter_mut().skip(k).take(2 * k) {
            *v = Rational::one();
        }
        if let LpOutcome::Optimal { x, .. } = minimize(&a, &b, &c) {
            let new_masses: Vec<Rational> = x[..k].iter().map(|v| v + &delta).collect();
            let distance = total_variation(&masses, &new_masses);
            if distance < *eps {
                let entries = mu.entries().iter().map(|(t, _)| t.clone()).zip(new_masses).collect();
                let measure = TypeMeasure::new(mu.rank(), entries)?;
                return match restricted_fmtp_certificate(&measure, r, session)? {
                    Certification::Certified(certificate) => {
                        Ok(Approximation { measure, certificate, distance, used_lp: true })
                    }
                    Certification::Violated(v) => Err(Error::Infeasible(format!("solver output fails: {v}"))),
                };
            }
            last = format!("closest point at distance {distance}");
        }
        delta /= int(2);
    }
    let reason = match first {
        Certification::Violated(v) => format!("{last}; input violates {v}"),
        Certification::Certified(_) => last,
    };
    Err(Error::Infeasible(reason))
}
