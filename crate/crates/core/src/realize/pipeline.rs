//! End-to-end approximation: residualize, cut cycles, extract and certify the type
//! measure, realize it, close the cycles again, and glue many copies next to the
//! input.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{find_terminals, merge, realize_with, rewire};
use crate::error::{Error, Result};
use crate::fmtp::{approximate_measure_with, ApproxOptions};
use crate::rational::{int, Rational};
use crate::structure::{cycle_cut_product, residualize, Cut, Element, FiniteMapping, Residualization};
use crate::types::{TypeMeasure, TypeSession};

/// Ranks, tolerances and sizes driving one pipeline run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub r: usize,
    /// Rank at which the realized piece matches the measure.
    pub rr: usize,
    /// Rank of the extracted measure.
    pub clean: usize,
    pub cut: usize,
    /// Rank of the types recorded by the cut product.
    pub type_rank: usize,
    pub elementary_rank: usize,
    pub eps: Rational,
    pub eps_res: Rational,
    pub eps_f1: Rational,
    pub eps_mu: Rational,
    pub multiplier: usize,
    pub n_away: usize,
    /// Fixed number of close copies; by default `⌈|E1| / (|F2| ε_res)⌉`.
    pub n_close: Option<usize>,
    /// Largest structure any stage may build.
    pub max_elements: usize,
}

pub const DEFAULT_MAX_ELEMENTS: usize = 20_000_000;

fn lcm_upto(k: usize) -> usize {
    (1..=k).fold(1, |acc, i| acc.lcm(&i))
}

fn ceil(q: &Rational) -> usize {
    q.ceil().to_integer().to_usize().expect("small ceiling")
}

impl PipelineConfig {
    /// Small ranks that keep every stage in memory: `rr = r`, `clean = 2r+1`, and the
    /// least multiple of `lcm(1..=r+1)` above `clean + 1` as cut length.
    pub fn desk(r: usize, p: usize, eps: &Rational) -> Result<Self> {
        let step = lcm_upto(r + 1);
        let clean = 2 * r + 1;
        let cut = ((clean + 1) / step + 1) * step;
        Self::with_ranks(r, r, clean, cut, p, eps)
    }

    /// `rr = 4r²`, `clean = 2rr+1`, `cut = clean!`. Fails with `ScheduleInfeasible` when
    /// the cut product of an `n`-element input would exceed the element budget.
    pub fn faithful(r: usize, p: usize, eps: &Rational, n: usize) -> Result<Self> {
        let rr = 4 * r * r;
        let clean = 2 * rr + 1;
        let cut: BigUint = (1..=clean).map(BigUint::from).product();
        let size = &cut * BigUint::from(n);
        match cut.to_usize().filter(|_| size <= BigUint::from(DEFAULT_MAX_ELEMENTS)) {
            Some(cut) => Self::with_ranks(r, rr, clean, cut, p, eps),
            None => Err(Error::ScheduleInfeasible(format!(
                "cut = clean! = {clean}! = {cut}; the cut product of {n} elements has {size} elements, over the budget of {DEFAULT_MAX_ELEMENTS}"
            ))),
        }
    }

    fn with_ranks(r: usize, rr: usize, clean: usize, cut: usize, p: usize, eps: &Rational) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("p must be at least 1".into()));
        }
        if *eps <= Rational::zero() || *eps >= Rational::one() {
            return Err(Error::InvalidArgument("epsilon must lie in (0,1)".into()));
        }
        let eps_res = eps / int(p * p);
        let n_away = 2 * ceil(&(Rational::one() / &eps_res));
        let cfg = PipelineConfig {
            r,
            rr,
            clean,
            cut,
            type_rank: r,
            elementary_rank: r,
            eps: eps.clone(),
            eps_f1: eps_res.clone(),
            eps_mu: eps_res.clone(),
            eps_res,
            multiplier: 1,
            n_away,
            n_close: None,
            max_elements: DEFAULT_MAX_ELEMENTS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.rr < self.r {
            return bad(format!("rr = {} is below r = {}", self.rr, self.r));
        }
        if self.clean < 2 * self.rr + 1 {
            return bad(format!("clean = {} is below 2rr+1", self.clean));
        }
        if self.cut < 2 {
            return bad("cut length must be at least 2".into());
        }
        if self.cut % lcm_upto(self.type_rank + 1) != 0 {
            return bad(format!("cut length {} is not a multiple of lcm(1..={})", self.cut, self.type_rank + 1));
        }
        if self.type_rank < self.r {
            return bad("type rank must be at least r".into());
        }
        if self.multiplier == 0 || self.n_away == 0 || self.n_close == Some(0) {
            return bad("multiplier and copy counts must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum Schedule {
    Desk,
    Faithful,
    Custom(PipelineConfig),
}

#[derive(Clone, Debug)]
pub struct StageReport {
    pub name: String,
    pub size: usize,
    pub millis: u128,
    /// Rank-`r` type masses by session id, when computed.
    pub histogram: Vec<(u32, Rational)>,
    /// Rank-`r` local distance to the stage this one should match.
    pub ldist: Option<Rational>,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    pub p: usize,
    pub stages: Vec<StageReport>,
    pub cuts: usize,
    pub certificate: String,
    pub n_close: usize,
    pub final_ldist: Rational,
    pub within_epsilon: bool,
}

fn histogram(mu: &TypeMeasure) -> Vec<(u32, Rational)> {
    mu.entries().iter().map(|(t, q)| (t.id(), q.clone())).collect()
}

fn ab_names(c: &Cut) -> (String, String) {
    (format!("A{}", c.index), format!("B{}", c.index))
}

/// Inside one realized piece, send every `A_k` element to a `B_k` element: preferably
/// one whose forward orbit reaches it first (closing a cut cycle), otherwise the least
/// loaded. Cut marks are cleared afterwards.
fn resolve_cuts(f2: &FiniteMapping, cuts: &[Cut]) -> Result<FiniteMapping> {
    let mut image = f2.image().to_vec();
    let mut names = Vec::new();
    for c in cuts {
        let (a, b) = ab_names(c);
        let a_set = f2.marked_by_name(&a)?;
        let b_set = f2.marked_by_name(&b)?;
        names.push(a.clone());
        names.push(b.clone());
        if a_set.is_empty() {
            continue;
        }
        if b_set.is_empty() {
            return Err(Error::Infeasible(format!("realized piece has `{a}` elements but no `{b}` element")));
        }
        let mut is_a = vec![false; f2.len()];
        for &x in &a_set {
            is_a[x] = true;
        }
        let mut heads: BTreeMap<Element, Vec<Element>> = BTreeMap::new();
        for &h in &b_set {
            let mut v = f2.f(h);
            for _ in 0..f2.len() {
                if is_a[v] {
                    heads.entry(v).or_default().push(h);
                    break;
                }
                v = f2.f(v);
            }
        }
        let mut load: BTreeMap<Element, usize> = b_set.iter().map(|&h| (h, 0)).collect();
        for &x in &a_set {
            let target = heads
                .get(&x)
                .and_then(|hs| hs.iter().copied().find(|h| load[h] == 0))
                .unwrap_or_else(|| *b_set.iter().min_by_key(|&&h| (load[&h], h)).expect("non-empty"));
            *load.get_mut(&target).unwrap() += 1;
            image[x] = target;
        }
    }
    let out = f2.with_image(image)?;
    let sig = out.signature().clone();
    let marks = (0..sig.len())
        .map(|p| if names.contains(&sig.predicates()[p]) { Vec::new() } else { out.marked(p) })
        .collect();
    out.with_signature(sig, marks)
}

fn weighted(a: &TypeMeasure, wa: &Rational, b: &TypeMeasure, wb: &Rational) -> Result<TypeMeasure> {
    let mut entries: Vec<(crate::types::LocalType, Rational)> = Vec::new();
    for (m, w) in [(a, wa), (b, wb)] {
        for (t, q) in m.entries() {
            let x = q * w;
            match entries.iter_mut().find(|(u, _)| u == t) {
                Some((_, acc)) => *acc += x,
                None => entries.push((t.clone(), x)),
            }
        }
    }
    entries.retain(|(_, q)| !q.is_zero());
    TypeMeasure::new(a.rank(), entries)
}

/// Run every stage and return the glued output with a per-stage report. The output
/// is the input itself next to many copies of a realized piece, so its rank-`r`
/// type distribution is the weighted mix of the two parts'.
pub fn pipeline(
    f: &FiniteMapping,
    p: usize,
    r: usize,
    eps: &Rational,
    schedule: &Schedule,
    session: &TypeSession,
) -> Result<(FiniteMapping, PipelineReport)> {
    let cfg = match schedule {
        Schedule::Desk => PipelineConfig::desk(r, p, eps)?,
        Schedule::Faithful => PipelineConfig::faithful(r, p, eps, f.len())?,
        Schedule::Custom(c) => {
            c.validate()?;
            c.clone()
        }
    };
    let budget = |size: usize, what: &str| {
        if size > cfg.max_elements {
            Err(Error::ScheduleInfeasible(format!("{what} would have {size} elements, over {}", cfg.max_elements)))
        } else {
            Ok(())
        }
    };
    let mut stages = Vec::new();
    let mut clock = Instant::now();
    let mut stage = |name: &str, size: usize, histogram: Vec<(u32, Rational)>, ldist: Option<Rational>, note: String| {
        stages.push(StageReport { name: name.into(), size, millis: clock.elapsed().as_millis(), histogram, ldist, note });
        clock = Instant::now();
    };

    let input_dist = session.type_distribution(f, cfg.r)?;
    stage("input", f.len(), histogram(&input_dist), None, String::new());

    let res: Residualization = residualize(f, &cfg.eps_res)?;
    let f1 = res.mapping.clone();
    let largest = f1.connected_components().iter().map(Vec::len).max().unwrap_or(0);
    stage("residualize", f1.len(), Vec::new(), None, format!("{} cuts, largest component {largest}", res.cuts.len()));

    budget(f1.len() * cfg.cut, "cut product")?;
    let l3 = cycle_cut_product(&f1, cfg.cut, cfg.type_rank, session)?;
    let shortest = l3.cyclic_part().cycle_len.iter().copied().filter(|&l| l > 0).min().unwrap_or(0);
    stage("cut", l3.len(), Vec::new(), None, format!("shortest cycle {shortest}"));

    let mu = session.type_distribution(&l3, cfg.clean)?;
    stage("measure", l3.len(), Vec::new(), None, format!("{} types at rank {}", mu.len(), cfg.clean));

    let approx = approximate_measure_with(&mu, &cfg.eps_mu, cfg.rr, session, &ApproxOptions::default())?;
    let certificate = approx.certificate.fingerprint();
    stage(
        "approximate",
        approx.measure.len(),
        Vec::new(),
        Some(approx.distance.clone()),
        format!("certificate {certificate}"),
    );

    let terminals = find_terminals(&approx.measure, cfg.rr, session)?;
    if !terminals.is_empty() {
        return Err(Error::Infeasible(format!("{} terminal types in a measure taken from a finite mapping", terminals.len())));
    }

    let realized = realize_with(&approx.measure, cfg.rr, cfg.multiplier, cfg.clean, session)?;
    let f3 = realized.mapping;
    let f3_dist = session.type_distribution(&f3, cfg.rr)?;
    let l3_dist = session.type_distribution(&l3, cfg.rr)?;
    stage("realize", f3.len(), histogram(&f3_dist), Some(f3_dist.total_variation(&l3_dist)), String::new());

    let f2 = rewire(&f3, cfg.cut, cfg.type_rank)?;
    let f2_dist = session.type_distribution(&f2, cfg.r)?;
    let f1_dist = session.type_distribution(&f1, cfg.r)?;
    stage("rewire", f2.len(), histogram(&f2_dist), Some(f2_dist.total_variation(&f1_dist)), String::new());

    let piece = resolve_cuts(&f2, &res.cuts)?;
    let dropped: Vec<String> = res.interpretation.dropped.iter().cloned().collect();
    let piece_plain = piece.drop_predicates(&dropped)?;
    let piece_dist = session.type_distribution(&piece_plain, cfg.r)?;
    stage("resolve", piece.len(), histogram(&piece_dist), Some(piece_dist.total_variation(&input_dist)), String::new());

    let n_close = cfg.n_close.unwrap_or_else(|| {
        ceil(&(Rational::from_integer(BigInt::from(f1.len())) / (int(piece.len()) * &cfg.eps_res)))
    });
    let copies = n_close * cfg.n_away;
    let total = f1.len() + piece.len() * copies;
    budget(total, "merged structure")?;
    let merged = merge(&f1, &piece, &BTreeMap::new(), n_close, cfg.n_away, cfg.rr)?;
    stage("merge", merged.len(), Vec::new(), None, format!("{n_close} close x {} away copies", cfg.n_away));

    // The cut marks survive only in the copy of the input, where each B_k is unique,
    // so applying the interpretation amounts to undoing the recorded cuts.
    let output = Residualization { mapping: merged, ..res.clone() }.restore()?;
    if output.restrict(&(0..f.len()).collect::<Vec<_>>())? != *f {
        return Err(Error::Infeasible("restored base differs from the input".into()));
    }
    let out_dist = weighted(
        &input_dist,
        &Rational::new(BigInt::from(f.len()), BigInt::from(total)),
        &piece_dist,
        &Rational::new(BigInt::from(piece.len() * copies), BigInt::from(total)),
    )?;
    let final_ldist = out_dist.total_variation(&input_dist);
    stage("output", output.len(), histogram(&out_dist), Some(final_ldist.clone()), String::new());

    let within_epsilon = final_ldist <= cfg.eps;
    let report = PipelineReport {
        config: cfg,
        p,
        stages,
        cuts: res.cuts.len(),
        certificate,
        n_close,
        final_ldist,
        within_epsilon,
    };
    Ok((output, report))
}

#[cfg(test)]
pub(crate) fn resolve_for_tests(f2: &FiniteMapping, cuts: &[Cut]) -> Result<FiniteMapping> {
    resolve_cuts(f2, cuts)
}
