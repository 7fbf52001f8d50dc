use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::rational::ratio;
use crate::sample::random_mapping;
use crate::structure::cycle_cut_product;

fn point_mass(session: &TypeSession, m: &FiniteMapping, v: Element, rank: usize) -> TypeMeasure {
    let t = session.local_type(m, v, rank).unwrap();
    TypeMeasure::new(rank, vec![(t, ratio(1, 1))]).unwrap()
}

fn certified(mu: &TypeMeasure, r: usize, session: &TypeSession) -> CompanionCertificate {
    match restricted_fmtp_certificate(mu, r, session).unwrap() {
        Certification::Certified(c) => c,
        Certification::Violated(v) => panic!("unexpected violation: {v}"),
    }
}

/// Path 0 -> 1 -> 2 with 2 fixed; its three rank-3 types with the given masses.
fn path_measure(session: &TypeSession, masses: [Rational; 3]) -> TypeMeasure {
    let path = FiniteMapping::unmarked(vec![1, 2, 2]).unwrap();
    let entries = (0..3).map(|v| session.local_type(&path, v, 3).unwrap()).zip(masses).collect();
    TypeMeasure::new(3, entries).unwrap()
}

#[test]
fn fmtp_trivial_sides() {
    let m = FiniteMapping::star(3);
    let all: Vec<Element> = (0..4).collect();
    let s = check_fmtp(&m, &all, &all).unwrap();
    assert_eq!((s.left.clone(), s.right.clone()), (ratio(1, 1), ratio(1, 1)));
    let s = check_fmtp(&m, &[], &all).unwrap();
    assert!(s.holds() && s.left.is_zero());
    assert!(matches!(check_fmtp(&m, &[9], &[]), Err(Error::ElementOutOfRange { .. })));
}

#[test]
fn fmtp_holds_on_random_subsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..1000 {
        let n = rng.gen_range(1..=50);
        let m = random_mapping(n, i, &[]).unwrap();
        let a: Vec<Element> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        let b: Vec<Element> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        assert!(check_fmtp(&m, &a, &b).unwrap().holds());
    }
}

#[test]
fn three_cycle_certificate() {
    let session = TypeSession::new();
    let mu = session.type_distribution(&FiniteMapping::cycle(3), 3).unwrap();
    let c = certified(&mu, 1, &session);
    assert_eq!(c.types.len(), 1);
    assert_eq!(c.entries, vec![CompanionEntry { tau: 0, t: 0, value: ratio(1, 1) }]);
    assert!(c.verify(&mu, &session).unwrap().is_none());
}

#[test]
fn extracted_measures_are_certified() {
    let session = TypeSession::new();
    for seed in 0..50 {
        let m = random_mapping(25, seed, &[]).unwrap();
        let mu = session.type_distribution(&m, 3).unwrap();
        let c = certified(&mu, 1, &session);
        assert!(c.verify(&mu, &session).unwrap().is_none(), "seed {seed}");
    }
}

#[test]
fn star_leaf_point_mass_is_violated() {
    let session = TypeSession::new();
    let star = FiniteMapping::star(5);
    let mu = point_mass(&session, &star, 1, 3);
    let cert = restricted_fmtp_certificate(&mu, 1, &session).unwrap();
    let v = cert.violation().expect("violation");
    assert_eq!(v.t2, session.local_type(&star, 0, 1).unwrap());
    assert_eq!(v.lhs, ratio(1, 1));
    assert_eq!(v.rhs, ratio(0, 1));
}

#[test]
fn rank_too_low() {
    let session = TypeSession::new();
    let mu = session.type_distribution(&FiniteMapping::cycle(3), 2).unwrap();
    assert!(matches!(restricted_fmtp_certificate(&mu, 1, &session), Err(Error::RankTooLow { .. })));
    assert!(matches!(approximate_measure(&mu, &ratio(1, 10), 1, &session), Err(Error::RankTooLow { .. })));
}

#[test]
fn tampered_certificate_fails_verification() {
    let session = TypeSession::new();
    let mu = session.type_distribution(&FiniteMapping::star(4), 3).unwrap();
    let mut c = certified(&mu, 1, &session);
    assert!(c.verify(&mu, &session).unwrap().is_none());
    let i = c.entries.iter().position(|e| e.value >= int(1)).unwrap();
    c.entries[i].value += ratio(1, 2);
    assert!(c.verify(&mu, &session).unwrap().is_some());
    c.entries.remove(i);
    assert!(c.verify(&mu, &session).unwrap().is_some());
}

#[test]
fn fast_path_returns_input() {
    let session = TypeSession::new();
    let mu = session.type_distribution(&random_mapping(30, 3, &[]).unwrap(), 3).unwrap();
    let out = approximate_measure_with(&mu, &ratio(1, 100), 1, &session, &ApproxOptions::default()).unwrap();
    assert!(!out.used_lp);
    assert!(out.measure.same_distribution(&mu));
}

#[test]
fn two_type_measure_through_the_program() {
    let session = TypeSession::new();
    let m = FiniteMapping::fixed_point().disjoint_union(&FiniteMapping::cycle(3)).unwrap();
    let fixed = session.local_type(&m, 0, 3).unwrap();
    let cyc = session.local_type(&m, 1, 3).unwrap();
    let mu = TypeMeasure::new(3, vec![(fixed, ratio(1, 3)), (cyc, ratio(2, 3))]).unwrap();
    let eps = ratio(1, 100);
    let opts = ApproxOptions { force_lp: true, ..Default::default() };
    let out = approximate_measure_with(&mu, &eps, 1, &session, &opts).unwrap();
    assert!(out.used_lp);
    assert!(out.distance < eps);
    assert_eq!(out.measure.total_variation(&mu), out.distance);
    assert!(out.measure.types().eq(mu.types()));
    assert!(out.certificate.verify(&out.measure, &session).unwrap().is_none());
}

#[test]
fn perturbed_path_measure_is_repaired() {
    let session = TypeSession::new();
    let d = ratio(1, 300);
    let mu = path_measure(&session, [ratio(1, 3) + &d, ratio(1, 3) - &d, ratio(1, 3)]);
    assert!(restricted_fmtp_certificate(&mu, 1, &session).unwrap().violation().is_some());
    let eps = ratio(1, 100);
    let out = approximate_measure_with(&mu, &eps, 1, &session, &ApproxOptions::default()).unwrap();
    assert!(out.used_lp);
    assert!(out.distance < eps && out.distance > Rational::zero());
    assert!(out.measure.entries().iter().all(|(_, q)| *q > Rational::zero()));
    assert!(out.certificate.verify(&out.measure, &session).unwrap().is_none());
}

#[test]
fn violating_measure_is_infeasible() {
    let session = TypeSession::new();
    let mu = point_mass(&session, &FiniteMapping::star(5), 1, 3);
    assert!(matches!(approximate_measure(&mu, &ratio(1, 100), 1, &session), Err(Error::Infeasible(_))));
}

#[test]
fn realizability_checks() {
    let session = TypeSession::new();
    let cut = cycle_cut_product(&FiniteMapping::cycle(3), 6, 2, &session).unwrap();
    let mu = session.type_distribution(&cut, 3).unwrap();
    let report = check_realizability_preconditions(&mu, 3, 1, &session).unwrap();
    assert!(report.passed(), "{report:?}");

    let two = point_mass(&session, &FiniteMapping::cycle(2), 0, 3);
    let report = check_realizability_preconditions(&two, 3, 1, &session).unwrap();
    assert!(report.clean.passed && !report.short_cycles.passed);

    let leaf = point_mass(&session, &FiniteMapping::star(5), 1, 3);
    let report = check_realizability_preconditions(&leaf, 3, 1, &session).unwrap();
    assert!(!report.clean.passed);
    assert!(report.failure().unwrap().starts_with("clean"));
}

#[test]
fn fingerprints_are_stable() {
    let session = TypeSession::new();
    let mu = session.type_distribution(&FiniteMapping::star(3), 3).unwrap();
    let a = certified(&mu, 1, &session).fingerprint();
    let b = certified(&mu, 1, &session).fingerprint();
    assert_eq!(a, b);
    assert_eq!(a.len(), 64);
}

fn arb(max_n: usize) -> impl Strategy<Value = FiniteMapping> {
    (1..=max_n).prop_flat_map(|n| {
        (proptest::collection::vec(0..n, n), proptest::collection::vec(any::<bool>(), n)).prop_map(|(img, mk)| {
            let marks = vec![(0..img.len()).filter(|&i| mk[i]).collect()];
            FiniteMapping::new(crate::structure::Signature::with_predicates(&["M"]).unwrap(), img, marks).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fmtp_on_all_subsets(m in arb(6)) {
        let n = m.len();
        for sa in 0u32..(1 << n) {
            for sb in 0u32..(1 << n) {
                let a: Vec<Element> = (0..n).filter(|&i| sa >> i & 1 == 1).collect();
                let b: Vec<Element> = (0..n).filter(|&i| sb >> i & 1 == 1).collect();
                prop_assert!(check_fmtp(&m, &a, &b).unwrap().holds());
            }
        }
    }

    #[test]
    fn extracted_certificates_verify(m in arb(16), r in 0usize..2) {
        let session = TypeSession::new();
        let mu = session.type_distribution(&m, 2 * r + 1).unwrap();
        let c = certified(&mu, r, &session);
        prop_assert!(c.verify(&mu, &session).unwrap().is_none());
    }

    #[test]
    fn natural_companion_balances(m in arb(16)) {
        // w(τ, t) = average number of t-typed preimages over elements of type τ.
        let (big, r) = (3, 1);
        let session = TypeSession::new();
        let big_types = session.types_of(&m, big).unwrap();
        let small = session.types_of(&m, r).unwrap();
        let mu = crate::types::distribution_of(big, &big_types);
        let n = m.len();
        let mut left: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        let mut right: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for (tau, q) in mu.entries() {
            let members: Vec<Element> = (0..n).filter(|&v| big_types[v] == *tau).collect();
            let t1 = session.project(tau, r).unwrap().id();
            let img = session.local_type(tau.witness(), tau.witness().f(tau.root()), r).unwrap().id();
            *left.entry((t1, img)).or_default() += q;
            let mut flow: BTreeMap<u32, usize> = BTreeMap::new();
            for &v in &members {
                for &u in m.pre(v) {
                    *flow.entry(small[u].id()).or_default() += 1;
                }
            }
            for (t, c) in flow {
                let w = ratio(c, members.len());
                *right.entry((t, t1)).or_default() += w * q;
            }
        }
        prop_assert_eq!(left, right);
    }
}
