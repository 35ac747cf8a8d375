use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use semiorbit::orbit::*;
use semiorbit::p1::{ProjPointQ, RationalMapQ};
use semiorbit::weights::solve_rho;
use semiorbit::Error;
use std::collections::BTreeSet;

fn map(num: &[i64], den: &[i64]) -> RationalMapQ {
    RationalMapQ::from_i64(num, den).unwrap()
}

fn pt(x: i64, y: i64) -> ProjPointQ {
    ProjPointQ::from_i64(x, y).unwrap()
}

fn sys(maps: Vec<RationalMapQ>) -> SemigroupSystem {
    SemigroupSystem::new(maps).unwrap()
}

fn powers() -> SemigroupSystem {
    sys(vec![map(&[1, 0, 0], &[1]), map(&[1, 0, 0, 0], &[1])])
}

fn quadratics() -> SemigroupSystem {
    sys(vec![map(&[1, 0, 1], &[1]), map(&[1, 0, -2], &[1])])
}

fn arb_map() -> impl Strategy<Value = RationalMapQ> {
    (2usize..=3, any::<bool>())
        .prop_flat_map(|(d, poly)| {
            (
                prop::collection::vec(-4i64..=4, d + 1),
                prop::collection::vec(-4i64..=4, if poly { 1..=1 } else { 1..=d + 1 }),
            )
        })
        .prop_filter_map("degenerate pair", |(mut num, mut den)| {
            if num[0] == 0 {
                num[0] = 1;
            }
            if den.iter().all(|&c| c == 0) {
                den[0] = 1;
            }
            RationalMapQ::from_i64(&num, &den).ok()
        })
}

fn arb_system() -> impl Strategy<Value = SemigroupSystem> {
    prop::collection::vec(arb_map(), 2..=2).prop_map(sys)
}

fn arb_point() -> impl Strategy<Value = ProjPointQ> {
    (-20i64..=20, 1i64..=20).prop_map(|(x, y)| pt(x, y))
}

/// Every nonempty word of length at most `depth`, evaluated one map at a
/// time and kept when its image has height at most `cutoff`.
fn brute_force(s: &SemigroupSystem, p: &ProjPointQ, depth: usize, cutoff: f64) -> BTreeSet<(Vec<usize>, ProjPointQ)> {
    let mut out = BTreeSet::new();
    let mut level = vec![(Vec::new(), p.clone())];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (w, q) in &level {
            for (i, phi) in s.maps().iter().enumerate() {
                let mut w2: Vec<usize> = w.clone();
                w2.push(i);
                let q2 = phi.evaluate(q);
                if q2.height() <= cutoff {
                    out.insert((w2.clone(), q2.clone()));
                }
                next.push((w2, q2));
            }
        }
        level = next;
    }
    out
}

fn entry_set(c: &OrbitCensus, max_len: usize) -> BTreeSet<(Vec<usize>, ProjPointQ)> {
    c.entries()
        .iter()
        .filter(|e| e.word.len() <= max_len)
        .map(|e| (e.word.indices().to_vec(), e.point.clone()))
        .collect()
}

#[test]
fn system_constants() {
    let s = powers();
    assert_eq!(s.c_s(), 0.0);
    assert_eq!(s.b_s(), 0.0);
    assert_eq!((s.d_s(), s.max_degree(), s.rank()), (2, 3, 2));
    let q = quadratics();
    assert!((q.escape_threshold() - 2.0 * q.c_s()).abs() < 1e-15);
    assert!((q.b_s() - q.c_s() / (q.d_s() as f64 - 1.0)).abs() < 1e-12);
    assert!(SemigroupSystem::new(vec![]).is_err());
}

#[test]
fn word_convention() {
    let s = powers();
    let w = Word::new(vec![0, 1]);
    assert_eq!(w.to_string(), "phi2∘phi1");
    assert_eq!(Word::default().to_string(), "id");
    // x^2 first, then x^3
    assert_eq!(w.apply(&s, &pt(2, 1)), pt(64, 1));
    assert_eq!(w.degree(s.degrees()), BigUint::from(6u32));
    let q = quadratics();
    assert_eq!(Word::new(vec![0, 1]).apply(&q, &pt(1, 1)), pt(2, 1));
    assert_eq!(Word::new(vec![1, 0]).apply(&q, &pt(1, 1)), pt(2, 1));
    assert_eq!(Word::new(vec![1, 1]).apply(&q, &pt(0, 1)), pt(2, 1));
}

#[test]
fn census_of_powers_by_hand() {
    // images of 2 are 2^(2^a 3^b); heights (2^a 3^b) ln 2
    let c = orbit_census(&powers(), &pt(2, 1), &Cutoff::LnOf(BigUint::from(1u32) << 9), CensusOptions::default()).unwrap();
    let words: Vec<String> = c.entries().iter().map(|e| e.word.to_string()).collect();
    // weights 2, 3, 4, 6, 6, 8, 9
    assert_eq!(words.len(), 7);
    assert_eq!(c.n_funcs(9.0 * 2f64.ln()), Count::Finite(7));
    assert_eq!(c.n_points(9.0 * 2f64.ln()), 6);
    assert_eq!(c.collisions().len(), 1);
    assert_eq!(c.fiber_max(), 2);
    assert!(words.contains(&"phi2∘phi1".to_string()) && words.contains(&"phi1∘phi2".to_string()));
}

#[test]
fn exact_and_float_cutoffs_agree_at_integers() {
    let s = quadratics();
    let p = pt(1, 3);
    for n in [9u32, 10, 26, 27, 677, 100_000] {
        let exact = orbit_census(&s, &p, &Cutoff::LnOf(BigUint::from(n)), CensusOptions::default()).unwrap();
        let float = orbit_census(&s, &p, &Cutoff::Nats((n as f64).ln()), CensusOptions::default()).unwrap();
        assert_eq!(exact.entries(), float.entries(), "n = {n}");
        assert!(exact.entries().iter().all(|e| e.point.size() <= BigUint::from(n)));
    }
}

#[test]
fn counts_and_theta_are_consistent() {
    let s = quadratics();
    let p = pt(1, 3);
    let rho = solve_rho(s.degrees(), 1e-12).unwrap();
    let grid = [5.0, 20.0, 80.0];
    let theta = theta_ratio(&s, &p, &grid, &rho, DEFAULT_BUDGET).unwrap();
    for (x, n, t) in theta {
        assert_eq!(count_functions_by_height(&s, &p, x, DEFAULT_BUDGET).unwrap(), Count::Finite(n));
        assert!((t - n as f64 / x.powf(rho.rho)).abs() < 1e-12);
    }
    assert!(theta_ratio(&s, &p, &[], &rho, DEFAULT_BUDGET).is_err());
    let fixed = sys(vec![map(&[1, 0, 0], &[1]), map(&[1, 0, 0, 0], &[1])]);
    assert!(matches!(theta_ratio(&fixed, &pt(1, 1), &grid, &rho, DEFAULT_BUDGET), Err(Error::InvalidInput(_))));
}

#[test]
fn preperiodic_points_give_infinite_counts() {
    let s = sys(vec![map(&[1, 0, -1], &[1]), map(&[1, 0, 0], &[1])]);
    let c = orbit_census(&s, &pt(0, 1), &Cutoff::Nats(10.0), CensusOptions::default()).unwrap();
    assert!(c.is_infinite());
    assert_eq!(c.total_funcs(), Count::Infinite);
    assert_eq!(c.total_funcs().to_string(), "inf");
    let wit = c.cycle().unwrap();
    let q = wit.f.apply(&s, &pt(0, 1));
    assert_eq!(wit.g.apply(&s, &q), q);
    assert!(orbit_is_finite(&s, &pt(0, 1), DEFAULT_BUDGET).unwrap());
    // a depth limit makes the count finite again: 2 + 4 + 8 words
    let c = orbit_census(&s, &pt(0, 1), &Cutoff::Nats(10.0), CensusOptions { max_depth: Some(3), budget: DEFAULT_BUDGET }).unwrap();
    assert_eq!(c.total_funcs(), Count::Finite(14));
}

#[test]
fn budget_is_enforced() {
    let r = orbit_census(&quadratics(), &pt(1, 3), &Cutoff::Nats(1e4), CensusOptions { max_depth: None, budget: 50 });
    assert!(matches!(r, Err(Error::ResourceLimit(_))));
    let s = quadratics();
    let rho = solve_rho(s.degrees(), 1e-12).unwrap();
    assert!(matches!(estimate_beta(&s, &pt(1, 3), &rho, 12, AssumeFree, 1000), Err(Error::ResourceLimit(_))));
    assert!(matches!(estimate_beta(&s, &pt(1, 3), &rho, 0, AssumeFree, 1000), Err(Error::InvalidInput(_))));
}

#[test]
fn beta_matches_exact_heights() {
    let s = sys(vec![map(&[1, 0, 1, 0, -1], &[1, 2, -1, 0]), map(&[-2, -2, 0, -1, -1, -2], &[2, 0, 2, -1, 2])]);
    let p = pt(2, 1);
    let rho = solve_rho(s.degrees(), 1e-12).unwrap();
    let beta = estimate_beta(&s, &p, &rho, 6, AssumeFree, DEFAULT_BUDGET).unwrap();
    let mut level = vec![p.clone()];
    for n in 1..=6 {
        level = level.iter().flat_map(|q| s.maps().iter().map(move |phi| phi.evaluate(q))).collect();
        let exact: f64 = level.iter().map(|q| q.height().powf(-rho.rho)).sum();
        assert!((beta.beta_sequence[n - 1] - exact).abs() <= 1e-13 * exact, "n = {n}");
    }
    let shift = beta.shift_n.unwrap();
    for n in shift.max(1)..beta.beta_sequence.len() {
        let step = (beta.beta_sequence[n] - beta.beta_sequence[n - 1]).abs();
        assert!(step <= beta.step_bound(n).unwrap());
    }
    assert!(beta.step_bound(shift.saturating_sub(1)).is_none() || shift == 0);
    assert!(beta.tail_bound().unwrap() > 0.0);
}

#[test]
fn predictions_need_acyclic_degrees() {
    let s = sys(vec![map(&[2, 0, 0, 0, 0, 0, 0, 0, 0], &[1]), map(&[3, 0, 0, 0, 0, 0, 0, 0, 0], &[1])]);
    let rho = solve_rho(s.degrees(), 1e-12).unwrap();
    let beta = estimate_beta(&s, &pt(1, 1), &rho, 4, AssumeFree, DEFAULT_BUDGET).unwrap();
    assert!(matches!(predict_function_count(&s, 100.0, &beta), Err(Error::InvalidInput(_))));
    assert!((beta.c_prime - 0.125).abs() < 1e-12);
}

#[test]
fn monomials_have_constant_beta() {
    // C_S = 0: each word of degree D sends 2 to height D ln 2, and the
    // degrees of length-n words satisfy sum D^(-rho) = 1
    let s = powers();
    let rho = solve_rho(s.degrees(), 1e-12).unwrap();
    let beta = estimate_beta(&s, &pt(2, 1), &rho, 8, AssumeFree, DEFAULT_BUDGET).unwrap();
    assert_eq!(beta.k, 0.0);
    let expect = 2f64.ln().powf(-rho.rho);
    for b in &beta.beta_sequence {
        assert!((b - expect).abs() < 1e-12);
    }
    assert_eq!(beta.step_bound(3), Some(0.0));
}

#[test]
fn collisions_reevaluate() {
    let s = powers();
    let p = pt(2, 1);
    let found = find_collisions(&s, &p, 4, DEFAULT_BUDGET).unwrap();
    assert!(!found.is_empty());
    for c in &found {
        assert_ne!(c.first, c.second);
        assert_eq!(c.first.apply(&s, &p), c.point);
        assert_eq!(c.second.apply(&s, &p), c.point);
    }
}

#[test]
fn decomposition_covers_the_orbit() {
    let s = quadratics();
    let p = pt(1, 3);
    let b = s.c_s().max(1.0) * 3.0;
    let dec = decompose_orbit(&s, &p, b, DEFAULT_BUDGET).unwrap();
    assert!(!dec.seeds.is_empty());
    let seeds: BTreeSet<ProjPointQ> = dec.seeds.iter().cloned().collect();
    let census = orbit_census(&s, &p, &Cutoff::Nats(40.0 * b), CensusOptions::default()).unwrap();
    for e in census.entries() {
        if e.height <= b {
            assert!(dec.low.contains(&e.point));
            continue;
        }
        // the first point above B on the word's path is a seed
        let mut q = p.clone();
        let mut first_above = None;
        for &i in e.word.indices() {
            q = s.maps()[i].evaluate(&q);
            if q.height() > b {
                first_above = Some(q.clone());
                break;
            }
        }
        assert!(seeds.contains(&first_above.unwrap()), "{} not covered", e.word);
    }
    assert!(decompose_orbit(&s, &p, 0.0, DEFAULT_BUDGET).is_err());
}

#[test]
fn preperiodic_witness_examples() {
    let s = sys(vec![map(&[1, 0, -1], &[1]), map(&[1, 0, 0], &[1])]);
    let v = is_preperiodic(&s, &pt(0, 1), DEFAULT_BUDGET).unwrap();
    let w = v.witness.unwrap();
    assert_eq!((w.f.to_string(), w.g.to_string()), ("phi1".to_string(), "phi1∘phi1".to_string()));
    assert!(!is_preperiodic(&quadratics(), &pt(1, 3), DEFAULT_BUDGET).unwrap().verdict);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn census_matches_brute_force(s in arb_system(), p in arb_point(), extra in 0.0f64..30.0) {
        let cutoff = s.escape_threshold() + extra + 1.0;
        let census = orbit_census(&s, &p, &Cutoff::Nats(cutoff), CensusOptions::default()).unwrap();
        prop_assume!(!census.is_infinite());
        prop_assert_eq!(entry_set(&census, 6), brute_force(&s, &p, 6, cutoff));
        for e in census.entries() {
            prop_assert_eq!(&e.word.apply(&s, &p), &e.point);
            prop_assert!(e.height <= cutoff + 1e-9);
        }
    }

    #[test]
    fn depth_limited_census_matches_brute_force(s in arb_system(), p in arb_point(), cutoff in 1.0f64..60.0) {
        let census = orbit_census(&s, &p, &Cutoff::Nats(cutoff), CensusOptions { max_depth: Some(5), budget: DEFAULT_BUDGET }).unwrap();
        prop_assert!(!census.is_infinite());
        prop_assert_eq!(entry_set(&census, 5), brute_force(&s, &p, 5, cutoff));
        prop_assert_eq!(census.entries().len(), brute_force(&s, &p, 5, cutoff).len());
    }

    #[test]
    fn counts_and_drift(s in arb_system(), p in arb_point()) {
        let census = orbit_census(&s, &p, &Cutoff::Nats(s.escape_threshold() + 20.0), CensusOptions { max_depth: Some(6), budget: DEFAULT_BUDGET }).unwrap();
        prop_assert!(census.max_height_drift(s.degrees()) <= s.b_s() + 1e-9);
        for &x in census.function_heights() {
            match census.n_funcs(x) {
                Count::Finite(n) => prop_assert!(census.n_points(x) <= n),
                Count::Infinite => unreachable!(),
            }
        }
        let fibers: usize = census.distinct_points().iter().map(|d| d.fiber).sum();
        prop_assert_eq!(fibers, census.entries().len());
        prop_assert_eq!(census.collisions().len(), census.entries().len() - census.distinct_points().len());
    }

    #[test]
    fn escape_is_monotone(s in arb_system(), x in -1000i64..=1000, y in 1i64..=1000, shift in 0u32..40) {
        // scale x up until the point is past the escape threshold
        let big = BigInt::from(x) * BigInt::from(10).pow(shift) + BigInt::from(x.signum());
        let q = ProjPointQ::new(big, BigInt::from(y)).unwrap();
        prop_assume!(q.height() > s.escape_threshold());
        for phi in s.maps() {
            prop_assert!(phi.evaluate(&q).height() > q.height());
        }
    }

    #[test]
    fn witnesses_reevaluate(s in arb_system(), p in arb_point()) {
        let v = is_preperiodic(&s, &p, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(v.verdict, v.witness.is_some());
        if let Some(w) = v.witness {
            prop_assert!(!w.f.is_empty() && !w.g.is_empty());
            let q = w.f.apply(&s, &p);
            prop_assert_eq!(w.g.apply(&s, &q), q);
        }
    }
}
