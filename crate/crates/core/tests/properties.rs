//! Randomized invariants over small Mal'cev algebras built from a random
//! ternary table patched to satisfy the Mal'cev identities.

use malcev::interpolation::Verdict;
use malcev::oracle::term_condition_commutator;
use malcev::{
    decide_s1ac, find_malcev_polynomial, interpolable_bruteforce, interpolate_unary,
    is_congruence_preserving, Analysis, CommutatorTable, Congruence, CongruenceLattice,
    FiniteAlgebra, MalcevSearch, Mode, PartialFn, PolyClone, PolyFn, TermDag,
};
use proptest::prelude::*;

fn malcev_algebra(n: usize, raw: &[usize]) -> FiniteAlgebra {
    let mut table: Vec<usize> = raw.iter().take(n * n * n).map(|v| v % n).collect();
    for x in 0..n {
        for y in 0..n {
            table[(x * n + y) * n + y] = x;
            table[(y * n + y) * n + x] = x;
        }
    }
    FiniteAlgebra::new("random", n)
        .and_then(|a| a.with_operation("d", 3, &table))
        .and_then(|a| a.with_malcev_sexpr("(d x y z)"))
        .expect("patched table is a Mal'cev operation")
}

fn arb_malcev() -> impl Strategy<Value = FiniteAlgebra> {
    (2usize..=4).prop_flat_map(|n| {
        prop::collection::vec(0usize..n, n * n * n).prop_map(move |raw| malcev_algebra(n, &raw))
    })
}

/// A binary algebra, Mal'cev or not.
fn arb_binary() -> impl Strategy<Value = FiniteAlgebra> {
    (1usize..=4).prop_flat_map(|n| {
        prop::collection::vec(0usize..n, n * n).prop_map(move |t| {
            FiniteAlgebra::new("binary", n)
                .and_then(|a| a.with_operation("f", 2, &t))
                .expect("valid table")
        })
    })
}

fn partial_fn(n: usize, picks: &[(usize, usize)]) -> PartialFn {
    PartialFn::from_pairs(
        picks
            .iter()
            .map(|&(x, y)| (x % n, y % n))
            .collect::<std::collections::BTreeMap<_, _>>(),
        n,
    )
    .expect("deduplicated points")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lattice_is_closed_and_ordered(alg in arb_binary()) {
        let l = CongruenceLattice::new(&alg);
        let n = alg.size();
        for theta in l.congruences() {
            prop_assert!(theta.is_compatible(&alg));
        }
        for a in 0..n {
            for b in 0..n {
                let cg = Congruence::principal(&alg, a, b).unwrap();
                prop_assert!(l.index_of(&cg).is_some());
            }
        }
        for i in 0..l.len() {
            for j in 0..l.len() {
                let (m, jn) = (l.meet(i, j), l.join(i, j));
                prop_assert!(l.leq(m, i) && l.leq(m, j) && l.leq(i, jn) && l.leq(j, jn));
                prop_assert_eq!(l.get(m), &l.get(i).meet(l.get(j)));
                prop_assert_eq!(l.leq(i, j), l.get(i).leq(l.get(j)));
            }
        }
    }

    #[test]
    fn commutator_matches_term_condition(alg in arb_malcev()) {
        let l = CongruenceLattice::new(&alg);
        let c = CommutatorTable::compute(&alg, &l);
        prop_assert!(l.is_modular());
        for a in 0..l.len() {
            for b in 0..l.len() {
                prop_assert_eq!(l.get(c.get(a, b)), &term_condition_commutator(&alg, l.get(a), l.get(b)));
            }
        }
    }

    #[test]
    fn clone_witnesses_reparse(alg in arb_malcev()) {
        let clone = PolyClone::generate(&alg, 1, 1 << 12).unwrap();
        for i in 0..clone.len() {
            let p = clone.member(i);
            let text = p.witness().render(&alg, 1);
            let back = PolyFn::new(&alg, TermDag::parse(&text, &alg, &["x"]).unwrap(), 1).unwrap();
            prop_assert_eq!(back.table(), p.table());
        }
        prop_assert!(matches!(find_malcev_polynomial(&alg, 1 << 16), Ok(MalcevSearch::Found(_))));
    }

    #[test]
    fn interpolation_agrees_with_oracle(
        alg in arb_malcev(),
        picks in prop::collection::vec((0usize..4, 0usize..4), 0..5),
    ) {
        let an = Analysis::from_algebra(&alg, 1 << 12).unwrap();
        let f = partial_fn(alg.size(), &picks);
        let oracle = interpolable_bruteforce(&an.clone1, &f).unwrap();
        if oracle.is_some() {
            prop_assert!(is_congruence_preserving(&alg, &f));
        }
        let r = interpolate_unary(&alg, &an.d, &f, 1 << 12).unwrap();
        match r.verdict {
            Verdict::Interpolated(p) => prop_assert!(f.agrees_with(&p) && oracle.is_some()),
            Verdict::NotInterpolable => prop_assert!(oracle.is_none()),
            Verdict::HypothesisUnmet(_) => {}
        }
    }

    #[test]
    fn decision_modes_agree(alg in arb_malcev()) {
        let an = Analysis::from_algebra(&alg, 1 << 12).unwrap();
        // `Both` fails with `InconsistencyDetected` on any disagreement.
        let both = decide_s1ac(&an, Mode::Both).unwrap();
        let brute = decide_s1ac(&an, Mode::BruteForce).unwrap();
        prop_assert_eq!(both.verdict, brute.verdict);
        if let Some(w) = brute.witness {
            prop_assert!(is_congruence_preserving(&alg, &w));
            prop_assert!(interpolable_bruteforce(&an.clone1, &w).unwrap().is_none());
        }
        let ch = decide_s1ac(&an, Mode::Characterization).unwrap();
        if let Some(v) = ch.verdict {
            prop_assert_eq!(Some(v), brute.verdict);
        }
    }
}
