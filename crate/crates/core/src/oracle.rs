//! Brute-force term-condition commutator, independent of the diagonal
//! construction in [`crate::commutator`].
//!
//! `M(α, β)` is the subuniverse of `A^{2×2}` generated by the matrices
//! `(a a; b b)` with `a α b` and `(c d; c d)` with `c β d`. It consists of all
//! `(t(ā,c̄) t(ā,d̄); t(b̄,c̄) t(b̄,d̄))` for polynomials `t` of any arity, so the
//! least `δ` with `p δ q ⇒ r δ s` for every `(p q; r s) ∈ M` is exactly the
//! commutator, without an arity cap.

use alloc::vec::Vec;

use hashbrown::HashSet;

use crate::algebra::FiniteAlgebra;
use crate::clone::for_each_tuple_containing;
use crate::congruence::Congruence;

type Matrix = [u8; 4];

fn matrices(alg: &FiniteAlgebra, alpha: &Congruence, beta: &Congruence) -> Vec<Matrix> {
    let n = alg.size();
    let mut members: Vec<Matrix> = Vec::new();
    let mut seen: HashSet<Matrix> = HashSet::new();
    for a in 0..n {
        for b in 0..n {
            let (a8, b8) = (a as u8, b as u8);
            if alpha.related(a, b) && seen.insert([a8, a8, b8, b8]) {
                members.push([a8, a8, b8, b8]);
            }
            if beta.related(a, b) && seen.insert([a8, b8, a8, b8]) {
                members.push([a8, b8, a8, b8]);
            }
        }
    }
    let mut args = Vec::new();
    let mut tuple = Vec::new();
    let mut current = 0;
    while current < members.len() {
        for op in 0..alg.operations().len() {
            let k = alg.operation(op).arity();
            if k == 0 {
                continue;
            }
            tuple.clear();
            tuple.resize(k, 0);
            let mut fresh = Vec::new();
            for_each_tuple_containing(current, &mut tuple, &mut |t| {
                let mut out = [0u8; 4];
                for (entry, o) in out.iter_mut().enumerate() {
                    args.clear();
                    args.extend(t.iter().map(|&m| members[m][entry] as usize));
                    *o = alg.apply(op, &args) as u8;
                }
                if seen.insert(out) {
                    fresh.push(out);
                }
                true
            });
            members.extend(fresh);
        }
        current += 1;
    }
    members
}

/// The least `δ` such that `α` centralizes `β` modulo `δ`.
pub fn term_condition_commutator(
    alg: &FiniteAlgebra,
    alpha: &Congruence,
    beta: &Congruence,
) -> Congruence {
    let m = matrices(alg, alpha, beta);
    let mut delta = Congruence::identity(alg.size());
    loop {
        let extra: Vec<(usize, usize)> = m
            .iter()
            .filter(|x| {
                delta.related(x[0] as usize, x[1] as usize)
                    && !delta.related(x[2] as usize, x[3] as usize)
            })
            .map(|x| (x[2] as usize, x[3] as usize))
            .collect();
        if extra.is_empty() {
            return delta;
        }
        let mut pairs: Vec<(usize, usize)> = (0..alg.size()).map(|x| (x, delta.rep(x))).collect();
        pairs.extend(extra);
        delta = Congruence::generated(alg, &pairs).expect("pairs in range");
    }
}
