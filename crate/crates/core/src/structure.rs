//! Structural conditions on the congruence lattice and the constructions that
//! depend on them: (SC1), (ABp), (APMI), congruence regularity, homogeneous
//! congruences, minimal sets, idempotents onto classes, and coordinates over
//! `GF(p)`.

use alloc::format;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::algebra::FiniteAlgebra;
use crate::clone::{MalcevWitness, PolyClone, PolyFn};
use crate::commutator::{build_class_group, scalar_ring, ClassGroup, CommutatorTable};
use crate::congruence::Congruence;
use crate::error::{Error, Result};
use crate::lattice::CongruenceLattice;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sc1Failure {
    pub mu: usize,
    pub cover: usize,
    pub centralizer: usize,
}

/// Every strictly meet-irreducible `μ` satisfies `(μ : μ⁺) ≤ μ⁺`.
pub fn check_sc1(lattice: &CongruenceLattice, comm: &CommutatorTable) -> Result<Vec<Sc1Failure>> {
    let mut failures = Vec::new();
    for mu in 0..lattice.len() {
        if let Some(cover) = lattice.upper_cover(mu) {
            let centralizer = comm.centralizer(lattice, mu, cover)?;
            if !lattice.leq(centralizer, cover) {
                failures.push(Sc1Failure {
                    mu,
                    cover,
                    centralizer,
                });
            }
        }
    }
    Ok(failures)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbpViolation {
    pub lower: usize,
    pub upper: usize,
    /// An element whose `upper`-class splits into a bad number of `lower`-classes.
    pub element: usize,
    pub count: usize,
}

/// (ABp) below `gamma`: for `α ≺ β ≤ γ` with `[β,β] ≤ α`, each `β`-class is a
/// union of 1 or `p` classes of `α`. Returns the first violation.
pub fn check_abp(
    lattice: &CongruenceLattice,
    comm: &CommutatorTable,
    gamma: usize,
    p: usize,
) -> Result<Option<AbpViolation>> {
    lattice.check(gamma)?;
    for (lower, upper) in lattice.prime_quotients() {
        if !lattice.leq(upper, gamma) || !lattice.leq(comm.get(upper, upper), lower) {
            continue;
        }
        let (a, b) = (lattice.get(lower), lattice.get(upper));
        for class in b.classes() {
            let mut reps: Vec<usize> = class.iter().map(|&x| a.rep(x)).collect();
            reps.sort_unstable();
            reps.dedup();
            if reps.len() != 1 && reps.len() != p {
                return Ok(Some(AbpViolation {
                    lower,
                    upper,
                    element: class[0],
                    count: reps.len(),
                }));
            }
        }
    }
    Ok(None)
}

/// (AB2) for the whole algebra.
pub fn check_ab2(
    lattice: &CongruenceLattice,
    comm: &CommutatorTable,
) -> Result<Option<AbpViolation>> {
    check_abp(lattice, comm, lattice.top(), 2)
}

/// (APMI): projective strictly meet-irreducible prime quotients share their
/// upper cover. Returns the first offending pair.
pub fn check_apmi(lattice: &CongruenceLattice) -> Option<(usize, usize)> {
    let smi: Vec<(usize, usize)> = (0..lattice.len())
        .filter_map(|a| lattice.upper_cover(a).map(|c| (a, c)))
        .collect();
    for (i, &(a, ac)) in smi.iter().enumerate() {
        for &(b, bc) in &smi[i + 1..] {
            if ac != bc && lattice.primes_projective((a, ac), (b, bc)) {
                return Some((a, b));
            }
        }
    }
    None
}

/// A pair of distinct congruences sharing a class, with the shared point.
pub fn regularity_violation(lattice: &CongruenceLattice) -> Option<(usize, usize, usize)> {
    let n = lattice.get(0).size();
    for a in 0..n {
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for (i, theta) in lattice.congruences().iter().enumerate() {
            if let Some(&j) = seen.get(&theta.class_of(a)) {
                return Some((j, i, a));
            }
            seen.insert(theta.class_of(a), i);
        }
    }
    None
}

pub fn is_congruence_regular(lattice: &CongruenceLattice) -> bool {
    regularity_violation(lattice).is_none()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousReport {
    pub mu: usize,
    pub phi: usize,
    pub mu_star: usize,
    pub abelian: bool,
    pub interval_height: usize,
    pub simple_complemented_modular: bool,
}

/// `Φ(μ)`: the meet of `μ` and its lower covers.
pub fn phi(lattice: &CongruenceLattice, mu: usize) -> usize {
    lattice.meet_all(core::iter::once(mu).chain(lattice.lower_covers(mu).iter().copied()))
}

/// `μ*`: the join of all `α` with `α ∧ μ = 0`.
pub fn mu_star(lattice: &CongruenceLattice, mu: usize) -> usize {
    lattice.join_all((0..lattice.len()).filter(|&a| lattice.meet(a, mu) == lattice.bottom()))
}

pub fn is_homogeneous(lattice: &CongruenceLattice, mu: usize) -> bool {
    if mu == lattice.bottom() {
        return false;
    }
    let primes = lattice.prime_quotients();
    let below: Vec<(usize, usize)> = primes
        .iter()
        .copied()
        .filter(|&(_, b)| lattice.leq(b, mu))
        .collect();
    let above: Vec<(usize, usize)> = primes
        .iter()
        .copied()
        .filter(|&(a, _)| lattice.leq(mu, a))
        .collect();
    let first = below[0];
    below.iter().all(|&q| lattice.primes_projective(first, q))
        && !below
            .iter()
            .any(|&q| above.iter().any(|&r| lattice.primes_projective(q, r)))
}

/// All homogeneous congruences in canonical order.
pub fn find_homogeneous(
    lattice: &CongruenceLattice,
    comm: &CommutatorTable,
) -> Vec<HomogeneousReport> {
    (0..lattice.len())
        .filter(|&mu| is_homogeneous(lattice, mu))
        .map(|mu| HomogeneousReport {
            mu,
            phi: phi(lattice, mu),
            mu_star: mu_star(lattice, mu),
            abelian: comm.is_abelian(mu),
            interval_height: lattice.interval_height(lattice.bottom(), mu),
            simple_complemented_modular: lattice
                .is_simple_complemented_modular(lattice.bottom(), mu),
        })
        .collect()
}

/// Join-irreducible pairs with `[α,β] ≤ α⁻ ≺ α ≤ β⁻ ≺ β`.
pub fn sc1_failure_pairs(
    lattice: &CongruenceLattice,
    comm: &CommutatorTable,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for alpha in 0..lattice.len() {
        let Some(alpha_lower) = lattice.lower_cover(alpha) else {
            continue;
        };
        for beta in 0..lattice.len() {
            let Some(beta_lower) = lattice.lower_cover(beta) else {
                continue;
            };
            if lattice.leq(comm.get(alpha, beta), alpha_lower) && lattice.leq(alpha, beta_lower) {
                out.push((alpha, beta));
            }
        }
    }
    out
}

/// Bitset of a subset of a universe with at most 256 elements.
type Subset = [u64; 4];

fn subset_of(values: &[u8]) -> Subset {
    let mut s = [0u64; 4];
    for &v in values {
        s[v as usize / 64] |= 1 << (v % 64);
    }
    s
}

fn subset_le(a: &Subset, b: &Subset) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn members_of(s: &Subset, n: usize) -> Vec<usize> {
    (0..n).filter(|&x| s[x / 64] >> (x % 64) & 1 == 1).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalSetReport {
    /// The minimal sets, ascending as sorted element lists.
    pub minimal_sets: Vec<Vec<usize>>,
    /// For each minimal set, the first clone member with that image.
    pub witnesses: Vec<PolyFn>,
}

/// `(0, μ)`-minimal sets: inclusion-minimal images of unary polynomials
/// that do not collapse `μ`.
pub fn minimal_sets(clone1: &PolyClone, mu: &Congruence) -> Result<MinimalSetReport> {
    clone1.ensure_complete()?;
    if mu.is_identity() {
        return Err(Error::PreconditionFailed(
            "minimal sets need a non-trivial congruence".into(),
        ));
    }
    let n = clone1.size();
    let pairs: Vec<(usize, usize)> = (0..n)
        .filter(|&x| mu.rep(x) != x)
        .map(|x| (mu.rep(x), x))
        .collect();
    let mut images: Vec<(Subset, usize)> = Vec::new();
    let mut seen: HashMap<Subset, ()> = HashMap::new();
    for (i, table) in clone1.tables().enumerate() {
        if pairs.iter().any(|&(x, y)| table[x] != table[y]) {
            let s = subset_of(table);
            if seen.insert(s, ()).is_none() {
                images.push((s, i));
            }
        }
    }
    let mut minimal: Vec<(Vec<usize>, usize)> = images
        .iter()
        .filter(|(s, _)| !images.iter().any(|(t, _)| t != s && subset_le(t, s)))
        .map(|(s, i)| (members_of(s, n), *i))
        .collect();
    minimal.sort();
    Ok(MinimalSetReport {
        witnesses: minimal.iter().map(|(_, i)| clone1.member(*i)).collect(),
        minimal_sets: minimal.into_iter().map(|(s, _)| s).collect(),
    })
}

/// The first clone member `e` with `e ∘ e = e` and image exactly `v/μ`.
pub fn class_idempotent(clone1: &PolyClone, mu: &Congruence, v: usize) -> Result<Option<PolyFn>> {
    clone1.ensure_complete()?;
    let target = mu.class_of(v);
    let target_set = subset_of(&target.iter().map(|&x| x as u8).collect::<Vec<_>>());
    for (i, table) in clone1.tables().enumerate() {
        if subset_of(table) == target_set && target.iter().all(|&x| table[x] as usize == x) {
            return Ok(Some(clone1.member(i)));
        }
    }
    Ok(None)
}

/// Coordinates of a class `o/μ` as a vector space over `GF(p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coordinatization {
    pub base: usize,
    pub mu: usize,
    pub p: usize,
    /// Greedily chosen basis, ascending.
    pub basis: Vec<usize>,
    group: ClassGroup,
    encode: HashMap<usize, Vec<u32>>,
    decode: HashMap<Vec<u32>, usize>,
    /// The scalar by which each member of the scalar ring acts.
    pub scalars: Vec<u32>,
    /// Each scalar-ring member as images of the class, in class order.
    pub ring_members: Vec<Vec<usize>>,
}

impl Coordinatization {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn encode(&self, x: usize) -> Option<&[u32]> {
        self.encode.get(&x).map(Vec::as_slice)
    }

    pub fn decode(&self, v: &[u32]) -> Option<usize> {
        self.decode.get(v).copied()
    }

    pub fn group(&self) -> &ClassGroup {
        &self.group
    }

    /// The class in ascending order.
    pub fn class(&self) -> &[usize] {
        self.group.carrier()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn coordinatize_class(
    alg: &FiniteAlgebra,
    d: &MalcevWitness,
    clone1: &PolyClone,
    lattice: &CongruenceLattice,
    comm: &CommutatorTable,
    mu: usize,
    o: usize,
    p: usize,
) -> Result<Coordinatization> {
    lattice.check(mu)?;
    if o >= alg.size() {
        return Err(Error::ElementOutOfRange(o));
    }
    if !comm.is_abelian(mu) {
        return Err(Error::PreconditionFailed(
            "the congruence is not abelian".into(),
        ));
    }
    if !lattice.is_simple_complemented_modular(lattice.bottom(), mu) {
        return Err(Error::PreconditionFailed(
            "the interval below the congruence is not simple complemented modular".into(),
        ));
    }
    if check_abp(lattice, comm, mu, p)?.is_some() {
        return Err(Error::PreconditionFailed(format!(
            "(AB{p}) fails below the congruence"
        )));
    }
    let theta = lattice.get(mu);
    if theta.class_of(o).len() < 2 {
        return Err(Error::PreconditionFailed("the class is a singleton".into()));
    }
    let group = build_class_group(d, theta, o)?;
    if !group.has_exponent(p) {
        return Err(Error::NotElementaryAbelian);
    }
    // Greedy basis: span grows by p each time a new element is added.
    let mut encode: HashMap<usize, Vec<u32>> = HashMap::new();
    encode.insert(o, Vec::new());
    let mut basis = Vec::new();
    for &x in group.carrier() {
        if encode.contains_key(&x) {
            continue;
        }
        let old: Vec<(usize, Vec<u32>)> = encode.drain().collect();
        for (s, coords) in old {
            let mut point = s;
            for k in 0..p as u32 {
                let mut c = coords.clone();
                c.push(k);
                encode.insert(point, c);
                point = group.add(point, x);
            }
        }
        basis.push(x);
    }
    let h = basis.len();
    let mut encode: HashMap<usize, Vec<u32>> = encode
        .into_iter()
        .map(|(x, mut c)| {
            c.resize(h, 0);
            (x, c)
        })
        .collect();
    // Coordinates added before later basis vectors need zero padding at the end,
    // but earlier points were re-inserted with all coordinates, so only the
    // group order needs checking.
    if encode.len() != group.order() || group.order() != p.pow(h as u32) {
        return Err(Error::NotElementaryAbelian);
    }
    encode.shrink_to_fit();
    let decode: HashMap<Vec<u32>, usize> = encode.iter().map(|(&x, c)| (c.clone(), x)).collect();
    let pp = p as u32;
    for &x in group.carrier() {
        for &y in group.carrier() {
            let sum: Vec<u32> = encode[&x]
                .iter()
                .zip(&encode[&y])
                .map(|(a, b)| (a + b) % pp)
                .collect();
            if encode[&group.add(x, y)] != sum {
                return Err(Error::NotElementaryAbelian);
            }
        }
    }
    let ring = scalar_ring(alg, d, clone1, theta, o)?;
    let mut scalars = Vec::with_capacity(ring.len());
    let mut ring_members = Vec::with_capacity(ring.len());
    for r in 0..ring.len() {
        let lambda = (0..pp).find(|&l| {
            group.carrier().iter().all(|&x| {
                let scaled: Vec<u32> = encode[&x].iter().map(|c| c * l % pp).collect();
                encode[&ring.apply(r, x)] == scaled
            })
        });
        scalars.push(lambda.ok_or(Error::ScalarActionFailed)?);
        ring_members.push(ring.member(r).to_vec());
    }
    Ok(Coordinatization {
        base: o,
        mu,
        p,
        basis,
        group,
        encode,
        decode,
        scalars,
        ring_members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use alloc::vec;

    struct Setup {
        alg: FiniteAlgebra,
        l: CongruenceLattice,
        c: CommutatorTable,
    }

    fn setup(alg: FiniteAlgebra) -> Setup {
        let l = CongruenceLattice::new(&alg);
        let c = CommutatorTable::compute(&alg, &l);
        Setup { alg, l, c }
    }

    #[test]
    fn sc1_examples() {
        let z4 = setup(corpus::cyclic(4));
        let f = check_sc1(&z4.l, &z4.c).unwrap();
        assert_eq!(
            f,
            [Sc1Failure {
                mu: 0,
                cover: 1,
                centralizer: 2
            }]
        );
        let k = setup(corpus::klein4());
        assert!(check_sc1(&k.l, &k.c).unwrap().is_empty());
        let z5 = setup(corpus::cyclic(5));
        assert!(check_sc1(&z5.l, &z5.c).unwrap().is_empty());
        let z6 = setup(corpus::cyclic(6));
        assert!(check_sc1(&z6.l, &z6.c).unwrap().is_empty());
    }

    #[test]
    fn abp_examples() {
        let z4 = setup(corpus::cyclic(4));
        assert_eq!(check_abp(&z4.l, &z4.c, z4.l.top(), 2).unwrap(), None);
        let z3 = setup(corpus::cyclic(3));
        let v = check_abp(&z3.l, &z3.c, z3.l.top(), 2).unwrap().unwrap();
        assert_eq!((v.lower, v.upper, v.count), (0, 1, 3));
        assert_eq!(check_abp(&z3.l, &z3.c, 0, 2).unwrap(), None);
        let s3 = setup(corpus::symmetric3());
        assert!(check_ab2(&s3.l, &s3.c).unwrap().is_some());
    }

    #[test]
    fn apmi_and_regularity_examples() {
        for alg in [corpus::klein4(), corpus::cyclic(4)] {
            let s = setup(alg);
            assert_eq!(check_apmi(&s.l), None);
            assert!(is_congruence_regular(&s.l));
        }
        assert!(is_congruence_regular(&setup(corpus::lattice2()).l));
        assert!(is_congruence_regular(&setup(corpus::cyclic(5)).l));
        let ap = setup(corpus::affine_point3());
        assert!(regularity_violation(&ap.l).is_some());
    }

    #[test]
    fn homogeneous_examples() {
        let z4 = setup(corpus::cyclic(4));
        let h = find_homogeneous(&z4.l, &z4.c);
        assert_eq!(h.len(), 1);
        assert_eq!(
            (h[0].mu, h[0].phi, h[0].mu_star, h[0].abelian),
            (1, 0, 0, true)
        );
        let k = setup(corpus::klein4());
        let h = find_homogeneous(&k.l, &k.c);
        assert_eq!(h.len(), 1);
        assert_eq!((h[0].mu, h[0].phi, h[0].mu_star), (4, 0, 0));
        assert_eq!(h[0].interval_height, 2);
        assert!(h[0].simple_complemented_modular && h[0].abelian);
        let s3 = setup(corpus::symmetric3());
        let h = find_homogeneous(&s3.l, &s3.c);
        assert_eq!(h.iter().map(|r| r.mu).collect::<Vec<_>>(), [1]);
    }

    #[test]
    fn sc1_failure_pair_examples() {
        let z4 = setup(corpus::cyclic(4));
        assert_eq!(sc1_failure_pairs(&z4.l, &z4.c), [(1, 2)]);
        let k = setup(corpus::klein4());
        assert!(sc1_failure_pairs(&k.l, &k.c).is_empty());
        let z5 = setup(corpus::cyclic(5));
        assert!(sc1_failure_pairs(&z5.l, &z5.c).is_empty());
    }

    #[test]
    fn minimal_set_examples() {
        let z2 = corpus::cyclic(2);
        let clone = PolyClone::generate(&z2, 1, 100).unwrap();
        let r = minimal_sets(&clone, &Congruence::full(2)).unwrap();
        assert_eq!(r.minimal_sets, [vec![0, 1]]);
        let z4 = corpus::cyclic(4);
        let clone = PolyClone::generate(&z4, 1, 100).unwrap();
        let theta = Congruence::from_classes(4, &[&[0, 2], &[1, 3]]).unwrap();
        let r = minimal_sets(&clone, &theta).unwrap();
        assert_eq!(r.minimal_sets, [vec![0, 1, 2, 3]]);
        assert_eq!(r.witnesses[0].image(), [0, 1, 2, 3]);
    }

    #[test]
    fn class_idempotent_examples() {
        let z4 = corpus::cyclic(4);
        let clone = PolyClone::generate(&z4, 1, 100).unwrap();
        let e = class_idempotent(&clone, &Congruence::identity(4), 2)
            .unwrap()
            .unwrap();
        assert_eq!(e.table(), &[2, 2, 2, 2]);
        // No map kx + c is idempotent with image {0, 2}.
        let theta = Congruence::from_classes(4, &[&[0, 2], &[1, 3]]).unwrap();
        assert_eq!(class_idempotent(&clone, &theta, 0).unwrap(), None);
        let k = corpus::klein4();
        let clone = PolyClone::generate(&k, 1, 1000).unwrap();
        let e = class_idempotent(&clone, &Congruence::full(4), 3)
            .unwrap()
            .unwrap();
        assert_eq!(e.table(), &[0, 1, 2, 3]);
    }

    #[test]
    fn coordinatization_examples() {
        let k = setup(corpus::klein4());
        let d = MalcevWitness::from_algebra(&k.alg).unwrap().unwrap();
        let clone = PolyClone::generate(&k.alg, 1, 1000).unwrap();
        let c = coordinatize_class(&k.alg, &d, &clone, &k.l, &k.c, k.l.top(), 0, 2).unwrap();
        assert_eq!(c.dimension(), 2);
        assert_eq!(c.basis, [1, 2]);
        assert_eq!(c.encode(3), Some(&[1, 1][..]));
        assert_eq!(c.decode(&[0, 1]), Some(2));

        let s3 = setup(corpus::symmetric3());
        let d = MalcevWitness::from_algebra(&s3.alg).unwrap().unwrap();
        let clone = PolyClone::generate(&s3.alg, 1, 100_000).unwrap();
        let c = coordinatize_class(&s3.alg, &d, &clone, &s3.l, &s3.c, 1, 0, 3).unwrap();
        assert_eq!(c.dimension(), 1);
        assert_eq!(c.class(), &[0, 3, 4]);
        let mut scalars = c.scalars.clone();
        scalars.sort_unstable();
        scalars.dedup();
        assert_eq!(scalars, [0, 1, 2]);

        let z4 = setup(corpus::cyclic(4));
        let d = MalcevWitness::from_algebra(&z4.alg).unwrap().unwrap();
        let clone = PolyClone::generate(&z4.alg, 1, 100).unwrap();
        let c = coordinatize_class(&z4.alg, &d, &clone, &z4.l, &z4.c, 1, 0, 2).unwrap();
        assert_eq!((c.dimension(), c.class()), (1, &[0, 2][..]));
        assert!(matches!(
            coordinatize_class(&z4.alg, &d, &clone, &z4.l, &z4.c, 2, 0, 2),
            Err(Error::PreconditionFailed(_))
        ));
    }
}
