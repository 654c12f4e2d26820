//! The term-condition commutator via the diagonal construction, centralizers,
//! and the class group and scalar ring attached to an abelian congruence.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::algebra::FiniteAlgebra;
use crate::clone::{MalcevWitness, PolyClone};
use crate::congruence::{generate, Congruence, Structure};
use crate::error::{Error, Result};
use crate::lattice::CongruenceLattice;

/// The subalgebra of `A²` on the pairs of a congruence.
struct PairAlgebra<'a> {
    alg: &'a FiniteAlgebra,
    pairs: Vec<(usize, usize)>,
    index: Vec<usize>,
    scratch_l: core::cell::RefCell<Vec<usize>>,
    scratch_r: core::cell::RefCell<Vec<usize>>,
}

impl<'a> PairAlgebra<'a> {
    fn new(alg: &'a FiniteAlgebra, alpha: &Congruence) -> Self {
        let n = alg.size();
        let mut pairs = Vec::new();
        let mut index = vec![usize::MAX; n * n];
        for x in 0..n {
            for y in 0..n {
                if alpha.related(x, y) {
                    index[x * n + y] = pairs.len();
                    pairs.push((x, y));
                }
            }
        }
        PairAlgebra {
            alg,
            pairs,
            index,
            scratch_l: Default::default(),
            scratch_r: Default::default(),
        }
    }

    fn id(&self, x: usize, y: usize) -> usize {
        self.index[x * self.alg.size() + y]
    }
}

impl Structure for PairAlgebra<'_> {
    fn universe(&self) -> usize {
        self.pairs.len()
    }
    fn op_count(&self) -> usize {
        self.alg.operations().len()
    }
    fn arity(&self, op: usize) -> usize {
        self.alg.operation(op).arity()
    }
    fn apply(&self, op: usize, args: &[usize]) -> usize {
        let mut l = self.scratch_l.borrow_mut();
        let mut r = self.scratch_r.borrow_mut();
        l.clear();
        r.clear();
        for &p in args {
            let (x, y) = self.pairs[p];
            l.push(x);
            r.push(y);
        }
        self.id(self.alg.apply(op, &l), self.alg.apply(op, &r))
    }
}

/// `[α, β]`: with `Δ` the congruence of `A(α)` generated by the pairs
/// `((x,x),(y,y))` for `x β y`, the commutator is
/// `{(x, y) : (x,x) Δ (x,y)}`.
pub fn commutator(alg: &FiniteAlgebra, alpha: &Congruence, beta: &Congruence) -> Congruence {
    let n = alg.size();
    let pa = PairAlgebra::new(alg, alpha);
    let seeds = (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .filter(|&(x, y)| x < y && beta.related(x, y))
        .map(|(x, y)| (pa.id(x, x), pa.id(y, y)));
    let delta = generate(&pa, seeds);
    let related: Vec<(usize, usize)> = pa
        .pairs
        .iter()
        .filter(|&&(x, y)| delta[pa.id(x, x)] == delta[pa.id(x, y)])
        .copied()
        .collect();
    Congruence::generated(alg, &related).expect("pairs in range")
}

/// `[α, β]` for lattice indices.
pub fn commutator_in(
    alg: &FiniteAlgebra,
    lattice: &CongruenceLattice,
    a: usize,
    b: usize,
) -> Result<usize> {
    lattice.check(a)?;
    lattice.check(b)?;
    let c = commutator(alg, lattice.get(a), lattice.get(b));
    lattice.index_of(&c).ok_or(Error::NotInLattice)
}

/// Commutators of all ordered pairs of lattice elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutatorTable {
    m: usize,
    entries: Vec<usize>,
}

impl CommutatorTable {
    pub fn compute(alg: &FiniteAlgebra, lattice: &CongruenceLattice) -> Self {
        let m = lattice.len();
        let mut entries = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                entries
                    .push(commutator_in(alg, lattice, a, b).expect("commutator is a congruence"));
            }
        }
        CommutatorTable { m, entries }
    }

    /// Wraps entries computed elsewhere (row-major over `(a, b)`).
    pub fn from_entries(lattice: &CongruenceLattice, entries: Vec<usize>) -> Result<Self> {
        let m = lattice.len();
        if entries.len() != m * m || entries.iter().any(|&e| e >= m) {
            return Err(Error::NotInLattice);
        }
        Ok(CommutatorTable { m, entries })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> usize {
        self.entries[a * self.m + b]
    }

    /// `(α : β)`, the largest `η` with `[η, β] ≤ α`.
    pub fn centralizer(&self, lattice: &CongruenceLattice, a: usize, b: usize) -> Result<usize> {
        lattice.check(a)?;
        lattice.check(b)?;
        let c = lattice.join_all((0..self.m).filter(|&t| lattice.leq(self.get(t, b), a)));
        if !lattice.leq(self.get(c, b), a) {
            return Err(Error::CentralizerInconsistent);
        }
        Ok(c)
    }

    /// `[β, β] ≤ α` for `α ≤ β`.
    pub fn is_abelian_quotient(
        &self,
        lattice: &CongruenceLattice,
        a: usize,
        b: usize,
    ) -> Result<bool> {
        lattice.check(a)?;
        lattice.check(b)?;
        if !lattice.leq(a, b) {
            return Err(Error::IntervalInvalid);
        }
        Ok(lattice.leq(self.get(b, b), a))
    }

    /// `[α, α] = 0`.
    pub fn is_abelian(&self, a: usize) -> bool {
        self.get(a, a) == 0
    }
}

/// The class `o/α` with `x + y = d(x, o, y)` and `-x = d(o, x, o)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassGroup {
    base: usize,
    carrier: Vec<usize>,
    position: Vec<usize>,
    add: Vec<usize>,
    neg: Vec<usize>,
}

impl ClassGroup {
    pub fn base(&self) -> usize {
        self.base
    }

    pub fn carrier(&self) -> &[usize] {
        &self.carrier
    }

    pub fn order(&self) -> usize {
        self.carrier.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.position.get(x).is_some_and(|&p| p != usize::MAX)
    }

    fn pos(&self, x: usize) -> usize {
        let p = self.position[x];
        assert!(p != usize::MAX, "element {x} is not in the class");
        p
    }

    pub fn add(&self, x: usize, y: usize) -> usize {
        self.add[self.pos(x) * self.carrier.len() + self.pos(y)]
    }

    pub fn neg(&self, x: usize) -> usize {
        self.neg[self.pos(x)]
    }

    /// `x + x + ... + x` (`k` times).
    pub fn times(&self, k: usize, x: usize) -> usize {
        (0..k).fold(self.base, |acc, _| self.add(acc, x))
    }

    /// Exponent `p`: every element satisfies `p·x = 0`.
    pub fn has_exponent(&self, p: usize) -> bool {
        self.carrier.iter().all(|&x| self.times(p, x) == self.base)
    }
}

/// Builds the class group on `o/α` and verifies the abelian group axioms.
pub fn class_group(
    alg: &FiniteAlgebra,
    d: &MalcevWitness,
    alpha: &Congruence,
    o: usize,
) -> Result<ClassGroup> {
    if o >= alg.size() {
        return Err(Error::ElementOutOfRange(o));
    }
    if !commutator(alg, alpha, alpha).is_identity() {
        return Err(Error::NotAbelian);
    }
    build_class_group(d, alpha, o)
}

pub(crate) fn build_class_group(
    d: &MalcevWitness,
    alpha: &Congruence,
    o: usize,
) -> Result<ClassGroup> {
    let carrier = alpha.class_of(o);
    let k = carrier.len();
    let mut position = vec![usize::MAX; alpha.size()];
    for (i, &x) in carrier.iter().enumerate() {
        position[x] = i;
    }
    let mut add = Vec::with_capacity(k * k);
    for &x in &carrier {
        for &y in &carrier {
            let s = d.apply(x, o, y);
            if position[s] == usize::MAX {
                return Err(Error::AxiomFailure(format!("{x} + {y} leaves the class")));
            }
            add.push(s);
        }
    }
    let neg: Vec<usize> = carrier.iter().map(|&x| d.apply(o, x, o)).collect();
    let group = ClassGroup {
        base: o,
        carrier,
        position,
        add,
        neg,
    };
    for &x in &group.carrier {
        if group.add(x, o) != x || group.add(o, x) != x {
            return Err(Error::AxiomFailure(format!("{o} is not neutral for {x}")));
        }
        if !group.contains(group.neg(x)) || group.add(x, group.neg(x)) != o {
            return Err(Error::AxiomFailure(format!("{x} has no inverse")));
        }
        for &y in &group.carrier {
            if group.add(x, y) != group.add(y, x) {
                return Err(Error::AxiomFailure(format!("{x} and {y} do not commute")));
            }
            for &z in &group.carrier {
                if group.add(group.add(x, y), z) != group.add(x, group.add(y, z)) {
                    return Err(Error::AxiomFailure(format!(
                        "associativity fails at {x}, {y}, {z}"
                    )));
                }
            }
        }
    }
    Ok(group)
}

/// Restrictions to `o/α` of the unary polynomials fixing `o`, with pointwise
/// sum in the class group and composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarRing {
    group: ClassGroup,
    /// Each member as images of the carrier, in carrier order.
    members: Vec<Vec<usize>>,
    /// Clone index that first produced each member.
    sources: Vec<usize>,
    add: Vec<usize>,
    compose: Vec<usize>,
}

impl ScalarRing {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn group(&self) -> &ClassGroup {
        &self.group
    }

    /// Member `r` applied to `x` in the class.
    pub fn apply(&self, r: usize, x: usize) -> usize {
        self.members[r][self.group.pos(x)]
    }

    pub fn member(&self, r: usize) -> &[usize] {
        &self.members[r]
    }

    pub fn source(&self, r: usize) -> usize {
        self.sources[r]
    }

    pub fn add(&self, r: usize, s: usize) -> usize {
        self.add[r * self.len() + s]
    }

    /// `r ∘ s`.
    pub fn compose(&self, r: usize, s: usize) -> usize {
        self.compose[r * self.len() + s]
    }

    /// Index of the restriction of the identity.
    pub fn one(&self) -> usize {
        let id = self.group.carrier.clone();
        self.members
            .iter()
            .position(|m| *m == id)
            .expect("identity is a member")
    }
}

pub fn scalar_ring(
    alg: &FiniteAlgebra,
    d: &MalcevWitness,
    clone1: &PolyClone,
    alpha: &Congruence,
    o: usize,
) -> Result<ScalarRing> {
    clone1.ensure_complete()?;
    if clone1.arity() != 1 {
        return Err(Error::PreconditionFailed(
            "the scalar ring needs the unary clone".into(),
        ));
    }
    let group = class_group(alg, d, alpha, o)?;
    let mut members = Vec::new();
    let mut sources = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    for (i, table) in clone1.tables().enumerate() {
        if table[o] as usize != o {
            continue;
        }
        let restriction: Vec<usize> = group.carrier.iter().map(|&x| table[x] as usize).collect();
        if !index.contains_key(&restriction) {
            index.insert(restriction.clone(), members.len());
            members.push(restriction);
            sources.push(i);
        }
    }
    let k = members.len();
    let mut add = Vec::with_capacity(k * k);
    let mut compose = Vec::with_capacity(k * k);
    for r in &members {
        for s in &members {
            let sum: Vec<usize> = r.iter().zip(s).map(|(&a, &b)| d.apply(a, o, b)).collect();
            let comp: Vec<usize> = s.iter().map(|&b| r[group.pos(b)]).collect();
            add.push(
                *index
                    .get(&sum)
                    .ok_or_else(|| Error::AxiomFailure("ring not closed under +".into()))?,
            );
            compose.push(
                *index.get(&comp).ok_or_else(|| {
                    Error::AxiomFailure("ring not closed under composition".into())
                })?,
            );
        }
    }
    Ok(ScalarRing {
        group,
        members,
        sources,
        add,
        compose,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn setup(alg: &FiniteAlgebra) -> (CongruenceLattice, CommutatorTable) {
        let l = CongruenceLattice::new(alg);
        let c = CommutatorTable::compute(alg, &l);
        (l, c)
    }

    #[test]
    fn commutator_examples() {
        let z4 = corpus::cyclic(4);
        let (l, c) = setup(&z4);
        assert_eq!(c.get(l.top(), l.top()), 0);
        let s3 = corpus::symmetric3();
        let (l, c) = setup(&s3);
        let a3 = l.get(c.get(l.top(), l.top()));
        assert_eq!(a3.classes(), [vec![0, 3, 4], vec![1, 2, 5]]);
        for a in 0..l.len() {
            assert_eq!(c.get(a, 0), 0);
        }
    }

    #[test]
    fn centralizer_examples() {
        let z4 = corpus::cyclic(4);
        let (l, c) = setup(&z4);
        assert_eq!(c.centralizer(&l, 0, 1).unwrap(), l.top());
        let s3 = corpus::symmetric3();
        let (l, c) = setup(&s3);
        assert_eq!(c.centralizer(&l, 0, 1).unwrap(), 1);
        for a in 0..l.len() {
            assert_eq!(c.centralizer(&l, a, 0).unwrap(), l.top());
        }
        assert_eq!(c.centralizer(&l, 9, 0), Err(Error::NotInLattice));
    }

    #[test]
    fn abelian_quotients() {
        let (l, c) = setup(&corpus::cyclic(4));
        assert!(c.is_abelian_quotient(&l, 0, 1).unwrap());
        let (l, c) = setup(&corpus::symmetric3());
        assert!(!c.is_abelian_quotient(&l, 0, l.top()).unwrap());
        assert!(c.is_abelian_quotient(&l, 1, 1).unwrap());
        assert_eq!(c.is_abelian_quotient(&l, 1, 0), Err(Error::IntervalInvalid));
    }

    #[test]
    fn commutator_is_monotone_symmetric_and_below_meet() {
        for alg in corpus::malcev_algebras() {
            let (l, c) = setup(&alg);
            for a in 0..l.len() {
                for b in 0..l.len() {
                    assert_eq!(c.get(a, b), c.get(b, a), "{}", alg.name());
                    assert!(l.leq(c.get(a, b), l.meet(a, b)));
                    for a2 in 0..l.len() {
                        if l.leq(a, a2) {
                            assert!(l.leq(c.get(a, b), c.get(a2, b)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn class_group_examples() {
        let z4 = corpus::cyclic(4);
        let d = MalcevWitness::from_algebra(&z4).unwrap().unwrap();
        let theta = Congruence::from_classes(4, &[&[0, 2], &[1, 3]]).unwrap();
        let g = class_group(&z4, &d, &theta, 0).unwrap();
        assert_eq!(g.carrier(), &[0, 2]);
        assert_eq!(g.add(2, 2), 0);
        assert!(g.has_exponent(2));
        let single = class_group(&z4, &d, &Congruence::identity(4), 3).unwrap();
        assert_eq!(single.order(), 1);
        let s3 = corpus::symmetric3();
        let d = MalcevWitness::from_algebra(&s3).unwrap().unwrap();
        let a3 = Congruence::from_classes(6, &[&[0, 3, 4], &[1, 2, 5]]).unwrap();
        let g = class_group(&s3, &d, &a3, 0).unwrap();
        assert_eq!(g.order(), 3);
        assert!(g.has_exponent(3));
        assert_eq!(
            class_group(&s3, &d, &Congruence::full(6), 0),
            Err(Error::NotAbelian)
        );
    }

    #[test]
    fn scalar_ring_examples() {
        let z4 = corpus::cyclic(4);
        let d = MalcevWitness::from_algebra(&z4).unwrap().unwrap();
        let clone = PolyClone::generate(&z4, 1, 1000).unwrap();
        let theta = Congruence::from_classes(4, &[&[0, 2], &[1, 3]]).unwrap();
        let ring = scalar_ring(&z4, &d, &clone, &theta, 0).unwrap();
        assert_eq!(ring.len(), 2);
        assert_eq!(ring.member(ring.one()), &[0, 2]);
        let z3 = corpus::cyclic(3);
        let d = MalcevWitness::from_algebra(&z3).unwrap().unwrap();
        let clone = PolyClone::generate(&z3, 1, 1000).unwrap();
        let ring = scalar_ring(&z3, &d, &clone, &Congruence::full(3), 0).unwrap();
        assert_eq!(ring.len(), 3);
        // GF(3): every non-zero element is invertible under composition.
        let one = ring.one();
        for r in 0..3 {
            if ring.member(r) != [0, 0, 0] {
                assert!((0..3).any(|s| ring.compose(r, s) == one));
            }
        }
        let single = scalar_ring(&z3, &d, &clone, &Congruence::identity(3), 1).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn scalar_ring_needs_complete_clone() {
        let z3 = corpus::cyclic(3);
        let d = MalcevWitness::from_algebra(&z3).unwrap().unwrap();
        let partial = PolyClone::generate_partial(&z3, 1, 4).unwrap();
        assert_eq!(
            scalar_ring(&z3, &d, &partial, &Congruence::full(3), 0),
            Err(Error::CloneIncomplete)
        );
    }
}
