//! Finite loops as Mal'cev algebras with multiplication and both divisions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{quotient_algebra, FiniteAlgebra};
use crate::commutator::CommutatorTable;
use crate::congruence::Congruence;
use crate::error::{Error, Result};
use crate::lattice::CongruenceLattice;

/// `d(x, y, z) = (x / y) · z`.
const LOOP_TERM: &str = "(mul (rdiv x y) z)";

/// A loop whose identity is element 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Loop {
    n: usize,
    mul: Vec<u8>,
    ldiv: Vec<u8>,
    rdiv: Vec<u8>,
    /// `relabel[x]` is the new label of input element `x`.
    relabel: Vec<usize>,
}

impl Loop {
    /// Validates a multiplication table (row `i` is left multiplication by `i`).
    /// When the identity is not 0 it is swapped with 0.
    pub fn new(table: &[Vec<usize>]) -> Result<Self> {
        let n = table.len();
        if n == 0 || n > crate::algebra::MAX_SIZE {
            return Err(Error::NotALoop(format!("unsupported size {n}")));
        }
        if let Some(r) = table.iter().position(|row| row.len() != n) {
            return Err(Error::NotALoop(format!(
                "row {r} has {} entries, expected {n}",
                table[r].len()
            )));
        }
        for (r, row) in table.iter().enumerate() {
            if let Some(&v) = row.iter().find(|&&v| v >= n) {
                return Err(Error::NotALoop(format!(
                    "entry {v} in row {r} is out of range"
                )));
            }
        }
        fn permutation(n: usize, mut cells: impl Iterator<Item = usize>) -> bool {
            let mut seen = vec![false; n];
            cells.all(|v| !core::mem::replace(&mut seen[v], true))
        }
        for (i, row) in table.iter().enumerate() {
            if !permutation(n, row.iter().copied()) {
                return Err(Error::NotALoop(format!("row {i} is not a permutation")));
            }
            if !permutation(n, (0..n).map(|r| table[r][i])) {
                return Err(Error::NotALoop(format!("column {i} is not a permutation")));
            }
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::NotALoop("no two-sided identity".into()))?;
        let mut relabel: Vec<usize> = (0..n).collect();
        relabel.swap(0, e);
        let mut mul = vec![0u8; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[relabel[a] * n + relabel[b]] = relabel[table[a][b]] as u8;
            }
        }
        let mut ldiv = vec![0u8; n * n];
        let mut rdiv = vec![0u8; n * n];
        for x in 0..n {
            for z in 0..n {
                let y = mul[x * n + z] as usize;
                ldiv[x * n + y] = z as u8;
                // z · x = y  ⇒  y / x = z
                let y = mul[z * n + x] as usize;
                rdiv[y * n + x] = z as u8;
            }
        }
        Ok(Loop {
            n,
            mul,
            ldiv,
            rdiv,
            relabel,
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn relabeling(&self) -> &[usize] {
        &self.relabel
    }

    #[inline]
    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.mul[x * self.n + y] as usize
    }

    /// `x \ y`: the `z` with `x · z = y`.
    #[inline]
    pub fn ldiv(&self, x: usize, y: usize) -> usize {
        self.ldiv[x * self.n + y] as usize
    }

    /// `x / y`: the `z` with `z · y = x`.
    #[inline]
    pub fn rdiv(&self, x: usize, y: usize) -> usize {
        self.rdiv[x * self.n + y] as usize
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|x| (0..self.n).map(|y| self.mul(x, y)).collect())
            .collect()
    }

    pub fn is_associative(&self) -> bool {
        let n = self.n;
        (0..n).all(|x| {
            (0..n)
                .all(|y| (0..n).all(|z| self.mul(self.mul(x, y), z) == self.mul(x, self.mul(y, z))))
        })
    }

    pub fn is_commutative(&self) -> bool {
        (0..self.n).all(|x| (0..self.n).all(|y| self.mul(x, y) == self.mul(y, x)))
    }

    /// The algebra `(Q, ·, \, /)` with Mal'cev term `(x / y) · z`.
    pub fn to_algebra(&self, name: &str) -> FiniteAlgebra {
        let widen = |t: &[u8]| t.iter().map(|&v| v as usize).collect::<Vec<_>>();
        FiniteAlgebra::new(name, self.n)
            .and_then(|a| a.with_operation("mul", 2, &widen(&self.mul)))
            .and_then(|a| a.with_operation("ldiv", 2, &widen(&self.ldiv)))
            .and_then(|a| a.with_operation("rdiv", 2, &widen(&self.rdiv)))
            .and_then(|a| a.with_malcev_sexpr(LOOP_TERM))
            .expect("a validated loop is a Mal'cev algebra")
    }

    /// Normal subloops as identity classes of congruences, in lattice order.
    pub fn normal_subloops(&self, lattice: &CongruenceLattice) -> Vec<NormalSubloop> {
        lattice
            .congruences()
            .iter()
            .map(|c| NormalSubloop {
                elements: c.class_of(0),
                congruence: c.clone(),
            })
            .collect()
    }

    /// Elements `a` with `ax = xa`, `a(xy) = (ax)y`, `x(ay) = (xa)y` and
    /// `x(ya) = (xy)a` for all `x, y`.
    pub fn center(&self) -> Vec<usize> {
        let n = self.n;
        let m = |x, y| self.mul(x, y);
        (0..n)
            .filter(|&a| {
                (0..n).all(|x| {
                    m(a, x) == m(x, a)
                        && (0..n).all(|y| {
                            m(a, m(x, y)) == m(m(a, x), y)
                                && m(x, m(a, y)) == m(m(x, a), y)
                                && m(x, m(y, a)) == m(m(x, y), a)
                        })
                })
            })
            .collect()
    }

    /// The criterion for strict 1-affine completeness of loops: with `H` the
    /// intersection of all normal subloops of index 2, `Q/H` is an elementary
    /// abelian 2-group and `[N, N] = N` for every normal `N ⊆ H`.
    pub fn s1ac_criterion(
        &self,
        lattice: &CongruenceLattice,
        comm: &CommutatorTable,
    ) -> LoopCriterion {
        let index_two: Vec<usize> = (0..lattice.len())
            .filter(|&i| lattice.get(i).num_classes() == 2)
            .collect();
        let h = if index_two.is_empty() {
            lattice.top()
        } else {
            lattice.meet_all(index_two.iter().copied())
        };
        let h_elements = lattice.get(h).class_of(0);
        let quotient = self.quotient_is_elementary_abelian(lattice.get(h));
        let rank = quotient.then(|| lattice.get(h).num_classes().trailing_zeros() as usize);
        let perfect_failure = lattice
            .interval(lattice.bottom(), h)
            .into_iter()
            .find(|&nn| comm.get(nn, nn) != nn)
            .map(|nn| lattice.get(nn).class_of(0));
        LoopCriterion {
            holds: quotient && perfect_failure.is_none(),
            h: h_elements,
            h_index: h,
            rank,
            perfect_failure,
        }
    }

    fn quotient_is_elementary_abelian(&self, h: &Congruence) -> bool {
        let alg = self.to_algebra("loop");
        let Ok((q, _)) = quotient_algebra(&alg, h) else {
            return false;
        };
        let m = q.size();
        let mul = |x: usize, y: usize| q.apply(0, &[x, y]);
        m.is_power_of_two()
            && (0..m).all(|x| {
                mul(x, x) == 0
                    && (0..m).all(|y| {
                        mul(x, y) == mul(y, x)
                            && (0..m).all(|z| mul(mul(x, y), z) == mul(x, mul(y, z)))
                    })
            })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalSubloop {
    pub elements: Vec<usize>,
    pub congruence: Congruence,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopCriterion {
    pub holds: bool,
    /// Elements of `H`.
    pub h: Vec<usize>,
    /// `H` as an index into the congruence lattice.
    pub h_index: usize,
    /// `n` with `Q/H ≅ Z₂ⁿ`, when that holds.
    pub rank: Option<usize>,
    /// A normal subloop `N ⊆ H` with `[N, N] ≠ N`.
    pub perfect_failure: Option<Vec<usize>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn from_group(g: &FiniteAlgebra) -> Loop {
        let n = g.size();
        let table: Vec<Vec<usize>> = (0..n)
            .map(|x| (0..n).map(|y| g.apply(0, &[x, y])).collect())
            .collect();
        Loop::new(&table).unwrap()
    }

    fn criterion(q: &Loop) -> LoopCriterion {
        let alg = q.to_algebra("q");
        let l = CongruenceLattice::new(&alg);
        let c = CommutatorTable::compute(&alg, &l);
        q.s1ac_criterion(&l, &c)
    }

    #[test]
    fn validation() {
        assert!(matches!(
            Loop::new(&[vec![0, 1], vec![1, 1]]),
            Err(Error::NotALoop(_))
        ));
        assert!(matches!(
            Loop::new(&[vec![0, 1], vec![0]]),
            Err(Error::NotALoop(_))
        ));
        assert!(Loop::new(&[vec![1, 0], vec![0, 1]]).is_ok());
        let no_identity = [vec![0, 2, 1], vec![2, 1, 0], vec![1, 0, 2]];
        assert!(matches!(Loop::new(&no_identity), Err(Error::NotALoop(_))));
    }

    #[test]
    fn relabels_identity_to_zero() {
        // Z2 written with identity 1.
        let q = Loop::new(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(q.table(), [vec![0, 1], vec![1, 0]]);
        assert_eq!(q.relabeling(), &[1, 0]);
    }

    #[test]
    fn divisions_and_term() {
        for table in corpus::normalized_loops(5) {
            let q = Loop::new(&table).unwrap();
            for x in 0..5 {
                for y in 0..5 {
                    assert_eq!(q.ldiv(x, q.mul(x, y)), y);
                    assert_eq!(q.rdiv(q.mul(x, y), y), x);
                }
            }
            let alg = q.to_algebra("q");
            assert!(crate::MalcevWitness::from_algebra(&alg).unwrap().is_ok());
        }
        let z4 = from_group(&corpus::cyclic(4));
        let d = crate::MalcevWitness::from_algebra(&z4.to_algebra("z4"))
            .unwrap()
            .unwrap();
        for (x, y, z) in [(1, 2, 3), (3, 3, 0), (2, 1, 1)] {
            assert_eq!(d.apply(x, y, z), (x + 4 - y + z) % 4);
        }
    }

    #[test]
    fn normal_subloops_of_groups() {
        let z4 = from_group(&corpus::cyclic(4));
        let l = CongruenceLattice::new(&z4.to_algebra("z4"));
        let mut subs: Vec<Vec<usize>> = z4
            .normal_subloops(&l)
            .into_iter()
            .map(|s| s.elements)
            .collect();
        subs.sort();
        assert_eq!(subs, [vec![0], vec![0, 1, 2, 3], vec![0, 2]]);
        let s3 = from_group(&corpus::symmetric3());
        let l = CongruenceLattice::new(&s3.to_algebra("s3"));
        let mut subs: Vec<Vec<usize>> = s3
            .normal_subloops(&l)
            .into_iter()
            .map(|s| s.elements)
            .collect();
        subs.sort();
        assert_eq!(subs, [vec![0], vec![0, 1, 2, 3, 4, 5], vec![0, 3, 4]]);
    }

    #[test]
    fn centers() {
        assert_eq!(from_group(&corpus::cyclic(4)).center(), [0, 1, 2, 3]);
        assert_eq!(from_group(&corpus::symmetric3()).center(), [0]);
        let z2 = corpus::cyclic_table(2);
        let product = corpus::product_table(&z2, &corpus::symmetric3_table());
        // Pair (a, s) is a * 6 + s; the center is Z2 × {e}.
        assert_eq!(Loop::new(&product).unwrap().center(), [0, 6]);
    }

    #[test]
    fn criterion_examples() {
        let c = criterion(&from_group(&corpus::cyclic(2)));
        assert_eq!((c.holds, c.h, c.rank), (true, vec![0], Some(1)));
        let c = criterion(&from_group(&corpus::cyclic(4)));
        assert_eq!(
            (c.holds, c.h.clone(), c.perfect_failure),
            (false, vec![0, 2], Some(vec![0, 2]))
        );
        let c = criterion(&from_group(&corpus::klein4()));
        assert_eq!((c.holds, c.h, c.rank), (true, vec![0], Some(2)));
        let c = criterion(&from_group(&corpus::cyclic(3)));
        assert_eq!((c.holds, c.rank), (false, Some(0)));
        assert_eq!(
            (c.h, c.perfect_failure),
            (vec![0, 1, 2], Some(vec![0, 1, 2]))
        );
    }

    #[test]
    fn nonassociative_loops_exist_in_corpus() {
        let loops: Vec<Loop> = corpus::loops_up_to_isomorphism(5)
            .iter()
            .map(|t| Loop::new(t).unwrap())
            .collect();
        assert!(loops.iter().any(|q| !q.is_associative()));
    }
}
