use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::FiniteAlgebra;
use crate::error::{Error, Result};
use crate::unionfind::UnionFind;

/// Anything congruences can be generated on: a universe `0..universe()` with
/// finitary operations.
pub(crate) trait Structure {
    fn universe(&self) -> usize;
    fn op_count(&self) -> usize;
    fn arity(&self, op: usize) -> usize;
    fn apply(&self, op: usize, args: &[usize]) -> usize;
}

impl Structure for FiniteAlgebra {
    fn universe(&self) -> usize {
        self.size()
    }
    fn op_count(&self) -> usize {
        self.operations().len()
    }
    fn arity(&self, op: usize) -> usize {
        self.operation(op).arity()
    }
    fn apply(&self, op: usize, args: &[usize]) -> usize {
        FiniteAlgebra::apply(self, op, args)
    }
}

/// Closes the equivalence in `uf` under all basic translations. `pending`
/// holds the pairs whose union produced the current blocks.
pub(crate) fn close<S: Structure + ?Sized>(
    s: &S,
    uf: &mut UnionFind,
    mut pending: Vec<(usize, usize)>,
) {
    let m = s.universe();
    let mut args = Vec::new();
    while let Some((u, v)) = pending.pop() {
        for op in 0..s.op_count() {
            let k = s.arity(op);
            if k == 0 {
                continue;
            }
            args.clear();
            args.resize(k, 0);
            for pos in 0..k {
                // Odometer over the other k-1 positions.
                for slot in args.iter_mut() {
                    *slot = 0;
                }
                loop {
                    args[pos] = u;
                    let a = s.apply(op, &args);
                    args[pos] = v;
                    let b = s.apply(op, &args);
                    if uf.union(a, b) {
                        pending.push((a, b));
                    }
                    let mut i = k;
                    let mut done = true;
                    while i > 0 {
                        i -= 1;
                        if i == pos {
                            continue;
                        }
                        args[i] += 1;
                        if args[i] < m {
                            done = false;
                            break;
                        }
                        args[i] = 0;
                    }
                    if done {
                        break;
                    }
                }
            }
        }
    }
}

/// Least congruence of `s` containing `pairs`, as least-representative array.
pub(crate) fn generate<S: Structure + ?Sized>(
    s: &S,
    pairs: impl IntoIterator<Item = (usize, usize)>,
) -> Vec<usize> {
    let mut uf = UnionFind::new(s.universe());
    let mut pending = Vec::new();
    for (a, b) in pairs {
        if uf.union(a, b) {
            pending.push((a, b));
        }
    }
    close(s, &mut uf, pending);
    uf.into_reps()
}

/// A partition of the universe stored as least representatives:
/// `reps[i]` is the smallest element of the class of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Congruence {
    reps: Vec<usize>,
}

impl Congruence {
    pub fn identity(n: usize) -> Self {
        Congruence {
            reps: (0..n).collect(),
        }
    }

    pub fn full(n: usize) -> Self {
        Congruence { reps: vec![0; n] }
    }

    /// Accepts an array already in least-representative form.
    pub fn from_reps(reps: Vec<usize>) -> Result<Self> {
        for (i, &r) in reps.iter().enumerate() {
            if r > i || reps[r] != r {
                return Err(Error::PreconditionFailed(
                    "array is not in least-representative form".into(),
                ));
            }
        }
        Ok(Congruence { reps })
    }

    /// Builds the partition from explicit classes; unlisted elements are singletons.
    pub fn from_classes(n: usize, classes: &[&[usize]]) -> Result<Self> {
        let mut uf = UnionFind::new(n);
        for class in classes {
            for &x in class.iter() {
                if x >= n {
                    return Err(Error::ElementOutOfRange(x));
                }
                uf.union(class[0], x);
            }
        }
        Ok(Congruence {
            reps: uf.into_reps(),
        })
    }

    /// The kernel of a map on the universe.
    pub fn kernel(map: &[usize]) -> Self {
        let mut reps = Vec::with_capacity(map.len());
        for (x, &v) in map.iter().enumerate() {
            let r = map[..x].iter().position(|&w| w == v).unwrap_or(x);
            reps.push(r);
        }
        Congruence { reps }
    }

    /// Cg(a, b).
    pub fn principal(alg: &FiniteAlgebra, a: usize, b: usize) -> Result<Self> {
        Self::generated(alg, &[(a, b)])
    }

    /// The least congruence containing all `pairs`.
    pub fn generated(alg: &FiniteAlgebra, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = alg.size();
        if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| a >= n || b >= n) {
            return Err(Error::ElementOutOfRange(a.max(b)));
        }
        Ok(Congruence {
            reps: generate(alg, pairs.iter().copied()),
        })
    }

    pub fn size(&self) -> usize {
        self.reps.len()
    }

    pub fn reps(&self) -> &[usize] {
        &self.reps
    }

    #[inline]
    pub fn rep(&self, x: usize) -> usize {
        self.reps[x]
    }

    #[inline]
    pub fn related(&self, a: usize, b: usize) -> bool {
        self.reps[a] == self.reps[b]
    }

    pub fn num_classes(&self) -> usize {
        self.reps
            .iter()
            .enumerate()
            .filter(|&(i, &r)| i == r)
            .count()
    }

    pub fn is_identity(&self) -> bool {
        self.reps.iter().enumerate().all(|(i, &r)| i == r)
    }

    pub fn is_full(&self) -> bool {
        self.reps.iter().all(|&r| r == 0)
    }

    pub fn class_of(&self, a: usize) -> Vec<usize> {
        let r = self.reps[a];
        (0..self.size()).filter(|&x| self.reps[x] == r).collect()
    }

    /// Classes ordered by least element, each ascending.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut index = vec![usize::MAX; self.size()];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for x in 0..self.size() {
            let r = self.reps[x];
            if r == x {
                index[x] = out.len();
                out.push(Vec::new());
            }
            out[index[r]].push(x);
        }
        out
    }

    /// Refinement order.
    pub fn leq(&self, other: &Congruence) -> bool {
        (0..self.size()).all(|x| other.related(x, self.reps[x]))
    }

    /// Intersection of partitions.
    pub fn meet(&self, other: &Congruence) -> Congruence {
        let n = self.size();
        let mut reps = Vec::with_capacity(n);
        for x in 0..n {
            let r = (0..=x)
                .find(|&y| self.related(x, y) && other.related(x, y))
                .unwrap_or(x);
            reps.push(r);
        }
        Congruence { reps }
    }

    /// Join in the congruence lattice: merge both partitions, then close.
    pub fn join(&self, alg: &FiniteAlgebra, other: &Congruence) -> Congruence {
        let pairs = (0..self.size()).flat_map(|x| [(x, self.reps[x]), (x, other.reps[x])]);
        Congruence {
            reps: generate(alg, pairs),
        }
    }

    /// Join of the underlying equivalence relations, without closure.
    pub fn equivalence_join(&self, other: &Congruence) -> Congruence {
        let mut uf = UnionFind::from_reps(&self.reps);
        for x in 0..self.size() {
            uf.union(x, other.reps[x]);
        }
        Congruence {
            reps: uf.into_reps(),
        }
    }

    /// True when every operation respects the partition.
    pub fn is_compatible(&self, alg: &FiniteAlgebra) -> bool {
        if self.size() != alg.size() {
            return false;
        }
        let mut uf = UnionFind::from_reps(&self.reps);
        let pending = (0..self.size())
            .filter(|&x| self.reps[x] != x)
            .map(|x| (self.reps[x], x))
            .collect();
        close(alg, &mut uf, pending);
        uf.into_reps() == self.reps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn principal_examples() {
        let z4 = corpus::cyclic(4);
        assert_eq!(
            Congruence::principal(&z4, 0, 2).unwrap().reps(),
            &[0, 1, 0, 1]
        );
        assert!(Congruence::principal(&z4, 0, 1).unwrap().is_full());
        assert!(Congruence::principal(&z4, 3, 3).unwrap().is_identity());
        assert_eq!(
            Congruence::principal(&z4, 0, 4),
            Err(Error::ElementOutOfRange(4))
        );
    }

    #[test]
    fn classes_and_order() {
        let theta = Congruence::from_classes(5, &[&[3, 1], &[4, 0]]).unwrap();
        assert_eq!(theta.reps(), &[0, 1, 2, 1, 0]);
        assert_eq!(theta.classes(), [vec![0, 4], vec![1, 3], vec![2]]);
        assert_eq!(theta.num_classes(), 3);
        assert!(Congruence::identity(5).leq(&theta));
        assert!(theta.leq(&Congruence::full(5)));
        assert!(!theta.leq(&Congruence::identity(5)));
        let other = Congruence::from_classes(5, &[&[0, 1]]).unwrap();
        assert_eq!(theta.meet(&other), Congruence::identity(5));
        assert_eq!(
            theta.equivalence_join(&other).classes(),
            [vec![0, 1, 3, 4], vec![2]]
        );
        assert_eq!(
            Congruence::kernel(&[2, 0, 2, 1, 0]).reps(),
            &[0, 1, 0, 3, 1]
        );
    }

    #[test]
    fn compatibility() {
        let z4 = corpus::cyclic(4);
        assert!(Congruence::from_classes(4, &[&[0, 2], &[1, 3]])
            .unwrap()
            .is_compatible(&z4));
        assert!(!Congruence::from_classes(4, &[&[0, 2]])
            .unwrap()
            .is_compatible(&z4));
        let a = corpus::affine_point3();
        assert!(Congruence::from_classes(3, &[&[0, 1]])
            .unwrap()
            .is_compatible(&a));
    }

    #[test]
    fn from_reps_validates() {
        assert!(Congruence::from_reps(vec![0, 0, 1]).is_err());
        assert!(Congruence::from_reps(vec![0, 0, 2]).is_ok());
    }
}
