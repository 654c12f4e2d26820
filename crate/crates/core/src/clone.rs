//! Polynomial clones of a fixed arity, generated by closure from projections
//! and constants, with a term witness for every member.

use alloc::vec;
use alloc::vec::Vec;
use core::hash::BuildHasher;

use hashbrown::{DefaultHashBuilder, HashTable};

use crate::algebra::{checked_power, tuple_index, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::term::{TermBuilder, TermDag};

/// A polynomial function together with a term that induces it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyFn {
    arity: usize,
    size: usize,
    table: Vec<u8>,
    witness: TermDag,
}

impl PolyFn {
    /// Evaluates `witness` to obtain the table.
    pub fn new(alg: &FiniteAlgebra, witness: TermDag, arity: usize) -> Result<Self> {
        let table = witness.table(alg, arity)?;
        Ok(PolyFn {
            arity,
            size: alg.size(),
            table,
            witness,
        })
    }

    pub fn constant(alg: &FiniteAlgebra, arity: usize, a: usize) -> Self {
        let width = checked_power(alg.size(), arity).expect("arity too large");
        PolyFn {
            arity,
            size: alg.size(),
            table: vec![a as u8; width],
            witness: TermDag::constant(a),
        }
    }

    pub fn identity(alg: &FiniteAlgebra) -> Self {
        PolyFn {
            arity: 1,
            size: alg.size(),
            table: (0..alg.size()).map(|x| x as u8).collect(),
            witness: TermDag::var(0),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    pub fn witness(&self) -> &TermDag {
        &self.witness
    }

    pub fn value(&self, args: &[usize]) -> usize {
        self.table[tuple_index(self.size, args)] as usize
    }

    /// Unary evaluation.
    #[inline]
    pub fn at(&self, x: usize) -> usize {
        self.table[x] as usize
    }

    /// True when the witness reproduces the table exactly.
    pub fn verify(&self, alg: &FiniteAlgebra) -> bool {
        self.witness
            .table(alg, self.arity)
            .is_ok_and(|t| t == self.table)
    }

    /// `self(inner[0](x), ..., inner[k-1](x))`; all inner functions share one arity.
    pub fn compose(&self, inner: &[&PolyFn]) -> PolyFn {
        assert_eq!(inner.len(), self.arity);
        let arity = inner.first().map_or(0, |p| p.arity);
        let width = checked_power(self.size, arity).expect("arity too large");
        let mut args = vec![0; inner.len()];
        let table = (0..width)
            .map(|t| {
                for (a, p) in args.iter_mut().zip(inner) {
                    *a = p.table[t] as usize;
                }
                self.table[tuple_index(self.size, &args)]
            })
            .collect();
        let subs: Vec<TermDag> = inner.iter().map(|p| p.witness.clone()).collect();
        PolyFn {
            arity,
            size: self.size,
            table,
            witness: self.witness.substitute(&subs),
        }
    }

    /// Image of a unary function, ascending.
    pub fn image(&self) -> Vec<usize> {
        let mut seen = vec![false; self.size];
        for &v in &self.table {
            seen[v as usize] = true;
        }
        (0..self.size).filter(|&x| seen[x]).collect()
    }
}

/// How a clone member first arose.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Projection(usize),
    Constant(usize),
    Apply { op: usize, args: Vec<usize> },
}

/// The `arity`-ary polynomial clone, in canonical generation order.
///
/// Generation is single-threaded, so both the member set and the witnesses
/// are deterministic.
#[derive(Clone, Debug)]
pub struct PolyClone {
    arity: usize,
    size: usize,
    width: usize,
    tables: Vec<u8>,
    roots: Vec<usize>,
    origins: Vec<Origin>,
    terms: TermBuilder,
    lookup: HashTable<usize>,
    hasher: DefaultHashBuilder,
    complete: bool,
    limit: usize,
}

enum Stop {
    Done,
    Budget,
    Visitor,
}

impl PolyClone {
    /// The full closure. Fails once more than `max_members` members appear.
    pub fn generate(alg: &FiniteAlgebra, arity: usize, max_members: usize) -> Result<Self> {
        let (clone, stop) = Self::run(alg, arity, max_members, |_| false)?;
        match stop {
            Stop::Budget => Err(Error::CloneBudgetExceeded(max_members)),
            _ => Ok(clone),
        }
    }

    /// Like [`PolyClone::generate`], but returns the truncated clone (marked
    /// incomplete) instead of failing.
    pub fn generate_partial(alg: &FiniteAlgebra, arity: usize, max_members: usize) -> Result<Self> {
        Ok(Self::run(alg, arity, max_members, |_| false)?.0)
    }

    fn new_empty(alg: &FiniteAlgebra, arity: usize, limit: usize) -> Result<Self> {
        let width = checked_power(alg.size(), arity).ok_or(Error::CloneBudgetExceeded(limit))?;
        Ok(PolyClone {
            arity,
            size: alg.size(),
            width,
            tables: Vec::new(),
            roots: Vec::new(),
            origins: Vec::new(),
            terms: TermBuilder::new(),
            lookup: HashTable::new(),
            hasher: DefaultHashBuilder::default(),
            complete: false,
            limit,
        })
    }

    /// Inserts a table unless present. Returns its index and whether it is new.
    fn insert(
        &mut self,
        table: &[u8],
        root: impl FnOnce(&mut TermBuilder) -> usize,
        origin: impl FnOnce() -> Origin,
    ) -> (usize, bool) {
        let hash = self.hasher.hash_one(table);
        let width = self.width;
        let tables = &self.tables;
        if let Some(&i) = self
            .lookup
            .find(hash, |&m| &tables[m * width..(m + 1) * width] == table)
        {
            return (i, false);
        }
        let id = self.roots.len();
        self.tables.extend_from_slice(table);
        let root = root(&mut self.terms);
        self.roots.push(root);
        self.origins.push(origin());
        let (tables, hasher) = (&self.tables, &self.hasher);
        self.lookup.insert_unique(hash, id, |&m| {
            hasher.hash_one(&tables[m * width..(m + 1) * width])
        });
        (id, true)
    }

    /// Runs the closure, calling `visit` on every new table; `visit` returning
    /// true stops the run early.
    fn run(
        alg: &FiniteAlgebra,
        arity: usize,
        max_members: usize,
        mut visit: impl FnMut(&[u8]) -> bool,
    ) -> Result<(Self, Stop)> {
        let mut clone = Self::new_empty(alg, arity, max_members)?;
        let n = alg.size();
        let width = clone.width;
        // Once every function is present nothing new can appear.
        let everything = u32::try_from(width).ok().and_then(|w| n.checked_pow(w));
        let mut buf = vec![0u8; width];
        let mut seeds: Vec<(Vec<u8>, Origin)> = Vec::new();
        for i in 0..arity {
            let stride = n.pow((arity - 1 - i) as u32);
            seeds.push((
                (0..width).map(|t| ((t / stride) % n) as u8).collect(),
                Origin::Projection(i),
            ));
        }
        for a in 0..n {
            seeds.push((vec![a as u8; width], Origin::Constant(a)));
        }
        for (table, origin) in seeds {
            if clone.len() >= max_members {
                return Ok((clone, Stop::Budget));
            }
            let root_of = |terms: &mut TermBuilder| match origin {
                Origin::Projection(i) => terms.var(i),
                Origin::Constant(a) => terms.constant(a),
                Origin::Apply { .. } => unreachable!(),
            };
            let (id, fresh) = clone.insert(&table, root_of, || origin.clone());
            if fresh && visit(&clone.tables[id * width..(id + 1) * width]) {
                return Ok((clone, Stop::Visitor));
            }
        }
        let mut args = Vec::new();
        let mut current = 0;
        while current < clone.len() {
            if everything == Some(clone.len()) {
                break;
            }
            for op in 0..alg.operations().len() {
                let k = alg.operation(op).arity();
                if k == 0 {
                    continue;
                }
                let op_table = alg.operation(op).table();
                args.clear();
                args.resize(k, 0);
                let mut stop = None;
                for_each_tuple_containing(current, &mut args, &mut |tuple| {
                    let tables = &clone.tables;
                    match k {
                        1 => {
                            let a = &tables[tuple[0] * width..][..width];
                            for (o, &x) in buf.iter_mut().zip(a) {
                                *o = op_table[x as usize];
                            }
                        }
                        2 => {
                            let a = &tables[tuple[0] * width..][..width];
                            let b = &tables[tuple[1] * width..][..width];
                            for ((o, &x), &y) in buf.iter_mut().zip(a).zip(b) {
                                *o = op_table[x as usize * n + y as usize];
                            }
                        }
                        _ => {
                            for (t, o) in buf.iter_mut().enumerate() {
                                let idx = tuple
                                    .iter()
                                    .fold(0, |acc, &m| acc * n + tables[m * width + t] as usize);
                                *o = op_table[idx];
                            }
                        }
                    }
                    let hash = clone.hasher.hash_one(&buf[..]);
                    if clone
                        .lookup
                        .find(hash, |&m| tables[m * width..(m + 1) * width] == buf[..])
                        .is_some()
                    {
                        return true;
                    }
                    if clone.len() >= max_members {
                        stop = Some(Stop::Budget);
                        return false;
                    }
                    let children: Vec<usize> = tuple.iter().map(|&m| clone.roots[m]).collect();
                    let (id, _) = clone.insert(
                        &buf,
                        |terms| terms.apply(op, children),
                        || Origin::Apply {
                            op,
                            args: tuple.to_vec(),
                        },
                    );
                    if visit(&clone.tables[id * width..(id + 1) * width]) {
                        stop = Some(Stop::Visitor);
                        return false;
                    }
                    if everything == Some(clone.len()) {
                        stop = Some(Stop::Done);
                        return false;
                    }
                    true
                });
                match stop {
                    Some(Stop::Done) => {
                        clone.complete = true;
                        return Ok((clone, Stop::Done));
                    }
                    Some(s) => return Ok((clone, s)),
                    None => {}
                }
            }
            current += 1;
        }
        clone.complete = true;
        Ok((clone, Stop::Done))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Universe size of the underlying algebra.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of entries in each member's table.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// False when generation stopped at the member budget.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn ensure_complete(&self) -> Result<()> {
        if self.complete {
            Ok(())
        } else {
            Err(Error::CloneIncomplete)
        }
    }

    /// The member budget the clone was generated with.
    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn table(&self, i: usize) -> &[u8] {
        &self.tables[i * self.width..(i + 1) * self.width]
    }

    pub fn tables(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        self.tables.chunks_exact(self.width.max(1)).take(self.len())
    }

    pub fn origin(&self, i: usize) -> &Origin {
        &self.origins[i]
    }

    pub fn witness(&self, i: usize) -> TermDag {
        self.terms.extract(self.roots[i])
    }

    pub fn member(&self, i: usize) -> PolyFn {
        PolyFn {
            arity: self.arity,
            size: self.size,
            table: self.table(i).to_vec(),
            witness: self.witness(i),
        }
    }

    /// Index of the member with this table.
    pub fn find(&self, table: &[u8]) -> Option<usize> {
        if table.len() != self.width {
            return None;
        }
        let hash = self.hasher.hash_one(table);
        self.lookup.find(hash, |&m| self.table(m) == table).copied()
    }

    /// Total nodes in the shared witness arena.
    pub fn arena_len(&self) -> usize {
        self.terms.len()
    }
}

/// Calls `f` on every tuple over `0..=max` that contains `max`, in
/// lexicographic order. `f` returning false stops the enumeration.
pub(crate) fn for_each_tuple_containing(
    max: usize,
    tuple: &mut [usize],
    f: &mut dyn FnMut(&[usize]) -> bool,
) {
    fn rec(
        pos: usize,
        has_max: bool,
        max: usize,
        tuple: &mut [usize],
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if pos == tuple.len() {
            return f(tuple);
        }
        let last = pos + 1 == tuple.len();
        let start = if last && !has_max { max } else { 0 };
        for v in start..=max {
            tuple[pos] = v;
            if !rec(pos + 1, has_max || v == max, max, tuple, f) {
                return false;
            }
        }
        true
    }
    rec(0, false, max, tuple, f);
}

/// A ternary polynomial with `d(x,y,y) = x = d(y,y,x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MalcevWitness {
    d: PolyFn,
}

impl MalcevWitness {
    pub fn new(poly: PolyFn) -> Result<Self> {
        if poly.arity != 3 || !satisfies_malcev(poly.size, &poly.table) {
            return Err(Error::MalcevTermInvalid("identities fail".into()));
        }
        Ok(MalcevWitness { d: poly })
    }

    /// The witness attached to the algebra, if it carries an explicit term.
    pub fn from_algebra(alg: &FiniteAlgebra) -> Option<Result<Self>> {
        let term = alg.malcev_term()?.clone();
        Some(PolyFn::new(alg, term, 3).and_then(Self::new))
    }

    #[inline]
    pub fn apply(&self, x: usize, y: usize, z: usize) -> usize {
        let n = self.d.size;
        self.d.table[(x * n + y) * n + z] as usize
    }

    pub fn poly(&self) -> &PolyFn {
        &self.d
    }

    /// `d(a(x), b(x), c(x))` for unary polynomials.
    pub fn combine(&self, a: &PolyFn, b: &PolyFn, c: &PolyFn) -> PolyFn {
        self.d.compose(&[a, b, c])
    }
}

fn satisfies_malcev(n: usize, table: &[u8]) -> bool {
    (0..n).all(|x| {
        (0..n).all(|y| {
            table[(x * n + y) * n + y] as usize == x && table[(y * n + y) * n + x] as usize == x
        })
    })
}

/// Outcome of a Mal'cev polynomial search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MalcevSearch {
    Found(MalcevWitness),
    /// The ternary clone was exhausted without a witness.
    Absent,
    /// The budget ran out first.
    Unknown,
}

/// Uses the algebra's explicit Mal'cev term when present, otherwise searches
/// the ternary clone in generation order and returns the first witness.
pub fn find_malcev_polynomial(alg: &FiniteAlgebra, max_members: usize) -> Result<MalcevSearch> {
    if let Some(w) = MalcevWitness::from_algebra(alg) {
        return w.map(MalcevSearch::Found);
    }
    search_malcev_polynomial(alg, max_members)
}

/// The clone search alone, ignoring any explicit term.
pub fn search_malcev_polynomial(alg: &FiniteAlgebra, max_members: usize) -> Result<MalcevSearch> {
    let n = alg.size();
    let (clone, stop) = PolyClone::run(alg, 3, max_members, |t| satisfies_malcev(n, t))?;
    Ok(match stop {
        Stop::Visitor => MalcevSearch::Found(MalcevWitness {
            d: clone.member(clone.len() - 1),
        }),
        Stop::Done => MalcevSearch::Absent,
        Stop::Budget => MalcevSearch::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use alloc::collections::BTreeSet;

    /// All unary functions of Z_n of the form kx + c.
    fn affine_maps(n: usize) -> BTreeSet<Vec<u8>> {
        let mut out = BTreeSet::new();
        for k in 0..n {
            for c in 0..n {
                out.insert((0..n).map(|x| ((k * x + c) % n) as u8).collect());
            }
        }
        out
    }

    #[test]
    fn cyclic_unary_clones_are_affine_maps() {
        for n in 1..=8 {
            let alg = corpus::cyclic(n);
            let clone = PolyClone::generate(&alg, 1, 10_000).unwrap();
            let members: BTreeSet<Vec<u8>> = clone.tables().map(|t| t.to_vec()).collect();
            assert_eq!(members, affine_maps(n), "Z{n}");
        }
        assert_eq!(
            PolyClone::generate(&corpus::cyclic(2), 1, 100)
                .unwrap()
                .len(),
            4
        );
        assert_eq!(
            PolyClone::generate(&corpus::cyclic(3), 1, 100)
                .unwrap()
                .len(),
            9
        );
    }

    #[test]
    fn identity_and_constants_present() {
        let alg = corpus::symmetric3();
        let clone = PolyClone::generate(&alg, 1, 100_000).unwrap();
        assert_eq!(clone.find(&[0, 1, 2, 3, 4, 5]), Some(0));
        for a in 0..6u8 {
            assert!(clone.find(&[a; 6]).is_some());
        }
    }

    #[test]
    fn witnesses_reproduce_tables_and_clone_is_closed() {
        for alg in [
            corpus::cyclic(4),
            corpus::symmetric3(),
            corpus::affine_point3(),
            corpus::boolean(2),
        ] {
            let clone = PolyClone::generate(&alg, 1, 100_000).unwrap();
            for i in 0..clone.len() {
                assert!(clone.member(i).verify(&alg), "{} member {i}", alg.name());
            }
            let n = alg.size();
            for op in alg.operations() {
                match op.arity() {
                    1 => {
                        for a in clone.tables() {
                            let t: Vec<u8> = a.iter().map(|&x| op.table()[x as usize]).collect();
                            assert!(clone.find(&t).is_some());
                        }
                    }
                    2 => {
                        for a in clone.tables() {
                            for b in clone.tables() {
                                let t: Vec<u8> = a
                                    .iter()
                                    .zip(b)
                                    .map(|(&x, &y)| op.table()[x as usize * n + y as usize])
                                    .collect();
                                assert!(clone.find(&t).is_some());
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn budget_is_reported() {
        let alg = corpus::cyclic(5);
        assert_eq!(
            PolyClone::generate(&alg, 1, 10).unwrap_err(),
            Error::CloneBudgetExceeded(10)
        );
        let partial = PolyClone::generate_partial(&alg, 1, 10).unwrap();
        assert!(!partial.is_complete());
        assert_eq!(partial.ensure_complete(), Err(Error::CloneIncomplete));
    }

    #[test]
    fn malcev_search_examples() {
        let z4 = corpus::cyclic(4);
        let MalcevSearch::Found(w) = search_malcev_polynomial(&z4, 100_000).unwrap() else {
            panic!()
        };
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    assert_eq!(w.apply(x, y, z), (x + 4 - y + z) % 4);
                }
            }
        }
        assert!(w.poly().verify(&z4));
        assert_eq!(
            search_malcev_polynomial(&corpus::semilattice2(), 100_000).unwrap(),
            MalcevSearch::Absent
        );
        let one = corpus::cyclic(1);
        assert!(matches!(
            search_malcev_polynomial(&one, 10).unwrap(),
            MalcevSearch::Found(_)
        ));
        assert_eq!(
            search_malcev_polynomial(&corpus::lattice2(), 3).unwrap(),
            MalcevSearch::Unknown
        );
    }

    #[test]
    fn tuples_in_lex_order() {
        let mut seen = Vec::new();
        let mut tuple = [0; 2];
        for_each_tuple_containing(2, &mut tuple, &mut |t| {
            seen.push([t[0], t[1]]);
            true
        });
        assert_eq!(seen, [[0, 2], [1, 2], [2, 0], [2, 1], [2, 2]]);
    }

    #[test]
    fn compose_tracks_tables() {
        let z4 = corpus::cyclic(4);
        let d = MalcevWitness::from_algebra(&z4).unwrap().unwrap();
        let id = PolyFn::identity(&z4);
        let c1 = PolyFn::constant(&z4, 1, 1);
        let p = d.combine(&id, &c1, &id);
        assert_eq!(p.table(), &[3, 1, 3, 1]);
        assert!(p.verify(&z4));
    }
}
