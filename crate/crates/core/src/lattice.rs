//! The congruence lattice with covers, meet/join tables, irreducibility data
//! and the transposition/projectivity relation on intervals.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt::Write;

use hashbrown::HashMap;

use crate::algebra::FiniteAlgebra;
use crate::clone::MalcevWitness;
use crate::commutator::CommutatorTable;
use crate::congruence::Congruence;
use crate::error::{Error, Result};
use crate::unionfind::UnionFind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transposition {
    Up,
    Down,
    No,
}

/// `Con A`, sorted by number of classes descending and then by the
/// representative array, so index 0 is the identity and the last index is the
/// full congruence.
#[derive(Clone, Debug)]
pub struct CongruenceLattice {
    elems: Vec<Congruence>,
    index: HashMap<Vec<usize>, usize>,
    leq: Vec<bool>,
    meet: Vec<usize>,
    join: Vec<usize>,
    lower: Vec<Vec<usize>>,
    upper: Vec<Vec<usize>>,
    prime_class: HashMap<(usize, usize), usize>,
}

impl CongruenceLattice {
    /// All principal congruences closed under join, plus the identity.
    pub fn new(alg: &FiniteAlgebra) -> Self {
        let n = alg.size();
        let mut elems = vec![Congruence::identity(n)];
        let mut seen: HashMap<Vec<usize>, ()> = HashMap::new();
        seen.insert(elems[0].reps().to_vec(), ());
        for a in 0..n {
            for b in a + 1..n {
                let c = Congruence::principal(alg, a, b).expect("elements in range");
                if seen.insert(c.reps().to_vec(), ()).is_none() {
                    elems.push(c);
                }
            }
        }
        let mut i = 1;
        while i < elems.len() {
            for j in 1..i {
                let c = elems[i].join(alg, &elems[j]);
                if seen.insert(c.reps().to_vec(), ()).is_none() {
                    elems.push(c);
                }
            }
            i += 1;
        }
        Self::from_congruences(elems)
    }

    /// Builds the lattice data from a join- and meet-closed family containing
    /// the identity and the full congruence.
    pub fn from_congruences(mut elems: Vec<Congruence>) -> Self {
        elems.sort_by(|a, b| {
            (Reverse(a.num_classes()), a.reps()).cmp(&(Reverse(b.num_classes()), b.reps()))
        });
        elems.dedup();
        let m = elems.len();
        let index: HashMap<Vec<usize>, usize> = elems
            .iter()
            .enumerate()
            .map(|(i, c)| (c.reps().to_vec(), i))
            .collect();
        let mut leq = vec![false; m * m];
        for i in 0..m {
            for j in 0..m {
                leq[i * m + j] = elems[i].leq(&elems[j]);
            }
        }
        let lookup = |c: &Congruence| *index.get(c.reps()).expect("family is not a lattice");
        let mut meet = vec![0; m * m];
        let mut join = vec![0; m * m];
        for i in 0..m {
            for j in i..m {
                let mt = lookup(&elems[i].meet(&elems[j]));
                let jn = lookup(&elems[i].equivalence_join(&elems[j]));
                meet[i * m + j] = mt;
                meet[j * m + i] = mt;
                join[i * m + j] = jn;
                join[j * m + i] = jn;
            }
        }
        let mut lower = vec![Vec::new(); m];
        let mut upper = vec![Vec::new(); m];
        for i in 0..m {
            for j in 0..m {
                if i != j
                    && leq[i * m + j]
                    && !(0..m).any(|k| k != i && k != j && leq[i * m + k] && leq[k * m + j])
                {
                    lower[j].push(i);
                    upper[i].push(j);
                }
            }
        }
        let mut lattice = CongruenceLattice {
            elems,
            index,
            leq,
            meet,
            join,
            lower,
            upper,
            prime_class: HashMap::new(),
        };
        lattice.prime_class = lattice.projectivity_classes(0, m - 1);
        lattice
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.elems.len() - 1
    }

    pub fn get(&self, i: usize) -> &Congruence {
        &self.elems[i]
    }

    pub fn congruences(&self) -> &[Congruence] {
        &self.elems
    }

    pub fn index_of(&self, c: &Congruence) -> Option<usize> {
        self.index.get(c.reps()).copied()
    }

    pub fn check(&self, i: usize) -> Result<usize> {
        if i < self.len() {
            Ok(i)
        } else {
            Err(Error::NotInLattice)
        }
    }

    #[inline]
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.len() + j]
    }

    #[inline]
    pub fn meet(&self, i: usize, j: usize) -> usize {
        self.meet[i * self.len() + j]
    }

    #[inline]
    pub fn join(&self, i: usize, j: usize) -> usize {
        self.join[i * self.len() + j]
    }

    pub fn meet_all(&self, items: impl IntoIterator<Item = usize>) -> usize {
        items
            .into_iter()
            .fold(self.top(), |acc, x| self.meet(acc, x))
    }

    pub fn join_all(&self, items: impl IntoIterator<Item = usize>) -> usize {
        items
            .into_iter()
            .fold(self.bottom(), |acc, x| self.join(acc, x))
    }

    pub fn lower_covers(&self, i: usize) -> &[usize] {
        &self.lower[i]
    }

    pub fn upper_covers(&self, i: usize) -> &[usize] {
        &self.upper[i]
    }

    /// `i ≺ j`.
    pub fn covers(&self, i: usize, j: usize) -> bool {
        self.upper[i].contains(&j)
    }

    /// The unique lower cover of a join-irreducible element.
    pub fn lower_cover(&self, i: usize) -> Option<usize> {
        match self.lower[i].as_slice() {
            [only] => Some(*only),
            _ => None,
        }
    }

    /// The unique upper cover of a strictly meet-irreducible element.
    pub fn upper_cover(&self, i: usize) -> Option<usize> {
        match self.upper[i].as_slice() {
            [only] => Some(*only),
            _ => None,
        }
    }

    pub fn is_join_irreducible(&self, i: usize) -> bool {
        self.lower_cover(i).is_some()
    }

    pub fn is_strictly_meet_irreducible(&self, i: usize) -> bool {
        self.upper_cover(i).is_some()
    }

    /// All pairs `(i, j)` with `i ≺ j`, ordered by `i` then `j`.
    pub fn prime_quotients(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|i| self.upper[i].iter().map(move |&j| (i, j)))
            .collect()
    }

    /// Elements of the interval `[lo, hi]`.
    pub fn interval(&self, lo: usize, hi: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| self.leq(lo, k) && self.leq(k, hi))
            .collect()
    }

    /// Length of the longest chain in `[lo, hi]`.
    pub fn interval_height(&self, lo: usize, hi: usize) -> usize {
        // Indices are a linear extension of the order, so one pass suffices.
        let mut depth = vec![None; self.len()];
        depth[lo] = Some(0usize);
        for k in 0..self.len() {
            let Some(d) = depth[k] else { continue };
            for &u in &self.upper[k] {
                if self.leq(u, hi) {
                    depth[u] = Some(depth[u].map_or(d + 1, |e: usize| e.max(d + 1)));
                }
            }
        }
        depth[hi].unwrap_or(0)
    }

    pub fn height(&self) -> usize {
        self.interval_height(self.bottom(), self.top())
    }

    /// Modularity on the interval `[lo, hi]`: `a ≤ c` implies
    /// `a ∨ (b ∧ c) = (a ∨ b) ∧ c`.
    pub fn is_modular_on(&self, lo: usize, hi: usize) -> bool {
        let elems = self.interval(lo, hi);
        elems.iter().all(|&a| {
            elems.iter().all(|&c| {
                !self.leq(a, c)
                    || elems
                        .iter()
                        .all(|&b| self.join(a, self.meet(b, c)) == self.meet(self.join(a, b), c))
            })
        })
    }

    pub fn is_modular(&self) -> bool {
        self.is_modular_on(self.bottom(), self.top())
    }

    /// Every element of `[lo, hi]` has a complement inside the interval.
    pub fn is_complemented_on(&self, lo: usize, hi: usize) -> bool {
        let elems = self.interval(lo, hi);
        elems.iter().all(|&a| {
            elems
                .iter()
                .any(|&b| self.meet(a, b) == lo && self.join(a, b) == hi)
        })
    }

    pub fn transposes(&self, a: usize, b: usize, c: usize, d: usize) -> Result<Transposition> {
        for x in [a, b, c, d] {
            self.check(x)?;
        }
        if !self.leq(a, b) || !self.leq(c, d) {
            return Err(Error::IntervalInvalid);
        }
        Ok(if self.join(b, c) == d && self.meet(b, c) == a {
            Transposition::Up
        } else if b == self.join(a, d) && c == self.meet(a, d) {
            Transposition::Down
        } else {
            Transposition::No
        })
    }

    /// Intervals one transposition away from `[a, b]`, restricted to elements
    /// of `[lo, hi]`.
    fn neighbours(
        &self,
        a: usize,
        b: usize,
        lo: usize,
        hi: usize,
        primes_only: bool,
    ) -> Vec<(usize, usize)> {
        let inside = |x: usize| self.leq(lo, x) && self.leq(x, hi);
        let mut out = Vec::new();
        for x in 0..self.len() {
            if !inside(x) {
                continue;
            }
            // [a,b] transposes up to [x, b ∨ x].
            if self.meet(b, x) == a {
                out.push((x, self.join(b, x)));
            }
            // [a,b] transposes down to [a ∧ x, x].
            if self.join(a, x) == b {
                out.push((self.meet(a, x), x));
            }
        }
        out.retain(|&(c, d)| inside(c) && inside(d) && (!primes_only || self.covers(c, d)));
        out
    }

    /// Breadth-first search over transpositions. When `[a, b]` is a prime
    /// quotient only prime quotients are explored. Returns the chain of
    /// intervals from `[a, b]` to `[c, d]`.
    pub fn projective(
        &self,
        a: usize,
        b: usize,
        c: usize,
        d: usize,
    ) -> Result<Option<Vec<(usize, usize)>>> {
        self.transposes(a, b, c, d)?;
        Ok(self.projective_within(a, b, c, d, self.bottom(), self.top()))
    }

    fn projective_within(
        &self,
        a: usize,
        b: usize,
        c: usize,
        d: usize,
        lo: usize,
        hi: usize,
    ) -> Option<Vec<(usize, usize)>> {
        let primes_only = self.covers(a, b);
        let mut parent: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut queue = VecDeque::new();
        parent.insert((a, b), (a, b));
        queue.push_back((a, b));
        while let Some(cur) = queue.pop_front() {
            if cur == (c, d) {
                let mut chain = vec![cur];
                let mut at = cur;
                while at != (a, b) {
                    at = parent[&at];
                    chain.push(at);
                }
                chain.reverse();
                return Some(chain);
            }
            for next in self.neighbours(cur.0, cur.1, lo, hi, primes_only) {
                if !parent.contains_key(&next) {
                    parent.insert(next, cur);
                    queue.push_back(next);
                }
            }
        }
        None
    }

    /// Projectivity classes of the prime quotients inside `[lo, hi]`,
    /// computed with transpositions that stay inside the interval. Class ids
    /// follow the order of first appearance.
    pub fn projectivity_classes(&self, lo: usize, hi: usize) -> HashMap<(usize, usize), usize> {
        let primes: Vec<(usize, usize)> = self
            .prime_quotients()
            .into_iter()
            .filter(|&(a, b)| self.leq(lo, a) && self.leq(b, hi))
            .collect();
        let pos: HashMap<(usize, usize), usize> =
            primes.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut uf = UnionFind::new(primes.len());
        for (i, &(a, b)) in primes.iter().enumerate() {
            for next in self.neighbours(a, b, lo, hi, true) {
                uf.union(i, pos[&next]);
            }
        }
        let reps = uf.into_reps();
        let mut ids = HashMap::new();
        let mut out = HashMap::new();
        for (i, &p) in primes.iter().enumerate() {
            let next = ids.len();
            let id = *ids.entry(reps[i]).or_insert(next);
            out.insert(p, id);
        }
        out
    }

    /// Projectivity of two prime quotients of the whole lattice.
    pub fn primes_projective(&self, p: (usize, usize), q: (usize, usize)) -> bool {
        match (self.prime_class.get(&p), self.prime_class.get(&q)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }

    /// `[lo, hi]` is modular, complemented, and all its prime quotients are
    /// projective inside it.
    pub fn is_simple_complemented_modular(&self, lo: usize, hi: usize) -> bool {
        if !self.is_modular_on(lo, hi) || !self.is_complemented_on(lo, hi) {
            return false;
        }
        let classes = self.projectivity_classes(lo, hi);
        let mut ids: Vec<usize> = classes.values().copied().collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len() <= 1
    }

    /// For `[a, b]` transposing up to `[c, e]`: the map sending each
    /// `c`-class inside `o/e` to the `a`-class of any `x ∈ o/b` with
    /// `y a d(x, o, z)` for some `y` in the class and `z ∈ o/c`. Returned as
    /// sorted pairs of least representatives, after checking it is a bijection.
    pub fn transpose_bijection(
        &self,
        d: &MalcevWitness,
        [a, b, c, e]: [usize; 4],
        o: usize,
    ) -> Result<Vec<(usize, usize)>> {
        if self.transposes(a, b, c, e)? != Transposition::Up {
            return Err(Error::NotTransposed);
        }
        let (alpha, beta, gamma, delta) = (self.get(a), self.get(b), self.get(c), self.get(e));
        if o >= alpha.size() {
            return Err(Error::ElementOutOfRange(o));
        }
        let (o_beta, o_gamma) = (beta.class_of(o), gamma.class_of(o));
        let mut map: Vec<(usize, usize)> = Vec::new();
        for y in delta.class_of(o) {
            let mut image = None;
            for &x in &o_beta {
                if o_gamma.iter().any(|&z| alpha.related(y, d.apply(x, o, z))) {
                    if image.is_some_and(|i| i != alpha.rep(x)) {
                        return Err(Error::WitnessInconsistent);
                    }
                    image = Some(alpha.rep(x));
                }
            }
            let image = image.ok_or(Error::WitnessInconsistent)?;
            match map.iter().find(|&&(g, _)| g == gamma.rep(y)) {
                Some(&(_, i)) if i != image => return Err(Error::WitnessInconsistent),
                Some(_) => {}
                None => map.push((gamma.rep(y), image)),
            }
        }
        map.sort_unstable();
        let mut images: Vec<usize> = map.iter().map(|&(_, i)| i).collect();
        images.sort_unstable();
        images.dedup();
        let mut targets: Vec<usize> = o_beta.iter().map(|&x| alpha.rep(x)).collect();
        targets.sort_unstable();
        targets.dedup();
        if images.len() != map.len() || images != targets {
            return Err(Error::WitnessInconsistent);
        }
        Ok(map)
    }

    /// Hasse diagram in DOT. Nodes are canonical indices labelled by class
    /// count and the flags JI, SMI and, given commutators, abelian atom.
    pub fn to_dot(&self, comm: Option<&CommutatorTable>) -> String {
        let mut out = String::from("digraph congruences {\n  rankdir=BT;\n  node [shape=box];\n");
        for i in 0..self.len() {
            let mut flags = Vec::new();
            if self.is_join_irreducible(i) {
                flags.push("JI");
            }
            if self.is_strictly_meet_irreducible(i) {
                flags.push("SMI");
            }
            if comm.is_some_and(|c| self.covers(self.bottom(), i) && c.is_abelian(i)) {
                flags.push("abelian atom");
            }
            let classes = self.get(i).num_classes();
            let noun = if classes == 1 { "class" } else { "classes" };
            let _ = write!(out, "  {i} [label=\"{i}: {classes} {noun}");
            if !flags.is_empty() {
                let _ = write!(out, "\\n{}", flags.join(", "));
            }
            out.push_str("\"];\n");
        }
        for i in 0..self.len() {
            for &j in self.upper_covers(i) {
                let _ = writeln!(out, "  {i} -> {j};");
            }
        }
        out.push_str("}\n");
        out
    }
}
