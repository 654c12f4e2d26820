//! Unary partial functions: congruence preservation, interpolation by
//! polynomials, the decision procedure for strict 1-affine completeness and
//! explicit non-interpolable witnesses.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};

use crate::algebra::{quotient_algebra, FiniteAlgebra};
use crate::clone::{MalcevWitness, PolyClone, PolyFn};
use crate::commutator::CommutatorTable;
use crate::congruence::Congruence;
use crate::error::{Error, Result};
use crate::gf;
use crate::lattice::CongruenceLattice;
use crate::structure::{
    check_ab2, check_sc1, class_idempotent, coordinatize_class, find_homogeneous,
    is_congruence_regular, mu_star, sc1_failure_pairs, Coordinatization,
};

/// A function from a finite subset of the universe into the universe.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialFn {
    domain: Vec<usize>,
    values: Vec<usize>,
}

impl PartialFn {
    /// `domain` must be strictly increasing; everything must lie below `size`.
    pub fn new(domain: Vec<usize>, values: Vec<usize>, size: usize) -> Result<Self> {
        if domain.len() != values.len() {
            return Err(Error::InvalidPartialFn(format!(
                "{} domain points but {} values",
                domain.len(),
                values.len()
            )));
        }
        if domain.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartialFn(
                "domain is not strictly increasing".into(),
            ));
        }
        if let Some(&x) = domain.iter().chain(&values).find(|&&x| x >= size) {
            return Err(Error::ElementOutOfRange(x));
        }
        Ok(PartialFn { domain, values })
    }

    pub fn empty() -> Self {
        PartialFn {
            domain: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Sorts the pairs; repeated points must carry the same value.
    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (usize, usize)>,
        size: usize,
    ) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidPartialFn("a point has two values".into()));
        }
        let (domain, values) = pairs.into_iter().unzip();
        PartialFn::new(domain, values, size)
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn get(&self, x: usize) -> Option<usize> {
        self.domain.binary_search(&x).ok().map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.domain.iter().copied().zip(self.values.iter().copied())
    }

    pub fn agrees_with(&self, p: &PolyFn) -> bool {
        self.iter().all(|(x, y)| p.at(x) == y)
    }

    fn agrees_with_table(&self, table: &[u8]) -> bool {
        self.iter().all(|(x, y)| table[x] as usize == y)
    }
}

/// Lazily computed principal congruences `Cg(a, b)`.
pub(crate) struct PrincipalCache<'a> {
    alg: &'a FiniteAlgebra,
    table: Vec<Option<Congruence>>,
}

impl<'a> PrincipalCache<'a> {
    pub(crate) fn new(alg: &'a FiniteAlgebra) -> Self {
        let n = alg.size();
        PrincipalCache {
            alg,
            table: vec![None; n * n],
        }
    }

    pub(crate) fn get(&mut self, a: usize, b: usize) -> &Congruence {
        let (a, b) = (a.min(b), a.max(b));
        let n = self.alg.size();
        let alg = self.alg;
        self.table[a * n + b]
            .get_or_insert_with(|| Congruence::principal(alg, a, b).expect("elements in range"))
    }
}

/// The first pair of domain points `(x, y)` with `(f(x), f(y)) ∉ Cg(x, y)`.
pub fn preservation_violation(alg: &FiniteAlgebra, f: &PartialFn) -> Option<(usize, usize)> {
    let mut cache = PrincipalCache::new(alg);
    for (i, (x, fx)) in f.iter().enumerate() {
        for (y, fy) in f.iter().skip(i + 1) {
            if !cache.get(x, y).related(fx, fy) {
                return Some((x, y));
            }
        }
    }
    None
}

pub fn is_congruence_preserving(alg: &FiniteAlgebra, f: &PartialFn) -> bool {
    preservation_violation(alg, f).is_none()
}

/// The first clone member that agrees with `f` on its domain.
pub fn interpolable_bruteforce(clone1: &PolyClone, f: &PartialFn) -> Result<Option<PolyFn>> {
    clone1.ensure_complete()?;
    Ok(clone1
        .tables()
        .position(|t| f.agrees_with_table(t))
        .map(|i| clone1.member(i)))
}

/// An algebra with everything the interpolation machinery consults.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub alg: FiniteAlgebra,
    pub d: MalcevWitness,
    pub lattice: CongruenceLattice,
    pub comm: CommutatorTable,
    pub clone1: PolyClone,
}

impl Analysis {
    pub fn new(alg: &FiniteAlgebra, d: &MalcevWitness, max_members: usize) -> Result<Self> {
        let lattice = CongruenceLattice::new(alg);
        let comm = CommutatorTable::compute(alg, &lattice);
        let clone1 = PolyClone::generate(alg, 1, max_members)?;
        Ok(Analysis {
            alg: alg.clone(),
            d: d.clone(),
            lattice,
            comm,
            clone1,
        })
    }

    /// Uses the algebra's own Mal'cev term.
    pub fn from_algebra(alg: &FiniteAlgebra, max_members: usize) -> Result<Self> {
        let d = MalcevWitness::from_algebra(alg)
            .ok_or_else(|| Error::PreconditionFailed("the algebra has no Mal'cev term".into()))??;
        Analysis::new(alg, &d, max_members)
    }

    pub fn size(&self) -> usize {
        self.alg.size()
    }
}

/// Result of the lift from interpolation modulo `μ` to exact interpolation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lift {
    Interpolated(PolyFn),
    /// The in-class solve for this domain index had no solution.
    Absent {
        stage: usize,
    },
}

/// Solver for class-valued partial functions: given `f̃` and an element `o`
/// with `f̃(T) ⊆ o/μ`, returns a polynomial agreeing with `f̃` on `T`.
pub type ClassSolver<'s> = dyn FnMut(&PartialFn, usize) -> Result<Option<PolyFn>> + 's;

/// Turns `p0`, which interpolates `f` modulo `mu`, into an exact interpolant.
/// Step `i` fixes domain point `t = T[i]`: with `c = p_i(t)` it solves
/// `f̃_i(s) = d(f(s), p_i(s), c)` inside `c/μ` and sets
/// `p_{i+1}(x) = d(p̃_i(x), c, p_i(x))`.
pub fn lift_interpolation(
    alg: &FiniteAlgebra,
    d: &MalcevWitness,
    f: &PartialFn,
    mu: &Congruence,
    p0: &PolyFn,
    solver: &mut ClassSolver<'_>,
) -> Result<Lift> {
    if p0.arity() != 1 || f.iter().any(|(t, y)| !mu.related(p0.at(t), y)) {
        return Err(Error::ModMuViolation);
    }
    if mu.is_identity() {
        return Ok(Lift::Interpolated(p0.clone()));
    }
    let n = alg.size();
    let mut p = p0.clone();
    for (stage, &next) in f.domain().iter().enumerate() {
        let target = p.at(next);
        let values: Vec<usize> = f.iter().map(|(t, y)| d.apply(y, p.at(t), target)).collect();
        let tilde = PartialFn::new(f.domain().to_vec(), values, n)?;
        let Some(solved) = solver(&tilde, target)? else {
            return Ok(Lift::Absent { stage });
        };
        if !tilde.agrees_with(&solved) {
            return Err(Error::InconsistencyDetected(format!(
                "in-class solver output is wrong at stage {stage}"
            )));
        }
        p = d.combine(&solved, &PolyFn::constant(alg, 1, target), &p);
    }
    if !f.agrees_with(&p) {
        return Err(Error::InconsistencyDetected(
            "lift does not interpolate".into(),
        ));
    }
    Ok(Lift::Interpolated(p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolveMethod {
    /// Constant polynomial.
    Constant,
    /// Affine solve over `GF(2)` in coordinates of a class.
    Linear,
    /// First clone member with image in the class that matches.
    Search,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solve {
    pub poly: Option<PolyFn>,
    pub method: SolveMethod,
}

/// In-class interpolation for one algebra and one congruence `μ`.
pub struct InClassSolver<'a> {
    an: &'a Analysis,
    mu: &'a Congruence,
    /// `μ` is abelian and homogeneous, and (AB2) holds below it.
    linear: bool,
    centralizer: Congruence,
    mu_star: Congruence,
    fast_path: bool,
    coords: HashMap<usize, Option<Coordinatization>>,
    idempotents: HashMap<usize, Option<PolyFn>>,
    isos: HashMap<(usize, usize), Option<(PolyFn, PolyFn)>>,
}

impl<'a> InClassSolver<'a> {
    pub fn new(an: &'a Analysis, mu: usize) -> Result<Self> {
        let lat = &an.lattice;
        lat.check(mu)?;
        an.clone1.ensure_complete()?;
        let homogeneous = find_homogeneous(lat, &an.comm).iter().any(|h| h.mu == mu);
        let linear = homogeneous
            && an.comm.is_abelian(mu)
            && crate::structure::check_abp(lat, &an.comm, mu, 2)?.is_none();
        let centralizer = lat.get(an.comm.centralizer(lat, lat.bottom(), mu)?).clone();
        let mu_star = lat.get(mu_star(lat, mu)).clone();
        Ok(InClassSolver {
            an,
            mu: lat.get(mu),
            linear,
            centralizer,
            mu_star,
            fast_path: true,
            coords: HashMap::new(),
            idempotents: HashMap::new(),
            isos: HashMap::new(),
        })
    }

    /// Disables the linear fast path, leaving constants and search.
    pub fn set_fast_path(&mut self, on: bool) {
        self.fast_path = on;
    }

    pub fn has_linear_path(&self) -> bool {
        self.linear
    }

    pub fn solve(&mut self, f: &PartialFn, o: usize) -> Result<Solve> {
        let alg = &self.an.alg;
        if o >= alg.size() {
            return Err(Error::ElementOutOfRange(o));
        }
        if f.values().iter().any(|&y| !self.mu.related(y, o)) {
            return Err(Error::PreconditionFailed(
                "values leave the target class".into(),
            ));
        }
        let constant = match f.values().first() {
            None => Some(o),
            Some(&y) if f.values().iter().all(|&z| z == y) => Some(y),
            _ => None,
        };
        if let Some(c) = constant {
            return Ok(Solve {
                poly: Some(PolyFn::constant(alg, 1, c)),
                method: SolveMethod::Constant,
            });
        }
        if self.fast_path && self.linear {
            if let Some(p) = self.solve_linear(f, o)? {
                return Ok(Solve {
                    poly: Some(p),
                    method: SolveMethod::Linear,
                });
            }
        }
        Ok(Solve {
            poly: self.solve_by_search(f, o)?,
            method: SolveMethod::Search,
        })
    }

    /// The first clone member with image inside `o/μ` that matches `f`.
    pub fn solve_by_search(&self, f: &PartialFn, o: usize) -> Result<Option<PolyFn>> {
        let clone1 = &self.an.clone1;
        clone1.ensure_complete()?;
        let class = self.mu.rep(o);
        Ok(clone1
            .tables()
            .position(|t| {
                f.agrees_with_table(t) && t.iter().all(|&y| self.mu.rep(y as usize) == class)
            })
            .map(|i| clone1.member(i)))
    }

    /// The linear route; `None` when it does not apply or does not produce a
    /// verified interpolant. Applies to domains inside one `(0:μ)`-class.
    pub fn solve_linear(&mut self, f: &PartialFn, o: usize) -> Result<Option<PolyFn>> {
        if !self.linear || f.is_empty() {
            return Ok(None);
        }
        let an = self.an;
        let (alg, d) = (&an.alg, &an.d);
        let v = f.domain()[0];
        if f.domain().iter().any(|&t| !self.centralizer.related(t, v)) {
            return Ok(None);
        }
        let v_class = self.mu.class_of(v);
        // f1(u) = f(d(u, v, u*)) for u ∈ v/μ, u* ∈ v/μ*.
        let mut f1: Vec<(usize, usize)> = Vec::new();
        for &u in &v_class {
            let mut value = None;
            for u_star in self.mu_star.class_of(v) {
                if let Some(y) = f.get(d.apply(u, v, u_star)) {
                    if value.is_some_and(|z| z != y) {
                        return Ok(None);
                    }
                    value = Some(y);
                }
            }
            if let Some(y) = value {
                f1.push((u, y));
            }
        }
        let q = if v_class.len() == 1 {
            PolyFn::constant(alg, 1, f1.first().map_or(o, |&(_, y)| y))
        } else {
            let Some((to_o, to_v)) = self.isomorphism(v, o)? else {
                return Ok(None);
            };
            let Some(coords) = self.coordinates(v)? else {
                return Ok(None);
            };
            let h = coords.dimension();
            // Unknowns: λ then c_1..c_h, with λ·enc(u) + c = enc(f2(u)).
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for &(u, y) in &f1 {
                let (Some(eu), Some(ey)) = (coords.encode(u), coords.encode(to_v.at(y))) else {
                    return Ok(None);
                };
                for j in 0..h {
                    let mut row = vec![0; h + 1];
                    row[0] = eu[j];
                    row[j + 1] = 1;
                    rows.push(row);
                    rhs.push(ey[j]);
                }
            }
            let Some(x) = (if rows.is_empty() {
                Some(vec![0; h + 1])
            } else {
                gf::solve(&rows, &rhs, 2)
            }) else {
                return Ok(None);
            };
            let c = coords.decode(&x[1..]).expect("coordinates of an element");
            let q = if x[0] == 0 {
                PolyFn::constant(alg, 1, c)
            } else {
                // x + c in the group on v/μ whose zero is the coordinate base.
                d.combine(
                    &PolyFn::identity(alg),
                    &PolyFn::constant(alg, 1, coords.base),
                    &PolyFn::constant(alg, 1, c),
                )
            };
            to_o.compose(&[&q])
        };
        let p = match self.idempotent(o)? {
            Some(e) => e.compose(&[&q]),
            None => q,
        };
        let class = self.mu.rep(o);
        let inside = p.table().iter().all(|&y| self.mu.rep(y as usize) == class);
        Ok((inside && f.agrees_with(&p)).then_some(p))
    }

    fn coordinates(&mut self, v: usize) -> Result<Option<&Coordinatization>> {
        let key = self.mu.rep(v);
        if !self.coords.contains_key(&key) {
            let an = self.an;
            let mu = an.lattice.index_of(self.mu).expect("μ is in the lattice");
            let c = match coordinatize_class(
                &an.alg,
                &an.d,
                &an.clone1,
                &an.lattice,
                &an.comm,
                mu,
                key,
                2,
            ) {
                Ok(c) => Some(c),
                Err(
                    Error::PreconditionFailed(_)
                    | Error::NotElementaryAbelian
                    | Error::ScalarActionFailed,
                ) => None,
                Err(e) => return Err(e),
            };
            self.coords.insert(key, c);
        }
        Ok(self.coords[&key].as_ref())
    }

    fn idempotent(&mut self, o: usize) -> Result<Option<PolyFn>> {
        let key = self.mu.rep(o);
        if !self.idempotents.contains_key(&key) {
            let e = class_idempotent(&self.an.clone1, self.mu, key)?;
            self.idempotents.insert(key, e);
        }
        Ok(self.idempotents[&key].clone())
    }

    /// Mutually inverse polynomial bijections between `v/μ` and `o/μ`.
    fn isomorphism(&mut self, v: usize, o: usize) -> Result<Option<(PolyFn, PolyFn)>> {
        let key = (self.mu.rep(v), self.mu.rep(o));
        if !self.isos.contains_key(&key) {
            let found = self.find_isomorphism(key.0, key.1);
            self.isos.insert(key, found);
        }
        Ok(self.isos[&key].clone())
    }

    fn find_isomorphism(&self, v: usize, o: usize) -> Option<(PolyFn, PolyFn)> {
        let clone1 = &self.an.clone1;
        let (v_class, o_class) = (self.mu.class_of(v), self.mu.class_of(o));
        if v_class.len() != o_class.len() {
            return None;
        }
        let bijects = |t: &[u8], from: &[usize], to: &[usize]| {
            let mut image: Vec<usize> = from.iter().map(|&x| t[x] as usize).collect();
            image.sort_unstable();
            image == to
        };
        let forward = clone1
            .tables()
            .position(|t| bijects(t, &v_class, &o_class))?;
        let s = clone1.table(forward);
        let backward = clone1
            .tables()
            .position(|t| v_class.iter().all(|&x| t[s[x] as usize] as usize == x))?;
        Some((clone1.member(forward), clone1.member(backward)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveRecord {
    pub stage: usize,
    pub target: usize,
    pub method: SolveMethod,
    pub found: bool,
}

/// One level of the recursion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceLevel {
    pub depth: usize,
    pub size: usize,
    /// The homogeneous congruence used; `None` on a one-element algebra.
    pub mu: Option<Congruence>,
    pub mu_abelian: bool,
    pub quotient_size: usize,
    pub solves: Vec<SolveRecord>,
    pub failed_stage: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Interpolated(PolyFn),
    NotInterpolable,
    HypothesisUnmet(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpolationResult {
    pub verdict: Verdict,
    /// Levels ordered by depth.
    pub trace: Vec<TraceLevel>,
}

impl InterpolationResult {
    pub fn interpolant(&self) -> Option<&PolyFn> {
        match &self.verdict {
            Verdict::Interpolated(p) => Some(p),
            _ => None,
        }
    }
}

struct Level {
    an: Analysis,
    mu: Option<usize>,
    /// Element to class index in the next level.
    class_map: Vec<usize>,
    /// Least element of each class.
    reps: Vec<usize>,
}

/// The chain `A, A/μ₀, (A/μ₀)/μ₁, …` down to one element, with everything
/// needed to interpolate unary partial functions of `A`.
pub struct Interpolator {
    levels: Vec<Level>,
    unmet: Option<String>,
    fast_path: bool,
}

impl Interpolator {
    pub fn new(alg: &FiniteAlgebra, d: &MalcevWitness, max_members: usize) -> Result<Self> {
        let mut levels = Vec::new();
        let mut unmet = None;
        let mut current = alg.clone();
        let mut d = d.clone();
        loop {
            let depth = levels.len();
            let lattice = CongruenceLattice::new(&current);
            let comm = CommutatorTable::compute(&current, &lattice);
            let at = |what: &str| {
                if depth == 0 {
                    format!("{what} fails")
                } else {
                    format!("{what} fails in the quotient at depth {depth}")
                }
            };
            if !check_sc1(&lattice, &comm)?.is_empty() {
                unmet = Some(at("(SC1)"));
                break;
            }
            if check_ab2(&lattice, &comm)?.is_some() {
                unmet = Some(at("(AB2)"));
                break;
            }
            let clone1 = PolyClone::generate(&current, 1, max_members)?;
            if current.size() == 1 {
                let an = Analysis {
                    alg: current,
                    d,
                    lattice,
                    comm,
                    clone1,
                };
                levels.push(Level {
                    an,
                    mu: None,
                    class_map: vec![0],
                    reps: vec![0],
                });
                break;
            }
            let Some(h) = find_homogeneous(&lattice, &comm).first().cloned() else {
                unmet = Some(at("a homogeneous congruence"));
                break;
            };
            let (quotient, class_map) = quotient_algebra(&current, lattice.get(h.mu))?;
            let mut reps = vec![usize::MAX; quotient.size()];
            for (x, &c) in class_map.iter().enumerate().rev() {
                reps[c] = x;
            }
            let dq = PolyFn::new(
                &quotient,
                d.poly().witness().map_constants(|c| class_map[c]),
                3,
            )
            .and_then(MalcevWitness::new)?;
            let an = Analysis {
                alg: current,
                d,
                lattice,
                comm,
                clone1,
            };
            levels.push(Level {
                an,
                mu: Some(h.mu),
                class_map,
                reps,
            });
            current = quotient;
            d = dq;
        }
        Ok(Interpolator {
            levels,
            unmet,
            fast_path: true,
        })
    }

    /// Why the hypotheses (SC1) and (AB2) are not available, if they are not.
    pub fn hypothesis_unmet(&self) -> Option<&str> {
        self.unmet.as_deref()
    }

    /// Number of prepared levels, including the one-element algebra.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn set_fast_path(&mut self, on: bool) {
        self.fast_path = on;
    }

    pub fn interpolate(&self, alg: &FiniteAlgebra, f: &PartialFn) -> Result<InterpolationResult> {
        if f.iter().any(|(x, y)| x.max(y) >= alg.size()) {
            return Err(Error::InvalidPartialFn(
                "points outside the universe".into(),
            ));
        }
        let mut trace = Vec::new();
        if !is_congruence_preserving(alg, f) {
            return Ok(InterpolationResult {
                verdict: Verdict::NotInterpolable,
                trace,
            });
        }
        if let Some(reason) = &self.unmet {
            return Ok(InterpolationResult {
                verdict: Verdict::HypothesisUnmet(reason.clone()),
                trace,
            });
        }
        let found = self.interpolate_at(0, f, &mut trace)?;
        trace.sort_by_key(|t| t.depth);
        let verdict = match found {
            Some(p) if f.agrees_with(&p) && p.verify(alg) => Verdict::Interpolated(p),
            Some(_) => {
                return Err(Error::InconsistencyDetected(
                    "interpolant fails re-verification".into(),
                ))
            }
            None => Verdict::NotInterpolable,
        };
        Ok(InterpolationResult { verdict, trace })
    }

    fn interpolate_at(
        &self,
        depth: usize,
        f: &PartialFn,
        trace: &mut Vec<TraceLevel>,
    ) -> Result<Option<PolyFn>> {
        let level = &self.levels[depth];
        let an = &level.an;
        let Some(mu) = level.mu else {
            trace.push(TraceLevel {
                depth,
                size: an.size(),
                mu: None,
                mu_abelian: false,
                quotient_size: 1,
                solves: Vec::new(),
                failed_stage: None,
            });
            return Ok(Some(PolyFn::constant(&an.alg, 1, 0)));
        };
        let quotient_size = level.reps.len();
        let induced = PartialFn::from_pairs(
            f.iter()
                .map(|(x, y)| (level.class_map[x], level.class_map[y])),
            quotient_size,
        )
        .map_err(|_| Error::InconsistencyDetected("function does not preserve μ".into()))?;
        let Some(pq) = self.interpolate_at(depth + 1, &induced, trace)? else {
            return Ok(None);
        };
        let p0 = PolyFn::new(&an.alg, pq.witness().map_constants(|c| level.reps[c]), 1)?;
        let mut solver = InClassSolver::new(an, mu)?;
        solver.set_fast_path(self.fast_path);
        let mut solves = Vec::new();
        let mut stage = 0;
        let outcome =
            lift_interpolation(&an.alg, &an.d, f, an.lattice.get(mu), &p0, &mut |g, o| {
                let s = solver.solve(g, o)?;
                solves.push(SolveRecord {
                    stage,
                    target: o,
                    method: s.method,
                    found: s.poly.is_some(),
                });
                stage += 1;
                Ok(s.poly)
            })?;
        let (result, failed_stage) = match outcome {
            Lift::Interpolated(p) => (Some(p), None),
            Lift::Absent { stage } => (None, Some(stage)),
        };
        trace.push(TraceLevel {
            depth,
            size: an.size(),
            mu: Some(an.lattice.get(mu).clone()),
            mu_abelian: an.comm.is_abelian(mu),
            quotient_size,
            solves,
            failed_stage,
        });
        Ok(result)
    }
}

/// Interpolates `f` by the recursion over homogeneous congruences. A clone
/// budget overrun is reported as an unmet hypothesis.
pub fn interpolate_unary(
    alg: &FiniteAlgebra,
    d: &MalcevWitness,
    f: &PartialFn,
    max_members: usize,
) -> Result<InterpolationResult> {
    match Interpolator::new(alg, d, max_members) {
        Ok(interp) => interp.interpolate(alg, f),
        Err(Error::CloneBudgetExceeded(limit)) => Ok(InterpolationResult {
            verdict: Verdict::HypothesisUnmet(format!("clone budget of {limit} members exceeded")),
            trace: Vec::new(),
        }),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    BruteForce,
    Characterization,
    Both,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub domains: usize,
    pub functions: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct S1acDecision {
    /// `None` when only the characterization ran and it is not decisive.
    pub verdict: Option<bool>,
    /// A congruence-preserving, non-interpolable partial function.
    pub witness: Option<PartialFn>,
    pub sc1: Option<bool>,
    pub ab2: Option<bool>,
    pub regular: Option<bool>,
    pub stats: Option<SearchStats>,
}

/// Decides strict 1-affine completeness.
pub fn decide_s1ac(an: &Analysis, mode: Mode) -> Result<S1acDecision> {
    let mut out = S1acDecision {
        verdict: None,
        witness: None,
        sc1: None,
        ab2: None,
        regular: None,
        stats: None,
    };
    if mode != Mode::BruteForce {
        let sc1 = check_sc1(&an.lattice, &an.comm)?.is_empty();
        let ab2 = check_ab2(&an.lattice, &an.comm)?.is_none();
        let regular = is_congruence_regular(&an.lattice);
        out.sc1 = Some(sc1);
        out.ab2 = Some(ab2);
        out.regular = Some(regular);
        out.verdict = if sc1 && ab2 {
            Some(true)
        } else if regular {
            Some(false)
        } else {
            None
        };
        if mode == Mode::Characterization {
            if out.verdict != Some(true) {
                out.witness = characterization_witness(an)?;
                if out.witness.is_some() {
                    out.verdict = Some(false);
                }
            }
            return Ok(out);
        }
    }
    let (witness, stats) = bruteforce_search(an)?;
    let verdict = witness.is_none();
    if mode == Mode::Both && out.verdict.is_some_and(|v| v != verdict) {
        return Err(Error::InconsistencyDetected(format!(
            "brute force says {verdict}, (SC1)∧(AB2) = {} on a {} algebra",
            out.sc1 == Some(true) && out.ab2 == Some(true),
            if out.regular == Some(true) {
                "congruence regular"
            } else {
                "non-regular"
            }
        )));
    }
    out.verdict = Some(verdict);
    out.witness = witness;
    out.stats = Some(stats);
    Ok(out)
}

/// Next `k`-subset of `0..n` in lexicographic order.
fn next_subset(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    for i in (0..k).rev() {
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Domains by size, then lexicographically; assignments in lexicographic
/// order, pruned by pairwise preservation.
fn bruteforce_search(an: &Analysis) -> Result<(Option<PartialFn>, SearchStats)> {
    let clone1 = &an.clone1;
    clone1.ensure_complete()?;
    let n = an.size();
    let mut cache = PrincipalCache::new(&an.alg);
    let mut stats = SearchStats::default();
    for k in 0..=n {
        let mut domain: Vec<usize> = (0..k).collect();
        loop {
            stats.domains += 1;
            let restrictions: HashSet<Vec<u8>> = clone1
                .tables()
                .map(|t| domain.iter().map(|&x| t[x]).collect())
                .collect();
            let everything = (n as u64)
                .checked_pow(k as u32)
                .is_some_and(|total| restrictions.len() as u64 == total);
            if !everything {
                let mut values = Vec::with_capacity(k);
                if let Some(w) = dfs(
                    &domain,
                    &mut values,
                    n,
                    &mut cache,
                    &restrictions,
                    &mut stats,
                ) {
                    return Ok((Some(PartialFn::new(domain, w, n)?), stats));
                }
            }
            if !next_subset(&mut domain, n) {
                break;
            }
        }
    }
    Ok((None, stats))
}

fn dfs(
    domain: &[usize],
    values: &mut Vec<u8>,
    n: usize,
    cache: &mut PrincipalCache<'_>,
    restrictions: &HashSet<Vec<u8>>,
    stats: &mut SearchStats,
) -> Option<Vec<usize>> {
    let j = values.len();
    if j == domain.len() {
        stats.functions += 1;
        return (!restrictions.contains(values))
            .then(|| values.iter().map(|&v| v as usize).collect());
    }
    for y in 0..n {
        let ok = (0..j).all(|i| {
            cache
                .get(domain[i], domain[j])
                .related(values[i] as usize, y)
        });
        if ok {
            values.push(y as u8);
            if let Some(w) = dfs(domain, values, n, cache, restrictions, stats) {
                return Some(w);
            }
            values.pop();
        }
    }
    None
}

/// Searches parameters for the two witness constructors.
fn characterization_witness(an: &Analysis) -> Result<Option<PartialFn>> {
    let (lat, n) = (&an.lattice, an.size());
    if let Some(v) = check_ab2(lat, &an.comm)? {
        let beta = lat.get(v.upper);
        for o in 0..n {
            for &b1 in &beta.class_of(o) {
                for &b2 in &beta.class_of(o) {
                    if let Ok(f) = witness_ab2_failure(an, v.lower, v.upper, o, b1, b2) {
                        return Ok(Some(f));
                    }
                }
            }
        }
    }
    for (alpha, beta) in sc1_failure_pairs(lat, &an.comm) {
        for o in 0..n {
            let a_cands: Vec<usize> = (0..n)
                .filter(|&a| {
                    Congruence::principal(&an.alg, o, a).ok().as_ref() == Some(lat.get(alpha))
                })
                .collect();
            let b_cands: Vec<usize> = (0..n)
                .filter(|&b| {
                    Congruence::principal(&an.alg, o, b).ok().as_ref() == Some(lat.get(beta))
                })
                .collect();
            for &a in &a_cands {
                for &b in &b_cands {
                    if let Ok(f) = witness_sc1_failure(an, alpha, beta, o, a, b) {
                        return Ok(Some(f));
                    }
                }
            }
        }
    }
    Ok(None)
}

fn verify_witness(an: &Analysis, f: PartialFn) -> Result<PartialFn> {
    if let Some((x, y)) = preservation_violation(&an.alg, &f) {
        return Err(Error::InconsistencyDetected(format!(
            "witness does not preserve Cg({x},{y})"
        )));
    }
    if interpolable_bruteforce(&an.clone1, &f)?.is_some() {
        return Err(Error::InconsistencyDetected(
            "witness is interpolable".into(),
        ));
    }
    Ok(f)
}

fn four_points(an: &Analysis, points: [(usize, usize); 4]) -> Result<PartialFn> {
    PartialFn::from_pairs(points, an.size()).map_err(|_| {
        Error::PreconditionFailed("the four points collide with different values".into())
    })
}

/// For `α ≺ β` with `[β,β] ≤ α`, `b1, b2 ∈ o/β` outside `o/α`, and
/// `b2 ∉ d(o,b1,o)/α`: the map sending `o, b1, b2` to `o` and
/// `d(b1,o,b2)` to `b1`.
pub fn witness_ab2_failure(
    an: &Analysis,
    alpha: usize,
    beta: usize,
    o: usize,
    b1: usize,
    b2: usize,
) -> Result<PartialFn> {
    let lat = &an.lattice;
    lat.check(alpha)?;
    lat.check(beta)?;
    let n = an.size();
    if let Some(&x) = [o, b1, b2].iter().find(|&&x| x >= n) {
        return Err(Error::ElementOutOfRange(x));
    }
    let (a, b) = (lat.get(alpha), lat.get(beta));
    let d = &an.d;
    let fail = |why: &str| Err(Error::PreconditionFailed(why.into()));
    if !lat.covers(alpha, beta) {
        return fail("α ≺ β fails");
    }
    if !lat.leq(an.comm.get(beta, beta), alpha) {
        return fail("[β,β] ≤ α fails");
    }
    if !b.related(o, b1) || !b.related(o, b2) {
        return fail("b1 and b2 must lie in o/β");
    }
    if a.related(o, b1) {
        return fail("b1 ∉ o/α fails");
    }
    if a.related(o, b2) {
        return fail("b2 ∉ o/α fails");
    }
    if a.related(b2, d.apply(o, b1, o)) {
        return fail("b2 ∉ d(o,b1,o)/α fails");
    }
    let f = four_points(an, [(o, o), (b1, o), (b2, o), (d.apply(b1, o, b2), b1)])?;
    verify_witness(an, f)
}

/// For an (SC1) failure pair `(α, β)` with `Cg(o,a) = α` and `Cg(o,b) = β`:
/// the map sending `a, o, b` to `o` and `d(a,o,b)` to `a`.
pub fn witness_sc1_failure(
    an: &Analysis,
    alpha: usize,
    beta: usize,
    o: usize,
    a: usize,
    b: usize,
) -> Result<PartialFn> {
    let lat = &an.lattice;
    lat.check(alpha)?;
    lat.check(beta)?;
    let n = an.size();
    if let Some(&x) = [o, a, b].iter().find(|&&x| x >= n) {
        return Err(Error::ElementOutOfRange(x));
    }
    if !sc1_failure_pairs(lat, &an.comm).contains(&(alpha, beta)) {
        return Err(Error::PreconditionFailed(
            "(α, β) is not an (SC1) failure pair".into(),
        ));
    }
    if Congruence::principal(&an.alg, o, a)? != *lat.get(alpha) {
        return Err(Error::PreconditionFailed("Cg(o,a) = α fails".into()));
    }
    if Congruence::principal(&an.alg, o, b)? != *lat.get(beta) {
        return Err(Error::PreconditionFailed("Cg(o,b) = β fails".into()));
    }
    let f = four_points(an, [(a, o), (o, o), (b, o), (an.d.apply(a, o, b), a)])?;
    verify_witness(an, f)
}
