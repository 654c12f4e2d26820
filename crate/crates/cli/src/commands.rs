//! The analysis pipelines behind each subcommand. Each returns a report whose
//! `exit_code` is 0, 1 (internal inconsistency) or 3 (budget exhausted);
//! input errors come back as `Err` and map to exit code 2.

use std::fs;
use std::path::Path;
use std::time::Instant;

use malcev::interpolation::preservation_violation;
use malcev::structure::{
    check_ab2, check_apmi, check_sc1, find_homogeneous, regularity_violation, AbpViolation,
    Sc1Failure,
};
use malcev::{
    decide_s1ac, find_malcev_polynomial, interpolable_bruteforce, interpolate_unary,
    is_congruence_preserving, Analysis, CommutatorTable, CongruenceLattice, Error, FiniteAlgebra,
    MalcevSearch, MalcevWitness, Mode, PartialFn, PolyClone, PolyFn, TermDag, Verdict,
};

use crate::format::{Input, PartialFnDoc};
use crate::report::*;
use crate::ToolError;

pub const DEFAULT_MAX_CLONE_SIZE: usize = 2_000_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Clone, Debug)]
pub struct Options {
    /// Table entries allowed across one polynomial clone.
    pub max_clone_size: usize,
    pub mode: Mode,
    pub skip_s1ac: bool,
    pub verify: bool,
    pub timing: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            max_clone_size: DEFAULT_MAX_CLONE_SIZE,
            mode: Mode::Both,
            skip_s1ac: false,
            verify: false,
            timing: true,
        }
    }
}

impl Options {
    /// Members of the `arity`-ary clone that fit in the table-entry budget.
    pub fn members(&self, n: usize, arity: u32) -> usize {
        let width = n.checked_pow(arity).unwrap_or(usize::MAX);
        (self.max_clone_size / width).max(1)
    }
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::BruteForce => "bruteforce",
        Mode::Characterization => "characterization",
        Mode::Both => "both",
    }
}

struct Clock {
    enabled: bool,
    last: Instant,
    stages: Vec<StageTime>,
}

impl Clock {
    fn new(enabled: bool) -> Self {
        Clock {
            enabled,
            last: Instant::now(),
            stages: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.stages.push(StageTime {
            stage: stage.to_string(),
            ms: (now - self.last).as_secs_f64() * 1e3,
        });
        self.last = now;
    }

    fn finish(self, report: &mut Report) {
        if self.enabled {
            report.timing = Some(self.stages);
        }
    }
}

fn digest(input: &Input) -> InputDigest {
    InputDigest {
        path: input.path.display().to_string(),
        sha256: input.sha256.clone(),
    }
}

fn summary(alg: &FiniteAlgebra) -> AlgebraSummary {
    AlgebraSummary {
        name: alg.name().to_string(),
        size: alg.size(),
        operations: alg
            .operations()
            .iter()
            .map(|op| (op.name().to_string(), op.arity()))
            .collect(),
    }
}

/// Records an engine error that is not an input error.
fn fail(report: &mut Report, err: &Error) -> Status {
    match err {
        Error::CloneBudgetExceeded(_) | Error::CloneIncomplete => {
            report.exit_code = report.exit_code.max(EXIT_BUDGET);
            report.notes.push(format!("{err}"));
            Status::BudgetExhausted
        }
        _ => {
            report.exit_code = report.exit_code.max(EXIT_INCONSISTENT);
            report.notes.push(format!("internal inconsistency: {err}"));
            Status::Inconsistent
        }
    }
}

fn malcev(
    alg: &FiniteAlgebra,
    opts: &Options,
    input: &Input,
    report: &mut Report,
) -> Result<Option<MalcevWitness>, ToolError> {
    let search =
        find_malcev_polynomial(alg, opts.members(alg.size(), 3)).map_err(|e| input.invalid(e))?;
    let (source, d) = match search {
        MalcevSearch::Found(d) if alg.malcev_term().is_some() => (MalcevSource::Explicit, Some(d)),
        MalcevSearch::Found(d) => (MalcevSource::Search, Some(d)),
        MalcevSearch::Absent => (MalcevSource::Absent, None),
        MalcevSearch::Unknown => {
            report.exit_code = report.exit_code.max(EXIT_BUDGET);
            (MalcevSource::Unknown, None)
        }
    };
    report.malcev = Some(MalcevStatus {
        source,
        term: d.as_ref().map(|d| d.poly().witness().render(alg, 3)),
    });
    Ok(d)
}

fn sc1_entry(lattice: &CongruenceLattice, f: &Sc1Failure) -> Sc1FailureReport {
    Sc1FailureReport {
        mu: CongruenceRef::new(lattice, f.mu),
        cover: CongruenceRef::new(lattice, f.cover),
        centralizer: CongruenceRef::new(lattice, f.centralizer),
    }
}

fn ab2_entry(lattice: &CongruenceLattice, v: &AbpViolation) -> Ab2ViolationReport {
    Ab2ViolationReport {
        lower: CongruenceRef::new(lattice, v.lower),
        upper: CongruenceRef::new(lattice, v.upper),
        element: v.element,
        count: v.count,
    }
}

fn structure(
    lattice: &CongruenceLattice,
    comm: &CommutatorTable,
) -> malcev::Result<StructureReport> {
    let sc1 = check_sc1(lattice, comm)?;
    let ab2 = check_ab2(lattice, comm)?;
    let apmi = check_apmi(lattice);
    let regular = regularity_violation(lattice);
    Ok(StructureReport {
        sc1: sc1.is_empty(),
        sc1_failures: sc1.iter().map(|f| sc1_entry(lattice, f)).collect(),
        ab2: ab2.is_none(),
        ab2_violation: ab2.as_ref().map(|v| ab2_entry(lattice, v)),
        apmi: apmi.is_none(),
        apmi_violation: apmi.map(|(a, b)| {
            (
                CongruenceRef::new(lattice, a),
                CongruenceRef::new(lattice, b),
            )
        }),
        regular: regular.is_none(),
        regularity_violation: regular.map(|(a, b, point)| RegularityViolation {
            first: CongruenceRef::new(lattice, a),
            second: CongruenceRef::new(lattice, b),
            point,
        }),
    })
}

fn homogeneous(lattice: &CongruenceLattice, comm: &CommutatorTable) -> Vec<HomogeneousEntry> {
    find_homogeneous(lattice, comm)
        .into_iter()
        .map(|h| HomogeneousEntry {
            mu: CongruenceRef::new(lattice, h.mu),
            phi: CongruenceRef::new(lattice, h.phi),
            mu_star: CongruenceRef::new(lattice, h.mu_star),
            abelian: h.abelian,
            interval_height: h.interval_height,
            simple_complemented_modular: h.simple_complemented_modular,
        })
        .collect()
}

fn s1ac_skeleton(mode: Mode, status: Status) -> S1acReport {
    S1acReport {
        mode: mode_name(mode).to_string(),
        status,
        verdict: None,
        sc1: None,
        ab2: None,
        regular: None,
        witness: None,
        domains_searched: None,
        functions_checked: None,
        unary_polynomials: None,
    }
}

/// Re-checks a claimed witness from scratch.
fn witness_holds(an: &Analysis, f: &PartialFn) -> bool {
    is_congruence_preserving(&an.alg, f)
        && matches!(interpolable_bruteforce(&an.clone1, f), Ok(None))
}

fn s1ac(
    alg: &FiniteAlgebra,
    d: &MalcevWitness,
    lattice: CongruenceLattice,
    comm: CommutatorTable,
    opts: &Options,
    report: &mut Report,
) -> S1acReport {
    let clone1 = match PolyClone::generate(alg, 1, opts.members(alg.size(), 1)) {
        Ok(c) => c,
        Err(e) => return s1ac_skeleton(opts.mode, fail(report, &e)),
    };
    let an = Analysis {
        alg: alg.clone(),
        d: d.clone(),
        lattice,
        comm,
        clone1,
    };
    let mut out = s1ac_skeleton(opts.mode, Status::Done);
    out.unary_polynomials = Some(an.clone1.len());
    match decide_s1ac(&an, opts.mode) {
        Ok(dec) => {
            out.verdict = dec.verdict;
            out.sc1 = dec.sc1;
            out.ab2 = dec.ab2;
            out.regular = dec.regular;
            out.witness = dec.witness.map(|f| WitnessReport {
                verified: witness_holds(&an, &f),
                function: PartialFnDoc::from_partial_fn(&f),
            });
            if out.witness.as_ref().is_some_and(|w| !w.verified) {
                fail(
                    report,
                    &Error::InconsistencyDetected("witness fails re-verification".into()),
                );
                out.status = Status::Inconsistent;
            }
            if let Some(stats) = dec.stats {
                out.domains_searched = Some(stats.domains);
                out.functions_checked = Some(stats.functions);
            }
        }
        Err(e) => out.status = fail(report, &e),
    }
    out
}

/// `analyze`: the full pipeline. `s1ac`: the same without the lattice
/// listing, structural verdicts and homogeneous congruences.
pub fn analyze(path: &Path, opts: &Options, full: bool) -> Result<Report, ToolError> {
    let mut clock = Clock::new(opts.timing);
    let input = Input::read(path)?;
    let alg = input.algebra()?;
    let mut report = Report::new(if full { "analyze" } else { "s1ac" });
    report.inputs.push(digest(&input));
    report.algebra = Some(summary(&alg));
    clock.lap("load");
    let d = malcev(&alg, opts, &input, &mut report)?;
    clock.lap("malcev");
    let lattice = CongruenceLattice::new(&alg);
    if full {
        report.lattice = Some(LatticeSummary::new(&lattice));
    }
    clock.lap("lattice");
    let Some(d) = d else {
        clock.finish(&mut report);
        return Ok(report);
    };
    let comm = CommutatorTable::compute(&alg, &lattice);
    clock.lap("commutators");
    if full {
        match structure(&lattice, &comm) {
            Ok(s) => report.structure = Some(s),
            Err(e) => {
                fail(&mut report, &e);
            }
        }
        report.homogeneous = Some(homogeneous(&lattice, &comm));
        clock.lap("structure");
    }
    report.s1ac = Some(if full && opts.skip_s1ac {
        s1ac_skeleton(opts.mode, Status::Skipped)
    } else {
        s1ac(&alg, &d, lattice, comm, opts, &mut report)
    });
    clock.lap("s1ac");
    clock.finish(&mut report);
    Ok(report)
}

fn trace_entries(trace: &[malcev::interpolation::TraceLevel]) -> Vec<TraceEntry> {
    trace
        .iter()
        .map(|t| TraceEntry {
            depth: t.depth,
            size: t.size,
            mu: t.mu.as_ref().map(|m| m.classes()),
            mu_abelian: t.mu_abelian,
            quotient_size: t.quotient_size,
            solves: t
                .solves
                .iter()
                .map(|s| SolveEntry {
                    stage: s.stage,
                    target: s.target,
                    method: format!("{:?}", s.method).to_lowercase(),
                    found: s.found,
                })
                .collect(),
            failed_stage: t.failed_stage,
        })
        .collect()
}

/// Parses the rendered interpolant back and checks it on the domain.
fn reverifies(alg: &FiniteAlgebra, term: &str, f: &PartialFn) -> bool {
    TermDag::parse(term, alg, &["x"])
        .and_then(|t| PolyFn::new(alg, t, 1))
        .is_ok_and(|p| f.agrees_with(&p))
}

pub fn interpolate(alg_path: &Path, fn_path: &Path, opts: &Options) -> Result<Report, ToolError> {
    let mut clock = Clock::new(opts.timing);
    let alg_input = Input::read(alg_path)?;
    let alg = alg_input.algebra()?;
    let fn_input = Input::read(fn_path)?;
    let doc: PartialFnDoc = fn_input.parse()?;
    let f = doc
        .to_partial_fn(alg.size())
        .map_err(|e| fn_input.invalid(e))?;
    let mut report = Report::new("interpolate");
    report.inputs = vec![digest(&alg_input), digest(&fn_input)];
    report.algebra = Some(summary(&alg));
    clock.lap("load");
    let d = malcev(&alg, opts, &alg_input, &mut report)?;
    clock.lap("malcev");

    let violation = preservation_violation(&alg, &f);
    let mut out = InterpolationReport {
        function: doc,
        congruence_preserving: violation.is_none(),
        preservation_violation: violation,
        status: Status::Done,
        interpolable: None,
        method: None,
        hypothesis_unmet: None,
        interpolant: None,
        verified: None,
        trace: Vec::new(),
    };
    let mut poly = None;
    let n = alg.size();
    if violation.is_some() {
        // Polynomials preserve every congruence.
        out.interpolable = Some(false);
        out.method = Some("preservation".into());
    } else if f.is_empty() {
        out.interpolable = Some(true);
        out.method = Some("empty domain".into());
        poly = Some(PolyFn::constant(&alg, 1, 0));
    } else {
        match &d {
            Some(d) => match interpolate_unary(&alg, d, &f, opts.members(n, 1)) {
                Ok(res) => {
                    out.trace = trace_entries(&res.trace);
                    match res.verdict {
                        Verdict::Interpolated(p) => {
                            out.interpolable = Some(true);
                            poly = Some(p);
                        }
                        Verdict::NotInterpolable => out.interpolable = Some(false),
                        Verdict::HypothesisUnmet(reason) => out.hypothesis_unmet = Some(reason),
                    }
                    if out.interpolable.is_some() {
                        out.method = Some("recursion".into());
                    }
                }
                Err(e) => out.status = fail(&mut report, &e),
            },
            None => out.hypothesis_unmet = Some("no Mal'cev polynomial".into()),
        }
        clock.lap("recursion");
        let needed = out.interpolable.is_none() && out.status == Status::Done;
        if needed || (opts.verify && out.status == Status::Done) {
            match PolyClone::generate(&alg, 1, opts.members(n, 1))
                .and_then(|c| interpolable_bruteforce(&c, &f))
            {
                Ok(found) if needed => {
                    out.interpolable = Some(found.is_some());
                    out.method = Some("brute force".into());
                    poly = found;
                }
                Ok(found) => {
                    if out.interpolable != Some(found.is_some()) {
                        let msg = "recursion and brute force disagree on interpolability";
                        out.status = fail(&mut report, &Error::InconsistencyDetected(msg.into()));
                    }
                }
                Err(e) if needed => out.status = fail(&mut report, &e),
                Err(e) => report
                    .notes
                    .push(format!("brute-force cross-check skipped: {e}")),
            }
            clock.lap("bruteforce");
        }
    }
    if let Some(p) = poly {
        let term = p.witness().render(&alg, 1);
        let ok = reverifies(&alg, &term, &f);
        if opts.verify {
            out.verified = Some(ok);
        }
        if !ok {
            out.status = fail(
                &mut report,
                &Error::InconsistencyDetected("interpolant fails re-verification".into()),
            );
        }
        out.interpolant = Some(term);
    }
    report.interpolation = Some(out);
    clock.finish(&mut report);
    Ok(report)
}

pub fn lattice(path: &Path, dot: Option<&Path>, opts: &Options) -> Result<Report, ToolError> {
    let mut clock = Clock::new(opts.timing);
    let input = Input::read(path)?;
    let alg = input.algebra()?;
    let mut report = Report::new("lattice");
    report.inputs.push(digest(&input));
    report.algebra = Some(summary(&alg));
    let d = malcev(&alg, opts, &input, &mut report)?;
    let lattice = CongruenceLattice::new(&alg);
    report.lattice = Some(LatticeSummary::new(&lattice));
    // Commutators (and so the abelian-atom flag) assume a Mal'cev polynomial.
    let comm = d.map(|_| CommutatorTable::compute(&alg, &lattice));
    if let Some(out) = dot {
        fs::write(out, lattice.to_dot(comm.as_ref())).map_err(|source| ToolError::Io {
            path: out.to_path_buf(),
            source,
        })?;
        report.dot = Some(out.display().to_string());
    }
    clock.lap("lattice");
    clock.finish(&mut report);
    Ok(report)
}

pub fn loop_report(path: &Path, opts: &Options) -> Result<Report, ToolError> {
    let mut clock = Clock::new(opts.timing);
    let input = Input::read(path)?;
    let q = input.loop_table()?;
    let name = path
        .file_stem()
        .map_or_else(|| "loop".to_string(), |s| s.to_string_lossy().into_owned());
    let alg = q.to_algebra(&name);
    let mut report = Report::new("loop");
    report.inputs.push(digest(&input));
    let lattice = CongruenceLattice::new(&alg);
    let comm = CommutatorTable::compute(&alg, &lattice);
    let criterion = q.s1ac_criterion(&lattice, &comm);
    let mut out = LoopReport {
        size: q.size(),
        relabeling: q.relabeling().to_vec(),
        associative: q.is_associative(),
        commutative: q.is_commutative(),
        normal_subloops: q
            .normal_subloops(&lattice)
            .into_iter()
            .map(|s| s.elements)
            .collect(),
        center: q.center(),
        criterion: criterion.holds,
        h: criterion.h,
        rank: criterion.rank,
        perfect_failure: criterion.perfect_failure,
        bruteforce: None,
    };
    clock.lap("criterion");
    if opts.verify {
        let d = MalcevWitness::from_algebra(&alg)
            .expect("loops carry a Mal'cev term")
            .map_err(|e| input.invalid(e))?;
        match PolyClone::generate(&alg, 1, opts.members(alg.size(), 1)) {
            Ok(clone1) => {
                let an = Analysis {
                    alg: alg.clone(),
                    d,
                    lattice,
                    comm,
                    clone1,
                };
                match decide_s1ac(&an, Mode::BruteForce) {
                    Ok(dec) => {
                        out.bruteforce = dec.verdict;
                        if dec.verdict != Some(out.criterion) {
                            let msg = "loop criterion disagrees with brute force";
                            fail(&mut report, &Error::InconsistencyDetected(msg.into()));
                        }
                    }
                    Err(e) => {
                        fail(&mut report, &e);
                    }
                }
            }
            Err(e) => {
                fail(&mut report, &e);
            }
        }
        clock.lap("bruteforce");
    }
    report.loop_report = Some(out);
    clock.finish(&mut report);
    Ok(report)
}
