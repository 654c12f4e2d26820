//! Serializable reports and their plain-text rendering.

use std::fmt::{self, Write};

use malcev::{Congruence, CongruenceLattice};
use serde::{Deserialize, Serialize};

use crate::format::PartialFnDoc;

/// A congruence by canonical lattice index, with its classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceRef {
    pub index: usize,
    pub classes: Vec<Vec<usize>>,
}

impl CongruenceRef {
    pub fn new(lattice: &CongruenceLattice, index: usize) -> Self {
        CongruenceRef {
            index,
            classes: lattice.get(index).classes(),
        }
    }
}

fn classes(theta: &Congruence) -> Vec<Vec<usize>> {
    theta.classes()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraSummary {
    pub name: String,
    pub size: usize,
    pub operations: Vec<(String, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MalcevSource {
    /// Given in the input document.
    Explicit,
    /// Found in the ternary polynomial clone.
    Search,
    /// The ternary clone was exhausted without one.
    Absent,
    /// The clone budget ran out first.
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalcevStatus {
    pub source: MalcevSource,
    pub term: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSummary {
    pub size: usize,
    pub height: usize,
    pub modular: bool,
    pub congruences: Vec<Vec<Vec<usize>>>,
}

impl LatticeSummary {
    pub fn new(lattice: &CongruenceLattice) -> Self {
        LatticeSummary {
            size: lattice.len(),
            height: lattice.height(),
            modular: lattice.is_modular(),
            congruences: lattice.congruences().iter().map(classes).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sc1FailureReport {
    pub mu: CongruenceRef,
    pub cover: CongruenceRef,
    pub centralizer: CongruenceRef,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ab2ViolationReport {
    pub lower: CongruenceRef,
    pub upper: CongruenceRef,
    pub element: usize,
    /// Number of `lower`-classes inside the `upper`-class of `element`.
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub sc1: bool,
    pub sc1_failures: Vec<Sc1FailureReport>,
    pub ab2: bool,
    pub ab2_violation: Option<Ab2ViolationReport>,
    pub apmi: bool,
    /// Two strictly meet irreducible congruences with projective prime
    /// quotients but different upper covers.
    pub apmi_violation: Option<(CongruenceRef, CongruenceRef)>,
    pub regular: bool,
    /// Two congruences sharing the class of `point`.
    pub regularity_violation: Option<RegularityViolation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularityViolation {
    pub first: CongruenceRef,
    pub second: CongruenceRef,
    pub point: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomogeneousEntry {
    pub mu: CongruenceRef,
    pub phi: CongruenceRef,
    pub mu_star: CongruenceRef,
    pub abelian: bool,
    pub interval_height: usize,
    pub simple_complemented_modular: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Done,
    Skipped,
    BudgetExhausted,
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub function: PartialFnDoc,
    /// Re-checked: congruence preserving and not the restriction of any
    /// unary polynomial.
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct S1acReport {
    pub mode: String,
    pub status: Status,
    pub verdict: Option<bool>,
    pub sc1: Option<bool>,
    pub ab2: Option<bool>,
    pub regular: Option<bool>,
    pub witness: Option<WitnessReport>,
    pub domains_searched: Option<usize>,
    pub functions_checked: Option<usize>,
    pub unary_polynomials: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveEntry {
    pub stage: usize,
    pub target: usize,
    pub method: String,
    pub found: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub depth: usize,
    pub size: usize,
    pub mu: Option<Vec<Vec<usize>>>,
    pub mu_abelian: bool,
    pub quotient_size: usize,
    pub solves: Vec<SolveEntry>,
    pub failed_stage: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub function: PartialFnDoc,
    pub congruence_preserving: bool,
    /// `(x, y)` with `(f(x), f(y))` outside `Cg(x, y)`.
    pub preservation_violation: Option<(usize, usize)>,
    pub status: Status,
    pub interpolable: Option<bool>,
    /// `recursion` or `brute force`.
    pub method: Option<String>,
    pub hypothesis_unmet: Option<String>,
    pub interpolant: Option<String>,
    pub verified: Option<bool>,
    pub trace: Vec<TraceEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopReport {
    pub size: usize,
    /// `relabeling[old] = new`; the identity becomes 0.
    pub relabeling: Vec<usize>,
    pub associative: bool,
    pub commutative: bool,
    pub normal_subloops: Vec<Vec<usize>>,
    pub center: Vec<usize>,
    pub criterion: bool,
    pub h: Vec<usize>,
    pub rank: Option<usize>,
    pub perfect_failure: Option<Vec<usize>>,
    /// Brute-force strict 1-affine completeness, with `--verify`.
    pub bruteforce: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: String,
    pub ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub malcev: Option<MalcevStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homogeneous: Option<Vec<HomogeneousEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s1ac: Option<S1acReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<InterpolationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "loop")]
    pub loop_report: Option<LoopReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dot: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Vec<StageTime>>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            inputs: Vec::new(),
            algebra: None,
            malcev: None,
            lattice: None,
            structure: None,
            homogeneous: None,
            s1ac: None,
            interpolation: None,
            loop_report: None,
            dot: None,
            notes: Vec::new(),
            exit_code: 0,
            timing: None,
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn partition(classes: &[Vec<usize>]) -> String {
    serde_json::to_string(classes).expect("serializable")
}

fn cref(c: &CongruenceRef) -> String {
    format!("#{} {}", c.index, partition(&c.classes))
}

fn opt_bool(b: Option<bool>) -> String {
    b.map_or_else(|| "unknown".to_string(), |b| b.to_string())
}

impl fmt::Display for Report {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(out, "== {} ==", self.command)?;
        for input in &self.inputs {
            writeln!(out, "input: {} sha256:{}", input.path, input.sha256)?;
        }
        if let Some(a) = &self.algebra {
            let ops: Vec<String> = a
                .operations
                .iter()
                .map(|(name, k)| format!("{name}/{k}"))
                .collect();
            writeln!(
                out,
                "algebra: {} (size {}; {})",
                a.name,
                a.size,
                ops.join(", ")
            )?;
        }
        if let Some(m) = &self.malcev {
            match (&m.source, &m.term) {
                (MalcevSource::Explicit, Some(t)) => writeln!(out, "mal'cev term (given): {t}")?,
                (MalcevSource::Search, Some(t)) => {
                    writeln!(out, "mal'cev polynomial (found): {t}")?
                }
                (MalcevSource::Unknown, _) => {
                    writeln!(out, "mal'cev polynomial: unknown, clone budget exhausted")?
                }
                _ => writeln!(out, "no Mal'cev polynomial; analyses requiring one skipped")?,
            }
        }
        if let Some(l) = &self.lattice {
            writeln!(
                out,
                "congruence lattice: {} congruences, height {}, modular: {}",
                l.size,
                l.height,
                yes_no(l.modular)
            )?;
            for (i, c) in l.congruences.iter().enumerate() {
                writeln!(out, "  #{i} {}", partition(c))?;
            }
        }
        if let Some(s) = &self.structure {
            writeln!(out, "SC1: {}", s.sc1)?;
            for f in &s.sc1_failures {
                writeln!(
                    out,
                    "  fails at {} with cover {}: centralizer {}",
                    cref(&f.mu),
                    cref(&f.cover),
                    cref(&f.centralizer)
                )?;
            }
            writeln!(out, "AB2: {}", s.ab2)?;
            if let Some(v) = &s.ab2_violation {
                writeln!(
                    out,
                    "  abelian {} < {}: the class of {} is a union of {} classes",
                    cref(&v.lower),
                    cref(&v.upper),
                    v.element,
                    v.count
                )?;
            }
            writeln!(out, "APMI: {}", s.apmi)?;
            if let Some((a, b)) = &s.apmi_violation {
                writeln!(
                    out,
                    "  projective prime quotients at {} and {} with different covers",
                    cref(a),
                    cref(b)
                )?;
            }
            writeln!(out, "congruence regular: {}", s.regular)?;
            if let Some(v) = &s.regularity_violation {
                writeln!(
                    out,
                    "  {} and {} share the class of {}",
                    cref(&v.first),
                    cref(&v.second),
                    v.point
                )?;
            }
        }
        if let Some(h) = &self.homogeneous {
            writeln!(out, "homogeneous congruences: {}", h.len())?;
            for e in h {
                writeln!(
                    out,
                    "  {}: phi #{}, mu* #{}, abelian: {}, height {}, simple complemented modular: {}",
                    cref(&e.mu),
                    e.phi.index,
                    e.mu_star.index,
                    yes_no(e.abelian),
                    e.interval_height,
                    yes_no(e.simple_complemented_modular)
                )?;
            }
        }
        if let Some(s) = &self.s1ac {
            match s.status {
                Status::Skipped => writeln!(out, "s1ac: skipped")?,
                Status::BudgetExhausted => writeln!(out, "s1ac: unknown, clone budget exhausted")?,
                _ => writeln!(out, "s1ac: {} (mode {})", opt_bool(s.verdict), s.mode)?,
            }
            if let (Some(sc1), Some(ab2)) = (s.sc1, s.ab2) {
                writeln!(
                    out,
                    "  SC1 and AB2: {}; congruence regular: {}",
                    sc1 && ab2,
                    opt_bool(s.regular)
                )?;
            }
            if let Some(w) = &s.witness {
                let pairs: Vec<String> = w
                    .function
                    .domain
                    .iter()
                    .zip(&w.function.values)
                    .map(|(x, y)| format!("{x}->{y}"))
                    .collect();
                writeln!(
                    out,
                    "  witness: {{{}}} verified: {}",
                    pairs.join(", "),
                    yes_no(w.verified)
                )?;
            }
            if let (Some(d), Some(f)) = (s.domains_searched, s.functions_checked) {
                writeln!(
                    out,
                    "  brute force: {d} domains, {f} preserving functions checked"
                )?;
            }
            if let Some(u) = s.unary_polynomials {
                writeln!(out, "  unary polynomials: {u}")?;
            }
        }
        if let Some(i) = &self.interpolation {
            let interpolable = match i.interpolable {
                Some(b) => yes_no(b),
                None => "unknown",
            };
            writeln!(
                out,
                "congruence-preserving: {}; interpolable: {}",
                yes_no(i.congruence_preserving),
                interpolable
            )?;
            if let Some((x, y)) = i.preservation_violation {
                writeln!(out, "  (f({x}), f({y})) is outside Cg({x}, {y})")?;
            }
            if let Some(r) = &i.hypothesis_unmet {
                writeln!(out, "  hypotheses unmet: {r}")?;
            }
            if let Some(m) = &i.method {
                writeln!(out, "  decided by: {m}")?;
            }
            if let Some(t) = &i.interpolant {
                writeln!(out, "  interpolant: {t}")?;
            }
            if let Some(v) = i.verified {
                writeln!(out, "  re-verified: {}", yes_no(v))?;
            }
            for t in &i.trace {
                let mu = t.mu.as_deref().map_or_else(|| "-".to_string(), partition);
                write!(
                    out,
                    "  depth {}: size {}, mu {}, quotient size {}",
                    t.depth, t.size, mu, t.quotient_size
                )?;
                if t.mu.is_some() {
                    write!(out, ", abelian: {}", yes_no(t.mu_abelian))?;
                }
                writeln!(out)?;
                for s in &t.solves {
                    writeln!(
                        out,
                        "    step {} in class of {}: {} ({})",
                        s.stage,
                        s.target,
                        if s.found { "solved" } else { "no solution" },
                        s.method
                    )?;
                }
                if let Some(st) = t.failed_stage {
                    writeln!(out, "    failed at step {st}")?;
                }
            }
        }
        if let Some(q) = &self.loop_report {
            writeln!(
                out,
                "loop of order {}: associative: {}, commutative: {}",
                q.size,
                yes_no(q.associative),
                yes_no(q.commutative)
            )?;
            if q.relabeling.iter().enumerate().any(|(i, &j)| i != j) {
                writeln!(out, "  relabeled (old -> new): {:?}", q.relabeling)?;
            }
            let subloops: Vec<String> =
                q.normal_subloops.iter().map(|s| format!("{s:?}")).collect();
            writeln!(out, "  normal subloops: {}", subloops.join(" "))?;
            writeln!(out, "  center: {:?}", q.center)?;
            writeln!(out, "criterion={} with H={}", q.criterion, set(&q.h))?;
            if let Some(r) = q.rank {
                writeln!(out, "  Q/H is elementary abelian of rank {r}")?;
            } else {
                writeln!(out, "  Q/H is not an elementary abelian 2-group")?;
            }
            if let Some(n) = &q.perfect_failure {
                writeln!(out, "  normal subloop {} of H with [N,N] != N", set(n))?;
            }
            if let Some(b) = q.bruteforce {
                writeln!(out, "  brute force: {b}")?;
            }
        }
        if let Some(d) = &self.dot {
            writeln!(out, "dot: {d}")?;
        }
        for n in &self.notes {
            writeln!(out, "note: {n}")?;
        }
        if let Some(t) = &self.timing {
            let mut line = String::from("timing:");
            for s in t {
                let _ = write!(line, " {} {:.1} ms;", s.stage, s.ms);
            }
            writeln!(out, "{}", line.trim_end_matches(';'))?;
        }
        Ok(())
    }
}

fn set(xs: &[usize]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", items.join(","))
}
