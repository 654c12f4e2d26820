use alloc::string::String;
use core::fmt;

/// Everything that can go wrong inside the engine.
///
/// Several variants (`CentralizerInconsistent`, `WitnessInconsistent`,
/// `AxiomFailure`, `InconsistencyDetected`) are internal cross-checks: seeing
/// one means a hypothesis was violated or a computation is wrong.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// The universe is empty or too large for byte-sized tables.
    InvalidSize(usize),
    EntryOutOfRange {
        op: String,
        index: usize,
        value: usize,
    },
    TableLengthMismatch {
        op: String,
        expected: usize,
        found: usize,
    },
    DuplicateOperation(String),
    UnknownOperation(String),
    ArityMismatch {
        op: String,
        expected: usize,
        found: usize,
    },
    /// A term mentions a variable that was not supplied.
    MissingArgument(usize),
    ElementOutOfRange(usize),
    Parse(String),
    MalcevTermInvalid(String),
    /// The polynomial clone grew past the member budget.
    CloneBudgetExceeded(usize),
    /// An operation needs a closure that finished without hitting the budget.
    CloneIncomplete,
    NotACongruence,
    NotInLattice,
    IntervalInvalid,
    NotTransposed,
    WitnessInconsistent,
    CentralizerInconsistent,
    NotAbelian,
    AxiomFailure(String),
    PreconditionFailed(String),
    NotElementaryAbelian,
    ScalarActionFailed,
    ModMuViolation,
    InconsistencyDetected(String),
    NotALoop(String),
    InvalidPartialFn(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSize(n) => write!(f, "universe size {n} is not in 1..=256"),
            Error::EntryOutOfRange { op, index, value } => {
                write!(
                    f,
                    "operation `{op}`: entry {index} has value {value} outside the universe"
                )
            }
            Error::TableLengthMismatch {
                op,
                expected,
                found,
            } => {
                write!(
                    f,
                    "operation `{op}`: table has {found} entries, expected {expected}"
                )
            }
            Error::DuplicateOperation(op) => write!(f, "operation `{op}` declared twice"),
            Error::UnknownOperation(op) => write!(f, "unknown operation `{op}`"),
            Error::ArityMismatch {
                op,
                expected,
                found,
            } => {
                write!(
                    f,
                    "operation `{op}` takes {expected} arguments, got {found}"
                )
            }
            Error::MissingArgument(i) => write!(f, "no argument supplied for variable {i}"),
            Error::ElementOutOfRange(a) => write!(f, "element {a} is outside the universe"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::MalcevTermInvalid(msg) => write!(f, "invalid Mal'cev term: {msg}"),
            Error::CloneBudgetExceeded(max) => {
                write!(f, "polynomial clone exceeded the budget of {max} members")
            }
            Error::CloneIncomplete => write!(f, "polynomial clone is budget-truncated"),
            Error::NotACongruence => write!(f, "partition is not compatible with the operations"),
            Error::NotInLattice => write!(f, "congruence index is not in the lattice"),
            Error::IntervalInvalid => write!(f, "interval endpoints are not ordered"),
            Error::NotTransposed => write!(f, "intervals are not transposed"),
            Error::WitnessInconsistent => write!(f, "transposition map is not functional"),
            Error::CentralizerInconsistent => {
                write!(f, "centralizer fails its defining property")
            }
            Error::NotAbelian => write!(f, "congruence is not abelian"),
            Error::AxiomFailure(msg) => write!(f, "group axiom failure: {msg}"),
            Error::PreconditionFailed(msg) => write!(f, "precondition failed: {msg}"),
            Error::NotElementaryAbelian => write!(f, "class group is not elementary abelian"),
            Error::ScalarActionFailed => write!(f, "a ring member does not act as a scalar"),
            Error::ModMuViolation => {
                write!(
                    f,
                    "starting polynomial does not interpolate modulo the congruence"
                )
            }
            Error::InconsistencyDetected(msg) => write!(f, "inconsistency detected: {msg}"),
            Error::NotALoop(msg) => write!(f, "not a loop: {msg}"),
            Error::InvalidPartialFn(msg) => write!(f, "invalid partial function: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
