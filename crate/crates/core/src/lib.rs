//! Exact computations on finite Mal'cev algebras: polynomial clones,
//! congruence lattices, commutators, the structural conditions behind strict
//! 1-affine completeness, and constructive unary interpolation.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod clone;
pub mod commutator;
pub mod congruence;
pub mod corpus;
pub mod error;
pub mod gf;
pub mod interpolation;
pub mod lattice;
pub mod loops;
pub mod oracle;
pub mod structure;
pub mod term;
mod unionfind;

pub use algebra::{quotient_algebra, FiniteAlgebra, Operation};
pub use clone::{find_malcev_polynomial, MalcevSearch, MalcevWitness, PolyClone, PolyFn};
pub use commutator::{
    class_group, commutator, scalar_ring, ClassGroup, CommutatorTable, ScalarRing,
};
pub use congruence::Congruence;
pub use error::{Error, Result};
pub use interpolation::{
    decide_s1ac, interpolable_bruteforce, interpolate_unary, is_congruence_preserving,
    lift_interpolation, witness_ab2_failure, witness_sc1_failure, Analysis, InClassSolver,
    InterpolationResult, Interpolator, Lift, Mode, PartialFn, S1acDecision, Verdict,
};
pub use lattice::{CongruenceLattice, Transposition};
pub use loops::{Loop, LoopCriterion, NormalSubloop};
pub use term::{TermBuilder, TermDag};
