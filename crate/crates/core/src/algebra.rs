use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::congruence::Congruence;
use crate::error::{Error, Result};
use crate::term::TermDag;

/// Largest supported universe; tables store elements as bytes.
pub const MAX_SIZE: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operation {
    name: String,
    arity: usize,
    table: Vec<u8>,
}

impl Operation {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Row-major table: the entry for `(x1, ..., xk)` sits at `sum xi * n^(k-i)`.
    pub fn table(&self) -> &[u8] {
        &self.table
    }
}

/// Row-major index of a tuple over a universe of size `n`.
pub fn tuple_index(n: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, &x| acc * n + x)
}

/// Writes the digits of `index` (most significant first) into `out`.
pub fn tuple_of(n: usize, mut index: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
}

pub(crate) fn checked_power(n: usize, k: usize) -> Option<usize> {
    n.checked_pow(u32::try_from(k).ok()?)
}

/// A finite algebra on `{0, ..., size-1}` with named operation tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAlgebra {
    name: String,
    size: usize,
    ops: Vec<Operation>,
    malcev_term: Option<TermDag>,
}

impl FiniteAlgebra {
    pub fn new(name: impl Into<String>, size: usize) -> Result<Self> {
        if size == 0 || size > MAX_SIZE {
            return Err(Error::InvalidSize(size));
        }
        Ok(FiniteAlgebra {
            name: name.into(),
            size,
            ops: Vec::new(),
            malcev_term: None,
        })
    }

    /// Adds an operation after validating its table.
    pub fn with_operation(mut self, name: &str, arity: usize, table: &[usize]) -> Result<Self> {
        if self.op_index(name).is_some() {
            return Err(Error::DuplicateOperation(name.to_string()));
        }
        let expected = checked_power(self.size, arity).unwrap_or(usize::MAX);
        if table.len() != expected {
            return Err(Error::TableLengthMismatch {
                op: name.to_string(),
                expected,
                found: table.len(),
            });
        }
        if let Some((index, &value)) = table.iter().enumerate().find(|(_, &v)| v >= self.size) {
            return Err(Error::EntryOutOfRange {
                op: name.to_string(),
                index,
                value,
            });
        }
        self.ops.push(Operation {
            name: name.to_string(),
            arity,
            table: table.iter().map(|&v| v as u8).collect(),
        });
        Ok(self)
    }

    /// Attaches an explicit Mal'cev term over variables `0, 1, 2`; the
    /// identities are checked on all pairs.
    pub fn with_malcev_term(mut self, term: TermDag) -> Result<Self> {
        term.validate(&self, 3)
            .map_err(|e| Error::MalcevTermInvalid(e.to_string()))?;
        let table = term.table(&self, 3)?;
        let n = self.size;
        for x in 0..n {
            for y in 0..n {
                if table[(x * n + y) * n + y] as usize != x
                    || table[(y * n + y) * n + x] as usize != x
                {
                    return Err(Error::MalcevTermInvalid(format!(
                        "identities fail at x={x}, y={y}"
                    )));
                }
            }
        }
        self.malcev_term = Some(term);
        Ok(self)
    }

    /// Parses an S-expression over `x y z` and attaches it as the Mal'cev term.
    pub fn with_malcev_sexpr(self, src: &str) -> Result<Self> {
        let term = TermDag::parse(src, &self, &["x", "y", "z"])
            .map_err(|e| Error::MalcevTermInvalid(e.to_string()))?;
        self.with_malcev_term(term)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn operations(&self) -> &[Operation] {
        &self.ops
    }

    pub fn operation(&self, index: usize) -> &Operation {
        &self.ops[index]
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|op| op.name == name)
    }

    pub fn malcev_term(&self) -> Option<&TermDag> {
        self.malcev_term.as_ref()
    }

    /// Applies operation `op`. Arguments must be in range and match the arity.
    #[inline]
    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        let op = &self.ops[op];
        debug_assert_eq!(op.arity, args.len());
        op.table[tuple_index(self.size, args)] as usize
    }
}

/// The quotient by `theta`: classes are numbered by ascending least element.
/// Also returns the map sending each element to its class index.
pub fn quotient_algebra(
    alg: &FiniteAlgebra,
    theta: &Congruence,
) -> Result<(FiniteAlgebra, Vec<usize>)> {
    if theta.size() != alg.size() || !theta.is_compatible(alg) {
        return Err(Error::NotACongruence);
    }
    let n = alg.size();
    let reps = theta.reps();
    let mut class_of = alloc::vec![usize::MAX; n];
    let mut class_reps = Vec::new();
    for x in 0..n {
        if reps[x] == x {
            class_of[x] = class_reps.len();
            class_reps.push(x);
        }
    }
    for x in 0..n {
        class_of[x] = class_of[reps[x]];
    }
    let m = class_reps.len();
    let mut quotient = FiniteAlgebra::new(format!("{}/~", alg.name()), m)?;
    let mut classes = Vec::new();
    let mut args = Vec::new();
    for op in &alg.ops {
        let len = checked_power(m, op.arity).ok_or(Error::InvalidSize(m))?;
        let mut table = Vec::with_capacity(len);
        classes.resize(op.arity, 0);
        args.resize(op.arity, 0);
        for index in 0..len {
            tuple_of(m, index, &mut classes);
            for (a, &c) in args.iter_mut().zip(&classes) {
                *a = class_reps[c];
            }
            table.push(class_of[op.table[tuple_index(n, &args)] as usize]);
        }
        quotient = quotient.with_operation(&op.name, op.arity, &table)?;
    }
    if let Some(term) = &alg.malcev_term {
        quotient = quotient.with_malcev_term(term.map_constants(|c| class_of[c]))?;
    }
    Ok((quotient, class_of))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn validation_errors() {
        let a = FiniteAlgebra::new("bad", 4).unwrap();
        let mut table: Vec<usize> = (0..16).map(|i| (i / 4 + i % 4) % 4).collect();
        table[5] = 4;
        assert_eq!(
            a.clone().with_operation("add", 2, &table),
            Err(Error::EntryOutOfRange {
                op: "add".into(),
                index: 5,
                value: 4
            })
        );
        assert!(matches!(
            a.with_operation("add", 2, &table[..15]),
            Err(Error::TableLengthMismatch {
                expected: 16,
                found: 15,
                ..
            })
        ));
        assert_eq!(FiniteAlgebra::new("empty", 0), Err(Error::InvalidSize(0)));
    }

    #[test]
    fn duplicate_names_rejected() {
        let a = FiniteAlgebra::new("a", 2)
            .unwrap()
            .with_operation("f", 1, &[1, 0])
            .unwrap();
        assert_eq!(
            a.with_operation("f", 1, &[0, 1]),
            Err(Error::DuplicateOperation("f".into()))
        );
    }

    #[test]
    fn bad_malcev_term_rejected() {
        let z4 = corpus::cyclic(4);
        assert!(matches!(
            z4.with_malcev_sexpr("(add x (add y z))"),
            Err(Error::MalcevTermInvalid(_))
        ));
    }

    #[test]
    fn z4_mod_theta_is_z2() {
        let z4 = corpus::cyclic(4);
        let theta = Congruence::from_classes(4, &[&[0, 2], &[1, 3]]).unwrap();
        let (q, map) = quotient_algebra(&z4, &theta).unwrap();
        assert_eq!(map, [0, 1, 0, 1]);
        let add = q.op_index("add").unwrap();
        assert_eq!(q.operation(add).table(), &[0, 1, 1, 0]);
        assert!(q.malcev_term().is_some());
    }

    #[test]
    fn trivial_quotients() {
        let s3 = corpus::symmetric3();
        let (same, map) = quotient_algebra(&s3, &Congruence::identity(6)).unwrap();
        assert_eq!(map, [0, 1, 2, 3, 4, 5]);
        for (a, b) in same.operations().iter().zip(s3.operations()) {
            assert_eq!(a.table(), b.table());
        }
        let (one, _) = quotient_algebra(&s3, &Congruence::full(6)).unwrap();
        assert_eq!(one.size(), 1);
    }

    #[test]
    fn quotient_rejects_non_congruence() {
        let z4 = corpus::cyclic(4);
        let bad = Congruence::from_classes(4, &[&[0, 1], &[2], &[3]]).unwrap();
        assert_eq!(
            quotient_algebra(&z4, &bad).unwrap_err(),
            Error::NotACongruence
        );
    }
}
