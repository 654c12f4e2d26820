//! JSON documents for algebras, loops and unary partial functions.

use std::fs;
use std::path::{Path, PathBuf};

use malcev::{FiniteAlgebra, Loop, PartialFn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ToolError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationDoc {
    pub name: String,
    pub arity: usize,
    /// Row-major: `(x_1, ..., x_k)` sits at `sum x_i * n^(k-i)`.
    pub table: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDoc {
    pub name: String,
    pub size: usize,
    pub operations: Vec<OperationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub malcev_term: Option<String>,
}

impl AlgebraDoc {
    pub fn to_algebra(&self) -> malcev::Result<FiniteAlgebra> {
        let mut alg = FiniteAlgebra::new(self.name.clone(), self.size)?;
        for op in &self.operations {
            alg = alg.with_operation(&op.name, op.arity, &op.table)?;
        }
        match &self.malcev_term {
            Some(term) => alg.with_malcev_sexpr(term),
            None => Ok(alg),
        }
    }

    pub fn from_algebra(alg: &FiniteAlgebra) -> Self {
        AlgebraDoc {
            name: alg.name().to_string(),
            size: alg.size(),
            operations: alg
                .operations()
                .iter()
                .map(|op| OperationDoc {
                    name: op.name().to_string(),
                    arity: op.arity(),
                    table: op.table().iter().map(|&v| v as usize).collect(),
                })
                .collect(),
            malcev_term: alg.malcev_term().map(|t| t.render(alg, 3)),
        }
    }
}

/// `mult[i][j] = i * j`; row `i` is left multiplication by `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopDoc {
    pub size: usize,
    pub mult: Vec<Vec<usize>>,
}

impl LoopDoc {
    pub fn to_loop(&self) -> malcev::Result<Loop> {
        if self.mult.len() != self.size || self.mult.iter().any(|row| row.len() != self.size) {
            return Err(malcev::Error::NotALoop(format!(
                "table is not {0}x{0}",
                self.size
            )));
        }
        Loop::new(&self.mult)
    }

    pub fn from_loop(q: &Loop) -> Self {
        LoopDoc {
            size: q.size(),
            mult: q.table(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialFnDoc {
    pub domain: Vec<usize>,
    pub values: Vec<usize>,
}

impl PartialFnDoc {
    pub fn to_partial_fn(&self, size: usize) -> malcev::Result<PartialFn> {
        PartialFn::new(self.domain.clone(), self.values.clone(), size)
    }

    pub fn from_partial_fn(f: &PartialFn) -> Self {
        PartialFnDoc {
            domain: f.domain().to_vec(),
            values: f.values().to_vec(),
        }
    }
}

/// A file's bytes together with their SHA-256.
#[derive(Clone, Debug)]
pub struct Input {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
    pub sha256: String,
}

impl Input {
    pub fn read(path: &Path) -> Result<Self, ToolError> {
        let bytes = fs::read(path).map_err(|source| ToolError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Input {
            path: path.to_path_buf(),
            sha256: sha256_hex(&bytes),
            bytes,
        })
    }

    pub fn parse<T: DeserializeOwned>(&self) -> Result<T, ToolError> {
        serde_json::from_slice(&self.bytes).map_err(|e| ToolError::Malformed {
            path: self.path.clone(),
            message: e.to_string(),
        })
    }

    /// Attaches the path to a validation error from the engine.
    pub fn invalid(&self, source: malcev::Error) -> ToolError {
        ToolError::Invalid {
            path: self.path.clone(),
            source,
        }
    }

    pub fn algebra(&self) -> Result<FiniteAlgebra, ToolError> {
        self.parse::<AlgebraDoc>()?
            .to_algebra()
            .map_err(|e| self.invalid(e))
    }

    pub fn loop_table(&self) -> Result<Loop, ToolError> {
        self.parse::<LoopDoc>()?
            .to_loop()
            .map_err(|e| self.invalid(e))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use malcev::corpus;

    #[test]
    fn algebra_documents_round_trip() {
        for alg in corpus::small_algebras() {
            let doc = AlgebraDoc::from_algebra(&alg);
            let json = serde_json::to_string(&doc).unwrap();
            let back: AlgebraDoc = serde_json::from_str(&json).unwrap();
            assert_eq!(back, doc);
            let rebuilt = back.to_algebra().unwrap();
            assert_eq!(rebuilt.size(), alg.size());
            for (a, b) in rebuilt.operations().iter().zip(alg.operations()) {
                assert_eq!(
                    (a.name(), a.arity(), a.table()),
                    (b.name(), b.arity(), b.table())
                );
            }
            assert_eq!(AlgebraDoc::from_algebra(&rebuilt), doc, "{}", alg.name());
        }
    }

    #[test]
    fn validation_errors() {
        let z4 = |table: Vec<usize>| AlgebraDoc {
            name: "Z4".into(),
            size: 4,
            operations: vec![OperationDoc {
                name: "add".into(),
                arity: 2,
                table,
            }],
            malcev_term: None,
        };
        let good: Vec<usize> = (0..16).map(|i| (i / 4 + i % 4) % 4).collect();
        assert_eq!(z4(good.clone()).to_algebra().unwrap().size(), 4);
        let mut bad = good.clone();
        bad[5] = 4;
        assert!(matches!(
            z4(bad).to_algebra(),
            Err(malcev::Error::EntryOutOfRange {
                index: 5,
                value: 4,
                ..
            })
        ));
        assert!(matches!(
            z4(good[..15].to_vec()).to_algebra(),
            Err(malcev::Error::TableLengthMismatch {
                expected: 16,
                found: 15,
                ..
            })
        ));
        let unknown = r#"{"name":"x","size":1,"operations":[],"extra":1}"#;
        assert!(serde_json::from_str::<AlgebraDoc>(unknown).is_err());
    }

    #[test]
    fn loop_documents() {
        let doc = LoopDoc {
            size: 3,
            mult: corpus::cyclic_table(3),
        };
        let q = doc.to_loop().unwrap();
        assert_eq!(LoopDoc::from_loop(&q), doc);
        let ragged = LoopDoc {
            size: 2,
            mult: vec![vec![0, 1], vec![1]],
        };
        assert!(matches!(ragged.to_loop(), Err(malcev::Error::NotALoop(_))));
        let not_latin = LoopDoc {
            size: 2,
            mult: vec![vec![0, 1], vec![1, 1]],
        };
        assert!(matches!(
            not_latin.to_loop(),
            Err(malcev::Error::NotALoop(_))
        ));
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
