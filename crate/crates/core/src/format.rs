//! Problem file grammar.
//!
//! A problem file is a JSON object:
//!
//! ```json
//! {
//!   "n": 3,
//!   "alpha": 8,
//!   "A": {"dense": [[4, 0, 1], [0, -4, -6], [1, -6, 4]]},
//!   "B": {"diag": [7, 8, 10]},
//!   "c": [10, 6, 7],
//!   "f": [3, 2, 3]
//! }
//! ```
//!
//! `A` and `B` are either `{"diag": [..n numbers..]}` or
//! `{"dense": [[..], ..]}` (row-major, n rows of n numbers). An optional
//! `"name"` string is accepted. Unknown keys are rejected. Dense input that
//! is not symmetric is replaced by its symmetric part.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::instance::{validate_instance, ProblemInstance};
use crate::linalg::SymmetricMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub alpha: f64,
    #[serde(rename = "A")]
    pub a: MatrixSpec,
    #[serde(rename = "B")]
    pub b: MatrixSpec,
    pub c: Vec<f64>,
    pub f: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MatrixSpec {
    #[serde(rename = "diag")]
    Diag(Vec<f64>),
    #[serde(rename = "dense")]
    Dense(Vec<Vec<f64>>),
}

impl MatrixSpec {
    fn build(&self, field: &str, n: usize) -> Result<(SymmetricMatrix, f64)> {
        match self {
            MatrixSpec::Diag(d) => {
                if d.len() != n {
                    return Err(Error::Parse(format!(
                        "field `{field}.diag`: expected {n} entries, got {}",
                        d.len()
                    )));
                }
                Ok((SymmetricMatrix::diagonal(d.clone()), 0.0))
            }
            MatrixSpec::Dense(rows) => {
                if rows.len() != n {
                    return Err(Error::Parse(format!(
                        "field `{field}.dense`: expected {n} rows, got {}",
                        rows.len()
                    )));
                }
                if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
                    return Err(Error::Parse(format!(
                        "field `{field}.dense[{i}]`: expected {n} entries, got {}",
                        r.len()
                    )));
                }
                Ok(SymmetricMatrix::from_rows(rows).expect("shape checked above"))
            }
        }
    }

    fn from_matrix(m: &SymmetricMatrix) -> Self {
        if m.is_diagonal_tagged() {
            MatrixSpec::Diag(m.diag())
        } else {
            MatrixSpec::Dense(m.to_rows())
        }
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e))
        })
    }

    /// Shape-checks the fields and builds the instance (without validating
    /// the mathematical invariants).
    pub fn to_instance(&self) -> Result<ProblemInstance> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Parse("field `n`: must be a positive integer".into()));
        }
        for (field, v) in [("c", &self.c), ("f", &self.f)] {
            if v.len() != n {
                return Err(Error::Parse(format!(
                    "field `{field}`: expected {n} entries, got {}",
                    v.len()
                )));
            }
        }
        let (a, ca) = self.a.build("A", n)?;
        let (b, cb) = self.b.build("B", n)?;
        Ok(ProblemInstance::new(a, b, self.alpha, self.c.clone(), self.f.clone())?
            .with_symmetry_correction(ca.max(cb)))
    }

    pub fn from_instance(inst: &ProblemInstance) -> Self {
        Self {
            name: None,
            n: inst.n(),
            alpha: inst.alpha(),
            a: MatrixSpec::from_matrix(inst.a()),
            b: MatrixSpec::from_matrix(inst.b()),
            c: inst.c().to_vec(),
            f: inst.f().to_vec(),
        }
    }
}

/// Parses, shape-checks and validates a problem file.
pub fn load_instance(text: &str) -> Result<ProblemInstance> {
    let inst = ProblemFile::parse(text)?.to_instance()?;
    let violations = validate_instance(&inst);
    if violations.is_empty() {
        Ok(inst)
    } else {
        Err(Error::InvalidInstance(violations))
    }
}

/// SHA-256 of the canonical JSON form (sorted keys, no whitespace).
pub fn instance_digest(text: &str) -> Result<String> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e)))?;
    let canonical = serde_json::to_string(&value).expect("Value serializes");
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}
