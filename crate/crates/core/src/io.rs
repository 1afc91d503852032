//! JSON file formats: operator sets, encodings and planted ground truth.
//!
//! Complex entries are explicit `[re, im]` pairs and matrices are row-major.
//! `serde_json` writes shortest round-trip decimals, so save → load is exact.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::OperatorSet;
use crate::linalg::{CMatrix, Tolerance};
use crate::noiseless::SubsystemEncoding;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {field}: {message}")]
    Invalid {
        path: PathBuf,
        field: String,
        message: String,
    },
}

/// d × d or d × k matrix of `[re, im]` pairs, row-major.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Rejects ragged rows; `field` names the offending entry in diagnostics.
pub fn matrix_from_json(rows: &MatrixJson, field: &str) -> Result<CMatrix, String> {
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(format!(
            "{field}: row {i} has {} entries, expected {ncols}",
            row.len()
        ));
    }
    if let Some(((i, j), _)) = rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, z)| ((i, j), z)))
        .find(|(_, z)| !z[0].is_finite() || !z[1].is_finite())
    {
        return Err(format!("{field}: entry ({i}, {j}) is not finite"));
    }
    Ok(CMatrix::from_fn(rows.len(), ncols, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NamedMatrix {
    pub name: String,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OperatorFile {
    pub dim: usize,
    pub operators: Vec<NamedMatrix>,
}

impl OperatorFile {
    pub fn from_set(set: &OperatorSet) -> Self {
        Self {
            dim: set.dim(),
            operators: set
                .iter()
                .map(|(name, m)| NamedMatrix {
                    name: name.to_string(),
                    matrix: matrix_to_json(m),
                })
                .collect(),
        }
    }

    pub fn to_set(&self) -> Result<OperatorSet, (String, String)> {
        let mut named = Vec::with_capacity(self.operators.len());
        for (k, op) in self.operators.iter().enumerate() {
            let field = format!("operators[{k}] ({})", op.name);
            let m = matrix_from_json(&op.matrix, &field).map_err(|e| (field.clone(), e))?;
            if m.shape() != (self.dim, self.dim) {
                return Err((
                    field,
                    format!(
                        "matrix is {}×{}, expected {d}×{d}",
                        m.nrows(),
                        m.ncols(),
                        d = self.dim
                    ),
                ));
            }
            named.push((op.name.clone(), m));
        }
        OperatorSet::new(self.dim, named).map_err(|e| ("operators".to_string(), e.to_string()))
    }
}

/// Encoding file: `embed` has d rows and N·s_dim columns, column a·s_dim + j.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EncodingFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub s_dim: usize,
    pub embed: MatrixJson,
}

impl EncodingFile {
    pub fn from_encoding(enc: &SubsystemEncoding) -> Self {
        Self {
            n: enc.n(),
            s_dim: enc.s_dim(),
            embed: matrix_to_json(enc.embed()),
        }
    }

    pub fn to_encoding(&self, tol: &Tolerance) -> Result<SubsystemEncoding, (String, String)> {
        let embed = matrix_from_json(&self.embed, "embed").map_err(|e| ("embed".to_string(), e))?;
        SubsystemEncoding::new(self.n, self.s_dim, embed, tol)
            .map_err(|e| ("embed".to_string(), e.to_string()))
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| IoError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    fs::write(path, text + "\n").map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_operators(path: &Path) -> Result<OperatorSet, IoError> {
    let file: OperatorFile = read_json(path)?;
    file.to_set().map_err(|(field, message)| IoError::Invalid {
        path: path.to_path_buf(),
        field,
        message,
    })
}

pub fn save_operators(path: &Path, set: &OperatorSet) -> Result<(), IoError> {
    write_json(path, &OperatorFile::from_set(set))
}

pub fn load_encoding(path: &Path, tol: &Tolerance) -> Result<SubsystemEncoding, IoError> {
    let file: EncodingFile = read_json(path)?;
    file.to_encoding(tol)
        .map_err(|(field, message)| IoError::Invalid {
            path: path.to_path_buf(),
            field,
            message,
        })
}

pub fn save_encoding(path: &Path, enc: &SubsystemEncoding) -> Result<(), IoError> {
    write_json(path, &EncodingFile::from_encoding(enc))
}

/// Recorded answer of a planted instance.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroundTruth {
    Noiseless {
        seed: u64,
        /// (mult, irrep) pairs, mult descending then irrep ascending.
        profile: Vec<(usize, usize)>,
        max_n: usize,
        w: MatrixJson,
    },
    Similarity {
        seed: u64,
        mult: usize,
        irrep: usize,
        factorization: MatrixJson,
    },
    Protectable {
        seed: u64,
        code: MatrixJson,
        alphas: MatrixJson,
    },
    NotProtectable {
        seed: u64,
        reason: String,
    },
    Undecidable {
        seed: u64,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ginibre, rng_from_seed};

    #[test]
    fn operator_file_round_trip_is_exact() {
        let mut rng = rng_from_seed(9);
        let set = OperatorSet::from_matrices(vec![
            ginibre(3, 3, &mut rng),
            ginibre(3, 3, &mut rng).scale(1e-17),
        ])
        .unwrap();
        let text = serde_json::to_string(&OperatorFile::from_set(&set)).unwrap();
        let back: OperatorFile = serde_json::from_str(&text).unwrap();
        let back = back.to_set().unwrap();
        for (a, b) in set.operators().iter().zip(back.operators()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let file = OperatorFile {
            dim: 2,
            operators: vec![NamedMatrix {
                name: "bad".into(),
                matrix: vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0]]],
            }],
        };
        let (field, msg) = file.to_set().unwrap_err();
        assert!(field.contains("operators[0]") && msg.contains("row 1"));

        let file = OperatorFile {
            dim: 3,
            operators: vec![NamedMatrix {
                name: "small".into(),
                matrix: matrix_to_json(&CMatrix::identity(2, 2)),
            }],
        };
        assert!(file.to_set().unwrap_err().1.contains("expected 3×3"));
    }
}
