//! The edge-length pairing on `Z^E`, its restriction to `H_1` and integer
//! specializations.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CurveError, CycleBasis, MonoidVector, TropicalCurve};
use crate::linalg::{factors_to_u64, IntMatrix, MatrixError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PairingError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("vector of length {found} paired on a curve with {expected} edges")]
    LengthMismatch { expected: usize, found: usize },
    #[error("expected {expected} weights, got {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("weight {value} for generator {index} is not positive")]
    NonPositiveWeight { index: usize, value: i64 },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("degenerate pairing: determinant is zero")]
    Degenerate,
    #[error("invalid pairing entries: {0}")]
    Entries(String),
}

/// `sum_e c1[e] * c2[e] * length(e)`, the bilinear extension of
/// `<e, f> = length(e)` if `e = f` and `0` otherwise.
pub fn edge_pairing(
    c1: &[i64],
    c2: &[i64],
    curve: &TropicalCurve,
) -> Result<MonoidVector, PairingError> {
    let n = curve.edge_count();
    for c in [c1, c2] {
        if c.len() != n {
            return Err(PairingError::LengthMismatch {
                expected: n,
                found: c.len(),
            });
        }
    }
    let mut acc = MonoidVector::zero(curve.base_rank);
    for ((a, b), e) in c1.iter().zip(c2).zip(&curve.edges) {
        let k = a * b;
        if k != 0 {
            acc = &acc + &(k * &e.length);
        }
    }
    Ok(acc)
}

/// Symmetric `h x h` Gram matrix with values in `Z^r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingMatrix {
    base_rank: usize,
    entries: Vec<Vec<MonoidVector>>,
    basis: Option<CycleBasis>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairingMatrixJson {
    h: usize,
    base_rank: usize,
    entries: Vec<Vec<Vec<i64>>>,
}

impl PairingMatrix {
    /// Direct construction for a general pairing not coming from a graph.
    ///
    /// Checks shape, symmetry, and that each per-generator slice is positive
    /// semidefinite.
    pub fn from_entries(
        base_rank: usize,
        entries: Vec<Vec<MonoidVector>>,
    ) -> Result<Self, PairingError> {
        let h = entries.len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != h {
                return Err(PairingError::Entries(format!("row {i} has {} entries", row.len())));
            }
            if let Some(j) = row.iter().position(|v| v.rank() != base_rank) {
                return Err(PairingError::Entries(format!(
                    "entry ({i},{j}) has rank {} instead of {base_rank}",
                    row[j].rank()
                )));
            }
        }
        let pm = PairingMatrix {
            base_rank,
            entries,
            basis: None,
        };
        if !pm.is_symmetric() {
            return Err(PairingError::NotSymmetric);
        }
        for k in 0..base_rank {
            if !pm.generator_slice(k).is_positive_semidefinite() {
                return Err(PairingError::Entries(format!(
                    "slice for generator {k} is not positive semidefinite"
                )));
            }
        }
        Ok(pm)
    }

    pub fn h(&self) -> usize {
        self.entries.len()
    }

    pub fn base_rank(&self) -> usize {
        self.base_rank
    }

    pub fn entry(&self, i: usize, j: usize) -> &MonoidVector {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<MonoidVector>] {
        &self.entries
    }

    /// The cycle basis this matrix is expressed in, when built from a curve.
    pub fn basis(&self) -> Option<&CycleBasis> {
        self.basis.as_ref()
    }

    fn is_symmetric(&self) -> bool {
        let h = self.h();
        (0..h).all(|i| (0..i).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    /// Integer matrix of the `k`-th coordinates.
    pub fn generator_slice(&self, k: usize) -> IntMatrix {
        let h = self.h();
        let data = self
            .entries
            .iter()
            .flat_map(|row| row.iter().map(move |v| v.0[k]))
            .collect();
        IntMatrix::from_row_major(h, h, data).expect("square")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PairingMatrixJson {
            h: self.h(),
            base_rank: self.base_rank,
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(|v| v.0.clone()).collect())
                .collect(),
        })
        .expect("pairing serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PairingError> {
        let raw: PairingMatrixJson =
            serde_json::from_str(text).map_err(|e| PairingError::Entries(e.to_string()))?;
        if raw.entries.len() != raw.h {
            return Err(PairingError::Entries(format!(
                "h = {} but {} rows",
                raw.h,
                raw.entries.len()
            )));
        }
        let entries = raw
            .entries
            .into_iter()
            .map(|row| row.into_iter().map(MonoidVector).collect())
            .collect();
        Self::from_entries(raw.base_rank, entries)
    }
}

/// Gram matrix of the edge-length pairing on the rows of `basis`.
pub fn pairing_matrix(
    curve: &TropicalCurve,
    basis: &CycleBasis,
) -> Result<PairingMatrix, PairingError> {
    curve.ensure_valid()?;
    basis.check_belongs_to(curve)?;
    let h = basis.rank();
    let mut entries = vec![vec![MonoidVector::zero(curve.base_rank); h]; h];
    for i in 0..h {
        for j in i..h {
            let v = edge_pairing(basis.cycle(i), basis.cycle(j), curve)?;
            entries[j][i] = v.clone();
            entries[i][j] = v;
        }
    }
    Ok(PairingMatrix {
        base_rank: curve.base_rank,
        entries,
        basis: Some(basis.clone()),
    })
}

/// Symmetric integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntSymMatrix(IntMatrix);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntSymMatrixJson {
    h: usize,
    entries: Vec<Vec<i64>>,
}

impl IntSymMatrix {
    pub fn new(m: IntMatrix) -> Result<Self, PairingError> {
        if m.is_symmetric() {
            Ok(IntSymMatrix(m))
        } else {
            Err(PairingError::NotSymmetric)
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, PairingError> {
        Self::new(IntMatrix::from_rows(rows)?)
    }

    pub fn empty() -> Self {
        IntSymMatrix(IntMatrix::zeros(0, 0))
    }

    pub fn h(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> IntMatrix {
        self.0
    }

    /// `u * self * u^T`.
    pub fn congruent(&self, u: &IntMatrix) -> Result<Self, PairingError> {
        let m = u.checked_mul(&self.0)?.checked_mul(&u.transpose())?;
        Self::new(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&IntSymMatrixJson {
            h: self.h(),
            entries: self.0.to_rows(),
        })
        .expect("matrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PairingError> {
        let raw: IntSymMatrixJson =
            serde_json::from_str(text).map_err(|e| PairingError::Entries(e.to_string()))?;
        if raw.entries.len() != raw.h || raw.entries.iter().any(|r| r.len() != raw.h) {
            return Err(PairingError::Entries(format!("entries are not {0}x{0}", raw.h)));
        }
        if raw.h == 0 {
            return Ok(Self::empty());
        }
        Self::from_rows(&raw.entries)
    }
}

/// Evaluates every entry under generator `k |-> weights[k]`.
pub fn specialize(pm: &PairingMatrix, weights: &[i64]) -> Result<IntSymMatrix, PairingError> {
    if weights.len() != pm.base_rank {
        return Err(PairingError::WeightCount {
            expected: pm.base_rank,
            found: weights.len(),
        });
    }
    if let Some((index, &value)) = weights.iter().enumerate().find(|(_, &w)| w < 1) {
        return Err(PairingError::NonPositiveWeight { index, value });
    }
    let h = pm.h();
    let data = pm
        .entries
        .iter()
        .flat_map(|row| row.iter().map(|v| v.evaluate(weights)))
        .collect();
    IntSymMatrix::new(IntMatrix::from_row_major(h, h, data)?)
}

/// All leading principal minors positive. The empty matrix qualifies.
pub fn is_positive_definite(b: &IntSymMatrix) -> bool {
    b.0.leading_principal_minors()
        .expect("square")
        .iter()
        .all(Signed::is_positive)
}

/// Invariant factors greater than one of `B : H -> Hom(H, Z)`; the cokernel is
/// their direct sum of cyclic groups.
pub fn component_group(b: &IntSymMatrix) -> Result<Vec<u64>, PairingError> {
    if b.0.det()?.is_zero() {
        return Err(PairingError::Degenerate);
    }
    let factors: Vec<BigInt> = b
        .0
        .invariant_factors()
        .into_iter()
        .filter(|d| *d > BigInt::from(1))
        .collect();
    Ok(factors_to_u64(&factors)?)
}
