//! Torsion, étale/Betti and Hodge shadows of the three-step weight filtration
//! of a degenerating Jacobian.
//!
//! Coordinates on `H^1` are ordered lowest weight first:
//!
//! * `gr_-1 = Hom(H, Z)`, `h` coordinates,
//! * `gr_0`, the abelian part, `2a` coordinates,
//! * `gr_1 = H(-1)`, `h` coordinates.
//!
//! The winding datum of a loop is an integer `w`, fixed by identifying
//! `Z(1)` with `Z` (and `mu_n` with `Z/n`) through a chosen generator.
//! Tate twists are only labels on these blocks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CurveError, TropicalCurve};
use crate::linalg::{IntMatrix, MatrixError};
use crate::pairing::IntSymMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RealizationError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("modulus must be 0 or at least 2, got {0}")]
    BadModulus(i64),
    #[error("abelian dimension must be nonnegative, got {0}")]
    BadAbelianRank(i64),
    #[error("operators act on different spaces")]
    Incompatible,
    #[error("vector of length {found}, operator has size {expected}")]
    VectorLength { expected: usize, found: usize },
}

/// Ranks of the graded pieces of the weight filtration on `H^1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightDims {
    pub h: usize,
    pub a: usize,
    pub total: usize,
}

pub fn weight_dims(curve: &TropicalCurve) -> Result<WeightDims, RealizationError> {
    let h = curve.betti_number()?;
    let a = curve.abelian_rank()?;
    Ok(WeightDims {
        h,
        a,
        total: 2 * (h + a),
    })
}

/// Free ranks over `Z/n` of `Hom(X, mu_n)`, `A[n]` and `Y/nY`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionDims {
    pub modulus: u64,
    pub toric: usize,
    pub abelian: usize,
    pub lattice: usize,
}

impl TorsionDims {
    pub fn as_triple(&self) -> (usize, usize, usize) {
        (self.toric, self.abelian, self.lattice)
    }
}

pub fn torsion_dims(curve: &TropicalCurve, n: i64) -> Result<TorsionDims, RealizationError> {
    if n < 2 {
        return Err(RealizationError::BadModulus(n));
    }
    let d = weight_dims(curve)?;
    Ok(TorsionDims {
        modulus: n as u64,
        toric: d.h,
        abelian: 2 * d.a,
        lattice: d.h,
    })
}

/// Unipotent monodromy `N = I + w * [[0, 0, B], [0, 0, 0], [0, 0, 0]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonodromyOperator {
    /// `0` for integer coefficients, otherwise `n >= 2`.
    pub modulus: i64,
    pub h: usize,
    pub a: usize,
    pub w: i64,
    pub matrix: IntMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorJson {
    modulus: i64,
    h: usize,
    a: usize,
    w: i64,
    matrix: Vec<Vec<i64>>,
}

impl MonodromyOperator {
    pub fn size(&self) -> usize {
        2 * (self.h + self.a)
    }

    fn lattice_offset(&self) -> usize {
        self.h + 2 * self.a
    }

    fn reduce(&self, x: i64) -> i64 {
        if self.modulus == 0 {
            x
        } else {
            x.rem_euclid(self.modulus)
        }
    }

    /// `N - I`, reduced when working modulo `n`.
    pub fn nilpotent_part(&self) -> IntMatrix {
        let m = self
            .matrix
            .checked_sub(&IntMatrix::identity(self.size()))
            .expect("same shape");
        if self.modulus == 0 {
            m
        } else {
            m.reduce_mod(self.modulus)
        }
    }

    /// `alpha |-> alpha + w * B * (gr_1 part of alpha)`, written into `gr_-1`.
    pub fn apply(&self, alpha: &[i64]) -> Result<Vec<i64>, RealizationError> {
        if alpha.len() != self.size() {
            return Err(RealizationError::VectorLength {
                expected: self.size(),
                found: alpha.len(),
            });
        }
        Ok(self
            .matrix
            .mul_vec(alpha)?
            .into_iter()
            .map(|x| self.reduce(x))
            .collect())
    }

    /// Operator of the concatenated loop.
    pub fn compose(&self, other: &MonodromyOperator) -> Result<MonodromyOperator, RealizationError> {
        if self.modulus != other.modulus || self.h != other.h || self.a != other.a {
            return Err(RealizationError::Incompatible);
        }
        let mut matrix = self.matrix.checked_mul(&other.matrix)?;
        if self.modulus != 0 {
            matrix = matrix.reduce_mod(self.modulus);
        }
        Ok(MonodromyOperator {
            modulus: self.modulus,
            h: self.h,
            a: self.a,
            w: self.reduce(self.w + other.w),
            matrix,
        })
    }

    /// Image under `Z -> Z/n`.
    pub fn reduce_mod(&self, n: i64) -> Result<MonodromyOperator, RealizationError> {
        if n < 2 {
            return Err(RealizationError::BadModulus(n));
        }
        if self.modulus != 0 && self.modulus % n != 0 {
            return Err(RealizationError::Incompatible);
        }
        Ok(MonodromyOperator {
            modulus: n,
            h: self.h,
            a: self.a,
            w: self.w.rem_euclid(n),
            matrix: self.matrix.reduce_mod(n),
        })
    }

    /// Multiplicative order of `N` as a matrix over `Z/n`; `None` over `Z`
    /// unless `N` is the identity.
    pub fn order(&self) -> Option<u64> {
        let id = IntMatrix::identity(self.size());
        if self.matrix == id {
            return Some(1);
        }
        if self.modulus == 0 {
            return None;
        }
        let mut power = self.matrix.clone();
        for k in 2..=(self.modulus as u64) {
            power = power
                .checked_mul(&self.matrix)
                .expect("entries stay reduced")
                .reduce_mod(self.modulus);
            if power == id {
                return Some(k);
            }
        }
        None
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&OperatorJson {
            modulus: self.modulus,
            h: self.h,
            a: self.a,
            w: self.w,
            matrix: self.matrix.to_rows(),
        })
        .expect("operator serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let raw: OperatorJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let n = 2 * (raw.h + raw.a);
        if raw.matrix.len() != n {
            return Err(format!("matrix has {} rows, expected {n}", raw.matrix.len()));
        }
        let matrix = if n == 0 {
            IntMatrix::zeros(0, 0)
        } else {
            IntMatrix::from_rows(&raw.matrix).map_err(|e| e.to_string())?
        };
        Ok(MonodromyOperator {
            modulus: raw.modulus,
            h: raw.h,
            a: raw.a,
            w: raw.w,
            matrix,
        })
    }
}

/// Picard–Lefschetz operator of a loop with winding `w` on `H^1`, with `B`
/// the specialized pairing and `a` the abelian dimension.
pub fn picard_lefschetz(
    b: &IntSymMatrix,
    a: i64,
    w: i64,
    modulus: i64,
) -> Result<MonodromyOperator, RealizationError> {
    if modulus != 0 && modulus < 2 {
        return Err(RealizationError::BadModulus(modulus));
    }
    if a < 0 {
        return Err(RealizationError::BadAbelianRank(a));
    }
    let a = a as usize;
    let h = b.h();
    let size = 2 * (h + a);
    let w = if modulus == 0 { w } else { w.rem_euclid(modulus) };
    let mut matrix = IntMatrix::identity(size);
    let off = h + 2 * a;
    for i in 0..h {
        for j in 0..h {
            let v = b.matrix()[(i, j)]
                .checked_mul(w)
                .ok_or(MatrixError::Overflow("winding times pairing"))?;
            matrix[(i, off + j)] = if modulus == 0 { v } else { v.rem_euclid(modulus) };
        }
    }
    let op = MonodromyOperator {
        modulus,
        h,
        a,
        w,
        matrix,
    };
    debug_assert_eq!(op.lattice_offset(), off);
    Ok(op)
}

/// Whether `gr_1 ⊗ Q -> gr_-1 ⊗ Q` induced by `B` is an isomorphism.
pub fn monodromy_weight_check(b: &IntSymMatrix) -> bool {
    use num_traits::Zero;
    !b.matrix().det().expect("square").is_zero()
}

/// Dimensions of `F^0` and `F^1` on each graded piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HodgeTable {
    #[serde(rename = "gr_-1")]
    pub gr_minus1: [usize; 2],
    #[serde(rename = "gr_0")]
    pub gr_0: [usize; 2],
    #[serde(rename = "gr_1")]
    pub gr_1: [usize; 2],
}

impl HodgeTable {
    pub fn rows(&self) -> [[usize; 2]; 3] {
        [self.gr_minus1, self.gr_0, self.gr_1]
    }

    pub fn f1_total(&self) -> usize {
        self.rows().iter().map(|r| r[1]).sum()
    }

    pub fn f0_total(&self) -> usize {
        self.rows().iter().map(|r| r[0]).sum()
    }
}

pub fn hodge_table(curve: &TropicalCurve) -> Result<HodgeTable, RealizationError> {
    let d = weight_dims(curve)?;
    Ok(HodgeTable {
        gr_minus1: [d.h, 0],
        gr_0: [2 * d.a, d.a],
        gr_1: [d.h, d.h],
    })
}
