//! Dense integer matrices with exact determinant, rank and Smith normal form.
//!
//! Entries are stored as `i64`; every elimination runs over [`BigInt`] so
//! intermediate growth never overflows.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("ragged rows: row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    /// Builds a matrix from row vectors. An empty slice gives a `0 x cols` matrix
    /// only through [`IntMatrix::zeros`]; here it yields `0 x 0`.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(MatrixError::Ragged {
                    row: i,
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(IntMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn checked_mul(&self, rhs: &IntMatrix) -> Result<IntMatrix, MatrixError> {
        if self.cols != rhs.rows {
            return Err(MatrixError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let prod = a
                        .checked_mul(rhs[(k, j)])
                        .ok_or(MatrixError::Overflow("matrix product"))?;
                    out[(i, j)] = out[(i, j)]
                        .checked_add(prod)
                        .ok_or(MatrixError::Overflow("matrix product"))?;
                }
            }
        }
        Ok(out)
    }

    pub fn checked_sub(&self, rhs: &IntMatrix) -> Result<IntMatrix, MatrixError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(MatrixError::Shape("difference of unequal shapes".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a.checked_sub(*b).ok_or(MatrixError::Overflow("difference")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, k: i64) -> Result<IntMatrix, MatrixError> {
        let data = self
            .data
            .iter()
            .map(|a| a.checked_mul(k).ok_or(MatrixError::Overflow("scaling")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Entrywise least nonnegative residue modulo `n`.
    pub fn reduce_mod(&self, n: i64) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.rem_euclid(n)).collect(),
        }
    }

    /// `self * v` for a column vector.
    pub fn mul_vec(&self, v: &[i64]) -> Result<Vec<i64>, MatrixError> {
        if v.len() != self.cols {
            return Err(MatrixError::Shape(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).try_fold(0i64, |acc, (a, b)| {
                    a.checked_mul(*b)
                        .and_then(|p| acc.checked_add(p))
                        .ok_or(MatrixError::Overflow("matrix-vector product"))
                })
            })
            .collect()
    }

    /// Rows stacked on top of `other`'s rows.
    pub fn vstack(&self, other: &IntMatrix) -> Result<IntMatrix, MatrixError> {
        if self.cols != other.cols {
            return Err(MatrixError::Shape("vstack of unequal widths".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(IntMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    fn to_big(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    /// Exact determinant by Bareiss fraction-free elimination.
    pub fn det(&self) -> Result<BigInt, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::Shape("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.to_big();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }

    /// Leading principal minors `det(A[..k, ..k])` for `k = 1..=n`.
    ///
    /// Bareiss elimination without row exchanges produces these as its pivots;
    /// once a pivot vanishes the remaining minors are computed directly.
    pub fn leading_principal_minors(&self) -> Result<Vec<BigInt>, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::Shape("minors of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.to_big();
        let mut prev = BigInt::one();
        let mut minors = Vec::with_capacity(n);
        for k in 0..n {
            if a[k][k].is_zero() {
                minors.push(BigInt::zero());
                for m in k + 2..=n {
                    let sub = IntMatrix::from_rows(
                        &(0..m).map(|i| self.row(i)[..m].to_vec()).collect::<Vec<_>>(),
                    )?;
                    minors.push(sub.det()?);
                }
                return Ok(minors);
            }
            minors.push(a[k][k].clone());
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(minors)
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let mut a = self.to_big();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        let mut prev = BigInt::one();
        for c in 0..cols {
            let Some(p) = (rank..rows).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(p, rank);
            // Bareiss step: the division by the previous pivot is exact.
            let pivot = a[rank][c].clone();
            for i in rank + 1..rows {
                let factor = a[i][c].clone();
                for j in c..cols {
                    a[i][j] = (&a[i][j] * &pivot - &a[rank][j] * &factor) / &prev;
                }
            }
            prev = pivot;
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }

    /// Nonzero diagonal entries `d_1 | d_2 | ... | d_r` of the Smith normal form,
    /// all positive. Their count is the rank.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let modulus = if self.is_square() {
            self.det().ok().filter(|d| !d.is_zero()).map(|d| d.abs())
        } else {
            None
        };
        smith_diagonal(self.to_big(), self.rows, self.cols, modulus)
    }

    /// Exact positive semidefiniteness test for a symmetric matrix by
    /// fraction-free symmetric elimination.
    pub fn is_positive_semidefinite(&self) -> bool {
        if !self.is_symmetric() {
            return false;
        }
        let mut a = self.to_big();
        let mut live: Vec<usize> = (0..self.rows).collect();
        loop {
            if live.is_empty() {
                return true;
            }
            if live.iter().any(|&i| a[i][i].is_negative()) {
                return false;
            }
            // A zero diagonal entry forces its whole row to vanish.
            for &i in &live {
                if a[i][i].is_zero() && live.iter().any(|&j| !a[i][j].is_zero()) {
                    return false;
                }
            }
            let Some(pos) = live.iter().position(|&i| a[i][i].is_positive()) else {
                return true;
            };
            let k = live.remove(pos);
            let pivot = a[k][k].clone();
            let col: Vec<BigInt> = live.iter().map(|&i| a[i][k].clone()).collect();
            for (x, &i) in live.iter().enumerate() {
                for (y, &j) in live.iter().enumerate() {
                    a[i][j] = &a[i][j] * &pivot - &col[x] * &col[y];
                }
            }
            // Divide out common content to keep entries small.
            let g = live
                .iter()
                .flat_map(|&i| live.iter().map(move |&j| (i, j)))
                .fold(BigInt::zero(), |g, (i, j)| g.gcd(&a[i][j]));
            if !g.is_zero() && !g.is_one() {
                for &i in &live {
                    for &j in &live {
                        a[i][j] = &a[i][j] / &g;
                    }
                }
            }
        }
    }
}

/// Converts invariant factors to `u64`, failing on overflow.
pub fn factors_to_u64(factors: &[BigInt]) -> Result<Vec<u64>, MatrixError> {
    factors
        .iter()
        .map(|d| d.to_u64().ok_or(MatrixError::Overflow("invariant factor")))
        .collect()
}

/// Unimodular `[[x, y], [-q/g, p/g]]` sending `(p, q)` to `(g, 0)`. When `p`
/// already divides `q` the pivot line is left untouched.
fn elimination_step(p: &BigInt, q: &BigInt) -> (BigInt, BigInt, BigInt, BigInt) {
    if !p.is_zero() && (q % p).is_zero() {
        return (BigInt::one(), BigInt::zero(), BigInt::one(), q / p);
    }
    let e = p.extended_gcd(q);
    let (pg, qg) = (p / &e.gcd, q / &e.gcd);
    (e.x, e.y, pg, qg)
}

/// `modulus`, when given, must be a positive multiple of the determinant of
/// a nonsingular square input. Such a matrix has `modulus * Z^n` inside its
/// column lattice, so entries may be reduced modulo it throughout without
/// changing the invariant factors.
fn smith_diagonal(
    mut a: Vec<Vec<BigInt>>,
    rows: usize,
    cols: usize,
    modulus: Option<BigInt>,
) -> Vec<BigInt> {
    let reduce = |x: &mut BigInt| {
        if let Some(d) = &modulus {
            *x = x.mod_floor(d);
        }
    };
    for row in a.iter_mut() {
        for x in row.iter_mut() {
            reduce(x);
        }
    }

    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .find(|&(i, j)| !a[i][j].is_zero())
        else {
            break;
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let (x, y, pg, qg) = elimination_step(&a[t][t], &a[i][t]);
                for j in t..cols {
                    let (u, v) = (a[t][j].clone(), a[i][j].clone());
                    a[t][j] = &x * &u + &y * &v;
                    a[i][j] = &pg * &v - &qg * &u;
                    reduce(&mut a[t][j]);
                    reduce(&mut a[i][j]);
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let (x, y, pg, qg) = elimination_step(&a[t][t], &a[t][j]);
                for row in a.iter_mut().skip(t) {
                    let (u, v) = (row[t].clone(), row[j].clone());
                    row[t] = &x * &u + &y * &v;
                    row[j] = &pg * &v - &qg * &u;
                    reduce(&mut row[t]);
                    reduce(&mut row[j]);
                }
                dirty = true;
            }
            if !dirty || (t + 1..rows).all(|i| a[i][t].is_zero()) {
                break;
            }
        }
        diag.push(a[t][t].abs());
    }

    if let Some(d) = &modulus {
        diag.resize(rows, BigInt::zero());
        for x in diag.iter_mut() {
            *x = x.gcd(d);
        }
    }
    diag.retain(|x| !x.is_zero());
    // gcd/lcm sweep turns any diagonal into the divisibility chain.
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            let g = diag[i].gcd(&diag[j]);
            let l = &diag[i] / &g * &diag[j];
            diag[i] = g;
            diag[j] = l;
        }
    }
    diag
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = i64;

    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{:?}", self.to_rows())
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .data
            .iter()
            .map(|x| x.to_string().len())
            .max()
            .unwrap_or(1);
        for i in 0..self.rows {
            let cells: Vec<String> = self
                .row(i)
                .iter()
                .map(|x| format!("{x:>width$}"))
                .collect();
            writeln!(f, "[ {} ]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// True when the row lattices of `a` and `b` coincide inside `Z^n`.
pub fn same_row_lattice(a: &IntMatrix, b: &IntMatrix) -> Result<bool, MatrixError> {
    let stacked = a.vstack(b)?;
    let (fa, fb, fs) = (
        a.invariant_factors(),
        b.invariant_factors(),
        stacked.invariant_factors(),
    );
    if fa.len() != fs.len() || fb.len() != fs.len() {
        return Ok(false);
    }
    // Same rank: each lattice sits in the sum with finite index, measured by
    // the product of invariant factors.
    let prod = |v: &[BigInt]| v.iter().fold(BigInt::one(), |acc, d| acc * d);
    Ok(prod(&fa) == prod(&fs) && prod(&fb) == prod(&fs))
}
