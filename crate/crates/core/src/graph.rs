//! Metrized dual graphs and their first homology.
//!
//! A [`TropicalCurve`] is a multigraph with genus-marked vertices and oriented
//! edges whose lengths live in the free monoid `N^r`. Self-loops and parallel
//! edges are allowed, and so are disconnected graphs.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::IntMatrix;

/// An element of `Z^r`, the group completion of the base monoid `N^r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MonoidVector(pub Vec<i64>);

impl MonoidVector {
    pub fn zero(rank: usize) -> Self {
        MonoidVector(vec![0; rank])
    }

    pub fn generator(rank: usize, k: usize) -> Self {
        let mut v = vec![0; rank];
        v[k] = 1;
        MonoidVector(v)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Lies in `N^r \ {0}`.
    pub fn is_length(&self) -> bool {
        self.0.iter().all(|&c| c >= 0) && self.0.iter().any(|&c| c > 0)
    }

    /// Value under the monoid homomorphism sending generator `k` to `weights[k]`.
    pub fn evaluate(&self, weights: &[i64]) -> i64 {
        self.0.iter().zip(weights).map(|(c, w)| c * w).sum()
    }
}

impl Add for &MonoidVector {
    type Output = MonoidVector;

    fn add(self, rhs: &MonoidVector) -> MonoidVector {
        assert_eq!(self.rank(), rhs.rank(), "monoid ranks differ");
        MonoidVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &MonoidVector {
    type Output = MonoidVector;

    fn sub(self, rhs: &MonoidVector) -> MonoidVector {
        assert_eq!(self.rank(), rhs.rank(), "monoid ranks differ");
        MonoidVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &MonoidVector {
    type Output = MonoidVector;

    fn neg(self) -> MonoidVector {
        MonoidVector(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<&MonoidVector> for i64 {
    type Output = MonoidVector;

    fn mul(self, rhs: &MonoidVector) -> MonoidVector {
        MonoidVector(rhs.0.iter().map(|a| self * a).collect())
    }
}

impl fmt::Display for MonoidVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", cells.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub id: String,
    pub genus: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub id: String,
    pub src: String,
    pub dst: String,
    pub length: MonoidVector,
}

/// Genus-marked multigraph with oriented edges metrized by `N^r`.
///
/// Field layout matches the JSON curve format read by the CLI.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TropicalCurve {
    pub base_rank: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

/// A single invariant violation with the id of the offending vertex or edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub locus: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.locus, self.message)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CurveError {
    #[error("invalid curve: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("malformed curve JSON: {0}")]
    Parse(String),
    #[error("cycle basis does not belong to this curve: {0}")]
    BasisMismatch(String),
}

impl TropicalCurve {
    pub fn from_json(text: &str) -> Result<Self, CurveError> {
        serde_json::from_str(text).map_err(|e| CurveError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }

    /// Every invariant violation, in a stable order (vertices, then edges).
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for v in &self.vertices {
            if !seen.insert(v.id.as_str()) {
                out.push(Violation {
                    locus: format!("vertex {}", v.id),
                    message: "duplicate vertex id".into(),
                });
            }
            if v.genus < 0 {
                out.push(Violation {
                    locus: format!("vertex {}", v.id),
                    message: format!("negative genus {}", v.genus),
                });
            }
        }
        let mut seen_edges = HashSet::new();
        for e in &self.edges {
            let locus = format!("edge {}", e.id);
            if !seen_edges.insert(e.id.as_str()) {
                out.push(Violation {
                    locus: locus.clone(),
                    message: "duplicate edge id".into(),
                });
            }
            for end in [&e.src, &e.dst] {
                if !seen.contains(end.as_str()) {
                    out.push(Violation {
                        locus: locus.clone(),
                        message: format!("endpoint {end} is not a declared vertex"),
                    });
                }
            }
            if e.length.rank() != self.base_rank {
                out.push(Violation {
                    locus: locus.clone(),
                    message: format!(
                        "length has {} coordinates, base rank is {}",
                        e.length.rank(),
                        self.base_rank
                    ),
                });
            } else if e.length.0.iter().any(|&c| c < 0) {
                out.push(Violation {
                    locus: locus.clone(),
                    message: format!("length {} has a negative coordinate", e.length),
                });
            } else if !e.length.is_length() {
                out.push(Violation {
                    locus,
                    message: "zero length".into(),
                });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), CurveError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CurveError::Invalid(v))
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn vertex_index(&self) -> HashMap<&str, usize> {
        self.vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect()
    }

    fn component_count(&self) -> usize {
        let index = self.vertex_index();
        let mut uf = UnionFind::new(self.vertices.len());
        for e in &self.edges {
            uf.union(index[e.src.as_str()], index[e.dst.as_str()]);
        }
        (0..self.vertices.len()).filter(|&i| uf.find(i) == i).count()
    }

    /// First Betti number `|E| - |V| + #components`.
    pub fn betti_number(&self) -> Result<usize, CurveError> {
        self.ensure_valid()?;
        Ok(self.edges.len() + self.component_count() - self.vertices.len())
    }

    /// Sum of the vertex genera.
    pub fn abelian_rank(&self) -> Result<usize, CurveError> {
        self.ensure_valid()?;
        Ok(self.vertices.iter().map(|v| v.genus as usize).sum())
    }

    /// Boundary map `Z^E -> Z^V`, `e |-> dst(e) - src(e)`, as a `|V| x |E|` matrix.
    pub fn boundary_matrix(&self) -> Result<IntMatrix, CurveError> {
        self.ensure_valid()?;
        let index = self.vertex_index();
        let mut d = IntMatrix::zeros(self.vertices.len(), self.edges.len());
        for (j, e) in self.edges.iter().enumerate() {
            d[(index[e.dst.as_str()], j)] += 1;
            d[(index[e.src.as_str()], j)] -= 1;
        }
        Ok(d)
    }

    /// Fundamental-cycle basis of `H_1` inside `Z^E`.
    ///
    /// The spanning forest is grown greedily in edge-id order; each remaining
    /// edge is traversed positively and closed up through the forest. Rows are
    /// ordered by the id of their non-tree edge, columns follow `self.edges`.
    pub fn cycle_basis(&self) -> Result<CycleBasis, CurveError> {
        self.ensure_valid()?;
        let index = self.vertex_index();
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.sort_by(|&a, &b| self.edges[a].id.cmp(&self.edges[b].id));

        let mut uf = UnionFind::new(self.vertices.len());
        // Forest adjacency: vertex -> (neighbour, edge index, sign of traversal).
        let mut forest: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); self.vertices.len()];
        let mut non_tree = Vec::new();
        for &j in &order {
            let e = &self.edges[j];
            let (s, t) = (index[e.src.as_str()], index[e.dst.as_str()]);
            if uf.union(s, t) {
                forest[s].push((t, j, 1));
                forest[t].push((s, j, -1));
            } else {
                non_tree.push(j);
            }
        }

        let n_edges = self.edges.len();
        let mut rows = Vec::with_capacity(non_tree.len());
        for &j in &non_tree {
            let e = &self.edges[j];
            let mut row = vec![0i64; n_edges];
            row[j] += 1;
            let (s, t) = (index[e.src.as_str()], index[e.dst.as_str()]);
            // Return from dst to src through the forest.
            for (edge, sign) in forest_path(&forest, t, s) {
                row[edge] += sign;
            }
            rows.push(row);
        }
        let matrix = if rows.is_empty() {
            IntMatrix::zeros(0, n_edges)
        } else {
            IntMatrix::from_rows(&rows).expect("rows have equal length")
        };
        Ok(CycleBasis {
            edge_ids: self.edges.iter().map(|e| e.id.clone()).collect(),
            matrix,
        })
    }

    /// Copy with the orientation of edge `j` reversed.
    pub fn with_reversed_edge(&self, j: usize) -> TropicalCurve {
        let mut c = self.clone();
        let e = &mut c.edges[j];
        std::mem::swap(&mut e.src, &mut e.dst);
        c
    }
}

/// Oriented edge steps along the unique forest path from `from` to `to`.
fn forest_path(forest: &[Vec<(usize, usize, i64)>], from: usize, to: usize) -> Vec<(usize, i64)> {
    if from == to {
        return Vec::new();
    }
    let mut prev: BTreeMap<usize, (usize, usize, i64)> = BTreeMap::new();
    let mut stack = vec![from];
    let mut visited = vec![false; forest.len()];
    visited[from] = true;
    while let Some(v) = stack.pop() {
        if v == to {
            break;
        }
        for &(w, edge, sign) in &forest[v] {
            if !visited[w] {
                visited[w] = true;
                prev.insert(w, (v, edge, sign));
                stack.push(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = to;
    while cur != from {
        let (p, edge, sign) = prev[&cur];
        path.push((edge, sign));
        cur = p;
    }
    path.reverse();
    path
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Integer `h x |E|` matrix whose rows form a basis of `H_1 ⊂ Z^E`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleBasis {
    /// Edge ids labelling the columns.
    pub edge_ids: Vec<String>,
    pub matrix: IntMatrix,
}

impl CycleBasis {
    pub fn rank(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cycle(&self, i: usize) -> &[i64] {
        self.matrix.row(i)
    }

    /// Checks that the basis lives on `curve`'s edges.
    pub fn check_belongs_to(&self, curve: &TropicalCurve) -> Result<(), CurveError> {
        let ids: Vec<&str> = curve.edges.iter().map(|e| e.id.as_str()).collect();
        if ids.len() != self.edge_ids.len() || ids.iter().zip(&self.edge_ids).any(|(a, b)| a != b)
        {
            return Err(CurveError::BasisMismatch(format!(
                "basis columns {:?} differ from curve edges {:?}",
                self.edge_ids, ids
            )));
        }
        if self.matrix.ncols() != ids.len() {
            return Err(CurveError::BasisMismatch("column count".into()));
        }
        Ok(())
    }

    /// Full check of the basis invariants against `curve`: every row is a
    /// cycle, and the rows span the cycle lattice (unit invariant factors and
    /// row count equal to the Betti number).
    pub fn verify(&self, curve: &TropicalCurve) -> Result<(), CurveError> {
        self.check_belongs_to(curve)?;
        let boundary = curve.boundary_matrix()?;
        let image = boundary
            .checked_mul(&self.matrix.transpose())
            .map_err(|e| CurveError::BasisMismatch(e.to_string()))?;
        if !image.is_zero() {
            return Err(CurveError::BasisMismatch("a row is not a cycle".into()));
        }
        let h = curve.betti_number()?;
        if self.rank() != h {
            return Err(CurveError::BasisMismatch(format!(
                "{} rows but Betti number {h}",
                self.rank()
            )));
        }
        let factors = self.matrix.invariant_factors();
        if factors.len() != h || factors.iter().any(|d| *d != 1.into()) {
            return Err(CurveError::BasisMismatch(
                "rows do not span a saturated sublattice".into(),
            ));
        }
        Ok(())
    }
}
