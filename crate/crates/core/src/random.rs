//! Seeded generators for property sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, MonoidVector, TropicalCurve, Vertex};
use crate::linalg::IntMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub struct GraphParams {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub base_rank: usize,
    /// Inclusive range for each length coordinate.
    pub max_length: i64,
    pub max_genus: i64,
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams {
            max_vertices: 8,
            max_edges: 16,
            base_rank: 1,
            max_length: 5,
            max_genus: 0,
        }
    }
}

fn random_length<R: Rng>(rng: &mut R, params: &GraphParams) -> MonoidVector {
    // Rejection keeps every length in N^r minus the origin.
    loop {
        let m = MonoidVector(
            (0..params.base_rank)
                .map(|_| rng.random_range(0..=params.max_length))
                .collect(),
        );
        if m.is_length() {
            return m;
        }
    }
}

/// Connected multigraph: a random spanning tree plus extra edges, with
/// self-loops and parallel edges allowed. Edge orientations and the order of
/// the edge list are random.
pub fn random_connected_curve<R: Rng>(rng: &mut R, params: &GraphParams) -> TropicalCurve {
    let nv = rng.random_range(1..=params.max_vertices);
    let min_edges = nv - 1;
    let ne = rng.random_range(min_edges..=params.max_edges.max(min_edges));
    let vertices: Vec<Vertex> = (0..nv)
        .map(|i| Vertex {
            id: format!("v{i}"),
            genus: rng.random_range(0..=params.max_genus),
        })
        .collect();
    let mut ends = Vec::with_capacity(ne);
    for i in 1..nv {
        ends.push((rng.random_range(0..i), i));
    }
    while ends.len() < ne {
        ends.push((rng.random_range(0..nv), rng.random_range(0..nv)));
    }
    // Shuffle so tree edges are not always first by id.
    for i in (1..ends.len()).rev() {
        let j = rng.random_range(0..=i);
        ends.swap(i, j);
    }
    let edges = ends
        .into_iter()
        .enumerate()
        .map(|(k, (a, b))| {
            let (src, dst) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
            Edge {
                id: format!("e{k:02}"),
                src: format!("v{src}"),
                dst: format!("v{dst}"),
                length: random_length(rng, params),
            }
        })
        .collect();
    TropicalCurve {
        base_rank: params.base_rank,
        vertices,
        edges,
    }
}

/// Product of random elementary matrices and sign flips; determinant ±1.
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize, steps: usize) -> IntMatrix {
    let mut u = IntMatrix::identity(n);
    if n == 0 {
        return u;
    }
    for _ in 0..steps {
        let i = rng.random_range(0..n);
        match rng.random_range(0..3) {
            0 if n > 1 => {
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let k = rng.random_range(-2..=2);
                for c in 0..n {
                    u[(i, c)] += k * u[(j, c)];
                }
            }
            1 if n > 1 => {
                let j = rng.random_range(0..n);
                for c in 0..n {
                    let t = u[(i, c)];
                    u[(i, c)] = u[(j, c)];
                    u[(j, c)] = t;
                }
            }
            _ => {
                for c in 0..n {
                    u[(i, c)] = -u[(i, c)];
                }
            }
        }
    }
    u
}
