//! Test-side oracles. Nothing here calls into the library's algebra; the
//! point is to reach the same numbers by a different route.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Minimal finite abelian group on coordinate tuples, indexed with the first
/// factor most significant.
#[derive(Clone, Debug)]
pub struct Grp {
    pub factors: Vec<usize>,
}

impl Grp {
    pub fn new(factors: &[usize]) -> Self {
        Grp {
            factors: factors.to_vec(),
        }
    }

    pub fn order(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn coords(&self, mut x: usize) -> Vec<usize> {
        let mut c = vec![0; self.factors.len()];
        for k in (0..self.factors.len()).rev() {
            c[k] = x % self.factors[k];
            x /= self.factors[k];
        }
        c
    }

    pub fn index(&self, c: &[usize]) -> usize {
        c.iter().zip(&self.factors).fold(0, |acc, (&x, &m)| acc * m + x)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coords(a), self.coords(b));
        let c: Vec<usize> = ca
            .iter()
            .zip(&cb)
            .zip(&self.factors)
            .map(|((x, y), m)| (x + y) % m)
            .collect();
        self.index(&c)
    }

    pub fn neg(&self, a: usize) -> usize {
        let c: Vec<usize> = self
            .coords(a)
            .iter()
            .zip(&self.factors)
            .map(|(x, m)| (m - x) % m)
            .collect();
        self.index(&c)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// Element with a single coordinate equal to one.
    pub fn unit(&self, k: usize) -> usize {
        let mut c = vec![0; self.factors.len()];
        c[k] = 1;
        self.index(&c)
    }
}

/// All abelian groups of order at most 8, as invariant-factor lists.
pub fn groups_up_to_8() -> Vec<Vec<usize>> {
    vec![
        vec![],
        vec![2],
        vec![3],
        vec![4],
        vec![2, 2],
        vec![5],
        vec![6],
        vec![7],
        vec![8],
        vec![2, 4],
        vec![2, 2, 2],
    ]
}

pub fn groups_up_to_4() -> Vec<Vec<usize>> {
    groups_up_to_8()
        .into_iter()
        .filter(|g| g.iter().product::<usize>() <= 4)
        .collect()
}

fn prime_powers(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut k = 0;
        while n.is_multiple_of(p) {
            n /= p;
            k += 1;
        }
        if k > 0 {
            out.push((p, k));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn inverse_mod(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1, mut s0, mut s1) = (a.rem_euclid(m), m, 1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "{a} is not a unit modulo {m}");
    s0.rem_euclid(m)
}

fn valuation(mut x: i128, p: i128) -> u32 {
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// `log_p` of the number of solutions of `M x = 0` over `Z/p^k`, by
/// elimination in the local ring: pivot on an entry of least valuation, clear
/// its column, then drop its row and column.
fn kernel_exponent_local(rows: &[Vec<i64>], nvars: usize, p: u64, k: u32) -> u32 {
    let pk = (p as i128).pow(k);
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| (x as i128).rem_euclid(pk)).collect())
        .filter(|r: &Vec<i128>| r.iter().any(|&x| x != 0))
        .collect();
    let mut live: Vec<usize> = (0..nvars).collect();
    let mut exponent = 0;
    loop {
        let mut best: Option<(usize, usize, u32)> = None;
        for (i, r) in a.iter().enumerate() {
            for &j in &live {
                if r[j] != 0 {
                    let v = valuation(r[j], p as i128);
                    if best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((pi, pj, v)) = best else { break };
        let pv = (p as i128).pow(v);
        let unit_inv = inverse_mod(a[pi][pj] / pv, pk);
        let pivot_row = a.swap_remove(pi);
        for r in a.iter_mut() {
            if r[pj] == 0 {
                continue;
            }
            let s = (r[pj] / pv) * unit_inv % pk;
            for &j in &live {
                r[j] = (r[j] - s * pivot_row[j]).rem_euclid(pk);
            }
        }
        a.retain(|r| r.iter().any(|&x| x != 0));
        live.retain(|&j| j != pj);
        exponent += v;
    }
    exponent + k * live.len() as u32
}

/// Number of solutions of `M x = 0` with `x` over `Z/m`, by the Chinese
/// remainder theorem over the prime powers of `m`.
pub fn kernel_size(rows: &[Vec<i64>], nvars: usize, m: u64) -> u128 {
    prime_powers(m)
        .into_iter()
        .map(|(p, k)| (p as u128).pow(kernel_exponent_local(rows, nvars, p, k)))
        .product()
}

/// Linear conditions on normalized symmetric 2-cochains `Q x Q -> Z` whose
/// solutions mod `p` are the cocycles with values in `Z/p`.
fn cocycle_system(q: &Grp) -> (Vec<Vec<i64>>, usize) {
    let n = q.order();
    let mut var = vec![vec![usize::MAX; n]; n];
    let mut nvars = 0;
    for a in 1..n {
        for b in a..n {
            var[a][b] = nvars;
            var[b][a] = nvars;
            nvars += 1;
        }
    }
    let mut rows = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut row = vec![0i64; nvars];
                let mut put = |x: usize, y: usize, s: i64| {
                    if x != 0 && y != 0 {
                        row[var[x][y]] += s;
                    }
                };
                put(a, b, 1);
                put(q.add(a, b), c, 1);
                put(b, c, -1);
                put(a, q.add(b, c), -1);
                rows.push(row);
            }
        }
    }
    (rows, nvars)
}

/// Linear conditions `h(a + b) = h(a) + h(b)` on `h` with `h(0) = 0`.
fn hom_system(q: &Grp) -> (Vec<Vec<i64>>, usize) {
    let n = q.order();
    let nvars = n.saturating_sub(1);
    let mut rows = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let mut row = vec![0i64; nvars];
            let mut put = |x: usize, s: i64| {
                if x != 0 {
                    row[x - 1] += s;
                }
            };
            put(q.add(a, b), 1);
            put(a, -1);
            put(b, -1);
            rows.push(row);
        }
    }
    (rows, nvars)
}

pub fn cocycle_count(q: &[usize], p: &[usize]) -> u128 {
    let (rows, nvars) = cocycle_system(&Grp::new(q));
    p.iter().map(|&m| kernel_size(&rows, nvars, m as u64)).product()
}

pub fn hom_count(q: &[usize], p: &[usize]) -> u128 {
    let (rows, nvars) = hom_system(&Grp::new(q));
    p.iter().map(|&m| kernel_size(&rows, nvars, m as u64)).product()
}

/// `|Z^2| / |B^2|` with `|B^2| = |C^1| / |Hom|`.
pub fn ext1_count(q: &[usize], p: &[usize]) -> u128 {
    let cochains = (p.iter().product::<usize>() as u128).pow(Grp::new(q).order() as u32 - 1);
    let num = cocycle_count(q, p) * hom_count(q, p);
    assert_eq!(num % cochains, 0);
    num / cochains
}

/// `prod_i |P / m_i P|`.
pub fn gcd_formula(q: &[usize], p: &[usize]) -> u128 {
    q.iter()
        .flat_map(|&m| p.iter().map(move |&n| m.gcd(&n) as u128))
        .product()
}

/// Literal count for tiny groups: every normalized symmetric table is tested
/// for the cocycle identity, and coboundaries are collected from every `h`.
pub fn literal_ext1_count(q: &[usize], p: &[usize]) -> usize {
    let (qg, pg) = (Grp::new(q), Grp::new(p));
    let (n, np) = (qg.order(), pg.order());
    let pairs: Vec<(usize, usize)> = (1..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let table = |assign: &[usize]| {
        let mut t = vec![0usize; n * n];
        for (&(a, b), &v) in pairs.iter().zip(assign) {
            t[a * n + b] = v;
            t[b * n + a] = v;
        }
        t
    };
    let is_cocycle = |t: &[usize]| {
        (0..n).all(|a| {
            (0..n).all(|b| {
                (0..n).all(|c| {
                    pg.add(t[a * n + b], t[qg.add(a, b) * n + c])
                        == pg.add(t[b * n + c], t[a * n + qg.add(b, c)])
                })
            })
        })
    };
    let mut cocycles = 0usize;
    let mut assign = vec![0usize; pairs.len()];
    loop {
        if is_cocycle(&table(&assign)) {
            cocycles += 1;
        }
        if !odometer(&mut assign, np) {
            break;
        }
    }
    let mut boundaries = std::collections::HashSet::new();
    let mut h = vec![0usize; n.saturating_sub(1)];
    loop {
        let hv = |x: usize| if x == 0 { 0 } else { h[x - 1] };
        let t: Vec<usize> = (0..n * n)
            .map(|i| {
                let (a, b) = (i / n, i % n);
                pg.sub(pg.add(hv(a), hv(b)), hv(qg.add(a, b)))
            })
            .collect();
        boundaries.insert(t);
        if !odometer(&mut h, np) {
            break;
        }
    }
    assert_eq!(cocycles % boundaries.len(), 0);
    cocycles / boundaries.len()
}

fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// `sum_k f(k e_i, e_i)` reduced modulo `m_i P`, per cyclic factor of `Q`.
/// `f` is given as a function on element indices.
pub fn transgression(q: &[usize], p: &[usize], f: impl Fn(usize, usize) -> usize) -> Vec<Vec<usize>> {
    let (qg, pg) = (Grp::new(q), Grp::new(p));
    (0..q.len())
        .map(|i| {
            let g = qg.unit(i);
            let mut acc = 0;
            let mut x = 0;
            for _ in 0..q[i] {
                acc = pg.add(acc, f(x, g));
                x = qg.add(x, g);
            }
            pg.coords(acc)
                .iter()
                .zip(p)
                .map(|(&c, &n)| c % q[i].gcd(&n))
                .collect()
        })
        .collect()
}

/// Rank over the rationals by cross-multiplied elimination with content
/// removal.
pub fn rational_rank(m: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in 0..a.len() {
            if i == rank || a[i][c].is_zero() {
                continue;
            }
            let (pv, f) = (a[rank][c].clone(), a[i][c].clone());
            let row: Vec<BigInt> = (0..cols).map(|j| &a[i][j] * &pv - &a[rank][j] * &f).collect();
            a[i] = primitive(row);
        }
        rank += 1;
    }
    rank
}

fn primitive(row: Vec<BigInt>) -> Vec<BigInt> {
    let g = row.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        row
    } else {
        row.into_iter().map(|x| x / &g).collect()
    }
}

/// Positive definiteness through symmetric Gaussian elimination in the given
/// order: every pivot of the `LDL^T` factorization must be positive.
pub fn ldl_positive_definite(m: &[Vec<i64>]) -> bool {
    let n = m.len();
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    for k in 0..n {
        if !a[k][k].is_positive() {
            return false;
        }
        for i in k + 1..n {
            let (pv, f) = (a[k][k].clone(), a[i][k].clone());
            let row: Vec<BigInt> = (0..n).map(|j| &a[i][j] * &pv - &a[k][j] * &f).collect();
            a[i] = primitive(row);
        }
    }
    true
}

/// `sum_e c1[e] c2[e] len[e]` for scalar lengths.
pub fn scalar_edge_pairing(c1: &[i64], c2: &[i64], len: &[i64]) -> i64 {
    c1.iter().zip(c2).zip(len).map(|((a, b), l)| a * b * l).sum()
}
