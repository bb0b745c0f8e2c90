//! Extensions and variegated extensions of finite abelian groups, by explicit
//! normalized symmetric 2-cocycles.
//!
//! Given `E ∈ Ext¹(Q, R)` and `F ∈ Ext¹(R, P)`, a variegated extension is an
//! extension `W` of `Q` by the group `F_grp` underlying `F` whose pushforward
//! along `F_grp -> R` is `E`. Two of them are isomorphic when they are
//! isomorphic as extensions of `Q` by `F_grp`. The classes form a set on which
//! `Ext¹(Q, P)` acts transitively, with stabilizer the image of the connecting
//! map `Hom(Q, R) -> Ext¹(Q, P)` of `F`.
//!
//! Groups are small, so every element is an index into an addition table and
//! every cohomology question is settled by exhaustive search.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest group order accepted by [`ext1_classes`].
pub const EXT1_BUDGET: usize = 12;
/// Largest order of `P`, `Q` or `R` accepted by the variegated operations.
pub const EXTPAN_BUDGET: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtError {
    #[error("budget exceeded: {what} has order {order}, limit is {limit}")]
    Budget {
        what: &'static str,
        order: usize,
        limit: usize,
    },
    #[error("invalid group spec {spec:?}: {reason}")]
    GroupSpec { spec: String, reason: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("not a normalized symmetric cocycle: {0}")]
    InvalidCocycle(String),
    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("variegated extensions lie over different (E, F)")]
    FiberMismatch,
    #[error("{0}")]
    Parse(String),
}

/// `⊕ Z/m_i`; elements are indices in lexicographic order of coordinate
/// tuples, first factor most significant. Index 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinAbGroup {
    factors: Vec<usize>,
}

impl FinAbGroup {
    pub fn new(factors: Vec<usize>) -> Result<Self, ExtError> {
        if let Some(&m) = factors.iter().find(|&&m| m < 2) {
            return Err(ExtError::GroupSpec {
                spec: format!("{factors:?}"),
                reason: format!("factor {m} is less than 2"),
            });
        }
        Ok(FinAbGroup { factors })
    }

    pub fn trivial() -> Self {
        FinAbGroup { factors: vec![] }
    }

    pub fn cyclic(m: usize) -> Self {
        Self::new(vec![m]).expect("m >= 2")
    }

    /// Parses `"2,4"` as `Z/2 ⊕ Z/4`; `""` and `"trivial"` give the trivial group.
    pub fn parse(spec: &str) -> Result<Self, ExtError> {
        let s = spec.trim();
        if s.is_empty() || s == "trivial" {
            return Ok(Self::trivial());
        }
        let factors = s
            .split(',')
            .map(|part| {
                part.trim().parse::<usize>().map_err(|_| ExtError::GroupSpec {
                    spec: spec.into(),
                    reason: format!("{part:?} is not a nonnegative integer"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(factors).map_err(|_| ExtError::GroupSpec {
            spec: spec.into(),
            reason: "every factor must be at least 2".into(),
        })
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn coords(&self, mut x: usize) -> Vec<usize> {
        let mut c = vec![0; self.factors.len()];
        for (slot, &m) in c.iter_mut().zip(&self.factors).rev() {
            *slot = x % m;
            x /= m;
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&c, &m)| acc * m + c % m)
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

    /// The unit vectors `e_i`.
    pub fn generators(&self) -> Vec<usize> {
        (0..self.factors.len())
            .map(|i| {
                let mut c = vec![0; self.factors.len()];
                c[i] = 1;
                self.index(&c)
            })
            .collect()
    }

    pub fn table(&self) -> GroupTable {
        let n = self.order();
        let mut add = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                add.push(self.add(a, b));
            }
        }
        GroupTable::from_add(n, add)
    }

    /// Canonical representatives of `G / mG`: coordinates below `gcd(m, m_j)`.
    pub fn quotient_reps(&self, m: usize) -> Vec<usize> {
        let bounds: Vec<usize> = self.factors.iter().map(|&f| f.gcd(&m)).collect();
        let count: usize = bounds.iter().product();
        (0..count)
            .map(|mut k| {
                let mut c = vec![0; bounds.len()];
                for (slot, &b) in c.iter_mut().zip(&bounds).rev() {
                    *slot = k % b;
                    k /= b;
                }
                self.index(&c)
            })
            .collect()
    }

    /// Canonical representative of `x + mG`.
    pub fn reduce_mod_multiple(&self, x: usize, m: usize) -> usize {
        let c: Vec<usize> = self
            .coords(x)
            .iter()
            .zip(&self.factors)
            .map(|(&xi, &f)| xi % f.gcd(&m))
            .collect();
        self.index(&c)
    }
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.factors.iter().map(|m| format!("Z/{m}")).collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// Finite abelian group given by its addition table; element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupTable {
    order: usize,
    add: Vec<usize>,
    neg: Vec<usize>,
}

impl GroupTable {
    fn from_add(order: usize, add: Vec<usize>) -> Self {
        let neg = (0..order)
            .map(|a| {
                (0..order)
                    .find(|&b| add[a * order + b] == 0)
                    .expect("every element has an inverse")
            })
            .collect();
        GroupTable { order, add, neg }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.order + b]
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        self.neg[a]
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn times(&self, k: usize, a: usize) -> usize {
        (0..k).fold(0, |acc, _| self.add(acc, a))
    }

    pub fn is_homomorphism(&self, target: &GroupTable, map: &[usize]) -> bool {
        map.len() == self.order
            && map.first() == Some(&0)
            && (0..self.order).all(|a| {
                (0..self.order).all(|b| map[self.add(a, b)] == target.add(map[a], map[b]))
            })
    }

    /// Extension group of `q` by `self` with addition
    /// `(x, a) + (y, b) = (x + y + f(a, b), a + b)`; `(x, a)` has index
    /// `a * |self| + x`.
    pub fn extension(&self, f: &Cocycle) -> GroupTable {
        assert_eq!(&f.target, self, "cocycle values must lie in this group");
        let (n, q) = (self.order, f.source.order());
        let qt = f.source.table();
        let size = n * q;
        let mut add = Vec::with_capacity(size * size);
        for left in 0..size {
            let (a, x) = (left / n, left % n);
            for right in 0..size {
                let (b, y) = (right / n, right % n);
                let fiber = self.add(self.add(x, y), f.get(a, b));
                add.push(qt.add(a, b) * n + fiber);
            }
        }
        GroupTable::from_add(size, add)
    }
}

/// Normalized symmetric 2-cocycle `f : Q x Q -> T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cocycle {
    source: FinAbGroup,
    target: GroupTable,
    values: Vec<usize>,
}

impl Cocycle {
    /// Builds and exhaustively checks a cocycle table (`values[a * |Q| + b]`).
    pub fn new(source: FinAbGroup, target: GroupTable, values: Vec<usize>) -> Result<Self, ExtError> {
        let n = source.order();
        if values.len() != n * n {
            return Err(ExtError::Shape(format!(
                "cocycle table has {} entries, expected {}",
                values.len(),
                n * n
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v >= target.order()) {
            return Err(ExtError::Shape(format!("value {v} outside the target group")));
        }
        let c = Cocycle {
            source,
            target,
            values,
        };
        c.check()?;
        Ok(c)
    }

    pub fn zero(source: FinAbGroup, target: GroupTable) -> Self {
        let n = source.order();
        Cocycle {
            source,
            target,
            values: vec![0; n * n],
        }
    }

    /// `(δh)(a, b) = h(a) + h(b) - h(a + b)`.
    pub fn coboundary(source: FinAbGroup, target: GroupTable, h: &[usize]) -> Self {
        let n = source.order();
        let qt = source.table();
        let mut values = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                values.push(target.sub(target.add(h[a], h[b]), h[qt.add(a, b)]));
            }
        }
        Cocycle {
            source,
            target,
            values,
        }
    }

    /// `sum_i carry(a_i, b_i) * coeffs[i]`, with `carry = 1` exactly when
    /// `a_i + b_i >= m_i`.
    pub fn carry(source: FinAbGroup, target: GroupTable, coeffs: &[usize]) -> Self {
        assert_eq!(coeffs.len(), source.factors().len());
        let n = source.order();
        let mut values = Vec::with_capacity(n * n);
        for a in 0..n {
            let ca = source.coords(a);
            for b in 0..n {
                let cb = source.coords(b);
                let mut v = 0;
                for (i, &m) in source.factors().iter().enumerate() {
                    if ca[i] + cb[i] >= m {
                        v = target.add(v, coeffs[i]);
                    }
                }
                values.push(v);
            }
        }
        Cocycle {
            source,
            target,
            values,
        }
    }

    pub fn source(&self) -> &FinAbGroup {
        &self.source
    }

    pub fn target(&self) -> &GroupTable {
        &self.target
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> usize {
        self.values[a * self.source.order() + b]
    }

    /// Normalization, symmetry and the cocycle identity over all triples.
    pub fn check(&self) -> Result<(), ExtError> {
        let n = self.source.order();
        let qt = self.source.table();
        let t = &self.target;
        for a in 0..n {
            if self.get(0, a) != 0 || self.get(a, 0) != 0 {
                return Err(ExtError::InvalidCocycle(format!("f(0,{a}) or f({a},0) is nonzero")));
            }
            for b in 0..a {
                if self.get(a, b) != self.get(b, a) {
                    return Err(ExtError::InvalidCocycle(format!("f({a},{b}) != f({b},{a})")));
                }
            }
        }
        for a in 1..n {
            for b in 1..n {
                let ab = qt.add(a, b);
                for c in 1..n {
                    let lhs = t.add(self.get(a, b), self.get(ab, c));
                    let rhs = t.add(self.get(b, c), self.get(a, qt.add(b, c)));
                    if lhs != rhs {
                        return Err(ExtError::InvalidCocycle(format!(
                            "identity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn same_shape(&self, other: &Cocycle) -> Result<(), ExtError> {
        if self.source != other.source || self.target != other.target {
            return Err(ExtError::Shape("cocycles on different groups".into()));
        }
        Ok(())
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Cocycle) -> Result<Cocycle, ExtError> {
        self.same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| self.target.add(x, y))
            .collect();
        Ok(Cocycle {
            values,
            ..self.clone()
        })
    }

    pub fn neg(&self) -> Cocycle {
        Cocycle {
            values: self.values.iter().map(|&x| self.target.neg(x)).collect(),
            ..self.clone()
        }
    }

    /// Composite with a homomorphism of value groups.
    pub fn push(&self, target: &GroupTable, map: &[usize]) -> Result<Cocycle, ExtError> {
        if !self.target.is_homomorphism(target, map) {
            return Err(ExtError::NotHomomorphism("pushforward map".into()));
        }
        Ok(Cocycle {
            source: self.source.clone(),
            target: target.clone(),
            values: self.values.iter().map(|&x| map[x]).collect(),
        })
    }

    /// Exhaustive search for `h : Q -> T`, `h(0) = 0`, with `self - other = δh`.
    ///
    /// `h` is pinned down by its values on the generators of `Q` through
    /// `h(a + g) = h(a) + h(g) - d(a, g)`, so the search enumerates generator
    /// values one at a time, propagates, and prunes on the first conflict.
    pub fn cobounding_function(&self, other: &Cocycle) -> Result<Option<Vec<usize>>, ExtError> {
        self.same_shape(other)?;
        let n = self.source.order();
        let t = &self.target;
        let d: Vec<usize> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| t.sub(x, y))
            .collect();
        let search = CoboundarySearch {
            n,
            qt: self.source.table(),
            gens: self.source.generators(),
            t,
            d: &d,
        };
        let mut h = vec![None; n];
        h[0] = Some(0);
        Ok(search.run(0, &mut h))
    }

    pub fn is_cohomologous(&self, other: &Cocycle) -> Result<bool, ExtError> {
        Ok(self.cobounding_function(other)?.is_some())
    }
}

struct CoboundarySearch<'a> {
    n: usize,
    qt: GroupTable,
    gens: Vec<usize>,
    t: &'a GroupTable,
    d: &'a [usize],
}

impl CoboundarySearch<'_> {
    fn run(&self, level: usize, h: &mut [Option<usize>]) -> Option<Vec<usize>> {
        if level == self.gens.len() {
            let h: Vec<usize> = h.iter().map(|v| v.expect("subgroup is all of Q")).collect();
            let ok = (0..self.n).all(|a| {
                (0..self.n).all(|b| {
                    let delta = self.t.sub(self.t.add(h[a], h[b]), h[self.qt.add(a, b)]);
                    delta == self.d[a * self.n + b]
                })
            });
            return ok.then_some(h);
        }
        let g = self.gens[level];
        for v in 0..self.t.order() {
            let mut trial = h.to_vec();
            if self.propagate(level, g, v, &mut trial) {
                if let Some(found) = self.run(level + 1, &mut trial) {
                    return Some(found);
                }
            }
        }
        None
    }

    /// Sets `h(g) = v` and closes the known set under generators `0..=level`.
    fn propagate(&self, level: usize, g: usize, v: usize, h: &mut [Option<usize>]) -> bool {
        if h[g].is_some_and(|old| old != v) {
            return false;
        }
        h[g] = Some(v);
        let mut frontier: Vec<usize> = (0..self.n).filter(|&a| h[a].is_some()).collect();
        while let Some(a) = frontier.pop() {
            let ha = h[a].expect("known");
            for &gen in &self.gens[..=level] {
                let hg = h[gen].expect("earlier generators are known");
                let next = self.qt.add(a, gen);
                let val = self.t.sub(self.t.add(ha, hg), self.d[a * self.n + gen]);
                match h[next] {
                    Some(existing) if existing != val => return false,
                    Some(_) => {}
                    None => {
                        h[next] = Some(val);
                        frontier.push(next);
                    }
                }
            }
        }
        true
    }
}

/// A class in `Ext¹(Q, P)` represented by a cocycle; equality is cohomology.
#[derive(Clone, Debug)]
pub struct ExtClass {
    q: FinAbGroup,
    p: FinAbGroup,
    cocycle: Cocycle,
}

impl ExtClass {
    pub fn new(q: FinAbGroup, p: FinAbGroup, cocycle: Cocycle) -> Result<Self, ExtError> {
        if cocycle.source != q || cocycle.target != p.table() {
            return Err(ExtError::Shape(format!("cocycle is not on ({q}, {p})")));
        }
        Ok(ExtClass { q, p, cocycle })
    }

    pub fn split(q: FinAbGroup, p: FinAbGroup) -> Self {
        let cocycle = Cocycle::zero(q.clone(), p.table());
        ExtClass { q, p, cocycle }
    }

    /// The carry cocycle with coefficients `coeffs[i] ∈ P` on `Z/m_i`.
    pub fn carry(q: FinAbGroup, p: FinAbGroup, coeffs: &[usize]) -> Self {
        let cocycle = Cocycle::carry(q.clone(), p.table(), coeffs);
        ExtClass { q, p, cocycle }
    }

    pub fn q(&self) -> &FinAbGroup {
        &self.q
    }

    pub fn p(&self) -> &FinAbGroup {
        &self.p
    }

    pub fn cocycle(&self) -> &Cocycle {
        &self.cocycle
    }

    fn same_groups(&self, other: &ExtClass) -> Result<(), ExtError> {
        if self.q != other.q || self.p != other.p {
            return Err(ExtError::Shape(format!(
                "Ext¹({}, {}) against Ext¹({}, {})",
                self.q, self.p, other.q, other.p
            )));
        }
        Ok(())
    }

    pub fn cohomologous(&self, other: &ExtClass) -> Result<bool, ExtError> {
        self.same_groups(other)?;
        self.cocycle.is_cohomologous(&other.cocycle)
    }

    pub fn is_split(&self) -> bool {
        self.cocycle
            .is_cohomologous(&Cocycle::zero(self.q.clone(), self.cocycle.target.clone()))
            .expect("same shape")
    }

    pub fn negate(&self) -> ExtClass {
        ExtClass {
            cocycle: self.cocycle.neg(),
            ..self.clone()
        }
    }

    /// Transgression along each cyclic generator: `sum_k f(k e_i, e_i)` taken
    /// modulo `m_i P`. A complete invariant of the class, computed without
    /// any coboundary search.
    pub fn invariant(&self) -> Vec<usize> {
        let qt = self.q.table();
        let pt = &self.cocycle.target;
        self.q
            .generators()
            .iter()
            .zip(self.q.factors())
            .map(|(&g, &m)| {
                let mut acc = 0;
                let mut x = 0;
                for _ in 0..m {
                    acc = pt.add(acc, self.cocycle.get(x, g));
                    x = qt.add(x, g);
                }
                self.p.reduce_mod_multiple(acc, m)
            })
            .collect()
    }

    /// Group of the extension, elements `(p, q)` at index `q * |P| + p`.
    pub fn group(&self) -> GroupTable {
        self.p.table().extension(&self.cocycle)
    }
}

/// Baer sum: pointwise sum of cocycles.
pub fn baer_sum(x: &ExtClass, y: &ExtClass) -> Result<ExtClass, ExtError> {
    x.same_groups(y)?;
    Ok(ExtClass {
        cocycle: x.cocycle.add(&y.cocycle)?,
        ..x.clone()
    })
}

fn check_budget(what: &'static str, g: &FinAbGroup, limit: usize) -> Result<(), ExtError> {
    let order = g.order();
    if order > limit {
        return Err(ExtError::Budget { what, order, limit });
    }
    Ok(())
}

/// One carry-cocycle representative per class of `Ext¹(Q, P)`, the split
/// class first; there are `prod_i |P / m_i P|` of them.
pub fn ext1_classes(q: &FinAbGroup, p: &FinAbGroup) -> Result<Vec<ExtClass>, ExtError> {
    check_budget("Q", q, EXT1_BUDGET)?;
    check_budget("P", p, EXT1_BUDGET)?;
    let reps: Vec<Vec<usize>> = q.factors().iter().map(|&m| p.quotient_reps(m)).collect();
    let mut out = Vec::new();
    let mut coeffs = vec![0; reps.len()];
    let mut idx = vec![0; reps.len()];
    loop {
        for (i, &k) in idx.iter().enumerate() {
            coeffs[i] = reps[i][k];
        }
        out.push(ExtClass::carry(q.clone(), p.clone(), &coeffs));
        // Odometer over the per-factor representative lists.
        let mut pos = reps.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < reps[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Index of the class of `x` in `classes`, by coboundary search.
pub fn class_index(classes: &[ExtClass], x: &ExtClass) -> Result<Option<usize>, ExtError> {
    for (i, c) in classes.iter().enumerate() {
        if c.cohomologous(x)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// All homomorphisms `Q -> R`, as element maps.
pub fn homomorphisms(q: &FinAbGroup, r: &FinAbGroup) -> Vec<Vec<usize>> {
    let rt = r.table();
    let qt = q.table();
    let choices: Vec<Vec<usize>> = q
        .factors()
        .iter()
        .map(|&m| (0..r.order()).filter(|&x| rt.times(m, x) == 0).collect())
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0; choices.len()];
    loop {
        let images: Vec<usize> = idx.iter().zip(&choices).map(|(&k, c)| c[k]).collect();
        let map: Vec<usize> = (0..q.order())
            .map(|a| {
                q.coords(a)
                    .iter()
                    .zip(&images)
                    .fold(0, |acc, (&c, &img)| rt.add(acc, rt.times(c, img)))
            })
            .collect();
        debug_assert!(qt.is_homomorphism(&rt, &map));
        out.push(map);
        let mut pos = choices.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < choices[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// The group underlying `F ∈ Ext¹(R, P)`: pairs `(r, p)` at index
/// `r * |P| + p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedGroup {
    pub r: FinAbGroup,
    pub p: FinAbGroup,
    pub table: GroupTable,
}

impl TwistedGroup {
    pub fn of(f: &ExtClass) -> Self {
        TwistedGroup {
            r: f.q.clone(),
            p: f.p.clone(),
            table: f.group(),
        }
    }

    pub fn order(&self) -> usize {
        self.table.order()
    }

    pub fn projection(&self) -> Vec<usize> {
        let np = self.p.order();
        (0..self.order()).map(|x| x / np).collect()
    }

    pub fn inclusion(&self) -> Vec<usize> {
        (0..self.p.order()).collect()
    }

    /// Set-theoretic section `r |-> (r, 0)`.
    pub fn lift(&self, r: usize) -> usize {
        r * self.p.order()
    }
}

/// Pushforward of a cocycle with values in `F_grp` along the projection to `R`.
pub fn pushforward(w: &Cocycle, f_grp: &TwistedGroup) -> Result<ExtClass, ExtError> {
    let r = f_grp.r.clone();
    let pushed = w.push(&r.table(), &f_grp.projection())?;
    ExtClass::new(w.source.clone(), r, pushed)
}

/// Variegated extension of `E ∈ Ext¹(Q, R)` by `F ∈ Ext¹(R, P)`, stored as a
/// cocycle `w : Q x Q -> F_grp` whose projection to `R` equals `E`'s cocycle
/// on the nose.
#[derive(Clone, Debug)]
pub struct VariegatedClass {
    e: ExtClass,
    f: ExtClass,
    f_grp: TwistedGroup,
    w: Cocycle,
}

impl VariegatedClass {
    /// Accepts any `w` whose pushforward is cohomologous to `E`, and
    /// normalizes it so the pushforward is `E`'s cocycle exactly.
    pub fn from_cocycle(e: &ExtClass, f: &ExtClass, w: Cocycle) -> Result<Self, ExtError> {
        check_shapes(e, f)?;
        let f_grp = TwistedGroup::of(f);
        if w.source != e.q || w.target != f_grp.table {
            return Err(ExtError::Shape("W is not a cocycle on (Q, F_grp)".into()));
        }
        w.check()?;
        let pushed = pushforward(&w, &f_grp)?;
        let h = e
            .cocycle
            .cobounding_function(&pushed.cocycle)?
            .ok_or_else(|| ExtError::InvalidCocycle("pushforward of W is not E".into()))?;
        // w + δ(lift ∘ h) projects to pushed + δh = e.
        let lifted: Vec<usize> = h.iter().map(|&x| f_grp.lift(x)).collect();
        let correction = Cocycle::coboundary(e.q.clone(), f_grp.table.clone(), &lifted);
        let w = w.add(&correction)?;
        debug_assert_eq!(pushforward(&w, &f_grp)?.cocycle, e.cocycle);
        Ok(VariegatedClass {
            e: e.clone(),
            f: f.clone(),
            f_grp,
            w,
        })
    }

    pub fn e(&self) -> &ExtClass {
        &self.e
    }

    pub fn f(&self) -> &ExtClass {
        &self.f
    }

    pub fn f_group(&self) -> &TwistedGroup {
        &self.f_grp
    }

    pub fn cocycle(&self) -> &Cocycle {
        &self.w
    }

    /// Order of the total group `W`.
    pub fn order(&self) -> usize {
        self.f_grp.order() * self.e.q.order()
    }

    pub fn pushforward(&self) -> ExtClass {
        pushforward(&self.w, &self.f_grp).expect("projection is a homomorphism")
    }

    /// Isomorphic as extensions of `Q` by `F_grp`.
    pub fn is_isomorphic(&self, other: &VariegatedClass) -> Result<bool, ExtError> {
        if self.f.cocycle != other.f.cocycle || self.e.q != other.e.q {
            return Err(ExtError::FiberMismatch);
        }
        self.w.is_cohomologous(&other.w)
    }

    fn same_fiber(&self, other: &VariegatedClass) -> Result<(), ExtError> {
        if self.e.cocycle != other.e.cocycle || self.f.cocycle != other.f.cocycle {
            return Err(ExtError::FiberMismatch);
        }
        Ok(())
    }

    /// Explicit butterfly: `W` with its maps from `P` and `F` and to `E` and `Q`.
    pub fn butterfly(&self) -> Butterfly {
        let nf = self.f_grp.order();
        let nq = self.e.q.order();
        let nr = self.e.p.order();
        let np = self.f.p.order();
        let w_group = self.f_grp.table.extension(&self.w);
        let e_group = self.e.group();
        Butterfly {
            p_group: self.f.p.table(),
            f_group: self.f_grp.table.clone(),
            w_group,
            e_group,
            q_group: self.e.q.table(),
            p_to_w: (0..np).collect(),
            f_to_w: (0..nf).collect(),
            w_to_e: (0..nf * nq).map(|x| (x / nf) * nr + (x % nf) / np).collect(),
            w_to_q: (0..nf * nq).map(|x| x / nf).collect(),
            f_to_e: (0..nf).map(|x| x / np).collect(),
        }
    }
}

fn check_shapes(e: &ExtClass, f: &ExtClass) -> Result<(), ExtError> {
    if e.p != f.q {
        return Err(ExtError::Shape(format!(
            "E is an extension by {} but F is an extension of {}",
            e.p, f.q
        )));
    }
    Ok(())
}

/// Witness that `W` splits `0 -> P -> F -> E -> Q -> 0`: the diagonals
/// `0 -> F -> W -> Q -> 0` and `0 -> P -> W -> E -> 0` are exact, and
/// `F -> W -> E` equals `F -> R -> E`.
#[derive(Clone, Debug)]
pub struct Butterfly {
    pub p_group: GroupTable,
    pub f_group: GroupTable,
    pub w_group: GroupTable,
    pub e_group: GroupTable,
    pub q_group: GroupTable,
    pub p_to_w: Vec<usize>,
    pub f_to_w: Vec<usize>,
    pub w_to_e: Vec<usize>,
    pub w_to_q: Vec<usize>,
    /// `F -> R -> E` with `R -> E` the inclusion `r |-> (r, 0)`.
    pub f_to_e: Vec<usize>,
}

impl Butterfly {
    pub fn verify(&self) -> Result<(), ExtError> {
        let homs = [
            ("P -> W", &self.p_group, &self.w_group, &self.p_to_w),
            ("F -> W", &self.f_group, &self.w_group, &self.f_to_w),
            ("W -> E", &self.w_group, &self.e_group, &self.w_to_e),
            ("W -> Q", &self.w_group, &self.q_group, &self.w_to_q),
            ("F -> E", &self.f_group, &self.e_group, &self.f_to_e),
        ];
        for (name, s, t, m) in homs {
            if !s.is_homomorphism(t, m) {
                return Err(ExtError::NotHomomorphism(name.into()));
            }
        }
        exact_short(&self.f_to_w, &self.w_to_q, self.w_group.order(), self.q_group.order())
            .map_err(|e| ExtError::InvalidCocycle(format!("0 -> F -> W -> Q -> 0: {e}")))?;
        exact_short(&self.p_to_w, &self.w_to_e, self.w_group.order(), self.e_group.order())
            .map_err(|e| ExtError::InvalidCocycle(format!("0 -> P -> W -> E -> 0: {e}")))?;
        let commutes = (0..self.f_group.order())
            .all(|x| self.w_to_e[self.f_to_w[x]] == self.f_to_e[x]);
        if !commutes {
            return Err(ExtError::InvalidCocycle("F -> W -> E differs from F -> R -> E".into()));
        }
        Ok(())
    }
}

fn exact_short(inj: &[usize], surj: &[usize], middle: usize, quotient: usize) -> Result<(), String> {
    let mut image = vec![false; middle];
    for &x in inj {
        if image[x] {
            return Err("first map is not injective".into());
        }
        image[x] = true;
    }
    let mut hit = vec![false; quotient];
    for &y in surj {
        hit[y] = true;
    }
    if hit.iter().any(|h| !h) {
        return Err("second map is not surjective".into());
    }
    for (x, &in_image) in image.iter().enumerate() {
        if in_image != (surj[x] == 0) {
            return Err("image differs from kernel".into());
        }
    }
    Ok(())
}

/// `W + x`: pull back `W ⊕ X` along the diagonal of `Q` and push out along
/// the codiagonal of `P`. On cocycles, `w + ι∘x`.
pub fn act(w: &VariegatedClass, x: &ExtClass) -> Result<VariegatedClass, ExtError> {
    if x.q != w.e.q || x.p != w.f.p {
        return Err(ExtError::Shape(format!(
            "Ext¹({}, {}) cannot act on extensions of {} by {}",
            x.q, x.p, w.e.q, w.f.p
        )));
    }
    let incl = w.f_grp.inclusion();
    let pushed = x.cocycle.push(&w.f_grp.table, &incl)?;
    Ok(VariegatedClass {
        w: w.w.add(&pushed)?,
        ..w.clone()
    })
}

/// `W' - W`: pull back `W ⊕ W'` along the diagonal of `E`, then push out
/// along the difference map `P ⊕ P -> P`. On cocycles, `w' - w`, which takes
/// values in `P`.
pub fn difference(w: &VariegatedClass, w2: &VariegatedClass) -> Result<ExtClass, ExtError> {
    w.same_fiber(w2)?;
    let t = &w.f_grp.table;
    let np = w.f.p.order();
    let values = w2
        .w
        .values
        .iter()
        .zip(&w.w.values)
        .map(|(&b, &a)| {
            let d = t.sub(b, a);
            // Same projection to R, so the difference lies in P = {(0, p)}.
            debug_assert!(d < np);
            d
        })
        .collect();
    let p = w.f.p.clone();
    let cocycle = Cocycle {
        source: w.e.q.clone(),
        target: p.table(),
        values,
    };
    ExtClass::new(w.e.q.clone(), p, cocycle)
}

/// Isomorphism classes of variegated extensions of `E` by `F`, with the
/// classes built by acting with `Ext¹(Q, P)` on one lift of `E`.
pub fn extpan_fiber(e: &ExtClass, f: &ExtClass) -> Result<Vec<VariegatedClass>, ExtError> {
    check_shapes(e, f)?;
    check_budget("Q", &e.q, EXTPAN_BUDGET)?;
    check_budget("R", &e.p, EXTPAN_BUDGET)?;
    check_budget("P", &f.p, EXTPAN_BUDGET)?;
    let base = lift(e, f)?;
    let mut fiber: Vec<VariegatedClass> = Vec::new();
    for x in ext1_classes(&e.q, &f.p)? {
        let cand = act(&base, &x)?;
        let mut known = false;
        for existing in &fiber {
            if existing.is_isomorphic(&cand)? {
                known = true;
                break;
            }
        }
        if !known {
            fiber.push(cand);
        }
    }
    Ok(fiber)
}

/// One variegated extension over `(E, F)`: take the carry representative of
/// `E`'s class, lift its coefficients through `r |-> (r, 0)` into `F_grp`, and
/// correct by a coboundary so the projection is `E` exactly.
fn lift(e: &ExtClass, f: &ExtClass) -> Result<VariegatedClass, ExtError> {
    let f_grp = TwistedGroup::of(f);
    for rep in ext1_classes(&e.q, &e.p)? {
        if !rep.cohomologous(e)? {
            continue;
        }
        // Recover the carry coefficients of this representative.
        let coeffs: Vec<usize> = e
            .q
            .generators()
            .iter()
            .zip(e.q.factors())
            .map(|(&g, &m)| {
                // f(e_i * (m-1), e_i) is the only carrying pair along e_i.
                let last = (0..m - 1).fold(0, |acc, _| e.q.add(acc, g));
                rep.cocycle.get(last, g)
            })
            .collect();
        let lifted: Vec<usize> = coeffs.iter().map(|&c| f_grp.lift(c)).collect();
        let w = Cocycle::carry(e.q.clone(), f_grp.table.clone(), &lifted);
        return VariegatedClass::from_cocycle(e, f, w);
    }
    Err(ExtError::InvalidCocycle("E matches no carry representative".into()))
}

/// Counts behind the torsor structure of a fiber.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsorReport {
    pub fiber_size: usize,
    pub ext1_order: usize,
    pub stabilizer_order: usize,
    pub transitive: bool,
    pub section_ok: bool,
    #[serde(skip)]
    pub connecting_image_order: usize,
    #[serde(skip)]
    pub stabilizer_is_connecting_image: bool,
}

impl TorsorReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Every structural check passed.
    pub fn all_ok(&self) -> bool {
        self.fiber_size > 0
            && self.transitive
            && self.section_ok
            && self.stabilizer_is_connecting_image
            && self.fiber_size * self.stabilizer_order == self.ext1_order
    }
}

/// Image of `h |-> h^*F` from `Hom(Q, R)` into `Ext¹(Q, P)`, as indices into
/// `classes`.
pub fn connecting_image(
    q: &FinAbGroup,
    f: &ExtClass,
    classes: &[ExtClass],
) -> Result<Vec<usize>, ExtError> {
    let mut image = Vec::new();
    for h in homomorphisms(q, &f.q) {
        let n = q.order();
        let values = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .map(|(a, b)| f.cocycle.get(h[a], h[b]))
            .collect();
        let pulled = ExtClass::new(
            q.clone(),
            f.p.clone(),
            Cocycle {
                source: q.clone(),
                target: f.p.table(),
                values,
            },
        )?;
        let idx = class_index(classes, &pulled)?
            .ok_or_else(|| ExtError::InvalidCocycle("pullback matches no class".into()))?;
        if !image.contains(&idx) {
            image.push(idx);
        }
    }
    image.sort_unstable();
    Ok(image)
}

/// Verifies the torsor structure on the fiber over `(E, F)` by brute force.
pub fn torsor_report(e: &ExtClass, f: &ExtClass) -> Result<TorsorReport, ExtError> {
    let fiber = extpan_fiber(e, f)?;
    let classes = ext1_classes(&e.q, &f.p)?;

    let mut transitive = !fiber.is_empty();
    let mut section_ok = true;
    let mut stabilizers = Vec::with_capacity(fiber.len());
    for w in &fiber {
        let mut stab = Vec::new();
        let mut reached = vec![false; fiber.len()];
        for (i, x) in classes.iter().enumerate() {
            let moved = act(w, x)?;
            for (j, target) in fiber.iter().enumerate() {
                if !reached[j] && moved.is_isomorphic(target)? {
                    reached[j] = true;
                }
            }
            if moved.is_isomorphic(w)? {
                stab.push(i);
            }
            if !difference(w, &moved)?.cohomologous(x)? {
                section_ok = false;
            }
        }
        transitive &= reached.iter().all(|&r| r);
        for w2 in &fiber {
            let d = difference(w, w2)?;
            if !act(w, &d)?.is_isomorphic(w2)? {
                section_ok = false;
            }
        }
        stabilizers.push(stab);
    }
    let image = connecting_image(&e.q, f, &classes)?;
    let stabilizer_order = stabilizers.first().map_or(0, Vec::len);
    let stabilizer_is_connecting_image = stabilizers.iter().all(|s| *s == image);
    Ok(TorsorReport {
        fiber_size: fiber.len(),
        ext1_order: classes.len(),
        stabilizer_order,
        transitive,
        section_ok,
        connecting_image_order: image.len(),
        stabilizer_is_connecting_image,
    })
}

/// JSON cocycle table for CLI input: `table[a][b]` is the coordinate vector
/// of `f(a, b) ∈ P`, with `a`, `b` running over `Q` in lexicographic order.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleFile {
    pub q: Vec<usize>,
    pub p: Vec<usize>,
    pub table: Vec<Vec<Vec<usize>>>,
}

impl CocycleFile {
    pub fn from_class(x: &ExtClass) -> Self {
        let n = x.q.order();
        CocycleFile {
            q: x.q.factors().to_vec(),
            p: x.p.factors().to_vec(),
            table: (0..n)
                .map(|a| (0..n).map(|b| x.p.coords(x.cocycle.get(a, b))).collect())
                .collect(),
        }
    }

    pub fn into_class(self) -> Result<ExtClass, ExtError> {
        let q = FinAbGroup::new(self.q)?;
        let p = FinAbGroup::new(self.p)?;
        check_budget("Q", &q, EXT1_BUDGET)?;
        check_budget("P", &p, EXT1_BUDGET)?;
        let n = q.order();
        if self.table.len() != n || self.table.iter().any(|row| row.len() != n) {
            return Err(ExtError::Shape(format!("table must be {n}x{n}")));
        }
        let mut values = Vec::with_capacity(n * n);
        for row in &self.table {
            for cell in row {
                if cell.len() != p.factors().len()
                    || cell.iter().zip(p.factors()).any(|(c, m)| c >= m)
                {
                    return Err(ExtError::Shape(format!("{cell:?} is not an element of {p}")));
                }
                values.push(p.index(cell));
            }
        }
        let cocycle = Cocycle::new(q.clone(), p.table(), values)?;
        ExtClass::new(q, p, cocycle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(m: usize) -> FinAbGroup {
        FinAbGroup::cyclic(m)
    }

    fn nonsplit(q: usize, p: usize) -> ExtClass {
        let classes = ext1_classes(&z(q), &z(p)).unwrap();
        assert_eq!(classes.len(), 2);
        classes[1].clone()
    }

    #[test]
    fn group_parsing() {
        assert_eq!(FinAbGroup::parse("2,4").unwrap().factors(), &[2, 4]);
        assert_eq!(FinAbGroup::parse("trivial").unwrap().order(), 1);
        assert_eq!(FinAbGroup::parse("").unwrap().order(), 1);
        assert!(FinAbGroup::parse("2,0").is_err());
        assert!(FinAbGroup::parse("1").is_err());
        assert!(FinAbGroup::parse("x").is_err());
    }

    #[test]
    fn element_indexing_is_lexicographic() {
        let g = FinAbGroup::new(vec![2, 3]).unwrap();
        assert_eq!(g.coords(4), vec![1, 1]);
        assert_eq!(g.index(&[1, 2]), 5);
        assert_eq!(g.add(4, 5), g.index(&[0, 0]));
    }

    #[test]
    fn ext1_counts() {
        assert_eq!(ext1_classes(&z(2), &z(2)).unwrap().len(), 2);
        assert_eq!(ext1_classes(&z(2), &z(3)).unwrap().len(), 1);
        assert_eq!(ext1_classes(&z(4), &z(2)).unwrap().len(), 2);
        assert!(matches!(
            ext1_classes(&z(13), &z(2)),
            Err(ExtError::Budget { .. })
        ));
    }

    #[test]
    fn z2_by_z2_nonsplit_is_z4() {
        let classes = ext1_classes(&z(2), &z(2)).unwrap();
        assert!(classes[0].is_split());
        assert!(!classes[1].is_split());
        // An element of order 4 exists exactly in the nonsplit group.
        let has_order_four = |g: &GroupTable| {
            (0..g.order()).any(|x| g.add(x, x) != 0)
        };
        assert!(!has_order_four(&classes[0].group()));
        assert!(has_order_four(&classes[1].group()));
    }

    #[test]
    fn baer_sum_laws() {
        let classes = ext1_classes(&z(2), &z(2)).unwrap();
        let (s, x) = (&classes[0], &classes[1]);
        assert!(baer_sum(s, x).unwrap().cohomologous(x).unwrap());
        assert!(baer_sum(x, x).unwrap().is_split());
        let y = &ext1_classes(&z(4), &z(4)).unwrap()[3];
        assert!(baer_sum(y, &y.negate()).unwrap().is_split());
        let other = ExtClass::split(z(2), z(3));
        assert!(baer_sum(x, &other).is_err());
    }

    #[test]
    fn invariant_matches_search_on_small_groups() {
        for (q, p) in [(vec![4], vec![2]), (vec![2, 2], vec![4]), (vec![3], vec![3])] {
            let (q, p) = (FinAbGroup::new(q).unwrap(), FinAbGroup::new(p).unwrap());
            let classes = ext1_classes(&q, &p).unwrap();
            for a in &classes {
                for b in &classes {
                    let same_inv = a.invariant() == b.invariant();
                    assert_eq!(same_inv, a.cohomologous(b).unwrap());
                }
            }
        }
    }

    #[test]
    fn coboundaries_are_found() {
        let q = FinAbGroup::new(vec![2, 2]).unwrap();
        let p = z(4);
        let h = vec![0, 3, 1, 2];
        let d = Cocycle::coboundary(q.clone(), p.table(), &h);
        d.check().unwrap();
        let found = d.cobounding_function(&Cocycle::zero(q, p.table())).unwrap();
        assert!(found.is_some());
    }

    #[test]
    fn cocycle_check_rejects_bad_tables() {
        let q = z(2);
        let p = z(2);
        assert!(Cocycle::new(q.clone(), p.table(), vec![1, 0, 0, 0]).is_err());
        let q3 = z(3);
        // Symmetric and normalized but failing the identity.
        let bad = vec![0, 0, 0, 0, 1, 0, 0, 0, 0];
        assert!(matches!(
            Cocycle::new(q3, z(3).table(), bad),
            Err(ExtError::InvalidCocycle(_))
        ));
    }

    #[test]
    fn pushforward_examples() {
        let e = nonsplit(2, 2);
        let f = nonsplit(2, 2);
        let fiber = extpan_fiber(&e, &f).unwrap();
        for w in &fiber {
            assert!(w.pushforward().cohomologous(&e).unwrap());
        }
        let fg = TwistedGroup::of(&f);
        let split_w = Cocycle::zero(z(2), fg.table.clone());
        assert!(pushforward(&split_w, &fg).unwrap().is_split());
    }

    #[test]
    fn fiber_over_trivial_r_is_ext1() {
        let q = FinAbGroup::new(vec![2, 2]).unwrap();
        let p = z(2);
        let e = ExtClass::split(q.clone(), FinAbGroup::trivial());
        let f = ExtClass::split(FinAbGroup::trivial(), p.clone());
        let fiber = extpan_fiber(&e, &f).unwrap();
        assert_eq!(fiber.len(), ext1_classes(&q, &p).unwrap().len());
    }

    #[test]
    fn fiber_over_trivial_p_is_e() {
        let e = nonsplit(2, 2);
        let f = ExtClass::split(z(2), FinAbGroup::trivial());
        let fiber = extpan_fiber(&e, &f).unwrap();
        assert_eq!(fiber.len(), 1);
        assert_eq!(fiber[0].order(), 4);
    }

    #[test]
    fn both_nonsplit_over_z2() {
        let e = nonsplit(2, 2);
        let f = nonsplit(2, 2);
        let fiber = extpan_fiber(&e, &f).unwrap();
        assert_eq!(fiber.len(), 1);
        assert_eq!(fiber[0].order(), 8);
        // The total group is cyclic of order 8.
        let g = fiber[0].butterfly().w_group;
        let cyclic = (0..8).any(|x| {
            let mut y = x;
            (1..8).all(|_| {
                let nonzero = y != 0;
                y = g.add(y, x);
                nonzero
            })
        });
        assert!(cyclic);
    }

    #[test]
    fn butterflies_verify() {
        let e = nonsplit(2, 2);
        let f = ExtClass::split(z(2), z(2));
        for w in extpan_fiber(&e, &f).unwrap() {
            w.butterfly().verify().unwrap();
        }
    }

    #[test]
    fn act_and_difference_are_inverse() {
        let e = nonsplit(2, 2);
        let f = ExtClass::split(z(2), z(2));
        let fiber = extpan_fiber(&e, &f).unwrap();
        assert_eq!(fiber.len(), 2);
        let w = &fiber[0];
        assert!(difference(w, w).unwrap().is_split());
        for w2 in &fiber {
            let d = difference(w, w2).unwrap();
            assert!(act(w, &d).unwrap().is_isomorphic(w2).unwrap());
        }
        let split = ExtClass::split(z(2), z(2));
        assert!(act(w, &split).unwrap().is_isomorphic(w).unwrap());
    }

    #[test]
    fn torsor_reports() {
        let z2 = z(2);
        let t = FinAbGroup::trivial();
        // R = 0: free and transitive.
        let r = torsor_report(&ExtClass::split(z2.clone(), t.clone()), &ExtClass::split(t, z2.clone()))
            .unwrap();
        assert_eq!((r.fiber_size, r.ext1_order, r.stabilizer_order), (2, 2, 1));
        assert!(r.all_ok());
        // F split: connecting map vanishes.
        let r = torsor_report(&nonsplit(2, 2), &ExtClass::split(z2.clone(), z2.clone())).unwrap();
        assert_eq!((r.fiber_size, r.stabilizer_order, r.connecting_image_order), (2, 1, 1));
        assert!(r.all_ok());
        // F nonsplit: the connecting map is onto.
        for e in [ExtClass::split(z2.clone(), z2.clone()), nonsplit(2, 2)] {
            let r = torsor_report(&e, &nonsplit(2, 2)).unwrap();
            assert_eq!((r.fiber_size, r.stabilizer_order), (1, 2));
            assert!(r.all_ok());
        }
    }

    #[test]
    fn mismatched_shapes_rejected() {
        let e = ExtClass::split(z(2), z(3));
        let f = ExtClass::split(z(2), z(2));
        assert!(matches!(extpan_fiber(&e, &f), Err(ExtError::Shape(_))));
        let big = ExtClass::split(z(9), z(2));
        let f2 = ExtClass::split(z(2), z(2));
        assert!(matches!(extpan_fiber(&big, &f2), Err(ExtError::Budget { .. })));
    }

    #[test]
    fn difference_needs_same_fiber() {
        let f = ExtClass::split(z(2), z(2));
        let a = extpan_fiber(&ExtClass::split(z(2), z(2)), &f).unwrap();
        let b = extpan_fiber(&nonsplit(2, 2), &f).unwrap();
        assert_eq!(difference(&a[0], &b[0]).unwrap_err(), ExtError::FiberMismatch);
    }

    #[test]
    fn cocycle_file_round_trip() {
        let x = &ext1_classes(&FinAbGroup::new(vec![2, 2]).unwrap(), &z(2)).unwrap()[3];
        let text = serde_json::to_string(&CocycleFile::from_class(x)).unwrap();
        let back: CocycleFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_class().unwrap().cocycle(), x.cocycle());
    }
}
