//! Seeded property sweeps over random graphs and small groups.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::extpan::{self, ExtClass, FinAbGroup};
use crate::graph::{CycleBasis, TropicalCurve};
use crate::linalg::{same_row_lattice, IntMatrix};
use crate::pairing::{self, IntSymMatrix};
use crate::random::{self, GraphParams};
use crate::realizations::{self, MonodromyOperator};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub cases: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub count: usize,
    pub all_passed: bool,
    pub properties: Vec<PropertyResult>,
}

struct Tally {
    name: &'static str,
    cases: usize,
    failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            cases: 0,
            failure: None,
        }
    }

    fn record(&mut self, ok: Result<bool, String>, context: impl FnOnce() -> String) {
        self.cases += 1;
        if self.failure.is_some() {
            return;
        }
        match ok {
            Ok(true) => {}
            Ok(false) => self.failure = Some(context()),
            Err(e) => self.failure = Some(format!("{}: {e}", context())),
        }
    }

    fn finish(self) -> PropertyResult {
        PropertyResult {
            name: self.name.into(),
            cases: self.cases,
            passed: self.failure.is_none(),
            first_failure: self.failure,
        }
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn specialized(curve: &TropicalCurve, weights: &[i64]) -> Result<IntSymMatrix, String> {
    let basis = curve.cycle_basis().map_err(err)?;
    let pm = pairing::pairing_matrix(curve, &basis).map_err(err)?;
    pairing::specialize(&pm, weights).map_err(err)
}

fn with_basis(basis: &CycleBasis, matrix: IntMatrix) -> CycleBasis {
    CycleBasis {
        edge_ids: basis.edge_ids.clone(),
        matrix,
    }
}

/// Runs every property on `count` random instances drawn from `seed`.
pub fn selftest(seed: u64, count: usize) -> SelftestReport {
    let mut rng = random::rng(seed);
    let params = GraphParams {
        base_rank: 2,
        max_genus: 2,
        ..GraphParams::default()
    };
    let curves: Vec<TropicalCurve> = (0..count)
        .map(|_| random::random_connected_curve(&mut rng, &params))
        .collect();

    let mut props = Vec::new();

    let mut t = Tally::new("cycle_basis_spans_kernel");
    for (i, c) in curves.iter().enumerate() {
        let ok = c.cycle_basis().map_err(err).and_then(|b| b.verify(c).map_err(err));
        t.record(ok.map(|_| true), || format!("curve {i}"));
    }
    props.push(t.finish());

    let mut t = Tally::new("cycle_basis_orientation_reversal");
    for (i, c) in curves.iter().enumerate() {
        if c.edges.is_empty() {
            continue;
        }
        let j = rng.random_range(0..c.edges.len());
        let ok = (|| {
            let b = c.cycle_basis().map_err(err)?;
            let flipped = c.with_reversed_edge(j);
            let mut negated = b.matrix.clone();
            for r in 0..negated.nrows() {
                negated[(r, j)] = -negated[(r, j)];
            }
            let b2 = flipped.cycle_basis().map_err(err)?;
            same_row_lattice(&negated, &b2.matrix).map_err(err)
        })();
        t.record(ok, || format!("curve {i}, edge {j}"));
    }
    props.push(t.finish());

    let mut t = Tally::new("cycle_basis_deterministic");
    for (i, c) in curves.iter().enumerate() {
        let ok = match (c.cycle_basis(), c.clone().cycle_basis()) {
            (Ok(a), Ok(b)) => Ok(a == b),
            (Err(e), _) | (_, Err(e)) => Err(err(e)),
        };
        t.record(ok, || format!("curve {i}"));
    }
    props.push(t.finish());

    let mut t = Tally::new("edge_pairing_bilinear_symmetric");
    for (i, c) in curves.iter().enumerate() {
        let n = c.edges.len();
        let mut v = || (0..n).map(|_| rng.random_range(-3..=3)).collect::<Vec<i64>>();
        let (x, y, z) = (v(), v(), v());
        let ok = (|| {
            let xy: Vec<i64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let lhs = pairing::edge_pairing(&xy, &z, c).map_err(err)?;
            let rhs = &pairing::edge_pairing(&x, &z, c).map_err(err)?
                + &pairing::edge_pairing(&y, &z, c).map_err(err)?;
            let sym = pairing::edge_pairing(&x, &z, c).map_err(err)?
                == pairing::edge_pairing(&z, &x, c).map_err(err)?;
            Ok(lhs == rhs && sym)
        })();
        t.record(ok, || format!("curve {i}"));
    }
    props.push(t.finish());

    let mut t = Tally::new("pairing_basis_independence");
    for (i, c) in curves.iter().enumerate() {
        let ok = (|| {
            let b = c.cycle_basis().map_err(err)?;
            let pm = pairing::pairing_matrix(c, &b).map_err(err)?;
            let u = random::random_unimodular(&mut rng, b.rank(), 8);
            let moved = with_basis(&b, u.checked_mul(&b.matrix).map_err(err)?);
            let pm2 = pairing::pairing_matrix(c, &moved).map_err(err)?;
            for k in 0..c.base_rank {
                let expect = u
                    .checked_mul(&pm.generator_slice(k))
                    .and_then(|m| m.checked_mul(&u.transpose()))
                    .map_err(err)?;
                if expect != pm2.generator_slice(k) {
                    return Ok(false);
                }
            }
            let w: Vec<i64> = (0..c.base_rank).map(|_| rng.random_range(1..=4)).collect();
            let (s1, s2) = (
                pairing::specialize(&pm, &w).map_err(err)?,
                pairing::specialize(&pm2, &w).map_err(err)?,
            );
            Ok(pairing::is_positive_definite(&s1) == pairing::is_positive_definite(&s2)
                && pairing::component_group(&s1).ok() == pairing::component_group(&s2).ok())
        })();
        t.record(ok, || format!("curve {i}"));
    }
    props.push(t.finish());

    let mut t = Tally::new("specialization_positive_definite");
    for (i, c) in curves.iter().enumerate() {
        let w: Vec<i64> = (0..c.base_rank).map(|_| rng.random_range(1..=5)).collect();
        let ok = specialized(c, &w).map(|b| pairing::is_positive_definite(&b));
        t.record(ok, || format!("curve {i}, weights {w:?}"));
    }
    props.push(t.finish());

    let mut t = Tally::new("bridge_lengths_do_not_matter");
    for (i, c) in curves.iter().enumerate() {
        let ok = (|| {
            let b = c.cycle_basis().map_err(err)?;
            let pm = pairing::pairing_matrix(c, &b).map_err(err)?;
            let mut perturbed = c.clone();
            for (j, e) in perturbed.edges.iter_mut().enumerate() {
                if (0..b.rank()).all(|r| b.matrix[(r, j)] == 0) {
                    e.length.0[0] += 3;
                }
            }
            let pm2 = pairing::pairing_matrix(&perturbed, &b).map_err(err)?;
            Ok(pm.entries() == pm2.entries())
        })();
        t.record(ok, || format!("curve {i}"));
    }
    props.push(t.finish());

    let mut t = Tally::new("specialize_commutes_with_evaluation");
    for (i, c) in curves.iter().enumerate() {
        let w: Vec<i64> = (0..c.base_rank).map(|_| rng.random_range(1..=6)).collect();
        let ok = (|| {
            let b = c.cycle_basis().map_err(err)?;
            let pm = pairing::pairing_matrix(c, &b).map_err(err)?;
            let s = pairing::specialize(&pm, &w).map_err(err)?;
            Ok((0..pm.h()).all(|r| {
                (0..pm.h()).all(|col| s.matrix()[(r, col)] == pm.entry(r, col).evaluate(&w))
            }))
        })();
        t.record(ok, || format!("curve {i}"));
    }
    props.push(t.finish());

    // Operators on the rank-1 specialization with unit weights.
    let mut operators: Vec<(IntSymMatrix, usize)> = Vec::new();
    for c in &curves {
        if let (Ok(b), Ok(a)) = (specialized(c, &vec![1; c.base_rank]), c.abelian_rank()) {
            operators.push((b, a));
        }
    }

    let mut t = Tally::new("picard_lefschetz_square_zero_and_rank");
    for (i, (b, a)) in operators.iter().enumerate() {
        let w = rng.random_range(-3..=3i64);
        let ok = realizations::picard_lefschetz(b, *a as i64, w, 0)
            .map_err(err)
            .and_then(|n| {
                let nil = n.nilpotent_part();
                let sq = nil.checked_mul(&nil).map_err(err)?;
                let expected_rank = if w == 0 { 0 } else { b.matrix().rank() };
                Ok(sq.is_zero() && nil.rank() == expected_rank)
            });
        t.record(ok, || format!("operator {i}, winding {w}"));
    }
    props.push(t.finish());

    let mut t = Tally::new("picard_lefschetz_reduction_mod_n");
    for (i, (b, a)) in operators.iter().enumerate() {
        for n in 2..=5i64 {
            let ok = (|| {
                let full = realizations::picard_lefschetz(b, *a as i64, 1, 0).map_err(err)?;
                let reduced_b = IntSymMatrix::new(b.matrix().reduce_mod(n)).map_err(err)?;
                let direct = realizations::picard_lefschetz(&reduced_b, *a as i64, 1, n)
                    .map_err(err)?;
                let via = full.reduce_mod(n).map_err(err)?;
                let nil = direct.nilpotent_part();
                let sq_zero = nil.checked_mul(&nil).map_err(err)?.reduce_mod(n).is_zero();
                let det = b.matrix().det().map_err(err)?;
                let invertible = num_integer::Integer::gcd(&det, &n.into()) == 1.into();
                let order_ok = !invertible || b.h() == 0 || direct.order() == Some(n as u64);
                Ok(via.matrix == direct.matrix && sq_zero && order_ok)
            })();
            t.record(ok, || format!("operator {i}, n = {n}"));
        }
    }
    props.push(t.finish());

    let mut t = Tally::new("loop_composition");
    for (i, (b, a)) in operators.iter().enumerate() {
        let (w1, w2) = (rng.random_range(-4..=4i64), rng.random_range(-4..=4i64));
        let ok = (|| {
            let n1 = realizations::picard_lefschetz(b, *a as i64, w1, 0).map_err(err)?;
            let n2 = realizations::picard_lefschetz(b, *a as i64, w2, 0).map_err(err)?;
            let n12 = realizations::picard_lefschetz(b, *a as i64, w1 + w2, 0).map_err(err)?;
            Ok(n1.compose(&n2).map_err(err)? == n12)
        })();
        t.record(ok, || format!("operator {i}, windings {w1}, {w2}"));
    }
    props.push(t.finish());

    let mut t = Tally::new("monodromy_fixes_weight_zero_part");
    for (i, (b, a)) in operators.iter().enumerate() {
        let ok = realizations::picard_lefschetz(b, *a as i64, 1, 0)
            .map_err(err)
            .and_then(|n| fixes_low_weights(&n));
        t.record(ok, || format!("operator {i}"));
    }
    props.push(t.finish());

    let mut t = Tally::new("hodge_table_dimensions");
    for (i, c) in curves.iter().enumerate() {
        let ok = (|| {
            let table = realizations::hodge_table(c).map_err(err)?;
            let d = realizations::weight_dims(c).map_err(err)?;
            Ok(table.f1_total() == d.h + d.a
                && table.f0_total() == d.total
                && table.rows() == [[d.h, 0], [2 * d.a, d.a], [d.h, d.h]])
        })();
        t.record(ok, || format!("curve {i}"));
    }
    props.push(t.finish());

    let mut t = Tally::new("weight_check_for_definite_pairings");
    for (i, (b, _)) in operators.iter().enumerate() {
        let ok = Ok(!pairing::is_positive_definite(b) || realizations::monodromy_weight_check(b));
        t.record(ok, || format!("operator {i}"));
    }
    props.push(t.finish());

    let small = small_groups();
    let mut t = Tally::new("ext1_count_and_baer_sum");
    for q in &small {
        for p in &small {
            let ok = ext1_group_laws(q, p);
            t.record(ok, || format!("Ext¹({q}, {p})"));
        }
    }
    props.push(t.finish());

    let mut t = Tally::new("variegated_torsor");
    for k in 0..count {
        let pick = |rng: &mut rand_chacha::ChaCha8Rng| small[rng.random_range(0..small.len())].clone();
        let (p, q, r) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let ok = (|| {
            let es = extpan::ext1_classes(&q, &r).map_err(err)?;
            let fs = extpan::ext1_classes(&r, &p).map_err(err)?;
            let e = &es[rng.random_range(0..es.len())];
            let f = &fs[rng.random_range(0..fs.len())];
            let report = extpan::torsor_report(e, f).map_err(err)?;
            Ok(report.all_ok())
        })();
        t.record(ok, || format!("sample {k}: P = {p}, Q = {q}, R = {r}"));
    }
    props.push(t.finish());

    SelftestReport {
        seed,
        count,
        all_passed: props.iter().all(|p| p.passed),
        properties: props,
    }
}

fn fixes_low_weights(n: &MonodromyOperator) -> Result<bool, String> {
    let fixed = n.h + 2 * n.a;
    for i in 0..fixed {
        let mut v = vec![0; n.size()];
        v[i] = 1;
        if n.apply(&v).map_err(err)? != v {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Abelian groups of order at most 4.
pub fn small_groups() -> Vec<FinAbGroup> {
    [vec![], vec![2], vec![3], vec![4], vec![2, 2]]
        .into_iter()
        .map(|f| FinAbGroup::new(f).expect("valid factors"))
        .collect()
}

fn ext1_group_laws(q: &FinAbGroup, p: &FinAbGroup) -> Result<bool, String> {
    let classes = extpan::ext1_classes(q, p).map_err(err)?;
    let expected: usize = q
        .factors()
        .iter()
        .map(|&m| p.quotient_reps(m).len())
        .product();
    if classes.len() != expected {
        return Ok(false);
    }
    // Pairwise distinct, cross-checked against the transgression invariant.
    for (i, a) in classes.iter().enumerate() {
        for b in &classes[..i] {
            if a.cohomologous(b).map_err(err)? || a.invariant() == b.invariant() {
                return Ok(false);
            }
        }
    }
    let split = ExtClass::split(q.clone(), p.clone());
    for a in &classes {
        if !extpan::baer_sum(a, &split).map_err(err)?.cohomologous(a).map_err(err)? {
            return Ok(false);
        }
        if !extpan::baer_sum(a, &a.negate()).map_err(err)?.is_split() {
            return Ok(false);
        }
        for b in &classes {
            let s = extpan::baer_sum(a, b).map_err(err)?;
            s.cocycle().check().map_err(err)?;
            if extpan::class_index(&classes, &s).map_err(err)?.is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
