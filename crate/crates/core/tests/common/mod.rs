//! Independent reference implementations used to derive expected values.
//! They share no code with the library beyond its data types.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use proptest::prelude::*;
use treecut::graph::Edge;
use treecut::lp::{LpProgram, Relation, Sense};
use treecut::rational::{int, ratio};
use treecut::{Rational, SparsestCutInstance, VertexId};

/// Crossing weight of `edges` for side `a`.
pub fn crossing(edges: &[Edge], a: &BTreeSet<VertexId>) -> Rational {
    edges
        .iter()
        .filter(|e| a.contains(&e.u) != a.contains(&e.v))
        .map(|e| e.weight.clone())
        .sum()
}

/// Sparsest cut by plain subset enumeration: minimal ratio, ties broken by
/// the lexicographically smallest vertex list of the side holding the
/// smallest vertex.
pub fn brute_sparsest_cut(inst: &SparsestCutInstance) -> Option<(Vec<VertexId>, Rational)> {
    let vs = inst.vertices();
    let n = vs.len();
    let mut best: Option<(Vec<VertexId>, Rational)> = None;
    for mask in 0u64..(1 << (n - 1)) {
        // vs[0] always on side A; the rest from the mask.
        let mut side = vec![vs[0]];
        side.extend((1..n).filter(|i| mask >> (i - 1) & 1 == 1).map(|i| vs[i]));
        if side.len() == n {
            continue;
        }
        let set: BTreeSet<VertexId> = side.iter().copied().collect();
        let dem = crossing(inst.demand_edges(), &set);
        if dem.is_zero() {
            continue;
        }
        let r = crossing(inst.supply_edges(), &set) / dem;
        let better = match &best {
            None => true,
            Some((bs, br)) => r < *br || (r == *br && side < *bs),
        };
        if better {
            best = Some((side, r));
        }
    }
    best
}

/// Maximum cut size of an unweighted graph by enumeration.
pub fn brute_maxcut(n: u32, edges: &[(VertexId, VertexId)]) -> usize {
    (0u64..1 << n)
        .map(|m| {
            edges
                .iter()
                .filter(|(u, v)| (m >> (u.0 - 1) & 1) != (m >> (v.0 - 1) & 1))
                .count()
        })
        .max()
        .unwrap()
}

/// Treewidth by trying every elimination order (small graphs only).
pub fn brute_treewidth(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in edges {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut best = usize::MAX;
    permute(&mut order, 0, &mut |ord| {
        let mut g = adj.clone();
        let mut gone = vec![false; n];
        let mut w = 0;
        for &v in ord {
            let nb: Vec<usize> = (0..n).filter(|&u| !gone[u] && g[v][u]).collect();
            w = w.max(nb.len());
            for &a in &nb {
                for &b in &nb {
                    if a != b {
                        g[a][b] = true;
                    }
                }
            }
            gone[v] = true;
        }
        best = best.min(w);
    });
    best
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Solves a square system exactly; `None` when singular.
fn gauss(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..n {
                    let d = &f * &a[col][c];
                    a[r][c] -= d;
                }
                let d = &f * &b[col];
                b[r] -= d;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Optimum of a bounded LP (every variable boxed) by enumerating all
/// vertices: choose `n` tight rows among constraints and bounds, solve,
/// keep feasible points. `None` when infeasible.
pub fn vertex_enumeration(p: &LpProgram) -> Option<Rational> {
    let n = p.num_variables();
    let mut rows: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for c in &p.constraints {
        let mut row = vec![Rational::zero(); n];
        for (j, v) in &c.coeffs {
            row[*j] += v;
        }
        rows.push((row, c.rhs.clone()));
    }
    for j in 0..n {
        let mut row = vec![Rational::zero(); n];
        row[j] = int(1);
        rows.push((row.clone(), Rational::zero()));
        rows.push((row, p.variables[j].upper.clone().expect("boxed")));
    }
    let feasible = |x: &[Rational]| {
        let dot = |coeffs: &[(usize, Rational)]| -> Rational { coeffs.iter().map(|(j, v)| v * &x[*j]).sum() };
        x.iter().zip(&p.variables).all(|(v, var)| !v.is_negative() && var.upper.as_ref().is_none_or(|u| v <= u))
            && p.constraints.iter().all(|c| {
                let l = dot(&c.coeffs);
                match c.relation {
                    Relation::Le => l <= c.rhs,
                    Relation::Ge => l >= c.rhs,
                    Relation::Eq => l == c.rhs,
                }
            })
    };
    let mut best: Option<Rational> = None;
    let m = rows.len();
    let mut pick = vec![0usize; n];
    fn choose(
        start: usize,
        k: usize,
        m: usize,
        pick: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if k == pick.len() {
            f(pick);
            return;
        }
        for i in start..m {
            pick[k] = i;
            choose(i + 1, k + 1, m, pick, f);
        }
    }
    choose(0, 0, m, &mut pick, &mut |idx| {
        let a = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let b = idx.iter().map(|&i| rows[i].1.clone()).collect();
        if let Some(x) = gauss(a, b) {
            if feasible(&x) {
                let v = p.objective_value(&x);
                let better = match (&best, p.sense) {
                    (None, _) => true,
                    (Some(b), Sense::Minimize) => v < *b,
                    (Some(b), Sense::Maximize) => v > *b,
                };
                if better {
                    best = Some(v);
                }
            }
        }
    });
    best
}

pub fn small_rational() -> impl Strategy<Value = Rational> {
    (0i64..6, 1i64..4).prop_map(|(p, q)| ratio(p, q))
}

pub fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..6, 1i64..4).prop_map(|(p, q)| ratio(p, q))
}

/// Random instance on `3..=max_n` vertices with a spanning path of
/// capacities plus extra edges, and at least one positive demand.
pub fn instance(max_n: u32) -> impl Strategy<Value = SparsestCutInstance> {
    (3u32..=max_n).prop_flat_map(|n| {
        let pair = (1..=n, 1..=n).prop_filter("distinct", |(a, b)| a != b);
        (
            proptest::collection::vec(positive_rational(), (n - 1) as usize),
            proptest::collection::vec((pair.clone(), small_rational()), 0..n as usize),
            (pair.clone(), positive_rational()),
            proptest::collection::vec((pair, small_rational()), 0..3),
        )
            .prop_map(move |(path, extra, first, dems)| {
                let mut supply: Vec<Edge> = path
                    .into_iter()
                    .enumerate()
                    .map(|(i, w)| Edge::new(VertexId(i as u32 + 1), VertexId(i as u32 + 2), w))
                    .collect();
                supply.extend(extra.into_iter().map(|((u, v), w)| Edge::new(VertexId(u), VertexId(v), w)));
                let mut demand = vec![Edge::new(VertexId(first.0 .0), VertexId(first.0 .1), first.1)];
                demand.extend(dems.into_iter().map(|((u, v), w)| Edge::new(VertexId(u), VertexId(v), w)));
                SparsestCutInstance::with_vertex_count(n, supply, demand, None).unwrap()
            })
    })
}
