//! Library results against the independent references in `common`.

mod common;

use common::*;
use num_traits::Zero;
use proptest::prelude::*;
use treecut::budget::Budgets;
use treecut::decomposition::{exact_decomposition, validate};
use treecut::generators::MaxCutInstance;
use treecut::lp::{self, check_strong_duality, LpProgram, LpStatus, Relation, Sense, SolverOptions};
use treecut::oracle::{exact_maxcut, exact_sparsest_cut};
use treecut::pipeline::solve;
use treecut::rational::{int, ratio, to_f64};
use treecut::sa::{solve_maxcut_sa, SearchOptions};
use treecut::VertexId;

fn graph_edges() -> impl Strategy<Value = (u32, Vec<(VertexId, VertexId)>)> {
    (3u32..=7).prop_flat_map(|n| {
        let pair = (1..=n, 1..=n).prop_filter("distinct", |(a, b)| a != b);
        proptest::collection::vec(pair, 0..(2 * n as usize)).prop_map(move |extra| {
            let mut edges: Vec<(VertexId, VertexId)> = (1..n).map(|i| (VertexId(i), VertexId(i + 1))).collect();
            for (a, b) in extra {
                let e = (VertexId(a.min(b)), VertexId(a.max(b)));
                if !edges.contains(&e) {
                    edges.push(e);
                }
            }
            (n, edges)
        })
    })
}

fn boxed_lp() -> impl Strategy<Value = LpProgram> {
    let coeff = (-3i64..4, 1i64..3).prop_map(|(p, q)| ratio(p, q));
    (2usize..=3, 1usize..=3).prop_flat_map(move |(n, m)| {
        (
            proptest::collection::vec(positive_rational(), n),
            proptest::collection::vec(coeff.clone(), n),
            proptest::collection::vec((proptest::collection::vec(coeff.clone(), n), 0usize..3, small_rational()), m),
            any::<bool>(),
        )
            .prop_map(move |(upper, obj, rows, max)| {
                let mut p = LpProgram::new(if max { Sense::Maximize } else { Sense::Minimize });
                for (j, u) in upper.into_iter().enumerate() {
                    let v = p.add_variable(format!("x{j}"));
                    p.set_upper(v, u);
                }
                p.set_objective(obj.into_iter().enumerate().collect());
                for (i, (row, rel, rhs)) in rows.into_iter().enumerate() {
                    let rel = [Relation::Le, Relation::Ge, Relation::Eq][rel];
                    p.add_constraint(format!("c{i}"), row.into_iter().enumerate().collect(), rel, rhs);
                }
                p
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sparsest_cut_matches_enumeration(inst in instance(8)) {
        let (cut, sp) = exact_sparsest_cut(&inst, &Budgets::default()).unwrap();
        let (side, r) = brute_sparsest_cut(&inst).unwrap();
        prop_assert_eq!(sp.ratio, Some(r));
        prop_assert_eq!(cut.side().iter().copied().collect::<Vec<_>>(), side);
    }

    #[test]
    fn maxcut_matches_enumeration((n, edges) in graph_edges()) {
        let h = MaxCutInstance::new(n, edges.clone()).unwrap();
        let (side, mc) = exact_maxcut(&h, &Budgets::default()).unwrap();
        prop_assert_eq!(mc, brute_maxcut(n, &edges));
        prop_assert_eq!(h.cut_size(&side), mc);
    }

    // Width refers to the supply graph; demand pairs need not share a bag.
    #[test]
    fn treewidth_matches_elimination_orders(inst in instance(7)) {
        let td = exact_decomposition(&inst, 18).unwrap();
        prop_assert!(validate(&inst, &td).is_ok());
        let idx = |v: VertexId| v.0 as usize - 1;
        let edges: Vec<(usize, usize)> = inst.supply_edges().iter().map(|e| (idx(e.u), idx(e.v))).collect();
        prop_assert_eq!(td.width(), brute_treewidth(inst.num_vertices(), &edges));
    }

    #[test]
    fn simplex_matches_vertex_enumeration(p in boxed_lp()) {
        let res = lp::solve(&p, &SolverOptions::default()).unwrap();
        match vertex_enumeration(&p) {
            None => prop_assert_eq!(res.status, LpStatus::Infeasible),
            Some(opt) => {
                prop_assert_eq!(res.status, LpStatus::Optimal);
                prop_assert_eq!(res.objective.clone(), Some(opt.clone()));
                prop_assert!(p.first_violation(&res.values).is_none());
                check_strong_duality(&p, &res).unwrap();
                let f = lp::solve(&p, &SolverOptions::float()).unwrap();
                prop_assert_eq!(f.status, LpStatus::Optimal);
                prop_assert!((to_f64(&f.objective.unwrap()) - to_f64(&opt)).abs() < 1e-7);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pipeline_within_twice_the_lp(inst in instance(7)) {
        let s = solve(&inst, None, &SearchOptions::default(), &Budgets::default()).unwrap();
        let (_, phi) = brute_sparsest_cut(&inst).unwrap();
        prop_assert!(s.report.lp_ratio <= phi);
        let sp = s.report.sparsity.clone().unwrap();
        prop_assert!(phi <= sp);
        prop_assert!(sp <= int(2) * &s.report.lp_ratio);
        prop_assert!(!(s.report.final_potential > Zero::zero()));
    }
}

#[test]
fn full_sa_on_triangle() {
    // Two rounds: every pair can be cut with probability one, so the LP
    // reaches m = 3; with all three vertices it is the integral optimum.
    let h = MaxCutInstance::complete(3).unwrap();
    let b = Budgets::default();
    let (v2, s2) = solve_maxcut_sa(&h, 2, &b, &SolverOptions::default()).unwrap();
    assert_eq!(v2, int(3));
    s2.check().unwrap();
    let (v3, _) = solve_maxcut_sa(&h, 3, &b, &SolverOptions::default()).unwrap();
    assert_eq!(v3, int(brute_maxcut(3, h.edges()) as i64));
}

#[test]
fn full_sa_with_all_vertices_is_exact() {
    for name in ["p3", "c5", "k4"] {
        let h = MaxCutInstance::named(name).unwrap();
        let n = h.num_vertices() as usize;
        let (v, _) = solve_maxcut_sa(&h, n, &Budgets::default(), &SolverOptions::default()).unwrap();
        assert_eq!(v, int(brute_maxcut(h.num_vertices(), h.edges()) as i64), "{name}");
    }
}
