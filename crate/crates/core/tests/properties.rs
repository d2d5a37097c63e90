mod common;

use common::*;
use num_traits::Zero;
use proptest::prelude::*;
use treecut::budget::Budgets;
use treecut::decomposition::{depth_bound, exact_decomposition, rebalance, validate};
use treecut::format::{parse_decomposition, parse_instance, write_decomposition, write_instance};
use treecut::graph::{evaluate_cut, Cut};
use treecut::pipeline::prepare_decomposition;
use treecut::rounding::{derandomize, expected_potential, separation_probability, Sampler};
use treecut::sa::{ratio_search, AlphaMode, SearchOptions};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn instance_text_round_trips(inst in instance(9)) {
        let text = write_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(write_instance(&back), text);
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn decomposition_text_round_trips(inst in instance(8)) {
        let td = exact_decomposition(&inst, 18).unwrap();
        let back = parse_decomposition(&write_decomposition(&td, inst.num_vertices() as u32)).unwrap();
        prop_assert!(validate(&inst, &back).is_ok());
        prop_assert_eq!(back.width(), td.width());
    }

    #[test]
    fn sparsity_ignores_side(inst in instance(8), mask in any::<u16>()) {
        let side: Vec<_> = inst.vertices().iter().enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| *v).collect();
        let cut = Cut::new(side);
        let a = evaluate_cut(&inst, &cut).unwrap();
        let b = evaluate_cut(&inst, &cut.complement(&inst)).unwrap();
        prop_assert_eq!(&a, &b);
        let c = cut.canonical(&inst);
        prop_assert!(c.contains(inst.vertices()[0]));
        prop_assert_eq!(evaluate_cut(&inst, &c).unwrap(), a);
    }

    #[test]
    fn rebalanced_decompositions_are_shallow(inst in instance(9)) {
        let td = exact_decomposition(&inst, 18).unwrap();
        let b = rebalance(&inst, &td).unwrap();
        prop_assert!(validate(&inst, &b).is_ok());
        prop_assert!(b.is_binary());
        prop_assert!(b.depth() <= depth_bound(inst.num_vertices()));
        prop_assert!(b.width() < 3 * (td.width() + 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lp_solution_is_consistent_and_rounds(inst in instance(7)) {
        let b = Budgets::default();
        let td = prepare_decomposition(&inst, &exact_decomposition(&inst, 18).unwrap()).unwrap();
        let s = ratio_search(&inst, &td, &SearchOptions::default(), &b).unwrap();
        s.solution.check().unwrap();
        let values = s.lp.encode(&s.solution).unwrap();
        prop_assert!(s.lp.program_with_alpha(&s.alpha).first_violation(&values).is_none());

        // Pairs sharing a bag are separated with exactly their LP distance.
        for e in inst.supply_edges() {
            let p = separation_probability(&s.solution, &td, e.u, e.v).unwrap();
            prop_assert_eq!(p, s.solution.y(e.u, e.v).unwrap());
        }

        let d = derandomize(&inst, &s.solution, &td).unwrap();
        prop_assert_eq!(&d.initial_potential, &expected_potential(&inst, &s.solution, &td).unwrap());
        prop_assert!(!(d.initial_potential > Zero::zero()));
        let trace = d.trace();
        prop_assert!(trace.windows(2).all(|w| w[1] <= w[0]));

        let sampler = Sampler::new(&s.solution, &td).unwrap();
        prop_assert_eq!(sampler.sample_indexed(7, 3).unwrap(), sampler.sample_indexed(7, 3).unwrap());

        let grid = ratio_search(&inst, &td, &SearchOptions { mode: AlphaMode::Grid, ..SearchOptions::default() }, &b).unwrap();
        prop_assert!(grid.ratio >= s.ratio);
    }
}
