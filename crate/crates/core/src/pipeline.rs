//! End-to-end solve: decomposition → balancing and root choice → pared LP
//! with ratio search → derandomized rounding.

use num_traits::Zero;
use serde::Serialize;

use crate::budget::Budgets;
use crate::decomposition::{balance, depth_bound, exact_decomposition, validate, TreeDecomposition};
use crate::error::{Error, Result};
use crate::graph::{evaluate_cut, SparsestCutInstance, VertexId};
use crate::rational::{int, serialize_opt_rational, serialize_rational, Rational};
use crate::rounding::{derandomize, Derandomized};
use crate::sa::{pared_cost, ratio_search, RatioSearch, SearchOptions};

/// Picks the cheapest binary, shallow rooting of `td`; falls back to
/// [`balance`] when no rooting meets the depth bound.
pub fn prepare_decomposition(instance: &SparsestCutInstance, td: &TreeDecomposition) -> Result<TreeDecomposition> {
    validate(instance, td).into_result()?;
    let base = td.compacted();
    let bound = depth_bound(base.vertex_set().len());
    let mut best: Option<(u128, TreeDecomposition)> = None;
    for root in 0..base.num_bags() {
        let cand = base.rerooted(root)?.binarized();
        if cand.depth() > bound {
            continue;
        }
        let cost = pared_cost(instance, &cand);
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, cand));
        }
    }
    match best {
        Some((_, td)) => Ok(td),
        None => balance(instance, &base),
    }
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub decomposition: TreeDecomposition,
    pub search: RatioSearch,
    pub rounding: Derandomized,
    pub report: SolveReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub vertices: usize,
    pub input_width: usize,
    pub width: usize,
    pub depth: usize,
    pub lp_variables: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub alpha: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub lp_value: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub lp_ratio: Rational,
    pub search_iterations: usize,
    pub cut: Vec<VertexId>,
    #[serde(serialize_with = "serialize_rational")]
    pub cut_capacity: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub cut_demand: Rational,
    #[serde(serialize_with = "serialize_opt_rational")]
    pub sparsity: Option<Rational>,
    /// Cut sparsity is at most twice the LP ratio.
    pub within_factor_two: bool,
    #[serde(serialize_with = "serialize_rational")]
    pub final_potential: Rational,
}

/// Runs the pipeline. Without a decomposition one is computed exactly
/// (subject to the decomposition budget).
pub fn solve(
    instance: &SparsestCutInstance,
    td: Option<&TreeDecomposition>,
    options: &SearchOptions,
    budgets: &Budgets,
) -> Result<Solved> {
    let computed;
    let td = match td {
        Some(td) => td,
        None => {
            computed = exact_decomposition(instance, budgets.decomposition_vertices)?;
            &computed
        }
    };
    let input_width = td.width();
    let prepared = prepare_decomposition(instance, td)?;
    let search = ratio_search(instance, &prepared, options, budgets)?;
    let rounding = derandomize(instance, &search.solution, &prepared)?;
    let cut = rounding.cut.canonical(instance);
    let sp = evaluate_cut(instance, &cut)?;
    if sp.cut_demand.is_zero() {
        return Err(Error::invariant("rounded cut separates no demand"));
    }
    let ratio = sp.ratio.clone().expect("positive demand");
    let report = SolveReport {
        vertices: instance.num_vertices(),
        input_width,
        width: prepared.width(),
        depth: prepared.depth(),
        lp_variables: search.lp.num_variables(),
        alpha: search.alpha.clone(),
        lp_value: search.lp_value.clone(),
        lp_ratio: search.ratio.clone(),
        search_iterations: search.trace.len(),
        cut: cut.side().iter().copied().collect(),
        cut_capacity: sp.cut_capacity.clone(),
        cut_demand: sp.cut_demand.clone(),
        within_factor_two: ratio <= int(2) * &search.ratio,
        sparsity: Some(ratio),
        final_potential: rounding.final_potential().clone(),
    };
    Ok(Solved {
        decomposition: prepared,
        search,
        rounding,
        report,
    })
}
