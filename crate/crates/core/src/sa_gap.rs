//! Local distributions versus Sherali-Adams solutions, and the recursive
//! lift of a MaxCut solution on `H` to a Sparsest Cut solution on the
//! fractal `G_ℓ` built from `H`'s building block (without terminal demand).
//!
//! The lift of a set `T` first extends it to `T'`: add both terminals and,
//! for every copy whose interior meets `T`, the endpoints of the replaced
//! edge, recursing into the copy. The random subset `X` then contains `s`,
//! never `t`; the `H`-part `T'_1` is drawn from the base distribution and
//! complemented (inside `T'_1`) with probability 1/2; a copy whose
//! endpoints fall on one side goes wholly to that side, a split copy
//! recurses with its `s` on the `X` side. Distributions are computed
//! exactly by dynamic programming over the copy tree.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::generators::{
    block_decomposition, building_block, power, MaxCutInstance, PoweredInstance, BLOCK_S, BLOCK_T,
};
use crate::graph::VertexId;
use crate::lp::SolverOptions;
use crate::oracle::{exact_maxcut, exact_sparsest_cut};
use crate::rational::{format_rational, int, ratio, serialize_rational, Rational};
use crate::sa::{marginalize, members, solve_maxcut_sa, SaSolution, SetFamily};

/// Per-set distributions over subsets, stored as masks over each sorted set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDistributionFamily {
    family: SetFamily,
    dists: Vec<Vec<Rational>>,
}

/// A failed marginal-consistency check `D_Q(A) = D_S({B : B ∩ Q = A})`,
/// or a set whose distribution is not a probability distribution (then
/// `q == s`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyViolation {
    pub q: Vec<VertexId>,
    pub s: Vec<VertexId>,
    pub a: Vec<VertexId>,
}

impl std::fmt::Display for ConsistencyViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ids = |v: &[VertexId]| v.iter().map(|x| x.0).collect::<Vec<_>>();
        if self.q == self.s {
            write!(f, "D_{:?} is not a probability distribution", ids(&self.s))
        } else {
            write!(
                f,
                "D_{:?}({:?}) differs from the marginal of D_{:?}",
                ids(&self.q),
                ids(&self.a),
                ids(&self.s)
            )
        }
    }
}

impl LocalDistributionFamily {
    pub fn new(entries: impl IntoIterator<Item = (Vec<VertexId>, Vec<Rational>)>) -> Result<Self> {
        let mut map: BTreeMap<Vec<VertexId>, Vec<Rational>> = BTreeMap::new();
        for (mut s, d) in entries {
            let sorted = {
                let mut t = s.clone();
                t.sort_unstable();
                t.dedup();
                t
            };
            if sorted != s {
                return Err(Error::invalid("distribution sets must be sorted and duplicate-free"));
            }
            if d.len() != 1 << s.len() {
                return Err(Error::invalid("distribution length must be 2^|S|"));
            }
            s.shrink_to_fit();
            map.insert(s, d);
        }
        let family = SetFamily::new(map.keys().cloned());
        let dists = family.sets().iter().map(|s| map[s].clone()).collect();
        Ok(LocalDistributionFamily { family, dists })
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    pub fn distribution(&self, set: &[VertexId]) -> Option<&[Rational]> {
        self.family.index_of(set).map(|i| self.dists[i].as_slice())
    }

    /// First violated normalisation or consistency condition.
    pub fn validate(&self) -> Option<ConsistencyViolation> {
        let sets = self.family.sets();
        for (s, d) in sets.iter().zip(&self.dists) {
            if d.iter().any(Signed::is_negative) || d.iter().sum::<Rational>() != Rational::one() {
                return Some(ConsistencyViolation { q: s.clone(), s: s.clone(), a: Vec::new() });
            }
        }
        for (i, q) in sets.iter().enumerate() {
            for (j, s) in sets.iter().enumerate() {
                if i == j || q.len() >= s.len() || !q.iter().all(|v| s.binary_search(v).is_ok()) {
                    continue;
                }
                let m = marginalize(&self.dists[j], s, q).unwrap();
                if let Some(a) = (0..m.len()).find(|&a| m[a] != self.dists[i][a]) {
                    return Some(ConsistencyViolation { q: q.clone(), s: s.clone(), a: members(q, a) });
                }
            }
        }
        None
    }
}

/// `D_S(T) = x(S, T)` for every set of a feasible solution.
pub fn sa_to_distributions(solution: &SaSolution) -> Result<LocalDistributionFamily> {
    solution.check()?;
    LocalDistributionFamily::new(
        solution
            .family()
            .sets()
            .iter()
            .cloned()
            .zip(solution.values().iter().cloned()),
    )
}

/// `x(S, T) = D_S(T)`; refuses inconsistent families with a witness.
pub fn distributions_to_sa(family: &LocalDistributionFamily) -> Result<SaSolution> {
    if let Some(v) = family.validate() {
        return Err(Error::invalid(format!("inconsistent local distributions: {v}")));
    }
    SaSolution::new(family.family.clone(), family.dists.clone())
}

/// Base MaxCut solution, the fractal instance and lookup tables.
#[derive(Debug, Clone)]
pub struct LiftContext {
    pub h: MaxCutInstance,
    /// Round budget of the base solution.
    pub rounds: usize,
    pub base: SaSolution,
    /// Base MaxCut LP value `c·m`.
    pub base_value: Rational,
    pub powered: PoweredInstance,
    s_idx: usize,
    t_idx: usize,
}

impl LiftContext {
    /// Solves the `r`-round MaxCut relaxation of `H` and powers its
    /// building block `levels` times.
    pub fn new(h: &MaxCutInstance, rounds: usize, levels: usize, budgets: &Budgets, solver: &SolverOptions) -> Result<Self> {
        let (value, base) = solve_maxcut_sa(h, rounds, budgets, solver)?;
        Self::from_solution(h, rounds, value, base, levels, budgets)
    }

    pub fn from_solution(
        h: &MaxCutInstance,
        rounds: usize,
        base_value: Rational,
        base: SaSolution,
        levels: usize,
        budgets: &Budgets,
    ) -> Result<Self> {
        let block = building_block(h, false)?;
        let powered = power(&block, &block_decomposition(h), levels, budgets)?;
        let s_idx = block.index_of(BLOCK_S).unwrap();
        let t_idx = block.index_of(BLOCK_T).unwrap();
        Ok(LiftContext {
            h: h.clone(),
            rounds,
            base,
            base_value,
            powered,
            s_idx,
            t_idx,
        })
    }

    /// `c = (base value) / m`.
    pub fn c(&self) -> Rational {
        &self.base_value / int(self.h.num_edges() as i64)
    }

    fn is_terminal(&self, i: usize) -> bool {
        i == self.s_idx || i == self.t_idx
    }

    /// `H` vertex behind a non-terminal base index.
    fn h_vertex(&self, i: usize) -> VertexId {
        VertexId(self.powered.base.vertices()[i].0 - 2)
    }

    /// Child of `c` on the copy-tree path down to `o`.
    fn child_towards(&self, c: usize, mut o: usize) -> Option<usize> {
        loop {
            let p = self.powered.copies[o].parent?;
            if p == c {
                return Some(o);
            }
            o = p;
        }
    }
}

/// Recursive structure of an extended set.
#[derive(Debug, Clone)]
struct ExtNode {
    copy: usize,
    /// Non-terminal base indices of this copy that lie in `T'`.
    own: Vec<usize>,
    /// `(base edge, subtree)` per copy whose interior meets `T`.
    children: Vec<(usize, ExtNode)>,
}

/// `T'` with its top-level part `T'_1 = T' ∩ V_1` (terminals included).
#[derive(Debug, Clone)]
pub struct ExtendedSet {
    pub set: BTreeSet<VertexId>,
    pub top: Vec<VertexId>,
    tree: ExtNode,
}

fn extend_node(ctx: &LiftContext, c: usize, t: &[VertexId]) -> ExtNode {
    let copy = &ctx.powered.copies[c];
    let mut own: BTreeSet<usize> = BTreeSet::new();
    let mut groups: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
    for w in t {
        let (o, i) = ctx.powered.origin[w];
        if o == c {
            if !ctx.is_terminal(i) {
                own.insert(i);
            }
        } else {
            let child = ctx.child_towards(c, o).expect("vertex inside this copy");
            let k = ctx.powered.copies[child].edge.unwrap();
            groups.entry(k).or_default().push(*w);
        }
    }
    let mut children = Vec::new();
    for (k, group) in groups {
        let e = &ctx.powered.base.supply_edges()[k];
        for end in [e.u, e.v] {
            let i = ctx.powered.base.index_of(end).unwrap();
            if !ctx.is_terminal(i) {
                own.insert(i);
            }
        }
        children.push((k, extend_node(ctx, copy.children[k], &group)));
    }
    ExtNode {
        copy: c,
        own: own.into_iter().collect(),
        children,
    }
}

fn collect(ctx: &LiftContext, node: &ExtNode, out: &mut BTreeSet<VertexId>) {
    let map = &ctx.powered.copies[node.copy].map;
    out.insert(map[ctx.s_idx]);
    out.insert(map[ctx.t_idx]);
    out.extend(node.own.iter().map(|&i| map[i]));
    for (_, child) in &node.children {
        collect(ctx, child, out);
    }
}

/// Extends `T` to `T'`.
pub fn extend_set(ctx: &LiftContext, t: &[VertexId]) -> Result<ExtendedSet> {
    let (s, tt) = (ctx.powered.copies[0].map[ctx.s_idx], ctx.powered.copies[0].map[ctx.t_idx]);
    for w in t {
        if !ctx.powered.origin.contains_key(w) {
            return Err(Error::invalid(format!("vertex {w} is not in the lifted instance")));
        }
    }
    let inner: Vec<VertexId> = t.iter().copied().filter(|w| *w != s && *w != tt).collect();
    let tree = extend_node(ctx, 0, &inner);
    let mut set = BTreeSet::new();
    collect(ctx, &tree, &mut set);
    let map = &ctx.powered.copies[0].map;
    let mut top = vec![s, tt];
    top.extend(tree.own.iter().map(|&i| map[i]));
    top.sort_unstable();
    Ok(ExtendedSet { set, top, tree })
}

type MaskDist = HashMap<u64, Rational>;

fn convolve(a: &MaskDist, b: &MaskDist) -> MaskDist {
    let mut out = MaskDist::new();
    for (x, p) in a {
        for (y, q) in b {
            *out.entry(x | y).or_insert_with(Rational::zero) += p * q;
        }
    }
    out
}

struct Lifter<'a> {
    ctx: &'a LiftContext,
    index: HashMap<VertexId, usize>,
}

impl Lifter<'_> {
    fn bit(&self, v: VertexId) -> u64 {
        1 << self.index[&v]
    }

    /// Mask of every `T'` vertex strictly inside the copy of `node`.
    fn interior(&self, node: &ExtNode) -> u64 {
        let map = &self.ctx.powered.copies[node.copy].map;
        let mut m: u64 = node.own.iter().map(|&i| self.bit(map[i])).fold(0, |a, b| a | b);
        for (_, child) in &node.children {
            m |= self.interior(child);
        }
        m
    }

    /// Distribution of `X ∩ interior` for the copy of `node`, with the
    /// copy's `s` in `X` and its `t` outside.
    fn run(&self, node: &ExtNode) -> Result<MaskDist> {
        let ctx = self.ctx;
        let map = &ctx.powered.copies[node.copy].map;
        let r: Vec<VertexId> = node.own.iter().map(|&i| ctx.h_vertex(i)).collect();
        if r.len() > ctx.rounds {
            return Err(Error::Budget(format!(
                "lift needs a base distribution on {} vertices but the base solution has {} rounds",
                r.len(),
                ctx.rounds
            )));
        }
        let base = if r.is_empty() {
            vec![Rational::one()]
        } else {
            ctx.base
                .marginal(&r)
                .ok_or_else(|| Error::invalid("base solution does not cover the extended set"))?
        };
        let children: Vec<(usize, MaskDist, u64)> = node
            .children
            .iter()
            .map(|(k, child)| Ok((*k, self.run(child)?, self.interior(child))))
            .collect::<Result<_>>()?;
        let own_bits: Vec<u64> = node.own.iter().map(|&i| self.bit(map[i])).collect();
        let full = (1usize << r.len()) - 1;
        let half = ratio(1, 2);
        let mut out = MaskDist::new();
        for (y, p) in base.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for chosen in [y, full ^ y] {
                let weight = p * &half;
                let in_x = |i: usize| {
                    if i == ctx.s_idx {
                        true
                    } else if i == ctx.t_idx {
                        false
                    } else {
                        let k = node.own.binary_search(&i).expect("endpoint in T'_1");
                        chosen >> k & 1 == 1
                    }
                };
                let own_mask = own_bits
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| chosen >> k & 1 == 1)
                    .fold(0u64, |a, (_, b)| a | b);
                let mut acc: MaskDist = MaskDist::from([(own_mask, weight)]);
                for (k, dist, interior) in &children {
                    let e = &ctx.powered.base.supply_edges()[*k];
                    let su = in_x(ctx.powered.base.index_of(e.u).unwrap());
                    let sv = in_x(ctx.powered.base.index_of(e.v).unwrap());
                    acc = match (su, sv) {
                        (true, false) => convolve(&acc, dist),
                        (false, true) => {
                            let flipped: MaskDist = dist.iter().map(|(m, q)| (interior ^ m, q.clone())).collect();
                            convolve(&acc, &flipped)
                        }
                        (side, _) => {
                            let fill = if side { *interior } else { 0 };
                            acc.into_iter().map(|(m, q)| (m | fill, q)).collect()
                        }
                    };
                }
                for (m, q) in acc {
                    *out.entry(m).or_insert_with(Rational::zero) += q;
                }
            }
        }
        Ok(out)
    }
}

/// Exact distribution `D_T` of the lifted process, as a vector over
/// subset masks of the sorted set `T`.
pub fn lift_distribution(ctx: &LiftContext, t: &[VertexId]) -> Result<Vec<Rational>> {
    let mut sorted = t.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let ext = extend_set(ctx, &sorted)?;
    if ext.set.len() > 63 {
        return Err(Error::Budget("extended set too large".into()));
    }
    let index: HashMap<VertexId, usize> = ext.set.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let lifter = Lifter { ctx, index };
    let dist = lifter.run(&ext.tree)?;
    let s = ctx.powered.copies[0].map[ctx.s_idx];
    let mut out = vec![Rational::zero(); 1 << sorted.len()];
    for (m, p) in dist {
        let mask = sorted.iter().enumerate().fold(0usize, |acc, (k, v)| {
            let inside = *v == s || (*v != ctx.powered.copies[0].map[ctx.t_idx] && m & lifter.bit(*v) != 0);
            acc | (usize::from(inside) << k)
        });
        out[mask] += p;
    }
    Ok(out)
}

/// Lifted distributions on every set of `family`.
pub fn lifted_family(ctx: &LiftContext, family: &SetFamily) -> Result<LocalDistributionFamily> {
    let dists: Vec<Vec<Rational>> = family
        .sets()
        .par_iter()
        .map(|s| lift_distribution(ctx, s))
        .collect::<Result<_>>()?;
    LocalDistributionFamily::new(family.sets().iter().cloned().zip(dists))
}

/// `y_uv` of the lifted solution.
pub fn lifted_y(ctx: &LiftContext, u: VertexId, v: VertexId) -> Result<Rational> {
    let d = lift_distribution(ctx, &[u, v])?;
    Ok(&d[1] + &d[2])
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftedValue {
    #[serde(serialize_with = "serialize_rational")]
    pub capacity: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub demand: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub sparsity: Rational,
}

/// `Σ cap·y`, `Σ dem·y` and their ratio for the lifted solution.
pub fn lifted_value(ctx: &LiftContext) -> Result<LiftedValue> {
    let inst = &ctx.powered.instance;
    let weigh = |edges: &[crate::graph::Edge]| -> Result<Rational> {
        let parts: Vec<Rational> = edges
            .par_iter()
            .map(|e| Ok(&e.weight * lifted_y(ctx, e.u, e.v)?))
            .collect::<Result<_>>()?;
        Ok(parts.into_iter().sum())
    };
    let capacity = weigh(inst.supply_edges())?;
    let demand = weigh(inst.demand_edges())?;
    if demand.is_zero() {
        return Err(Error::invariant("lifted solution separates no demand"));
    }
    let sparsity = &capacity / &demand;
    Ok(LiftedValue { capacity, demand, sparsity })
}

/// Outcome of the exhaustive `D_Q(A) = D_T(A) + D_T(A + q)` check.
#[derive(Debug, Clone, Serialize)]
pub struct LiftConsistency {
    pub sets_checked: usize,
    pub pairs_checked: usize,
    pub violation: Option<ConsistencyViolation>,
}

fn subsets_up_to(vertices: &[VertexId], k: usize) -> Vec<Vec<VertexId>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![(Vec::<VertexId>::new(), 0usize)];
    for _ in 0..k {
        let mut next = Vec::new();
        for (set, start) in &frontier {
            for (i, v) in vertices.iter().enumerate().skip(*start) {
                let mut s = set.clone();
                s.push(*v);
                out.push(s.clone());
                next.push((s, i + 1));
            }
        }
        frontier = next;
    }
    out
}

/// Checks marginal consistency of the lift for every `T` with
/// `1 ≤ |T| ≤ max_size` and every `Q = T − q`.
pub fn check_lift_consistency(ctx: &LiftContext, max_size: usize) -> Result<LiftConsistency> {
    let vertices = ctx.powered.instance.vertices().to_vec();
    let sets = subsets_up_to(&vertices, max_size);
    let dists: Vec<Vec<Rational>> = sets
        .par_iter()
        .map(|s| lift_distribution(ctx, s))
        .collect::<Result<_>>()?;
    let lookup: HashMap<&[VertexId], &Vec<Rational>> =
        sets.iter().map(Vec::as_slice).zip(dists.iter()).collect();
    let mut pairs = 0;
    for (t, dt) in sets.iter().zip(&dists) {
        if dt.iter().any(Signed::is_negative) || dt.iter().sum::<Rational>() != Rational::one() {
            return Ok(LiftConsistency {
                sets_checked: sets.len(),
                pairs_checked: pairs,
                violation: Some(ConsistencyViolation { q: t.clone(), s: t.clone(), a: Vec::new() }),
            });
        }
        for drop in 0..t.len() {
            let q: Vec<VertexId> = t.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, v)| *v).collect();
            let dq = lookup[q.as_slice()];
            let m = marginalize(dt, t, &q).unwrap();
            pairs += 1;
            if let Some(a) = (0..m.len()).find(|&a| m[a] != dq[a]) {
                return Ok(LiftConsistency {
                    sets_checked: sets.len(),
                    pairs_checked: pairs,
                    violation: Some(ConsistencyViolation { q: q.clone(), s: t.clone(), a: members(&q, a) }),
                });
            }
        }
    }
    Ok(LiftConsistency {
        sets_checked: sets.len(),
        pairs_checked: pairs,
        violation: None,
    })
}

/// One stage of the gap experiment.
#[derive(Debug, Clone, Serialize)]
pub struct Stage {
    pub name: &'static str,
    pub ok: bool,
    pub message: Option<String>,
}

/// Integrality-gap report for `(H, r, ℓ)`. `gap_ratio` is `Φ(G_ℓ)` divided
/// by the lifted LP sparsity; `Φ` comes from enumeration when the instance
/// is small enough and from `1/(1 + (ℓ−1)s)` otherwise.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub base: String,
    pub rounds: usize,
    pub levels: usize,
    pub vertices: Option<usize>,
    pub m: usize,
    #[serde(serialize_with = "crate::rational::serialize_opt_rational")]
    pub base_sa_value: Option<Rational>,
    #[serde(serialize_with = "crate::rational::serialize_opt_rational")]
    pub c: Option<Rational>,
    pub mc: Option<usize>,
    #[serde(serialize_with = "crate::rational::serialize_opt_rational")]
    pub s: Option<Rational>,
    pub lifted: Option<LiftedValue>,
    #[serde(serialize_with = "crate::rational::serialize_opt_rational")]
    pub phi_oracle: Option<Rational>,
    #[serde(serialize_with = "crate::rational::serialize_opt_rational")]
    pub phi_formula: Option<Rational>,
    #[serde(serialize_with = "crate::rational::serialize_opt_rational")]
    pub gap_ratio: Option<Rational>,
    /// `ℓc / (1 + (ℓ−1)s)` from the LP value and the exact MaxCut.
    #[serde(serialize_with = "crate::rational::serialize_opt_rational")]
    pub gap_formula: Option<Rational>,
    pub stages: Vec<Stage>,
}

impl GapReport {
    pub fn csv_header() -> &'static str {
        "base,rounds,levels,vertices,m,base_sa_value,c,mc,s,lifted_capacity,lifted_demand,lifted_sparsity,phi_oracle,phi_formula,gap_ratio,gap_formula"
    }

    pub fn csv_row(&self) -> String {
        let r = |x: &Option<Rational>| x.as_ref().map(format_rational).unwrap_or_default();
        let l = |f: fn(&LiftedValue) -> &Rational| self.lifted.as_ref().map(|v| format_rational(f(v))).unwrap_or_default();
        [
            self.base.clone(),
            self.rounds.to_string(),
            self.levels.to_string(),
            self.vertices.map(|v| v.to_string()).unwrap_or_default(),
            self.m.to_string(),
            r(&self.base_sa_value),
            r(&self.c),
            self.mc.map(|v| v.to_string()).unwrap_or_default(),
            r(&self.s),
            l(|v| &v.capacity),
            l(|v| &v.demand),
            l(|v| &v.sparsity),
            r(&self.phi_oracle),
            r(&self.phi_formula),
            r(&self.gap_ratio),
            r(&self.gap_formula),
        ]
        .join(",")
    }

    pub fn complete(&self) -> bool {
        self.stages.iter().all(|s| s.ok)
    }
}

/// Runs base LP, exact MaxCut, lift, and (when enumerable) the exact
/// sparsest cut of `G_ℓ`. A failing stage is recorded and later stages
/// that depend on it are skipped.
pub fn gap_experiment(
    name: &str,
    h: &MaxCutInstance,
    rounds: usize,
    levels: usize,
    budgets: &Budgets,
    solver: &SolverOptions,
) -> GapReport {
    let m = h.num_edges();
    let mut report = GapReport {
        base: name.to_string(),
        rounds,
        levels,
        vertices: None,
        m,
        base_sa_value: None,
        c: None,
        mc: None,
        s: None,
        lifted: None,
        phi_oracle: None,
        phi_formula: None,
        gap_ratio: None,
        gap_formula: None,
        stages: Vec::new(),
    };
    let stage = |report: &mut GapReport, name: &'static str, r: std::result::Result<(), Error>| {
        let ok = r.is_ok();
        report.stages.push(Stage { name, ok, message: r.err().map(|e| e.to_string()) });
        ok
    };

    let mc = exact_maxcut(h, budgets);
    if let Ok((_, mc)) = &mc {
        report.mc = Some(*mc);
        let s = ratio(*mc as i64, m as i64);
        report.phi_formula = Some(Rational::one() / (Rational::one() + int(levels as i64 - 1) * &s));
        report.s = Some(s);
    }
    stage(&mut report, "maxcut", mc.map(|_| ()));

    let ctx = LiftContext::new(h, rounds, levels, budgets, solver);
    if let Ok(ctx) = &ctx {
        report.base_sa_value = Some(ctx.base_value.clone());
        report.c = Some(ctx.c());
        report.vertices = Some(ctx.powered.instance.num_vertices());
    }
    let ctx = match ctx {
        Ok(c) => {
            stage(&mut report, "base_lp", Ok(()));
            c
        }
        Err(e) => {
            stage(&mut report, "base_lp", Err(e));
            return report;
        }
    };
    if let (Some(c), Some(s)) = (&report.c, &report.s) {
        report.gap_formula = Some(int(levels as i64) * c / (Rational::one() + int(levels as i64 - 1) * s));
    }
    let lifted = lifted_value(&ctx);
    if let Ok(v) = &lifted {
        report.lifted = Some(v.clone());
    }
    stage(&mut report, "lift", lifted.map(|_| ()));

    let phi = exact_sparsest_cut(&ctx.powered.instance, budgets);
    if let Ok((_, sp)) = &phi {
        report.phi_oracle = sp.ratio.clone();
    }
    stage(&mut report, "oracle", phi.map(|_| ()));

    let phi = report.phi_oracle.clone().or_else(|| report.phi_formula.clone());
    if let (Some(phi), Some(l)) = (phi, &report.lifted) {
        report.gap_ratio = Some(phi / &l.sparsity);
    }
    report
}
