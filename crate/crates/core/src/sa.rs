//! Sherali-Adams systems: the full `r`-round polytope, the MaxCut objective
//! over it, and the pared-down Sparsest Cut LP over root-path unions,
//! together with the search for the best demand target.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::budget::Budgets;
use crate::decomposition::TreeDecomposition;
use crate::error::{Error, Result};
use crate::generators::MaxCutInstance;
use crate::graph::{Cut, SparsestCutInstance, VertexId};
use crate::lp::{self, Arithmetic, LpProgram, LpStatus, Relation, Sense, SolverOptions};
use crate::rational::{to_f64, Rational};

/// Positions of the elements of `sub` inside the sorted set `sup`.
pub fn positions(sub: &[VertexId], sup: &[VertexId]) -> Option<Vec<usize>> {
    sub.iter().map(|v| sup.binary_search(v).ok()).collect()
}

/// Restricts a subset mask over `sup` to the sub-set given by `pos`.
pub fn restrict_mask(mask: usize, pos: &[usize]) -> usize {
    pos.iter()
        .enumerate()
        .fold(0, |acc, (k, &p)| acc | (((mask >> p) & 1) << k))
}

/// Mask of the elements of `set` that lie in `side`.
pub fn mask_of(set: &[VertexId], side: &BTreeSet<VertexId>) -> usize {
    set.iter()
        .enumerate()
        .filter(|(_, v)| side.contains(v))
        .fold(0, |acc, (k, _)| acc | (1 << k))
}

/// Vertices of `set` selected by `mask`.
pub fn members(set: &[VertexId], mask: usize) -> Vec<VertexId> {
    set.iter()
        .enumerate()
        .filter(|(k, _)| (mask >> k) & 1 == 1)
        .map(|(_, v)| *v)
        .collect()
}

/// Marginal of a distribution over subsets of `sup` on the subset `sub`.
pub fn marginalize(dist: &[Rational], sup: &[VertexId], sub: &[VertexId]) -> Option<Vec<Rational>> {
    let pos = positions(sub, sup)?;
    let mut out = vec![Rational::zero(); 1 << sub.len()];
    for (mask, p) in dist.iter().enumerate() {
        if !p.is_zero() {
            out[restrict_mask(mask, &pos)] += p;
        }
    }
    Some(out)
}

fn is_subset(a: &[VertexId], b: &[VertexId]) -> bool {
    a.iter().all(|v| b.binary_search(v).is_ok())
}

/// Canonically ordered family of vertex sets (by size, then lexicographic).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetFamily {
    sets: Vec<Vec<VertexId>>,
    #[serde(skip)]
    index: HashMap<Vec<VertexId>, usize>,
}

impl SetFamily {
    pub fn new(sets: impl IntoIterator<Item = Vec<VertexId>>) -> Self {
        let mut uniq: BTreeSet<(usize, Vec<VertexId>)> = BTreeSet::new();
        for mut s in sets {
            s.sort_unstable();
            s.dedup();
            uniq.insert((s.len(), s));
        }
        let sets: Vec<Vec<VertexId>> = uniq.into_iter().map(|(_, s)| s).collect();
        let index = sets.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        SetFamily { sets, index }
    }

    pub fn sets(&self) -> &[Vec<VertexId>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn index_of(&self, set: &[VertexId]) -> Option<usize> {
        self.index.get(set).copied()
    }

    /// First family set (in canonical order) containing `set`.
    pub fn first_container(&self, set: &[VertexId]) -> Option<usize> {
        self.sets.iter().position(|s| is_subset(set, s))
    }

    /// Indices of sets not strictly contained in another family set.
    pub fn maximal(&self) -> Vec<usize> {
        (0..self.sets.len())
            .filter(|&i| {
                !self
                    .sets
                    .iter()
                    .any(|t| t.len() > self.sets[i].len() && is_subset(&self.sets[i], t))
            })
            .collect()
    }
}

/// A valuation `x(S, T)` for every set `S` of a family, stored as a
/// distribution over subset masks of `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaSolution {
    family: SetFamily,
    values: Vec<Vec<Rational>>,
}

impl SaSolution {
    pub fn new(family: SetFamily, values: Vec<Vec<Rational>>) -> Result<Self> {
        if values.len() != family.len() {
            return Err(Error::invalid("one value vector per family set is required"));
        }
        for (s, v) in family.sets().iter().zip(&values) {
            if v.len() != 1 << s.len() {
                return Err(Error::invalid("value vector length must be 2^|S|"));
            }
        }
        Ok(SaSolution { family, values })
    }

    /// The solution `x(S, T) = [A ∩ S = T]` encoding a cut.
    pub fn integral(family: &SetFamily, cut: &Cut) -> Self {
        let values = family
            .sets()
            .iter()
            .map(|s| {
                let mut v = vec![Rational::zero(); 1 << s.len()];
                v[mask_of(s, cut.side())] = Rational::one();
                v
            })
            .collect();
        SaSolution {
            family: family.clone(),
            values,
        }
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn distribution(&self, set: &[VertexId]) -> Option<&[Rational]> {
        self.family.index_of(set).map(|i| self.values[i].as_slice())
    }

    /// `x(S, T)` for a family set `S` and `T ⊆ S`.
    pub fn value(&self, set: &[VertexId], t: &[VertexId]) -> Option<&Rational> {
        let i = self.family.index_of(set)?;
        let pos = positions(t, set)?;
        let mask = pos.iter().fold(0, |acc, p| acc | (1 << p));
        Some(&self.values[i][mask])
    }

    /// Marginal distribution on any subset of some family set.
    pub fn marginal(&self, set: &[VertexId]) -> Option<Vec<Rational>> {
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(i) = self.family.index_of(&sorted) {
            return Some(self.values[i].clone());
        }
        let i = self.family.first_container(&sorted)?;
        marginalize(&self.values[i], &self.family.sets()[i], &sorted)
    }

    /// `y_uv = x({u,v},{u}) + x({u,v},{v})`.
    pub fn y(&self, u: VertexId, v: VertexId) -> Result<Rational> {
        if u == v {
            return Ok(Rational::zero());
        }
        let m = self
            .marginal(&[u, v])
            .ok_or_else(|| Error::invalid(format!("pair ({u}, {v}) lies in no family set")))?;
        Ok(&m[1] + &m[2])
    }

    /// All pairs that lie together in some family set.
    pub fn family_pairs(&self) -> Vec<(VertexId, VertexId)> {
        let mut pairs = BTreeSet::new();
        for s in self.family.sets() {
            for (i, a) in s.iter().enumerate() {
                for b in &s[i + 1..] {
                    pairs.insert((*a, *b));
                }
            }
        }
        pairs.into_iter().collect()
    }

    /// Normalisation, nonnegativity and marginal consistency on every
    /// nested pair of family sets.
    pub fn check(&self) -> Result<()> {
        for (s, v) in self.family.sets().iter().zip(&self.values) {
            if v.iter().any(Signed::is_negative) {
                return Err(Error::invariant(format!("negative value on set {:?}", ids(s))));
            }
            if v.iter().sum::<Rational>() != Rational::one() {
                return Err(Error::invariant(format!("values on set {:?} do not sum to 1", ids(s))));
            }
        }
        let sets = self.family.sets();
        for (i, small) in sets.iter().enumerate() {
            for (j, big) in sets.iter().enumerate() {
                if i == j || small.len() >= big.len() || !is_subset(small, big) {
                    continue;
                }
                let m = marginalize(&self.values[j], big, small).unwrap();
                if m != self.values[i] {
                    return Err(Error::invariant(format!(
                        "marginal of {:?} on {:?} disagrees with x({:?}, ·)",
                        ids(big),
                        ids(small),
                        ids(small)
                    )));
                }
            }
        }
        Ok(())
    }
}

fn ids(s: &[VertexId]) -> Vec<u32> {
    s.iter().map(|v| v.0).collect()
}

/// The full `r`-round polytope on a vertex set: one variable per `(S, T)`
/// with `|S| ≤ r`, normalisation and single-element consistency rows.
#[derive(Debug, Clone)]
pub struct FullSa {
    pub program: LpProgram,
    pub family: SetFamily,
    offsets: Vec<usize>,
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

pub fn build_full_sa(vertices: &[VertexId], r: usize, budgets: &Budgets) -> Result<FullSa> {
    let n = vertices.len();
    if r > n {
        return Err(Error::invalid(format!("rounds r = {r} exceed the vertex count {n}")));
    }
    let terms = 3u64.saturating_pow(r as u32).saturating_mul(binomial(n as u64, r as u64));
    if terms > budgets.full_sa_terms {
        return Err(Error::Budget(format!(
            "3^r * C(n, r) = {terms} exceeds the full Sherali-Adams budget {}",
            budgets.full_sa_terms
        )));
    }
    let mut sorted = vertices.to_vec();
    sorted.sort_unstable();
    let mut sets = Vec::new();
    for mask in 0usize..(1 << n) {
        if (mask.count_ones() as usize) <= r {
            sets.push(members(&sorted, mask));
        }
    }
    let family = SetFamily::new(sets);
    let mut program = LpProgram::new(Sense::Maximize);
    let mut offsets = Vec::with_capacity(family.len());
    for (i, s) in family.sets().iter().enumerate() {
        offsets.push(program.num_variables());
        for t in 0..(1usize << s.len()) {
            program.add_variable(format!("x{i}_{t}"));
        }
    }
    if program.num_variables() > budgets.lp_variables {
        return Err(Error::Budget(format!(
            "{} variables exceed the LP budget {}",
            program.num_variables(),
            budgets.lp_variables
        )));
    }
    for (i, s) in family.sets().iter().enumerate() {
        let coeffs = (0..1usize << s.len()).map(|t| (offsets[i] + t, Rational::one())).collect();
        program.add_constraint(format!("norm{i}"), coeffs, Relation::Eq, Rational::one());
    }
    // x(S,T) = x(S+u,T) + x(S+u,T+u)
    for (i, s) in family.sets().iter().enumerate() {
        if s.len() >= r {
            continue;
        }
        for &u in &sorted {
            if s.binary_search(&u).is_ok() {
                continue;
            }
            let mut big = s.clone();
            big.push(u);
            big.sort_unstable();
            let j = family.index_of(&big).unwrap();
            let pos = positions(s, &big).unwrap();
            for t in 0..(1usize << s.len()) {
                let mut coeffs = vec![(offsets[i] + t, Rational::one())];
                for tb in 0..(1usize << big.len()) {
                    if restrict_mask(tb, &pos) == t {
                        coeffs.push((offsets[j] + tb, -Rational::one()));
                    }
                }
                program.add_constraint(format!("ext{i}_{}_{t}", u.0), coeffs, Relation::Eq, Rational::zero());
            }
        }
    }
    Ok(FullSa {
        program,
        family,
        offsets,
    })
}

impl FullSa {
    pub fn variable(&self, set: usize, mask: usize) -> usize {
        self.offsets[set] + mask
    }

    pub fn decode(&self, values: &[Rational]) -> SaSolution {
        let vals = self
            .family
            .sets()
            .iter()
            .enumerate()
            .map(|(i, s)| values[self.offsets[i]..self.offsets[i] + (1 << s.len())].to_vec())
            .collect();
        SaSolution {
            family: self.family.clone(),
            values: vals,
        }
    }

    pub fn encode(&self, solution: &SaSolution) -> Result<Vec<Rational>> {
        let mut out = vec![Rational::zero(); self.program.num_variables()];
        for (i, s) in self.family.sets().iter().enumerate() {
            let m = solution
                .marginal(s)
                .ok_or_else(|| Error::invalid(format!("solution has no values on {:?}", ids(s))))?;
            out[self.offsets[i]..self.offsets[i] + m.len()].clone_from_slice(&m);
        }
        Ok(out)
    }

    /// Linear expression for `y_uv`.
    pub fn y_terms(&self, u: VertexId, v: VertexId) -> Vec<(usize, Rational)> {
        let pair = if u < v { vec![u, v] } else { vec![v, u] };
        let i = self.family.index_of(&pair).expect("pair in family");
        vec![(self.offsets[i] + 1, Rational::one()), (self.offsets[i] + 2, Rational::one())]
    }
}

/// `max Σ_{(u,v) ∈ E} y_uv` over the `r`-round polytope on `H`'s vertices.
pub fn build_maxcut_lp(h: &MaxCutInstance, r: usize, budgets: &Budgets) -> Result<FullSa> {
    if r < 2 {
        return Err(Error::invalid("the MaxCut objective needs at least two rounds"));
    }
    let mut sa = build_full_sa(&h.vertices(), r, budgets)?;
    let mut objective = Vec::new();
    for &(u, v) in h.edges() {
        objective.extend(sa.y_terms(u, v));
    }
    sa.program.sense = Sense::Maximize;
    sa.program.set_objective(objective);
    Ok(sa)
}

/// Optimal MaxCut SA value and solution.
pub fn solve_maxcut_sa(
    h: &MaxCutInstance,
    r: usize,
    budgets: &Budgets,
    options: &SolverOptions,
) -> Result<(Rational, SaSolution)> {
    let sa = build_maxcut_lp(h, r, budgets)?;
    let res = lp::solve(&sa.program, options)?;
    if res.status != LpStatus::Optimal {
        return Err(Error::invariant(format!("MaxCut SA LP ended with status {:?}", res.status)));
    }
    Ok((res.objective.clone().unwrap(), sa.decode(&res.values)))
}

/// The pared-down Sparsest Cut LP. Only maximal family sets carry
/// variables; every other family set reads its values as a marginal of a
/// representative container, and consistency rows tie the marginals of all
/// other containers to it.
#[derive(Debug, Clone)]
pub struct ParedLp {
    pub family: SetFamily,
    /// Maximal family sets, in family order.
    pub maximal: Vec<usize>,
    /// Representative maximal set (index into `maximal`) for each family set.
    pub representative: Vec<usize>,
    offsets: Vec<usize>,
    base: LpProgram,
    cap_terms: Vec<(usize, Rational)>,
    dem_terms: Vec<(usize, Rational)>,
}

fn bag_assignment(td: &TreeDecomposition) -> HashMap<VertexId, usize> {
    // Least-depth bag for every vertex (ties by bag index).
    let depth = td.depths();
    let mut best: HashMap<VertexId, usize> = HashMap::new();
    for (a, bag) in td.bags().iter().enumerate() {
        for v in bag {
            let e = best.entry(*v).or_insert(a);
            if (depth[a], a) < (depth[*e], *e) {
                *e = a;
            }
        }
    }
    best
}

/// Family of the pared LP: `∅`, singletons, supply/demand pairs, every `V_a`
/// and `V_a ∪ V_b` for the least-depth bags of each demand pair.
pub fn pared_family(instance: &SparsestCutInstance, td: &TreeDecomposition) -> SetFamily {
    let unions: Vec<Vec<VertexId>> = td.root_path_unions().into_iter().map(|u| u.union_set).collect();
    let home = bag_assignment(td);
    let mut sets: Vec<Vec<VertexId>> = vec![Vec::new()];
    sets.extend(instance.vertices().iter().map(|v| vec![*v]));
    sets.extend(unions.iter().cloned());
    for e in instance.supply_edges() {
        sets.push(vec![e.u, e.v]);
    }
    for e in instance.demand_edges() {
        sets.push(vec![e.u, e.v]);
        let (a, b) = (home[&e.u], home[&e.v]);
        sets.push(unions[a].iter().chain(unions[b].iter()).copied().collect());
    }
    SetFamily::new(sets)
}

/// Cost proxy of the pared LP for a decomposition: `Σ 2^|M|` over maximal sets.
pub fn pared_cost(instance: &SparsestCutInstance, td: &TreeDecomposition) -> u128 {
    let family = pared_family(instance, td);
    family
        .maximal()
        .iter()
        .map(|&i| 1u128 << family.sets()[i].len().min(100))
        .sum()
}

pub fn build_sparsestcut_lp(
    instance: &SparsestCutInstance,
    td: &TreeDecomposition,
    budgets: &Budgets,
) -> Result<ParedLp> {
    if instance.demand_edges().iter().all(|e| e.weight.is_zero()) {
        return Err(Error::invalid("total demand must be positive"));
    }
    let covered = td.vertex_set();
    if let Some(v) = instance.vertices().iter().find(|v| !covered.contains(v)) {
        return Err(Error::invalid(format!("vertex {v} lies in no bag")));
    }
    let family = pared_family(instance, td);
    let maximal = family.maximal();
    let sets = family.sets();
    if let Some(&i) = maximal.iter().find(|&&i| sets[i].len() > budgets.lp_set_size) {
        return Err(Error::Budget(format!(
            "family set of size {} exceeds the LP set-size cap {}",
            sets[i].len(),
            budgets.lp_set_size
        )));
    }
    let total_vars: usize = maximal.iter().map(|&i| 1usize << sets[i].len()).sum();
    if total_vars > budgets.lp_variables {
        return Err(Error::Budget(format!(
            "{total_vars} LP variables exceed the budget {}",
            budgets.lp_variables
        )));
    }
    let mut base = LpProgram::new(Sense::Minimize);
    let mut offsets = Vec::with_capacity(maximal.len());
    for (k, &i) in maximal.iter().enumerate() {
        offsets.push(base.num_variables());
        for t in 0..(1usize << sets[i].len()) {
            base.add_variable(format!("x{k}_{t}"));
        }
    }
    for (k, &i) in maximal.iter().enumerate() {
        let coeffs = (0..1usize << sets[i].len()).map(|t| (offsets[k] + t, Rational::one())).collect();
        base.add_constraint(format!("norm{k}"), coeffs, Relation::Eq, Rational::one());
    }
    let containers: Vec<Vec<usize>> = sets
        .iter()
        .map(|s| {
            maximal
                .iter()
                .enumerate()
                .filter(|(_, &m)| is_subset(s, &sets[m]))
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    let representative: Vec<usize> = containers.iter().map(|c| c[0]).collect();
    for (i, s) in sets.iter().enumerate() {
        if containers[i].len() < 2 || s.is_empty() {
            continue;
        }
        // Consistency on a larger family set with the same containers implies this one.
        let implied = sets.iter().enumerate().any(|(j, t)| {
            t.len() > s.len() && is_subset(s, t) && containers[j] == containers[i]
        });
        if implied {
            continue;
        }
        let rep = representative[i];
        let rep_pos = positions(s, &sets[maximal[rep]]).unwrap();
        for &other in &containers[i][1..] {
            let pos = positions(s, &sets[maximal[other]]).unwrap();
            for t in 0..(1usize << s.len()) - 1 {
                let mut coeffs = Vec::new();
                for tb in 0..(1usize << sets[maximal[other]].len()) {
                    if restrict_mask(tb, &pos) == t {
                        coeffs.push((offsets[other] + tb, Rational::one()));
                    }
                }
                for tb in 0..(1usize << sets[maximal[rep]].len()) {
                    if restrict_mask(tb, &rep_pos) == t {
                        coeffs.push((offsets[rep] + tb, -Rational::one()));
                    }
                }
                base.add_constraint(format!("cons{i}_{other}_{t}"), coeffs, Relation::Eq, Rational::zero());
            }
        }
    }
    let mut lp = ParedLp {
        family,
        maximal,
        representative,
        offsets,
        base,
        cap_terms: Vec::new(),
        dem_terms: Vec::new(),
    };
    let mut cap_terms = Vec::new();
    for e in instance.supply_edges() {
        for (j, c) in lp.y_terms(e.u, e.v) {
            cap_terms.push((j, c * &e.weight));
        }
    }
    let mut dem_terms = Vec::new();
    for e in instance.demand_edges() {
        for (j, c) in lp.y_terms(e.u, e.v) {
            dem_terms.push((j, c * &e.weight));
        }
    }
    lp.cap_terms = merge(cap_terms);
    lp.dem_terms = merge(dem_terms);
    Ok(lp)
}

fn merge(mut terms: Vec<(usize, Rational)>) -> Vec<(usize, Rational)> {
    terms.sort_by_key(|(j, _)| *j);
    let mut out: Vec<(usize, Rational)> = Vec::new();
    for (j, c) in terms {
        match out.last_mut() {
            Some((k, acc)) if *k == j => *acc += c,
            _ => out.push((j, c)),
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

impl ParedLp {
    pub fn num_variables(&self) -> usize {
        self.base.num_variables()
    }

    /// Linear expression of `y_uv` through the representative of `{u, v}`.
    pub fn y_terms(&self, u: VertexId, v: VertexId) -> Vec<(usize, Rational)> {
        let pair = if u < v { vec![u, v] } else { vec![v, u] };
        let i = self.family.index_of(&pair).expect("pair in family");
        let k = self.representative[i];
        let m = &self.family.sets()[self.maximal[k]];
        let pos = positions(&pair, m).unwrap();
        (0..1usize << m.len())
            .filter(|&t| matches!(restrict_mask(t, &pos), 1 | 2))
            .map(|t| (self.offsets[k] + t, Rational::one()))
            .collect()
    }

    /// `min Σ cap·y` subject to `Σ dem·y ≥ α`.
    pub fn program_with_alpha(&self, alpha: &Rational) -> LpProgram {
        let mut p = self.base.clone();
        p.sense = Sense::Minimize;
        p.set_objective(self.cap_terms.clone());
        p.add_constraint("demand", self.dem_terms.clone(), Relation::Ge, alpha.clone());
        p
    }

    /// `min Σ cap·y − λ Σ dem·y` with no demand row.
    pub fn program_with_lambda(&self, lambda: &Rational) -> LpProgram {
        let mut p = self.base.clone();
        p.sense = Sense::Minimize;
        let mut obj = self.cap_terms.clone();
        obj.extend(self.dem_terms.iter().map(|(j, c)| (*j, -(c * lambda))));
        p.set_objective(obj);
        p
    }

    pub fn capacity_value(&self, values: &[Rational]) -> Rational {
        self.cap_terms.iter().map(|(j, c)| c * &values[*j]).sum()
    }

    pub fn demand_value(&self, values: &[Rational]) -> Rational {
        self.dem_terms.iter().map(|(j, c)| c * &values[*j]).sum()
    }

    /// Solution on the whole family from maximal-set variables.
    pub fn decode(&self, values: &[Rational]) -> SaSolution {
        let sets = self.family.sets();
        let vals = sets
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let k = self.representative[i];
                let m = &sets[self.maximal[k]];
                let dist = &values[self.offsets[k]..self.offsets[k] + (1 << m.len())];
                marginalize(dist, m, s).unwrap()
            })
            .collect();
        SaSolution {
            family: self.family.clone(),
            values: vals,
        }
    }

    /// LP variables from any solution defined on the maximal sets.
    pub fn encode(&self, solution: &SaSolution) -> Result<Vec<Rational>> {
        let sets = self.family.sets();
        let mut out = vec![Rational::zero(); self.num_variables()];
        for (k, &i) in self.maximal.iter().enumerate() {
            let m = solution
                .marginal(&sets[i])
                .ok_or_else(|| Error::invalid(format!("solution has no values on {:?}", ids(&sets[i]))))?;
            out[self.offsets[k]..self.offsets[k] + m.len()].clone_from_slice(&m);
        }
        Ok(out)
    }

    /// Distortion LP: maximise `C` subject to the SA rows and
    /// `C·d(u,v) ≤ y_uv ≤ D·C·d(u,v)` for the given pairs.
    pub fn distortion_program(&self, pairs: &[(VertexId, VertexId, Rational)], distortion: &Rational) -> LpProgram {
        let mut p = self.base.clone();
        p.sense = Sense::Maximize;
        let c = p.add_variable("C");
        p.set_objective(vec![(c, Rational::one())]);
        for (k, (u, v, d)) in pairs.iter().enumerate() {
            let y = self.y_terms(*u, *v);
            let mut lo = y.clone();
            lo.push((c, -d.clone()));
            p.add_constraint(format!("dlo{k}"), lo, Relation::Ge, Rational::zero());
            let mut hi = y;
            hi.push((c, -(d * distortion)));
            p.add_constraint(format!("dhi{k}"), hi, Relation::Le, Rational::zero());
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    Dinkelbach,
    Grid,
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub mode: AlphaMode,
    pub solver: SolverOptions,
    pub max_iterations: usize,
    /// Geometric step of the grid scan (`α ← α·step`).
    pub grid_step: Rational,
    pub dump_lp: Option<std::path::PathBuf>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            mode: AlphaMode::Dinkelbach,
            solver: SolverOptions::default(),
            max_iterations: 100,
            grid_step: Rational::new(1.into(), 2.into()),
            dump_lp: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchStep {
    /// `λ` (Dinkelbach) or `α` (grid).
    pub parameter: String,
    pub lp_value: String,
}

#[derive(Debug, Clone)]
pub struct RatioSearch {
    pub alpha: Rational,
    pub lp_value: Rational,
    pub ratio: Rational,
    pub solution: SaSolution,
    pub lp: ParedLp,
    pub trace: Vec<SearchStep>,
}

fn close(a: &Rational, b: &Rational, arithmetic: Arithmetic) -> bool {
    match arithmetic {
        Arithmetic::Rational => a == b,
        Arithmetic::Float => {
            let (x, y) = (to_f64(a), to_f64(b));
            (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0)
        }
    }
}

fn solve_checked(program: &LpProgram, options: &SearchOptions) -> Result<lp::LpResult> {
    if let Some(path) = &options.dump_lp {
        std::fs::write(path, lp::write_lp(program))?;
    }
    let res = lp::solve(program, &options.solver)?;
    if res.status == LpStatus::IterationLimit {
        return Err(Error::NonConvergence("simplex hit its iteration limit".into()));
    }
    Ok(res)
}

/// Finds `α*` and an LP solution minimising `LP(α)/α`.
pub fn ratio_search(
    instance: &SparsestCutInstance,
    td: &TreeDecomposition,
    options: &SearchOptions,
    budgets: &Budgets,
) -> Result<RatioSearch> {
    if !instance.total_demand().is_positive() {
        return Err(Error::invalid("total demand must be positive"));
    }
    let lp = build_sparsestcut_lp(instance, td, budgets)?;
    match options.mode {
        AlphaMode::Dinkelbach => dinkelbach(instance, lp, options),
        AlphaMode::Grid => grid(instance, lp, options),
    }
}

fn finish(lp: ParedLp, values: Vec<Rational>, trace: Vec<SearchStep>) -> Result<RatioSearch> {
    let alpha = lp.demand_value(&values);
    let lp_value = lp.capacity_value(&values);
    if !alpha.is_positive() {
        return Err(Error::invariant("search ended on a solution separating no demand"));
    }
    let ratio = &lp_value / &alpha;
    let solution = lp.decode(&values);
    Ok(RatioSearch {
        alpha,
        lp_value,
        ratio,
        solution,
        lp,
        trace,
    })
}

fn dinkelbach(instance: &SparsestCutInstance, lp: ParedLp, options: &SearchOptions) -> Result<RatioSearch> {
    // Start from the best single-vertex cut that separates some demand.
    let mut start: Option<(Rational, Cut)> = None;
    for v in instance.vertices() {
        let cut = Cut::new([*v]);
        let s = crate::graph::evaluate_cut(instance, &cut)?;
        if let Some(r) = s.ratio {
            if start.as_ref().is_none_or(|(b, _)| r < *b) {
                start = Some((r, cut));
            }
        }
    }
    let (mut lambda, cut) = start.ok_or_else(|| Error::invalid("no vertex is incident to positive demand"))?;
    let mut best_values = lp.encode(&SaSolution::integral(&lp.family, &cut))?;
    let mut trace = Vec::new();
    for _ in 0..options.max_iterations {
        let program = lp.program_with_lambda(&lambda);
        let res = solve_checked(&program, options)?;
        if res.status != LpStatus::Optimal {
            return Err(Error::invariant(format!("parametric LP ended with status {:?}", res.status)));
        }
        let f = res.objective.clone().unwrap();
        trace.push(SearchStep {
            parameter: crate::rational::format_rational(&lambda),
            lp_value: crate::rational::format_rational(&f),
        });
        if !f.is_negative() || close(&f, &Rational::zero(), options.solver.arithmetic) {
            return finish(lp, best_values, trace);
        }
        let dem = lp.demand_value(&res.values);
        if !dem.is_positive() {
            return Err(Error::invariant("negative parametric value with no demand separated"));
        }
        let next = lp.capacity_value(&res.values) / dem;
        if next >= lambda {
            // Only possible through floating-point noise.
            return finish(lp, best_values, trace);
        }
        lambda = next;
        best_values = res.values;
    }
    Err(Error::NonConvergence(format!(
        "Dinkelbach iteration did not converge in {} steps; trace: {:?}",
        options.max_iterations, trace
    )))
}

fn grid(instance: &SparsestCutInstance, lp: ParedLp, options: &SearchOptions) -> Result<RatioSearch> {
    let mut alpha = instance.total_demand();
    let mut trace = Vec::new();
    let mut prev: Option<(Rational, Vec<Rational>)> = None;
    for _ in 0..options.max_iterations {
        let program = lp.program_with_alpha(&alpha);
        let res = solve_checked(&program, options)?;
        match res.status {
            LpStatus::Infeasible => {
                if prev.is_some() {
                    return Err(Error::invariant("LP became infeasible at a smaller demand target"));
                }
                trace.push(SearchStep {
                    parameter: crate::rational::format_rational(&alpha),
                    lp_value: "infeasible".into(),
                });
            }
            LpStatus::Optimal => {
                let value = res.objective.clone().unwrap();
                trace.push(SearchStep {
                    parameter: crate::rational::format_rational(&alpha),
                    lp_value: crate::rational::format_rational(&value),
                });
                let ratio = &value / &alpha;
                if let Some((r, values)) = prev.take() {
                    if close(&r, &ratio, options.solver.arithmetic) {
                        return finish(lp, values, trace);
                    }
                }
                prev = Some((ratio, res.values));
            }
            other => return Err(Error::invariant(format!("demand-target LP ended with status {other:?}"))),
        }
        alpha = &alpha * &options.grid_step;
    }
    Err(Error::NonConvergence(format!(
        "grid scan did not stabilise in {} steps; trace: {:?}",
        options.max_iterations, trace
    )))
}

/// The valuation `x(S, T) = 2^{-|S|}`: every set uniformly split.
pub fn uniform_solution(family: &SetFamily) -> SaSolution {
    let values = family
        .sets()
        .iter()
        .map(|s| {
            let p = Rational::new(1.into(), num_bigint::BigInt::from(1u64 << s.len()));
            vec![p; 1 << s.len()]
        })
        .collect();
    SaSolution {
        family: family.clone(),
        values,
    }
}
