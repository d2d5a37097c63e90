//! Propagation rounding of a Sherali-Adams solution along a tree
//! decomposition, its derandomisation by conditional expectations, and the
//! sampled ℓ1 embedding.
//!
//! Bags are processed top-down. The root picks `A_r ⊆ V_r` with
//! probability `x(V_r, A_r)`; a child `a` of `b` extends `A_b` to
//! `A_a ⊆ V_a` with probability `x(V_a, A_a) / x(V_b, A_b)`. The cut is the
//! union of all `A_a`.

use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::TreeDecomposition;
use crate::error::{Error, Result};
use crate::graph::{Cut, SparsestCutInstance, VertexId};
use crate::rational::{serialize_rational, to_f64, Rational};
use crate::sa::{members, positions, restrict_mask, SaSolution};

/// Places the bits of `mask` (over a sub-set) at `pos` inside a super-set.
fn embed(mask: usize, pos: &[usize]) -> usize {
    pos.iter()
        .enumerate()
        .fold(0, |acc, (k, &p)| acc | (((mask >> k) & 1) << p))
}

/// Per-bag data of the propagation process.
#[derive(Debug, Clone)]
struct Prepared {
    sets: Vec<Vec<VertexId>>,
    dists: Vec<Vec<Rational>>,
    parent: Vec<Option<usize>>,
    order: Vec<usize>,
    paths: Vec<Vec<usize>>,
    parent_pos: Vec<Vec<usize>>,
    free: Vec<Vec<usize>>,
    /// Topmost bag containing each vertex.
    home: HashMap<VertexId, usize>,
}

impl Prepared {
    fn new(solution: &SaSolution, td: &TreeDecomposition) -> Result<Self> {
        let sets: Vec<Vec<VertexId>> = td.root_path_unions().into_iter().map(|u| u.union_set).collect();
        let mut dists = Vec::with_capacity(sets.len());
        for s in &sets {
            let d = solution
                .marginal(s)
                .ok_or_else(|| Error::invalid(format!("root-path union {:?} is not covered by the solution", s)))?;
            dists.push(d);
        }
        let n = sets.len();
        let parent: Vec<Option<usize>> = (0..n).map(|a| td.parent(a)).collect();
        let mut parent_pos = vec![Vec::new(); n];
        let mut free = vec![Vec::new(); n];
        for a in 0..n {
            let inherited: &[VertexId] = match parent[a] {
                Some(p) => &sets[p],
                None => &[],
            };
            parent_pos[a] = positions(inherited, &sets[a]).expect("V_parent ⊆ V_a");
            free[a] = (0..sets[a].len()).filter(|k| !parent_pos[a].contains(k)).collect();
        }
        let order = td.bfs_order();
        let mut home = HashMap::new();
        for &a in &order {
            for v in td.bag(a) {
                home.entry(*v).or_insert(a);
            }
        }
        let paths = (0..n).map(|a| td.root_path(a)).collect();
        Ok(Prepared {
            sets,
            dists,
            parent,
            order,
            paths,
            parent_pos,
            free,
            home,
        })
    }

    /// Extensions of the parent's assignment at bag `a`, as masks over `V_a`.
    fn extensions(&self, a: usize, fixed: &[Option<usize>]) -> impl Iterator<Item = usize> + '_ {
        let base = match self.parent[a] {
            Some(p) => embed(fixed[p].expect("parent fixed first"), &self.parent_pos[a]),
            None => 0,
        };
        let free = &self.free[a];
        (0..1usize << free.len()).map(move |f| base | embed(f, free))
    }

    fn pos(&self, a: usize, v: VertexId) -> usize {
        self.sets[a].binary_search(&v).expect("vertex in V_a")
    }

    fn lca(&self, a: usize, b: usize) -> usize {
        let (pa, pb) = (&self.paths[a], &self.paths[b]);
        let mut last = pa[0];
        for (x, y) in pa.iter().zip(pb.iter()) {
            if x != y {
                break;
            }
            last = *x;
        }
        last
    }

    /// Deepest fixed bag on the root path of `a`.
    fn deepest_fixed(&self, a: usize, fixed: &[Option<usize>]) -> Option<usize> {
        self.paths[a].iter().rev().copied().find(|&b| fixed[b].is_some())
    }

    /// For each `U ⊆ V_c`: `(x-mass of T ⊆ V_a with T ∩ V_c = U, the part
    /// with u ∈ T)`, over `T` consistent with the assignment of `h`.
    fn split(&self, a: usize, u: VertexId, h: Option<usize>, c: usize, fixed: &[Option<usize>]) -> Vec<(Rational, Rational)> {
        let set = &self.sets[a];
        let (base, free): (usize, Vec<usize>) = match h {
            Some(h) => {
                let pos = positions(&self.sets[h], set).expect("V_h ⊆ V_a");
                let free = (0..set.len()).filter(|k| !pos.contains(k)).collect();
                (embed(fixed[h].unwrap(), &pos), free)
            }
            None => (0, (0..set.len()).collect()),
        };
        let cpos = positions(&self.sets[c], set).expect("V_c ⊆ V_a");
        let upos = self.pos(a, u);
        let mut out = vec![(Rational::zero(), Rational::zero()); 1 << cpos.len()];
        let dist = &self.dists[a];
        for f in 0..1usize << free.len() {
            let t = base | embed(f, &free);
            let x = &dist[t];
            if x.is_zero() {
                continue;
            }
            let slot = &mut out[restrict_mask(t, &cpos)];
            slot.0 += x;
            if t >> upos & 1 == 1 {
                slot.1 += x;
            }
        }
        out
    }

    /// `Pr[u ∈ A | fixed]` given the deepest fixed bag `h` above `u`'s home.
    fn membership(&self, u: VertexId, fixed: &[Option<usize>]) -> Rational {
        let a = self.home[&u];
        let h = self.deepest_fixed(a, fixed).expect("some ancestor fixed");
        let (tot, with) = self
            .split(a, u, Some(h), h, fixed)
            .into_iter()
            .fold((Rational::zero(), Rational::zero()), |acc, (t, w)| (acc.0 + t, acc.1 + w));
        with / tot
    }

    /// `Pr[u and v separated | fixed bags]`. If the lca of the two homes is
    /// fixed the endpoints are conditionally independent; otherwise sum over
    /// the assignments `U` of `V_lca` consistent with the deepest fixed bag.
    fn separation(&self, u: VertexId, v: VertexId, fixed: &[Option<usize>]) -> Rational {
        let (a, b) = (self.home[&u], self.home[&v]);
        let c = self.lca(a, b);
        if fixed[c].is_some() {
            let pu = self.membership(u, fixed);
            let pv = self.membership(v, fixed);
            let cross = &pu * &pv;
            return pu + pv - &cross - cross;
        }
        let g = self.deepest_fixed(c, fixed);
        let su = self.split(a, u, g, c, fixed);
        let sv = self.split(b, v, g, c, fixed);
        let mut num = Rational::zero();
        let mut den = Rational::zero();
        for ((xc, xu), (_, xv)) in su.iter().zip(&sv) {
            if xc.is_zero() {
                continue;
            }
            den += xc;
            num += (xu * (xc - xv) + xv * (xc - xu)) / xc;
        }
        num / den
    }

    fn cut_from(&self, fixed: &[Option<usize>]) -> Cut {
        Cut::new(
            self.home
                .iter()
                .filter(|(v, &a)| fixed[a].is_some_and(|t| t >> self.pos(a, **v) & 1 == 1))
                .map(|(v, _)| *v),
        )
    }
}

/// Float tables for repeated sampling.
#[derive(Debug, Clone)]
pub struct Sampler {
    prep: Prepared,
    weights: Vec<Vec<f64>>,
}

impl Sampler {
    pub fn new(solution: &SaSolution, td: &TreeDecomposition) -> Result<Self> {
        let prep = Prepared::new(solution, td)?;
        let weights = prep.dists.iter().map(|d| d.iter().map(to_f64).collect()).collect();
        Ok(Sampler { prep, weights })
    }

    /// The sets `V_a` in bag order.
    pub fn root_path_sets(&self) -> &[Vec<VertexId>] {
        &self.prep.sets
    }

    /// One run of the process: the assignment mask over `V_a` of every bag.
    pub fn sample_bags(&self, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
        let mut fixed: Vec<Option<usize>> = vec![None; self.prep.sets.len()];
        for &a in &self.prep.order {
            let w = &self.weights[a];
            let cands: Vec<usize> = self.prep.extensions(a, &fixed).collect();
            let total: f64 = cands.iter().map(|&t| w[t]).sum();
            if total <= 0.0 {
                return Err(Error::invariant(format!(
                    "zero-probability conditioning event at bag {}",
                    a + 1
                )));
            }
            let mut r = rng.gen::<f64>() * total;
            let mut pick = *cands.iter().rev().find(|&&t| w[t] > 0.0).unwrap();
            for &t in &cands {
                if w[t] <= 0.0 {
                    continue;
                }
                if r < w[t] {
                    pick = t;
                    break;
                }
                r -= w[t];
            }
            fixed[a] = Some(pick);
        }
        Ok(fixed.into_iter().map(Option::unwrap).collect())
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Cut> {
        let bags = self.sample_bags(rng)?;
        let fixed: Vec<Option<usize>> = bags.into_iter().map(Some).collect();
        Ok(self.prep.cut_from(&fixed))
    }

    /// Sample `index` of the stream seeded by `seed`.
    pub fn sample_indexed(&self, seed: u64, index: u64) -> Result<Cut> {
        self.sample(&mut stream_rng(seed, index))
    }
}

/// Independent, reproducible generator for sample `index`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One cut drawn by propagation rounding.
pub fn sample_cut(solution: &SaSolution, td: &TreeDecomposition, seed: u64) -> Result<Cut> {
    Sampler::new(solution, td)?.sample_indexed(seed, 0)
}

/// A greedy fixing step of the derandomisation.
#[derive(Debug, Clone, Serialize)]
pub struct DerandStep {
    pub bag: usize,
    pub assignment: Vec<VertexId>,
    /// Conditional expectation of the scaled potential after this step.
    #[serde(serialize_with = "serialize_rational")]
    pub potential: Rational,
}

/// Outcome of [`derandomize`]. The potential is `W̃ = α·Z − 2·LP*·Z'`
/// (`Z` cut capacity, `Z'` separated demand), i.e. `α·LP*` times
/// `Z/LP* − 2Z'/α`; its unconditional expectation is at most zero.
#[derive(Debug, Clone, Serialize)]
pub struct Derandomized {
    pub cut: Cut,
    #[serde(serialize_with = "serialize_rational")]
    pub lp_star: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub alpha: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub initial_potential: Rational,
    pub steps: Vec<DerandStep>,
}

impl Derandomized {
    /// Potentials before and after each step.
    pub fn trace(&self) -> Vec<Rational> {
        std::iter::once(self.initial_potential.clone())
            .chain(self.steps.iter().map(|s| s.potential.clone()))
            .collect()
    }

    pub fn final_potential(&self) -> &Rational {
        self.steps.last().map_or(&self.initial_potential, |s| &s.potential)
    }
}

#[derive(Clone)]
struct Pair {
    u: VertexId,
    v: VertexId,
    cap: Rational,
    dem: Rational,
}

/// Fixes bags top-down, each time choosing the extension that minimises the
/// conditional expectation of the potential (ties: larger expected
/// separated demand, then the lexicographically smallest assignment). Only
/// extensions of positive probability are considered.
pub fn derandomize(
    instance: &SparsestCutInstance,
    solution: &SaSolution,
    td: &TreeDecomposition,
) -> Result<Derandomized> {
    let prep = Prepared::new(solution, td)?;
    for v in instance.vertices() {
        if !prep.home.contains_key(v) {
            return Err(Error::invalid(format!("vertex {v} lies in no bag")));
        }
    }
    let mut merged: BTreeMap<(VertexId, VertexId), (Rational, Rational)> = BTreeMap::new();
    for e in instance.supply_edges() {
        let key = (e.u.min(e.v), e.u.max(e.v));
        merged.entry(key).or_insert_with(|| (Rational::zero(), Rational::zero())).0 += &e.weight;
    }
    for e in instance.demand_edges() {
        let key = (e.u.min(e.v), e.u.max(e.v));
        merged.entry(key).or_insert_with(|| (Rational::zero(), Rational::zero())).1 += &e.weight;
    }
    let pairs: Vec<Pair> = merged
        .into_iter()
        .map(|((u, v), (cap, dem))| Pair { u, v, cap, dem })
        .collect();
    let mut lp_star = Rational::zero();
    let mut alpha = Rational::zero();
    for p in &pairs {
        let y = solution.y(p.u, p.v)?;
        lp_star += &p.cap * &y;
        alpha += &p.dem * &y;
    }
    if !alpha.is_positive() {
        return Err(Error::invalid("the solution separates no demand"));
    }
    let mut by_bag: Vec<Vec<usize>> = vec![Vec::new(); prep.sets.len()];
    for (k, p) in pairs.iter().enumerate() {
        let mut on_path: Vec<usize> = prep.paths[prep.home[&p.u]].clone();
        on_path.extend(&prep.paths[prep.home[&p.v]]);
        on_path.sort_unstable();
        on_path.dedup();
        for b in on_path {
            by_bag[b].push(k);
        }
    }
    let weigh = |probs: &[(usize, Rational)]| {
        let mut z = Rational::zero();
        let mut zd = Rational::zero();
        for (k, pr) in probs {
            z += &pairs[*k].cap * pr;
            zd += &pairs[*k].dem * pr;
        }
        (z, zd)
    };
    let scaled = |z: &Rational, zd: &Rational| &alpha * z - Rational::from_integer(2.into()) * &lp_star * zd;

    let mut fixed: Vec<Option<usize>> = vec![None; prep.sets.len()];
    let mut prob: Vec<Rational> = pairs.iter().map(|p| prep.separation(p.u, p.v, &fixed)).collect();
    let all: Vec<(usize, Rational)> = prob.iter().cloned().enumerate().collect();
    let (z0, zd0) = weigh(&all);
    let initial_potential = scaled(&z0, &zd0);
    let mut steps = Vec::new();
    for &a in &prep.order {
        let cands: Vec<usize> = prep
            .extensions(a, &fixed)
            .filter(|&t| prep.dists[a][t].is_positive())
            .collect();
        if cands.is_empty() {
            return Err(Error::invariant(format!("no positive-probability extension at bag {}", a + 1)));
        }
        let evaluated: Vec<(usize, Rational, Rational, Vec<(usize, Rational)>)> = cands
            .par_iter()
            .map(|&t| {
                let mut trial = fixed.clone();
                trial[a] = Some(t);
                let probs: Vec<(usize, Rational)> = by_bag[a]
                    .iter()
                    .map(|&k| (k, prep.separation(pairs[k].u, pairs[k].v, &trial)))
                    .collect();
                let (z, zd) = weigh(&probs);
                (t, scaled(&z, &zd), zd, probs)
            })
            .collect();
        let best = evaluated
            .into_iter()
            .min_by(|x, y| {
                x.1.cmp(&y.1)
                    .then_with(|| y.2.cmp(&x.2))
                    .then_with(|| members(&prep.sets[a], x.0).cmp(&members(&prep.sets[a], y.0)))
            })
            .unwrap();
        fixed[a] = Some(best.0);
        for (k, pr) in best.3 {
            prob[k] = pr;
        }
        let all: Vec<(usize, Rational)> = prob.iter().cloned().enumerate().collect();
        let (z, zd) = weigh(&all);
        steps.push(DerandStep {
            bag: a,
            assignment: members(&prep.sets[a], best.0),
            potential: scaled(&z, &zd),
        });
    }
    Ok(Derandomized {
        cut: prep.cut_from(&fixed),
        lp_star,
        alpha,
        initial_potential,
        steps,
    })
}

/// Vertices mapped to `{0, 1/N}^N`: coordinate `j` is the indicator of
/// sample cut `j`, so `‖f(u) − f(v)‖₁` is the fraction of samples
/// separating `u` and `v`.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub vertices: Vec<VertexId>,
    pub samples: usize,
    bits: Vec<Vec<u64>>,
}

impl Embedding {
    fn index(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    /// Number of samples separating `u` and `v`.
    pub fn separations(&self, u: VertexId, v: VertexId) -> Option<u64> {
        let (a, b) = (self.index(u)?, self.index(v)?);
        Some(
            self.bits[a]
                .iter()
                .zip(&self.bits[b])
                .map(|(x, y)| (x ^ y).count_ones() as u64)
                .sum(),
        )
    }

    pub fn distance(&self, u: VertexId, v: VertexId) -> Option<f64> {
        self.separations(u, v).map(|s| s as f64 / self.samples as f64)
    }

    pub fn coordinate(&self, v: VertexId, j: usize) -> Option<bool> {
        let a = self.index(v)?;
        (j < self.samples).then(|| self.bits[a][j / 64] >> (j % 64) & 1 == 1)
    }

    /// One row per vertex: the id, then the coordinates (`0` or `1/N`).
    pub fn to_csv(&self) -> String {
        let unit = format!("1/{}", self.samples);
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&v.to_string());
            for j in 0..self.samples {
                out.push(',');
                out.push_str(if self.coordinate(*v, j).unwrap() { &unit } else { "0" });
            }
            out.push('\n');
        }
        out
    }
}

/// Embeds the vertices by `num_samples` independent propagation roundings.
pub fn embed_l1(solution: &SaSolution, td: &TreeDecomposition, num_samples: usize, seed: u64) -> Result<Embedding> {
    if num_samples == 0 {
        return Err(Error::invalid("the embedding needs at least one sample"));
    }
    let sampler = Sampler::new(solution, td)?;
    let mut vertices: Vec<VertexId> = sampler.prep.home.keys().copied().collect();
    vertices.sort_unstable();
    let words = num_samples.div_ceil(64);
    let blocks: Vec<Vec<Vec<u64>>> = (0..words)
        .into_par_iter()
        .map(|w| -> Result<Vec<Vec<u64>>> {
            let mut col = vec![0u64; vertices.len()];
            for bit in 0..64 {
                let j = w * 64 + bit;
                if j >= num_samples {
                    break;
                }
                let cut = sampler.sample_indexed(seed, j as u64)?;
                for (i, v) in vertices.iter().enumerate() {
                    if cut.contains(*v) {
                        col[i] |= 1 << bit;
                    }
                }
            }
            Ok(vec![col])
        })
        .collect::<Result<_>>()?;
    let mut bits = vec![vec![0u64; words]; vertices.len()];
    for (w, block) in blocks.into_iter().enumerate() {
        for (i, word) in block[0].iter().enumerate() {
            bits[i][w] = *word;
        }
    }
    Ok(Embedding {
        vertices,
        samples: num_samples,
        bits,
    })
}

/// Exact `Pr[u, v separated]` under the propagation distribution.
pub fn separation_probability(solution: &SaSolution, td: &TreeDecomposition, u: VertexId, v: VertexId) -> Result<Rational> {
    let prep = Prepared::new(solution, td)?;
    if !prep.home.contains_key(&u) || !prep.home.contains_key(&v) {
        return Err(Error::invalid("vertex lies in no bag"));
    }
    if u == v {
        return Ok(Rational::zero());
    }
    Ok(prep.separation(u, v, &vec![None; prep.sets.len()]))
}

/// Exact unconditional potential `E[W̃]` (mainly for checks).
pub fn expected_potential(instance: &SparsestCutInstance, solution: &SaSolution, td: &TreeDecomposition) -> Result<Rational> {
    let d = derandomize(instance, solution, td)?;
    Ok(d.initial_potential)
}
