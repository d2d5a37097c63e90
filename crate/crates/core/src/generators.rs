//! Instance constructions: MaxCut building blocks, fractal powering,
//! label-cover gadgets on hypercubes, and random bounded-treewidth corpora.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::budget::Budgets;
use crate::decomposition::TreeDecomposition;
use crate::error::{Error, Result};
use crate::graph::{evaluate_cut, is_admissible, Cut, Edge, SparsestCutInstance, VertexId};
use crate::rational::{int, ratio, Rational};

/// Unweighted, connected MaxCut instance on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxCutInstance {
    n: u32,
    edges: Vec<(VertexId, VertexId)>,
}

impl MaxCutInstance {
    pub fn new(n: u32, edges: Vec<(VertexId, VertexId)>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::invalid("MaxCut instance needs at least one edge"));
        }
        for &(u, v) in &edges {
            if u.0 == 0 || u.0 > n || v.0 == 0 || v.0 > n {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range 1..={n}")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at {u}")));
            }
        }
        let h = MaxCutInstance { n, edges };
        if !h.is_connected() {
            return Err(Error::invalid("MaxCut instance must be connected"));
        }
        Ok(h)
    }

    fn is_connected(&self) -> bool {
        let n = self.n as usize;
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            adj[u.0 as usize - 1].push(v.0 as usize - 1);
            adj[v.0 as usize - 1].push(u.0 as usize - 1);
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn complete(n: u32) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 1..=n {
            for v in u + 1..=n {
                edges.push((VertexId(u), VertexId(v)));
            }
        }
        Self::new(n, edges)
    }

    /// Path on `n` vertices.
    pub fn path(n: u32) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (VertexId(i), VertexId(i + 1))).collect())
    }

    pub fn cycle(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("a cycle needs at least three vertices"));
        }
        let mut edges: Vec<_> = (1..n).map(|i| (VertexId(i), VertexId(i + 1))).collect();
        edges.push((VertexId(n), VertexId(1)));
        Self::new(n, edges)
    }

    /// Named bases: `k<n>`, `p<n>`, `c<n>`.
    pub fn named(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        let (kind, num) = lower.split_at(1.min(lower.len()));
        let n: u32 = num
            .parse()
            .map_err(|_| Error::invalid(format!("unknown base graph `{name}`")))?;
        match kind {
            "k" => Self::complete(n),
            "p" => Self::path(n),
            "c" => Self::cycle(n),
            _ => Err(Error::invalid(format!("unknown base graph `{name}`"))),
        }
    }

    pub fn num_vertices(&self) -> u32 {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> Vec<VertexId> {
        (1..=self.n).map(VertexId).collect()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.edges.iter().filter(|(a, b)| *a == v || *b == v).count()
    }

    /// Number of edges crossing the bipartition with side `side`.
    pub fn cut_size(&self, side: &BTreeSet<VertexId>) -> usize {
        self.edges
            .iter()
            .filter(|(u, v)| side.contains(u) != side.contains(v))
            .count()
    }
}

pub const BLOCK_S: VertexId = VertexId(1);
pub const BLOCK_T: VertexId = VertexId(2);

/// Vertex of the building block standing for `H`'s vertex `v`.
pub fn block_vertex(v: VertexId) -> VertexId {
    VertexId(v.0 + 2)
}

/// The K_{2,n}-shaped block: `s = 1`, `t = 2`, `H`'s vertex `i` becomes
/// `i + 2`. Capacities `deg(i)/2m` on both star edges, demand `1/m` per
/// `H`-edge, and optionally unit demand between the terminals.
pub fn building_block(h: &MaxCutInstance, include_st_demand: bool) -> Result<SparsestCutInstance> {
    let m = h.num_edges() as i64;
    let mut supply = Vec::new();
    for v in h.vertices() {
        let cap = ratio(h.degree(v) as i64, 2 * m);
        supply.push(Edge::new(BLOCK_S, block_vertex(v), cap.clone()));
        supply.push(Edge::new(block_vertex(v), BLOCK_T, cap));
    }
    let mut demand: Vec<Edge> = h
        .edges()
        .iter()
        .map(|&(u, v)| Edge::new(block_vertex(u), block_vertex(v), ratio(1, m)))
        .collect();
    if include_st_demand {
        demand.push(Edge::new(BLOCK_S, BLOCK_T, int(1)));
    }
    SparsestCutInstance::with_vertex_count(h.num_vertices() + 2, supply, demand, Some((BLOCK_S, BLOCK_T)))
}

/// Star of bags `{s, t, i}` around a root bag `{s, t}`.
pub fn block_decomposition(h: &MaxCutInstance) -> TreeDecomposition {
    let mut bags = vec![vec![BLOCK_S, BLOCK_T]];
    let mut edges = Vec::new();
    for v in h.vertices() {
        edges.push((0, bags.len()));
        bags.push(vec![BLOCK_S, BLOCK_T, block_vertex(v)]);
    }
    TreeDecomposition::from_edges(bags, &edges, 0).expect("star is a tree")
}

/// Admissible block cut `{s} ∪ A` for a side `A` of `H`.
pub fn block_cut(side: &BTreeSet<VertexId>) -> Cut {
    Cut::new(std::iter::once(BLOCK_S).chain(side.iter().map(|&v| block_vertex(v))))
}

/// Sparsity `m / (m + mc)` of the block with terminal demand.
pub fn block_sparsity_formula(m: usize, mc: usize) -> Rational {
    ratio(m as i64, (m + mc) as i64)
}

/// One copy of the base inside a powered instance. The top copy is the
/// outermost level; copies at depth `levels - 1` keep their capacity edges.
#[derive(Debug, Clone, Serialize)]
pub struct CopyNode {
    pub parent: Option<usize>,
    /// Base capacity edge (in the parent copy) that this copy replaces.
    pub edge: Option<usize>,
    pub depth: usize,
    #[serde(serialize_with = "crate::rational::serialize_rational")]
    pub scale: Rational,
    /// Base vertex index -> composed vertex.
    pub map: Vec<VertexId>,
    /// Child copy per base capacity edge (empty at the deepest level).
    pub children: Vec<usize>,
}

/// `G_ℓ` with full provenance.
#[derive(Debug, Clone)]
pub struct PoweredInstance {
    pub base: SparsestCutInstance,
    pub base_decomposition: TreeDecomposition,
    pub levels: usize,
    pub instance: SparsestCutInstance,
    pub decomposition: TreeDecomposition,
    pub copies: Vec<CopyNode>,
    /// Path of base capacity edge indices, outermost first, per composed supply edge.
    pub supply_provenance: Vec<Vec<usize>>,
    /// `(copy, base demand index)` per composed demand edge.
    pub demand_provenance: Vec<(usize, usize)>,
    /// Composed vertex -> (copy where it was created, base vertex index).
    pub origin: HashMap<VertexId, (usize, usize)>,
}

/// Exact vertex count of `G_ℓ`: `n + (n − 2)(m + m² + … + m^{ℓ−1})`.
pub fn powered_vertex_count(n: usize, m: usize, levels: usize) -> u128 {
    let mut copies: u128 = 0;
    let mut layer: u128 = 1;
    for _ in 1..levels {
        layer = layer.saturating_mul(m as u128);
        copies = copies.saturating_add(layer);
    }
    (n as u128).saturating_add(((n as u128).saturating_sub(2)).saturating_mul(copies))
}

/// Replaces every capacity edge `(u, v)` of the base by a copy of
/// `G_{ℓ−1}` whose `s` is identified with `u` and `t` with `v`, with all
/// of the copy's weights multiplied by the edge's capacity. The base
/// decomposition needs a bag holding both terminals; the composed
/// decomposition hangs each copy's decomposition off a bag covering the
/// replaced edge, so its width equals the base's.
pub fn power(
    base: &SparsestCutInstance,
    base_td: &TreeDecomposition,
    levels: usize,
    budgets: &Budgets,
) -> Result<PoweredInstance> {
    if levels == 0 {
        return Err(Error::invalid("powering needs at least one level"));
    }
    let (s, t) = base
        .terminals()
        .ok_or_else(|| Error::invalid("powering needs designated terminals"))?;
    let n = base.num_vertices();
    let m = base.supply_edges().len();
    let projected = powered_vertex_count(n, m, levels);
    if projected > budgets.generated_vertices as u128 {
        return Err(Error::Budget(format!(
            "powered instance would have {projected} vertices (limit {})",
            budgets.generated_vertices
        )));
    }
    crate::decomposition::validate(base, base_td).into_result()?;
    let root = (0..base_td.num_bags())
        .find(|&a| base_td.bag(a).contains(&s) && base_td.bag(a).contains(&t))
        .ok_or_else(|| Error::invalid("no bag of the base decomposition holds both terminals"))?;
    let base_td = base_td.rerooted(root)?;
    let host: Vec<usize> = base
        .supply_edges()
        .iter()
        .map(|e| {
            (0..base_td.num_bags())
                .find(|&a| base_td.bag(a).contains(&e.u) && base_td.bag(a).contains(&e.v))
                .expect("validated decomposition covers every edge")
        })
        .collect();
    let s_idx = base.index_of(s).unwrap();
    let t_idx = base.index_of(t).unwrap();
    let base_bags: Vec<Vec<usize>> = base_td
        .bags()
        .iter()
        .map(|b| b.iter().map(|v| base.index_of(*v).unwrap()).collect())
        .collect();
    let base_tree = base_td.tree_edges();

    let mut next_id = base.vertices().iter().map(|v| v.0).max().unwrap_or(0) + 1;
    let mut copies: Vec<CopyNode> = vec![CopyNode {
        parent: None,
        edge: None,
        depth: 0,
        scale: Rational::one(),
        map: base.vertices().to_vec(),
        children: Vec::new(),
    }];
    let mut origin: HashMap<VertexId, (usize, usize)> =
        base.vertices().iter().enumerate().map(|(i, v)| (*v, (0, i))).collect();
    let mut supply = Vec::new();
    let mut demand = Vec::new();
    let mut supply_provenance = Vec::new();
    let mut demand_provenance = Vec::new();
    let mut bags: Vec<Vec<VertexId>> = Vec::new();
    let mut tree: Vec<(usize, usize)> = Vec::new();

    // Depth-first preorder so composed ids follow copy paths.
    let mut stack = vec![(0usize, Vec::<usize>::new(), None::<usize>)];
    while let Some((c, path, attach)) = stack.pop() {
        let offset = bags.len();
        let map = copies[c].map.clone();
        for bag in &base_bags {
            bags.push(bag.iter().map(|&i| map[i]).collect());
        }
        for &(a, b) in &base_tree {
            tree.push((offset + a, offset + b));
        }
        if let Some(h) = attach {
            tree.push((h, offset + base_td.root()));
        }
        let scale = copies[c].scale.clone();
        for (k, e) in base.demand_edges().iter().enumerate() {
            let (u, v) = (base.index_of(e.u).unwrap(), base.index_of(e.v).unwrap());
            demand.push(Edge::new(map[u], map[v], &scale * &e.weight));
            demand_provenance.push((c, k));
        }
        let depth = copies[c].depth;
        if depth + 1 == levels {
            for (k, e) in base.supply_edges().iter().enumerate() {
                let (u, v) = (base.index_of(e.u).unwrap(), base.index_of(e.v).unwrap());
                supply.push(Edge::new(map[u], map[v], &scale * &e.weight));
                let mut p = path.clone();
                p.push(k);
                supply_provenance.push(p);
            }
            continue;
        }
        let mut pending = Vec::new();
        for (k, e) in base.supply_edges().iter().enumerate() {
            let (u, v) = (base.index_of(e.u).unwrap(), base.index_of(e.v).unwrap());
            let id = copies.len();
            let mut child_map = Vec::with_capacity(n);
            for i in 0..n {
                if i == s_idx {
                    child_map.push(map[u]);
                } else if i == t_idx {
                    child_map.push(map[v]);
                } else {
                    let w = VertexId(next_id);
                    next_id += 1;
                    origin.insert(w, (id, i));
                    child_map.push(w);
                }
            }
            copies.push(CopyNode {
                parent: Some(c),
                edge: Some(k),
                depth: depth + 1,
                scale: &scale * &e.weight,
                map: child_map,
                children: Vec::new(),
            });
            copies[c].children.push(id);
            let mut p = path.clone();
            p.push(k);
            pending.push((id, p, Some(offset + host[k])));
        }
        stack.extend(pending.into_iter().rev());
    }
    let vertices: Vec<VertexId> = origin.keys().copied().collect();
    let instance = SparsestCutInstance::new(vertices, supply, demand, Some((s, t)))?;
    let decomposition = TreeDecomposition::from_edges(bags, &tree, base_td.root())?;
    Ok(PoweredInstance {
        base: base.clone(),
        base_decomposition: base_td,
        levels,
        instance,
        decomposition,
        copies,
        supply_provenance,
        demand_provenance,
        origin,
    })
}

#[derive(Clone, Copy)]
enum Placement {
    Whole(bool),
    /// Split copy; the flag says whether the copy's `s` lies in `A`.
    Oriented(bool),
}

impl PoweredInstance {
    /// Composes an admissible base cut through every level: a copy whose
    /// endpoints are separated is cut like the base (oriented by its `s`),
    /// an unseparated copy goes wholly to its endpoints' side.
    pub fn lift_cut(&self, base_cut: &Cut) -> Result<Cut> {
        if !is_admissible(&self.base, base_cut)? {
            return Err(Error::invalid("lifting needs an admissible base cut"));
        }
        let (s, _) = self.base.terminals().unwrap();
        let s_side = base_cut.contains(s);
        let in_s_side: Vec<bool> = self
            .base
            .vertices()
            .iter()
            .map(|v| base_cut.contains(*v) == s_side)
            .collect();
        let mut side = BTreeSet::new();
        let mut queue = VecDeque::from([(0usize, Placement::Oriented(s_side))]);
        while let Some((c, place)) = queue.pop_front() {
            let copy = &self.copies[c];
            let member = |i: usize| match place {
                Placement::Whole(x) => x,
                Placement::Oriented(sa) => in_s_side[i] == sa,
            };
            for (i, v) in copy.map.iter().enumerate() {
                if member(i) {
                    side.insert(*v);
                }
            }
            for (k, &child) in copy.children.iter().enumerate() {
                let e = &self.base.supply_edges()[k];
                let mu = member(self.base.index_of(e.u).unwrap());
                let mv = member(self.base.index_of(e.v).unwrap());
                let p = if mu == mv { Placement::Whole(mu) } else { Placement::Oriented(mu) };
                queue.push_back((child, p));
            }
        }
        Ok(Cut::new(side))
    }

    pub fn num_capacity_edges(&self) -> usize {
        self.instance.supply_edges().len()
    }
}

/// Predicted `(capacity, demand)` of a lifted cut: `cap^ℓ` and
/// `dem · Σ_{i<ℓ} cap^i`.
pub fn lifted_cut_prediction(cap: &Rational, dem: &Rational, levels: usize) -> (Rational, Rational) {
    let mut power = Rational::one();
    let mut sum = Rational::zero();
    for _ in 0..levels {
        sum += &power;
        power *= cap;
    }
    (power, dem * sum)
}

// ---------------------------------------------------------------------------
// Unique label cover

/// A constraint `σ(label(u)) = label(v)`; labels are `0..d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UlcEdge {
    pub u: usize,
    pub v: usize,
    pub sigma: Vec<usize>,
}

impl UlcEdge {
    /// Constraint read from `v`'s side: `σ^{-1}`.
    pub fn reversed(&self) -> UlcEdge {
        UlcEdge {
            u: self.v,
            v: self.u,
            sigma: invert(&self.sigma),
        }
    }

    pub fn satisfied(&self, labeling: &[usize]) -> bool {
        self.sigma[labeling[self.u]] == labeling[self.v]
    }
}

pub fn invert(sigma: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; sigma.len()];
    for (i, &j) in sigma.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

fn is_permutation(sigma: &[usize], d: usize) -> bool {
    let mut seen = vec![false; d];
    sigma.len() == d
        && sigma.iter().all(|&j| j < d && !std::mem::replace(&mut seen[j], true))
}

/// Unique label cover on a multigraph over vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UlcInstance {
    pub n: usize,
    pub d: usize,
    pub edges: Vec<UlcEdge>,
    /// Clique partition witness of the edge set.
    pub cliques: Option<Vec<Vec<usize>>>,
}

impl UlcInstance {
    pub fn new(n: usize, d: usize, edges: Vec<UlcEdge>, cliques: Option<Vec<Vec<usize>>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("label count must be positive"));
        }
        for e in &edges {
            if e.u >= n || e.v >= n || e.u == e.v {
                return Err(Error::invalid(format!("bad constraint edge ({}, {})", e.u + 1, e.v + 1)));
            }
            if !is_permutation(&e.sigma, d) {
                return Err(Error::invalid(format!(
                    "constraint on ({}, {}) is not a bijection of [{d}]",
                    e.u + 1,
                    e.v + 1
                )));
            }
        }
        Ok(UlcInstance { n, d, edges, cliques })
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Δ of the clique witness when it certifies Δ-niceness: `n` cliques on
    /// `Δ` vertices, each vertex in exactly `Δ`, partitioning the edges.
    pub fn nice_delta(&self) -> Option<usize> {
        let cliques = self.cliques.as_ref()?;
        let delta = cliques.first()?.len();
        if delta < 2 || cliques.len() != self.n {
            return None;
        }
        let mut per_vertex = vec![0usize; self.n];
        let mut pairs: HashMap<(usize, usize), isize> = HashMap::new();
        for c in cliques {
            let distinct: BTreeSet<usize> = c.iter().copied().collect();
            if c.len() != delta || distinct.len() != delta || c.iter().any(|&v| v >= self.n) {
                return None;
            }
            for (i, &a) in c.iter().enumerate() {
                per_vertex[a] += 1;
                for &b in &c[i + 1..] {
                    *pairs.entry((a.min(b), a.max(b))).or_default() += 1;
                }
            }
        }
        if per_vertex.iter().any(|&k| k != delta) {
            return None;
        }
        for e in &self.edges {
            *pairs.entry((e.u.min(e.v), e.u.max(e.v))).or_default() -= 1;
        }
        pairs.values().all(|&k| k == 0).then_some(delta)
    }

    pub fn satisfied_fraction(&self, labeling: &[usize]) -> Rational {
        let good = self.edges.iter().filter(|e| e.satisfied(labeling)).count();
        ratio(good as i64, self.edges.len().max(1) as i64)
    }

    /// Best labeling by exhaustive search over `d^n` labelings.
    pub fn best_labeling(&self, limit: u64) -> Result<(Vec<usize>, Rational)> {
        let total = (self.d as u64).checked_pow(self.n as u32).unwrap_or(u64::MAX);
        if total > limit {
            return Err(Error::Budget(format!("{total} labelings exceed the limit {limit}")));
        }
        let mut labeling = vec![0usize; self.n];
        let mut best = (labeling.clone(), self.satisfied_fraction(&labeling));
        for _ in 1..total {
            for x in labeling.iter_mut() {
                *x += 1;
                if *x < self.d {
                    break;
                }
                *x = 0;
            }
            let val = self.satisfied_fraction(&labeling);
            if val > best.1 {
                best = (labeling.clone(), val);
            }
        }
        Ok(best)
    }
}

/// Bipartite label cover: constraints from left vertex `l` to right vertex `r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BipartiteUlc {
    pub left: usize,
    pub right: usize,
    pub d: usize,
    pub edges: Vec<(usize, usize, Vec<usize>)>,
}

impl BipartiteUlc {
    pub fn satisfied_fraction(&self, left_labels: &[usize], right_labels: &[usize]) -> Rational {
        let good = self
            .edges
            .iter()
            .filter(|(l, r, s)| s[left_labels[*l]] == right_labels[*r])
            .count();
        ratio(good as i64, self.edges.len().max(1) as i64)
    }

    /// Best value by exhaustive search over right labelings; the left labels
    /// are then chosen optimally per vertex.
    pub fn best_value(&self, limit: u64) -> Result<Rational> {
        let total = (self.d as u64).checked_pow(self.right as u32).unwrap_or(u64::MAX);
        if total > limit {
            return Err(Error::Budget(format!("{total} labelings exceed the limit {limit}")));
        }
        let mut right = vec![0usize; self.right];
        let mut best = Rational::zero();
        for step in 0..total {
            if step > 0 {
                for x in right.iter_mut() {
                    *x += 1;
                    if *x < self.d {
                        break;
                    }
                    *x = 0;
                }
            }
            let mut good = 0usize;
            for l in 0..self.left {
                good += (0..self.d)
                    .map(|a| {
                        self.edges
                            .iter()
                            .filter(|(el, r, s)| *el == l && s[a] == right[*r])
                            .count()
                    })
                    .max()
                    .unwrap_or(0);
            }
            let val = ratio(good as i64, self.edges.len().max(1) as i64);
            if val > best {
                best = val;
            }
        }
        Ok(best)
    }
}

/// Turns a Δ-regular bipartite instance into a Δ-nice one on the right
/// vertices: each left vertex `u` becomes a clique on its neighbours with
/// composed constraints `σ_{uw} ∘ σ_{uv}^{-1}`.
pub fn bipartite_to_cliques(b: &BipartiteUlc) -> Result<UlcInstance> {
    let mut left_nbrs: Vec<Vec<usize>> = vec![Vec::new(); b.left];
    let mut right_deg = vec![0usize; b.right];
    for (k, (l, r, sigma)) in b.edges.iter().enumerate() {
        if *l >= b.left || *r >= b.right || !is_permutation(sigma, b.d) {
            return Err(Error::invalid(format!("bad bipartite constraint #{}", k + 1)));
        }
        left_nbrs[*l].push(k);
        right_deg[*r] += 1;
    }
    let delta = left_nbrs.first().map_or(0, Vec::len);
    if delta < 2
        || left_nbrs.iter().any(|e| e.len() != delta)
        || right_deg.iter().any(|&k| k != delta)
    {
        return Err(Error::invalid("bipartite instance is not regular with degree ≥ 2"));
    }
    let mut edges = Vec::new();
    let mut cliques = Vec::new();
    for nbrs in &left_nbrs {
        let clique: Vec<usize> = nbrs.iter().map(|&k| b.edges[k].1).collect();
        if clique.iter().collect::<BTreeSet<_>>().len() != delta {
            return Err(Error::invalid("a left vertex has parallel edges to one right vertex"));
        }
        for i in 0..delta {
            for j in i + 1..delta {
                let (_, v, sv) = &b.edges[nbrs[i]];
                let (_, w, sw) = &b.edges[nbrs[j]];
                let inv = invert(sv);
                let sigma: Vec<usize> = (0..b.d).map(|a| sw[inv[a]]).collect();
                edges.push(UlcEdge { u: *v, v: *w, sigma });
            }
        }
        cliques.push(clique);
    }
    UlcInstance::new(b.right, b.d, edges, Some(cliques))
}

/// Random Δ-regular bipartite instance with `k` vertices per side and a
/// planted labeling; each constraint is corrupted with probability `noise`.
pub fn random_bipartite_ulc(k: usize, delta: usize, d: usize, noise: f64, seed: u64) -> Result<BipartiteUlc> {
    if delta > k || d == 0 {
        return Err(Error::invalid("need Δ ≤ k and d ≥ 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let left_lab: Vec<usize> = (0..k).map(|_| rng.gen_range(0..d)).collect();
    let right_lab: Vec<usize> = (0..k).map(|_| rng.gen_range(0..d)).collect();
    for _ in 0..10_000 {
        let mut pairs = Vec::new();
        for _ in 0..delta {
            let mut perm: Vec<usize> = (0..k).collect();
            perm.shuffle(&mut rng);
            pairs.extend((0..k).map(|l| (l, perm[l])));
        }
        if pairs.iter().collect::<BTreeSet<_>>().len() != pairs.len() {
            continue;
        }
        pairs.sort_unstable();
        let edges = pairs
            .into_iter()
            .map(|(l, r)| {
                let mut sigma: Vec<usize> = (0..d).collect();
                sigma.shuffle(&mut rng);
                if !rng.gen_bool(noise.clamp(0.0, 1.0)) {
                    // Plant: swap so that sigma[left_lab[l]] = right_lab[r].
                    let pos = sigma.iter().position(|&x| x == right_lab[r]).unwrap();
                    sigma.swap(pos, left_lab[l]);
                }
                (l, r, sigma)
            })
            .collect();
        return Ok(BipartiteUlc { left: k, right: k, d, edges });
    }
    Err(Error::invalid("could not draw a simple regular bipartite multigraph"))
}

/// Fano plane as a 3-nice constraint graph with identity constraints.
pub fn fano_ulc(d: usize) -> UlcInstance {
    let lines = [[0, 1, 2], [0, 3, 4], [0, 5, 6], [1, 3, 5], [1, 4, 6], [2, 3, 6], [2, 4, 5]];
    let mut edges = Vec::new();
    for l in &lines {
        for i in 0..3 {
            for j in i + 1..3 {
                edges.push(UlcEdge { u: l[i], v: l[j], sigma: (0..d).collect() });
            }
        }
    }
    let cliques = lines.iter().map(|l| l.to_vec()).collect();
    UlcInstance::new(7, d, edges, Some(cliques)).expect("valid")
}

/// Two vertices joined by two parallel constraints: the smallest 2-nice
/// instance.
pub fn toy_ulc(d: usize, sigmas: [Vec<usize>; 2]) -> Result<UlcInstance> {
    let [a, b] = sigmas;
    UlcInstance::new(
        2,
        d,
        vec![UlcEdge { u: 0, v: 1, sigma: a }, UlcEdge { u: 0, v: 1, sigma: b }],
        Some(vec![vec![0, 1], vec![0, 1]]),
    )
}

/// Hypercube gadget: per constraint vertex `v` a cube `Q_v = {±1}^d`
/// (bit `i` set means coordinate `i+1` is `+1`), star edges of capacity
/// `1/N` from `s` and to `t`, cube edges of capacity `α/N`, and demand
/// `1/M` from `x ∈ Q_v` to `−σ_{vw}(x) ∈ Q_w` per constraint.
#[derive(Debug, Clone)]
pub struct UgGadget {
    pub ulc: UlcInstance,
    pub alpha: Rational,
    pub instance: SparsestCutInstance,
    pub decomposition: TreeDecomposition,
}

pub const GADGET_S: VertexId = VertexId(1);
pub const GADGET_T: VertexId = VertexId(2);

/// `σ(x)_i = x_{σ^{-1}(i)}` on bitmasks.
pub fn permute_mask(sigma: &[usize], x: usize) -> usize {
    let mut y = 0;
    for (j, &to) in sigma.iter().enumerate() {
        if x >> j & 1 == 1 {
            y |= 1 << to;
        }
    }
    y
}

pub fn ug_gadget(ulc: &UlcInstance, alpha: Rational, budgets: &Budgets) -> Result<UgGadget> {
    let d = ulc.d;
    if d > budgets.gadget_dimension {
        return Err(Error::Budget(format!(
            "cube dimension {d} exceeds the limit {}",
            budgets.gadget_dimension
        )));
    }
    if ulc.nice_delta().is_none() {
        return Err(Error::invalid("gadget needs a Δ-nice label cover instance"));
    }
    let cube = 1usize << d;
    let big_n = ulc.n * cube;
    let big_m = ulc.num_edges() * cube;
    if big_n + 2 > budgets.generated_vertices {
        return Err(Error::Budget(format!("gadget would have {} vertices", big_n + 2)));
    }
    let node = |v: usize, x: usize| VertexId((3 + v * cube + x) as u32);
    let star = ratio(1, big_n as i64);
    let cube_cap = &alpha / int(big_n as i64);
    let mut supply = Vec::new();
    for v in 0..ulc.n {
        for x in 0..cube {
            supply.push(Edge::new(GADGET_S, node(v, x), star.clone()));
            supply.push(Edge::new(node(v, x), GADGET_T, star.clone()));
        }
        for x in 0..cube {
            for i in 0..d {
                if x >> i & 1 == 0 {
                    supply.push(Edge::new(node(v, x), node(v, x | 1 << i), cube_cap.clone()));
                }
            }
        }
    }
    let dem = ratio(1, big_m as i64);
    let mut demand = Vec::new();
    for e in &ulc.edges {
        for x in 0..cube {
            let y = !permute_mask(&e.sigma, x) & (cube - 1);
            demand.push(Edge::new(node(e.u, x), node(e.v, y), dem.clone()));
        }
    }
    let instance = SparsestCutInstance::with_vertex_count(
        (big_n + 2) as u32,
        supply,
        demand,
        Some((GADGET_S, GADGET_T)),
    )?;
    let mut bags = vec![vec![GADGET_S, GADGET_T]];
    let mut tree = Vec::new();
    for v in 0..ulc.n {
        tree.push((0, bags.len()));
        let mut bag = vec![GADGET_S, GADGET_T];
        bag.extend((0..cube).map(|x| node(v, x)));
        bags.push(bag);
    }
    let decomposition = TreeDecomposition::from_edges(bags, &tree, 0)?;
    Ok(UgGadget {
        ulc: ulc.clone(),
        alpha,
        instance,
        decomposition,
    })
}

impl UgGadget {
    pub fn node(&self, v: usize, x: usize) -> VertexId {
        VertexId((3 + v * (1 << self.ulc.d) + x) as u32)
    }

    /// Predicted total capacity of the construction as generated:
    /// `2 + αd/2` (both star layers carry `1/N` per node).
    pub fn predicted_capacity(&self) -> Rational {
        int(2) + &self.alpha * ratio(self.ulc.d as i64, 2)
    }

    /// `{s} ∪ {x ∈ Q_v : x_{f(v)} = +1}`.
    pub fn dictator_cut(&self, labeling: &[usize]) -> Result<Cut> {
        if labeling.len() != self.ulc.n || labeling.iter().any(|&a| a >= self.ulc.d) {
            return Err(Error::invalid("labeling must assign a label in [d] to every vertex"));
        }
        let cube = 1usize << self.ulc.d;
        let mut side = vec![GADGET_S];
        for (v, &a) in labeling.iter().enumerate() {
            side.extend((0..cube).filter(|x| x >> a & 1 == 1).map(|x| self.node(v, x)));
        }
        Ok(Cut::new(side))
    }
}

/// Outcome of an exhaustive cut check on `H × I_ℓ`.
#[derive(Debug, Clone, Serialize)]
pub struct CliqueProductAudit {
    pub vertices: usize,
    pub edges: usize,
    pub max_cut_edges: usize,
    #[serde(serialize_with = "crate::rational::serialize_rational")]
    pub max_fraction: Rational,
    #[serde(serialize_with = "crate::rational::serialize_rational")]
    pub bound: Rational,
    pub holds: bool,
}

/// Every cut of `H × I_ℓ` (each `H`-edge becomes a complete bipartite
/// graph between the `ℓ` copies of its endpoints) cuts at most
/// `1/2 + 1/(2(Δ−1))` of the edges when `H` is a union of Δ-cliques.
pub fn clique_product_maxcut_bound(
    n: usize,
    cliques: &[Vec<usize>],
    levels: usize,
    budgets: &Budgets,
) -> Result<CliqueProductAudit> {
    let delta = cliques.first().map_or(0, Vec::len);
    if delta < 2 || cliques.iter().any(|c| c.len() != delta || c.iter().any(|&v| v >= n)) {
        return Err(Error::invalid("need cliques of one common size Δ ≥ 2"));
    }
    let nv = n * levels;
    if nv > budgets.oracle_vertices || nv >= 63 {
        return Err(Error::Budget(format!("{nv} vertices exceed the enumeration limit")));
    }
    let mut edges = Vec::new();
    for c in cliques {
        for i in 0..delta {
            for j in i + 1..delta {
                for a in 0..levels {
                    for b in 0..levels {
                        edges.push((c[i] * levels + a, c[j] * levels + b));
                    }
                }
            }
        }
    }
    use rayon::prelude::*;
    let max_cut = (0u64..1 << (nv - 1))
        .into_par_iter()
        .map(|mask| {
            edges
                .iter()
                .filter(|(a, b)| (mask >> a & 1) != (mask >> b & 1))
                .count()
        })
        .max()
        .unwrap_or(0);
    let max_fraction = ratio(max_cut as i64, edges.len() as i64);
    let bound = ratio(1, 2) + ratio(1, 2 * (delta as i64 - 1));
    Ok(CliqueProductAudit {
        vertices: nv,
        edges: edges.len(),
        max_cut_edges: max_cut,
        holds: max_fraction <= bound,
        max_fraction,
        bound,
    })
}

// ---------------------------------------------------------------------------
// Random corpora

/// Random small rational in `[1/3, 5]`.
fn random_weight(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(1..=5), rng.gen_range(1..=3))
}

/// Random partial `k`-tree on `n` vertices with its decomposition, random
/// rational capacities and `demands` random demand pairs.
pub fn random_partial_ktree(
    n: usize,
    k: usize,
    demands: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(SparsestCutInstance, TreeDecomposition)> {
    if n < 2 || k == 0 {
        return Err(Error::invalid("need n ≥ 2 and k ≥ 1"));
    }
    let k = k.min(n - 1);
    let mut ids: Vec<u32> = (1..=n as u32).collect();
    ids.shuffle(rng);
    let vid = |i: usize| VertexId(ids[i]);
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    // Initial (k+1)-clique: keep a spanning path plus random chords.
    for i in 0..=k {
        for j in i + 1..=k {
            if j == i + 1 || rng.gen_bool(0.6) {
                pairs.insert((i, j));
            }
        }
    }
    let mut bags: Vec<Vec<usize>> = vec![(0..=k).collect()];
    let mut tree = Vec::new();
    // k-cliques available for attachment, with the bag that holds them.
    let mut cliques: Vec<(Vec<usize>, usize)> = (0..=k)
        .map(|skip| ((0..=k).filter(|&x| x != skip).collect(), 0))
        .collect();
    for v in k + 1..n {
        let (clique, host) = cliques[rng.gen_range(0..cliques.len())].clone();
        let anchor = clique[rng.gen_range(0..k)];
        for &u in &clique {
            if u == anchor || rng.gen_bool(0.6) {
                pairs.insert((u, v));
            }
        }
        let bag_id = bags.len();
        let mut bag = clique.clone();
        bag.push(v);
        tree.push((host, bag_id));
        for skip in 0..k {
            let mut c: Vec<usize> = clique.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &x)| x).collect();
            c.push(v);
            cliques.push((c, bag_id));
        }
        bags.push(bag);
    }
    let supply: Vec<Edge> = pairs
        .iter()
        .map(|&(a, b)| Edge::new(vid(a), vid(b), random_weight(rng)))
        .collect();
    let mut demand = Vec::new();
    for _ in 0..demands.max(1) {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        demand.push(Edge::new(vid(a), vid(b), ratio(rng.gen_range(1..=4), rng.gen_range(1..=2))));
    }
    let instance = SparsestCutInstance::with_vertex_count(n as u32, supply, demand, None)?;
    let bags = bags.into_iter().map(|b| b.into_iter().map(vid).collect()).collect();
    let td = TreeDecomposition::from_edges(bags, &tree, 0)?;
    Ok((instance, td))
}

/// Random series-parallel instance (a connected partial 2-tree).
pub fn random_series_parallel(
    n: usize,
    demands: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(SparsestCutInstance, TreeDecomposition)> {
    random_partial_ktree(n, 2, demands, rng)
}

/// The instance corpus used for end-to-end checks: alternating
/// series-parallel and partial 3-trees, `4 ≤ n ≤ max_n`, 2–4 demands.
pub fn random_corpus(count: usize, max_n: usize, seed: u64) -> Result<Vec<(SparsestCutInstance, TreeDecomposition)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(4..=max_n.max(4));
            let demands = rng.gen_range(2..=4);
            if i % 2 == 0 {
                random_series_parallel(n, demands, &mut rng)
            } else {
                random_partial_ktree(n, 3, demands, &mut rng)
            }
        })
        .collect()
}

/// Exhaustive `(capacity, demand)` check used by doc-level sanity tests.
pub fn cut_values(instance: &SparsestCutInstance, cut: &Cut) -> Result<(Rational, Rational)> {
    let s = evaluate_cut(instance, cut)?;
    Ok((s.cut_capacity, s.cut_demand))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::validate;

    fn side(vs: &[u32]) -> BTreeSet<VertexId> {
        vs.iter().map(|&v| VertexId(v)).collect()
    }

    #[test]
    fn named_bases() {
        assert_eq!(MaxCutInstance::named("k5").unwrap().num_edges(), 10);
        assert_eq!(MaxCutInstance::named("P3").unwrap().num_edges(), 2);
        assert_eq!(MaxCutInstance::named("c5").unwrap().num_edges(), 5);
        assert!(MaxCutInstance::named("x3").is_err());
        assert!(MaxCutInstance::new(4, vec![(VertexId(1), VertexId(2)), (VertexId(3), VertexId(4))]).is_err());
    }

    #[test]
    fn k2_block_arithmetic() {
        let g = building_block(&MaxCutInstance::complete(2).unwrap(), false).unwrap();
        assert!(g.supply_edges().iter().all(|e| e.weight == ratio(1, 2)));
        assert_eq!(g.total_capacity(), int(2));
        assert!(validate(&g, &block_decomposition(&MaxCutInstance::complete(2).unwrap())).is_ok());
    }

    #[test]
    fn k3_block_dictator() {
        let h = MaxCutInstance::complete(3).unwrap();
        let g = building_block(&h, true).unwrap();
        let s = evaluate_cut(&g, &block_cut(&side(&[1]))).unwrap();
        assert_eq!(s.cut_capacity, int(1));
        assert_eq!(s.ratio, Some(ratio(3, 5)));
    }

    #[test]
    fn powering_counts() {
        let h = MaxCutInstance::path(3).unwrap();
        let g = building_block(&h, false).unwrap();
        let p = power(&g, &block_decomposition(&h), 2, &Budgets::default()).unwrap();
        assert_eq!(p.num_capacity_edges(), 36);
        assert_eq!(p.instance.num_vertices(), 23);
        assert_eq!(powered_vertex_count(5, 6, 2), 23);
        assert!(validate(&p.instance, &p.decomposition).is_ok());
        assert_eq!(p.decomposition.width(), 2);
        assert_eq!(p.instance.total_capacity(), int(4));
        let one = power(&g, &block_decomposition(&h), 1, &Budgets::default()).unwrap();
        assert_eq!(one.instance.supply_edges(), g.supply_edges());
        assert_eq!(one.instance.demand_edges(), g.demand_edges());
    }

    #[test]
    fn lifted_dictator_on_p3() {
        let h = MaxCutInstance::path(3).unwrap();
        let g = building_block(&h, false).unwrap();
        let p = power(&g, &block_decomposition(&h), 2, &Budgets::default()).unwrap();
        let lifted = p.lift_cut(&block_cut(&side(&[2]))).unwrap();
        let s = evaluate_cut(&p.instance, &lifted).unwrap();
        assert_eq!(s.cut_capacity, int(1));
        assert_eq!(s.cut_demand, int(2));
        assert!(p.lift_cut(&Cut::new([BLOCK_S, BLOCK_T])).is_err());
    }

    #[test]
    fn power_budget() {
        let h = MaxCutInstance::complete(5).unwrap();
        let g = building_block(&h, false).unwrap();
        let b = Budgets { generated_vertices: 100, ..Budgets::default() };
        assert!(matches!(power(&g, &block_decomposition(&h), 3, &b), Err(Error::Budget(_))));
    }

    #[test]
    fn cliques_from_bipartite() {
        let b = random_bipartite_ulc(4, 2, 3, 0.0, 7).unwrap();
        let u = bipartite_to_cliques(&b).unwrap();
        assert_eq!(u.nice_delta(), Some(2));
        assert_eq!(u.num_edges(), 4);
        let single = BipartiteUlc { left: 1, right: 2, d: 2, edges: vec![(0, 0, vec![0, 1]), (0, 1, vec![1, 0])] };
        assert!(bipartite_to_cliques(&single).is_err(), "right side is not regular");
    }

    #[test]
    fn gadget_sizes() {
        let u = toy_ulc(2, [vec![0, 1], vec![1, 0]]).unwrap();
        let g = ug_gadget(&u, ratio(1, 25), &Budgets::default()).unwrap();
        assert_eq!(g.instance.num_vertices(), 10);
        assert_eq!(g.instance.supply_edges().len(), 16 + 8);
        assert_eq!(g.instance.demand_edges().len(), 8);
        assert_eq!(g.instance.total_demand(), int(1));
        assert_eq!(g.instance.total_capacity(), g.predicted_capacity());
        assert!(validate(&g.instance, &g.decomposition).is_ok());
    }

    #[test]
    fn fano_is_three_nice() {
        let f = fano_ulc(2);
        assert_eq!(f.nice_delta(), Some(3));
        let audit = clique_product_maxcut_bound(7, f.cliques.as_ref().unwrap(), 1, &Budgets::default()).unwrap();
        assert!(audit.holds);
    }

    #[test]
    fn permute_mask_pullback() {
        // σ = (0→2, 1→0, 2→1): x_1 moves to position σ(1).
        assert_eq!(permute_mask(&[2, 0, 1], 0b001), 0b100);
        assert_eq!(permute_mask(&[2, 0, 1], 0b011), 0b101);
    }

    #[test]
    fn corpus_decompositions_validate() {
        for (g, td) in random_corpus(30, 10, 3).unwrap() {
            assert!(validate(&g, &td).is_ok());
            assert!(td.width() <= 3);
            assert!(g.is_supply_connected());
        }
    }
}
