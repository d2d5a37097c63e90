//! Instances, cuts and exact sparsity arithmetic.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

/// Opaque vertex identifier. Text formats use 1-based integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for VertexId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u32(self.0)
    }
}

/// A weighted undirected edge. Used for both capacity and demand edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: Rational,
}

impl Edge {
    pub fn new(u: VertexId, v: VertexId, weight: Rational) -> Self {
        Edge { u, v, weight }
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Supply graph with capacities, demand graph with demands, optional
/// terminals. Parallel edges are kept as separate entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsestCutInstance {
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    supply: Vec<Edge>,
    demand: Vec<Edge>,
    terminals: Option<(VertexId, VertexId)>,
}

impl SparsestCutInstance {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        supply: Vec<Edge>,
        demand: Vec<Edge>,
        terminals: Option<(VertexId, VertexId)>,
    ) -> Result<Self> {
        let set: BTreeSet<VertexId> = vertices.into_iter().collect();
        let vertices: Vec<VertexId> = set.into_iter().collect();
        let index: HashMap<VertexId, usize> =
            vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        for (kind, edges) in [("supply", &supply), ("demand", &demand)] {
            for e in edges.iter() {
                if !index.contains_key(&e.u) || !index.contains_key(&e.v) {
                    return Err(Error::invalid(format!(
                        "{kind} edge ({}, {}) uses an undeclared vertex",
                        e.u, e.v
                    )));
                }
                if e.u == e.v {
                    return Err(Error::invalid(format!("{kind} self-loop at vertex {}", e.u)));
                }
                if e.weight.is_negative() {
                    return Err(Error::invalid(format!(
                        "{kind} edge ({}, {}) has negative weight",
                        e.u, e.v
                    )));
                }
            }
        }
        if let Some((s, t)) = terminals {
            if !index.contains_key(&s) || !index.contains_key(&t) {
                return Err(Error::invalid("terminal is not a declared vertex"));
            }
            if s == t {
                return Err(Error::invalid("terminals must be distinct"));
            }
        }
        Ok(SparsestCutInstance {
            vertices,
            index,
            supply,
            demand,
            terminals,
        })
    }

    /// Instance on vertices `1..=n`.
    pub fn with_vertex_count(
        n: u32,
        supply: Vec<Edge>,
        demand: Vec<Edge>,
        terminals: Option<(VertexId, VertexId)>,
    ) -> Result<Self> {
        Self::new((1..=n).map(VertexId), supply, demand, terminals)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn supply_edges(&self) -> &[Edge] {
        &self.supply
    }

    pub fn demand_edges(&self) -> &[Edge] {
        &self.demand
    }

    pub fn terminals(&self) -> Option<(VertexId, VertexId)> {
        self.terminals
    }

    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.index.contains_key(&v)
    }

    pub fn total_capacity(&self) -> Rational {
        self.supply.iter().map(|e| &e.weight).sum()
    }

    pub fn total_demand(&self) -> Rational {
        self.demand.iter().map(|e| &e.weight).sum()
    }

    /// Same graph with the terminal pair replaced.
    pub fn with_terminals(&self, terminals: Option<(VertexId, VertexId)>) -> Result<Self> {
        Self::new(
            self.vertices.iter().copied(),
            self.supply.clone(),
            self.demand.clone(),
            terminals,
        )
    }

    /// Supply adjacency lists by vertex index (edge indices into `supply_edges`).
    pub fn supply_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.supply.iter().enumerate() {
            adj[self.index[&e.u]].push(i);
            adj[self.index[&e.v]].push(i);
        }
        adj
    }

    /// Connected components of the supply graph induced on `members`
    /// (vertex indices), each as a sorted list of indices.
    fn induced_components(&self, members: &[bool], adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for start in 0..n {
            if !members[start] || seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                for &ei in &adj[x] {
                    let e = &self.supply[ei];
                    let y = self.index[&e.other(self.vertices[x])];
                    if members[y] && !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                        stack.push(y);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_supply_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let adj = self.supply_adjacency();
        self.induced_components(&vec![true; self.vertices.len()], &adj)
            .len()
            == 1
    }
}

/// A cut, given by one side `A`; the other side is implied.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cut {
    side: BTreeSet<VertexId>,
}

impl Cut {
    pub fn new(side: impl IntoIterator<Item = VertexId>) -> Self {
        Cut {
            side: side.into_iter().collect(),
        }
    }

    pub fn side(&self) -> &BTreeSet<VertexId> {
        &self.side
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.side.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.side.len()
    }

    pub fn is_empty(&self) -> bool {
        self.side.is_empty()
    }

    pub fn complement(&self, instance: &SparsestCutInstance) -> Cut {
        Cut::new(
            instance
                .vertices()
                .iter()
                .copied()
                .filter(|v| !self.side.contains(v)),
        )
    }

    pub fn is_degenerate(&self, instance: &SparsestCutInstance) -> bool {
        self.side.is_empty() || self.side.len() == instance.num_vertices()
    }

    /// The same bipartition with the side containing the smallest vertex.
    pub fn canonical(&self, instance: &SparsestCutInstance) -> Cut {
        match instance.vertices().first() {
            Some(v) if !self.side.contains(v) => self.complement(instance),
            _ => self.clone(),
        }
    }
}

impl Serialize for Cut {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.side.iter())
    }
}

/// Exact cut capacity, cut demand and their ratio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sparsity {
    pub cut_capacity: Rational,
    pub cut_demand: Rational,
    /// `None` when the cut separates no demand (ratio is +infinity or undefined).
    pub ratio: Option<Rational>,
    /// `A` is empty or the whole vertex set.
    pub degenerate: bool,
}

impl Sparsity {
    fn from_parts(cut_capacity: Rational, cut_demand: Rational, degenerate: bool) -> Self {
        let ratio = if cut_demand.is_zero() {
            None
        } else {
            Some(&cut_capacity / &cut_demand)
        };
        Sparsity {
            cut_capacity,
            cut_demand,
            ratio,
            degenerate,
        }
    }

    /// `self` is at least as sparse as `other` (missing ratios count as +infinity).
    pub fn at_most(&self, other: &Sparsity) -> bool {
        match (&self.ratio, &other.ratio) {
            (Some(a), Some(b)) => a <= b,
            (_, None) => true,
            (None, Some(_)) => false,
        }
    }
}

impl Serialize for Sparsity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Sparsity", 4)?;
        st.serialize_field("cut_capacity", &format_rational(&self.cut_capacity))?;
        st.serialize_field("cut_demand", &format_rational(&self.cut_demand))?;
        st.serialize_field("ratio", &self.ratio.as_ref().map(format_rational))?;
        st.serialize_field("degenerate", &self.degenerate)?;
        st.end()
    }
}

fn membership(instance: &SparsestCutInstance, cut: &Cut) -> Result<Vec<bool>> {
    let mut inside = vec![false; instance.num_vertices()];
    for v in cut.side() {
        let i = instance
            .index_of(*v)
            .ok_or_else(|| Error::invalid(format!("cut vertex {v} is not in the instance")))?;
        inside[i] = true;
    }
    Ok(inside)
}

fn crossing_sum(instance: &SparsestCutInstance, edges: &[Edge], inside: &[bool]) -> Rational {
    edges
        .iter()
        .filter(|e| inside[instance.index[&e.u]] != inside[instance.index[&e.v]])
        .map(|e| &e.weight)
        .sum()
}

/// Capacity of `∂_G(A)`, demand of `∂_D(A)` and their ratio.
pub fn evaluate_cut(instance: &SparsestCutInstance, cut: &Cut) -> Result<Sparsity> {
    let inside = membership(instance, cut)?;
    if cut.is_degenerate(instance) {
        return Ok(Sparsity::from_parts(Rational::zero(), Rational::zero(), true));
    }
    let cap = crossing_sum(instance, instance.supply_edges(), &inside);
    let dem = crossing_sum(instance, instance.demand_edges(), &inside);
    Ok(Sparsity::from_parts(cap, dem, false))
}

/// True iff exactly one terminal lies on side `A`.
pub fn is_admissible(instance: &SparsestCutInstance, cut: &Cut) -> Result<bool> {
    let (s, t) = instance
        .terminals()
        .ok_or_else(|| Error::invalid("instance declares no terminals"))?;
    Ok(cut.contains(s) != cut.contains(t))
}

/// Repeatedly replaces a disconnected side by its sparsest connected
/// component until both sides induce connected supply subgraphs. The ratio
/// never increases.
pub fn connected_refinement(instance: &SparsestCutInstance, cut: &Cut) -> Result<Cut> {
    if cut.is_degenerate(instance) {
        return Err(Error::invalid("cannot refine a degenerate cut"));
    }
    let start = evaluate_cut(instance, cut)?;
    if start.ratio.is_none() {
        return Err(Error::invalid(
            "cut separates no demand; sparsity is undefined",
        ));
    }
    let adj = instance.supply_adjacency();
    let n = instance.num_vertices();
    let mut current = membership(instance, cut)?;
    loop {
        let outside: Vec<bool> = current.iter().map(|b| !b).collect();
        let inner = instance.induced_components(&current, &adj);
        let outer = instance.induced_components(&outside, &adj);
        let parts = if inner.len() > 1 {
            inner
        } else if outer.len() > 1 {
            outer
        } else {
            break;
        };
        let mut best: Option<(Rational, Vec<usize>)> = None;
        for comp in parts {
            let mut side = vec![false; n];
            for &i in &comp {
                side[i] = true;
            }
            let dem = crossing_sum(instance, instance.demand_edges(), &side);
            if dem.is_zero() {
                continue;
            }
            let cap = crossing_sum(instance, instance.supply_edges(), &side);
            let r = cap / dem;
            let better = match &best {
                None => true,
                Some((b, bc)) => r < *b || (r == *b && comp < *bc),
            };
            if better {
                best = Some((r, comp));
            }
        }
        let (_, comp) = best.ok_or_else(|| {
            Error::invalid("every component separates zero demand; sparsity undefined")
        })?;
        current = vec![false; n];
        for i in comp {
            current[i] = true;
        }
    }
    Ok(Cut::new(
        (0..n).filter(|&i| current[i]).map(|i| instance.vertices()[i]),
    ))
}
