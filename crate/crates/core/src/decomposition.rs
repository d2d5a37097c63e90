//! Rooted tree decompositions: validation, exact treewidth by subset DP,
//! logarithmic-depth rebalancing and root-path unions.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{SparsestCutInstance, VertexId};

/// A tree of bags rooted at `root`. Bag contents are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<Vec<VertexId>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    root: usize,
}

fn normalize_bag(bag: impl IntoIterator<Item = VertexId>) -> Vec<VertexId> {
    let set: BTreeSet<VertexId> = bag.into_iter().collect();
    set.into_iter().collect()
}

impl TreeDecomposition {
    /// Builds a decomposition from bags and undirected tree edges (0-based
    /// bag indices). Fails unless the edges form a single spanning tree.
    pub fn from_edges(
        bags: Vec<Vec<VertexId>>,
        edges: &[(usize, usize)],
        root: usize,
    ) -> Result<Self> {
        let n = bags.len();
        if n == 0 {
            return Err(Error::invalid("a tree decomposition needs at least one bag"));
        }
        if root >= n {
            return Err(Error::invalid(format!("root bag {} does not exist", root + 1)));
        }
        if edges.len() != n - 1 {
            return Err(Error::invalid(format!(
                "{} bags need {} tree edges, found {}",
                n,
                n - 1,
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::invalid(format!(
                    "bad tree edge ({}, {})",
                    a + 1,
                    b + 1
                )));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            let mut nbrs = adj[a].clone();
            nbrs.sort_unstable();
            for b in nbrs {
                if !seen[b] {
                    seen[b] = true;
                    parent[b] = Some(a);
                    queue.push_back(b);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("tree edges do not connect all bags"));
        }
        Ok(Self::from_parents(
            bags.into_iter().map(normalize_bag).collect(),
            parent,
            root,
        ))
    }

    fn from_parents(bags: Vec<Vec<VertexId>>, parent: Vec<Option<usize>>, root: usize) -> Self {
        let mut children = vec![Vec::new(); bags.len()];
        for (b, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(b);
            }
        }
        TreeDecomposition {
            bags,
            parent,
            children,
            root,
        }
    }

    /// A single bag holding every listed vertex.
    pub fn single_bag(vertices: impl IntoIterator<Item = VertexId>) -> Self {
        Self::from_parents(vec![normalize_bag(vertices)], vec![None], 0)
    }

    pub fn bags(&self) -> &[Vec<VertexId>] {
        &self.bags
    }

    pub fn bag(&self, a: usize) -> &[VertexId] {
        &self.bags[a]
    }

    pub fn num_bags(&self) -> usize {
        self.bags.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, a: usize) -> Option<usize> {
        self.parent[a]
    }

    pub fn children(&self, a: usize) -> &[usize] {
        &self.children[a]
    }

    /// Undirected tree edges as (parent, child) pairs.
    pub fn tree_edges(&self) -> Vec<(usize, usize)> {
        (0..self.bags.len())
            .filter_map(|b| self.parent[b].map(|p| (p, b)))
            .collect()
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn width(&self) -> usize {
        self.max_bag_size().saturating_sub(1)
    }

    /// Bags in breadth-first order from the root (children by index).
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.bags.len());
        let mut queue = VecDeque::from([self.root]);
        while let Some(a) = queue.pop_front() {
            order.push(a);
            queue.extend(self.children[a].iter().copied());
        }
        order
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.bags.len()];
        for a in self.bfs_order() {
            if let Some(p) = self.parent[a] {
                depth[a] = depth[p] + 1;
            }
        }
        depth
    }

    pub fn depth(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    pub fn is_binary(&self) -> bool {
        self.children.iter().all(|c| c.len() <= 2)
    }

    /// Distinct vertices appearing in some bag.
    pub fn vertex_set(&self) -> BTreeSet<VertexId> {
        self.bags.iter().flatten().copied().collect()
    }

    /// Bags on the path from the root to `a`, root first.
    pub fn root_path(&self, a: usize) -> Vec<usize> {
        let mut path = vec![a];
        let mut cur = a;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Lowest common ancestor of two bags.
    pub fn lca(&self, a: usize, b: usize) -> usize {
        let pa = self.root_path(a);
        let pb = self.root_path(b);
        let mut last = self.root;
        for (x, y) in pa.iter().zip(pb.iter()) {
            if x != y {
                break;
            }
            last = *x;
        }
        last
    }

    /// Same tree rooted at another bag.
    pub fn rerooted(&self, root: usize) -> Result<Self> {
        Self::from_edges(self.bags.clone(), &self.tree_edges(), root)
    }

    /// Removes every bag contained in an adjacent bag, attaching its other
    /// neighbours to the absorbing bag. Vertex traces stay connected.
    pub fn compacted(&self) -> Self {
        let mut bags: Vec<Option<Vec<VertexId>>> = self.bags.iter().cloned().map(Some).collect();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); bags.len()];
        for (p, c) in self.tree_edges() {
            adj[p].insert(c);
            adj[c].insert(p);
        }
        let is_subset = |a: &[VertexId], b: &[VertexId]| {
            let bs: BTreeSet<&VertexId> = b.iter().collect();
            a.iter().all(|v| bs.contains(v))
        };
        loop {
            let mut merged = false;
            for a in 0..bags.len() {
                let Some(bag_a) = bags[a].clone() else { continue };
                let target = adj[a]
                    .iter()
                    .copied()
                    .find(|&b| is_subset(&bag_a, bags[b].as_ref().unwrap()));
                if let Some(b) = target {
                    let nbrs: Vec<usize> = adj[a].iter().copied().filter(|&x| x != b).collect();
                    for x in nbrs {
                        adj[x].remove(&a);
                        adj[x].insert(b);
                        adj[b].insert(x);
                    }
                    adj[b].remove(&a);
                    adj[a].clear();
                    bags[a] = None;
                    merged = true;
                }
            }
            if !merged {
                break;
            }
        }
        let keep: Vec<usize> = (0..bags.len()).filter(|&a| bags[a].is_some()).collect();
        let new_index: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let mut edges = Vec::new();
        for &a in &keep {
            for &b in &adj[a] {
                if a < b {
                    edges.push((new_index[&a], new_index[&b]));
                }
            }
        }
        let new_bags: Vec<Vec<VertexId>> = keep.iter().map(|&a| bags[a].clone().unwrap()).collect();
        // The original root may have been absorbed; follow it to a surviving bag.
        let root = if bags[self.root].is_some() {
            new_index[&self.root]
        } else {
            let root_bag = &self.bags[self.root];
            keep.iter()
                .position(|&a| is_subset(root_bag, bags[a].as_ref().unwrap()))
                .unwrap_or(0)
        };
        Self::from_edges(new_bags, &edges, root).expect("compaction preserves tree shape")
    }

    /// Splits every node with more than two children into a chain of
    /// copies of its bag, so that every node has at most two children.
    pub fn binarized(&self) -> Self {
        let mut bags = self.bags.clone();
        let mut parent = self.parent.clone();
        for a in self.bfs_order() {
            let kids = &self.children[a];
            if kids.len() <= 2 {
                continue;
            }
            let mut holder = a;
            for (i, &c) in kids.iter().enumerate() {
                parent[c] = Some(holder);
                if kids.len() - i > 2 {
                    bags.push(self.bags[a].clone());
                    parent.push(Some(holder));
                    holder = bags.len() - 1;
                }
            }
        }
        Self::from_parents(bags, parent, self.root)
    }

    /// `V_a`, the union of bags on the root-to-`a` path, for every bag.
    pub fn root_path_unions(&self) -> Vec<RootPathUnion> {
        let mut unions: Vec<Vec<VertexId>> = vec![Vec::new(); self.bags.len()];
        for a in self.bfs_order() {
            unions[a] = match self.parent[a] {
                None => self.bags[a].clone(),
                Some(p) => normalize_bag(unions[p].iter().chain(self.bags[a].iter()).copied()),
            };
        }
        unions
            .into_iter()
            .enumerate()
            .map(|(node, union_set)| RootPathUnion { node, union_set })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootPathUnion {
    pub node: usize,
    pub union_set: Vec<VertexId>,
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Validation {
    Ok { width: usize },
    Violation { kind: ViolationKind, message: String },
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        matches!(self, Validation::Ok { .. })
    }

    pub fn into_result(self) -> Result<usize> {
        match self {
            Validation::Ok { width } => Ok(width),
            Validation::Violation { message, .. } => Err(Error::Invalid(message)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    UnknownVertex,
    UncoveredVertex,
    UncoveredEdge,
    DisconnectedTrace,
}

/// Checks edge coverage, vertex coverage and connectivity of every
/// vertex's bag trace. Tree shape is guaranteed by construction.
pub fn validate(instance: &SparsestCutInstance, td: &TreeDecomposition) -> Validation {
    let violation = |kind, message: String| Validation::Violation { kind, message };
    for (a, bag) in td.bags().iter().enumerate() {
        if let Some(v) = bag.iter().find(|v| !instance.contains(**v)) {
            return violation(
                ViolationKind::UnknownVertex,
                format!("bag {} contains vertex {} which is not in the instance", a + 1, v),
            );
        }
    }
    let mut trace: HashMap<VertexId, Vec<usize>> = HashMap::new();
    for (a, bag) in td.bags().iter().enumerate() {
        for v in bag {
            trace.entry(*v).or_default().push(a);
        }
    }
    for v in instance.vertices() {
        if !trace.contains_key(v) {
            return violation(
                ViolationKind::UncoveredVertex,
                format!("vertex {v} lies in no bag"),
            );
        }
    }
    for e in instance.supply_edges() {
        let covered = trace[&e.u]
            .iter()
            .any(|&a| td.bag(a).binary_search(&e.v).is_ok());
        if !covered {
            return violation(
                ViolationKind::UncoveredEdge,
                format!("edge ({}, {}) is not inside any bag", e.u, e.v),
            );
        }
    }
    // A trace is connected iff exactly one of its bags has its parent outside it.
    for v in instance.vertices() {
        let bags = &trace[v];
        let tops = bags
            .iter()
            .filter(|&&a| match td.parent(a) {
                None => true,
                Some(p) => td.bag(p).binary_search(v).is_err(),
            })
            .count();
        if tops != 1 {
            return violation(
                ViolationKind::DisconnectedTrace,
                format!("bags containing vertex {v} do not form a connected subtree"),
            );
        }
    }
    Validation::Ok { width: td.width() }
}

fn neighbor_masks(instance: &SparsestCutInstance) -> Vec<u32> {
    let n = instance.num_vertices();
    let mut nbr = vec![0u32; n];
    for e in instance.supply_edges() {
        let a = instance.index_of(e.u).unwrap();
        let b = instance.index_of(e.v).unwrap();
        nbr[a] |= 1 << b;
        nbr[b] |= 1 << a;
    }
    nbr
}

/// Vertices outside `s ∪ {v}` adjacent to the component of `v` in `G[s ∪ {v}]`.
fn q_set(nbr: &[u32], s: u32, v: usize) -> u32 {
    let allowed = s | (1 << v);
    let mut comp = 1u32 << v;
    let mut frontier = comp;
    while frontier != 0 {
        let mut next = 0u32;
        let mut f = frontier;
        while f != 0 {
            let x = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= nbr[x];
        }
        next &= allowed & !comp;
        comp |= next;
        frontier = next;
    }
    let mut out = 0u32;
    let mut c = comp;
    while c != 0 {
        let x = c.trailing_zeros() as usize;
        c &= c - 1;
        out |= nbr[x];
    }
    out & !allowed
}

/// Minimum-width decomposition by dynamic programming over vertex subsets.
pub fn exact_decomposition(instance: &SparsestCutInstance, bound: usize) -> Result<TreeDecomposition> {
    let n = instance.num_vertices();
    if n > bound || n > 30 {
        return Err(Error::Budget(format!(
            "exact treewidth is limited to {bound} vertices (instance has {n}); supply a decomposition file instead"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("instance has no vertices"));
    }
    let nbr = neighbor_masks(instance);
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let size = 1usize << n;
    let mut tw = vec![u8::MAX; size];
    let mut last = vec![u8::MAX; size];
    tw[0] = 0;
    for s in 1..size as u32 {
        let mut best = u8::MAX;
        let mut arg = u8::MAX;
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let prev = s & !(1 << v);
            let q = q_set(&nbr, prev, v).count_ones() as u8;
            let cand = tw[prev as usize].max(q);
            if cand < best {
                best = cand;
                arg = v as u8;
            }
        }
        tw[s as usize] = best;
        last[s as usize] = arg;
    }
    // Recover the elimination order: the last vertex of S is eliminated after S − v.
    let mut order = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        let v = last[s as usize] as usize;
        order.push(v);
        s &= !(1 << v);
    }
    order.reverse();
    Ok(from_elimination_order(instance, &order))
}

/// Decomposition induced by eliminating vertex indices in `order`.
pub fn from_elimination_order(instance: &SparsestCutInstance, order: &[usize]) -> TreeDecomposition {
    let n = order.len();
    let mut position = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for e in instance.supply_edges() {
        let a = instance.index_of(e.u).unwrap();
        let b = instance.index_of(e.v).unwrap();
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut bags = Vec::with_capacity(n);
    let mut higher_sets = Vec::with_capacity(n);
    for &v in order {
        let higher: Vec<usize> = adj[v]
            .iter()
            .copied()
            .filter(|&w| position[w] > position[v])
            .collect();
        for &a in &higher {
            for &b in &higher {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        let mut bag: Vec<VertexId> = higher.iter().map(|&w| instance.vertices()[w]).collect();
        bag.push(instance.vertices()[v]);
        bags.push(normalize_bag(bag));
        higher_sets.push(higher);
    }
    // Bag i attaches to the bag of its earliest-eliminated higher neighbour;
    // bags without one are chained to the final bag.
    let mut edges = Vec::new();
    for i in 0..n.saturating_sub(1) {
        let target = higher_sets[i]
            .iter()
            .map(|&w| position[w])
            .min()
            .unwrap_or(n - 1);
        edges.push((i, target));
    }
    TreeDecomposition::from_edges(bags, &edges, n - 1)
        .expect("elimination bags form a tree")
        .compacted()
}

/// Depth bound `2⌈log_{5/4}(2n)⌉` for a graph on `n` vertices.
pub fn depth_bound(n: usize) -> usize {
    let target = BigUint::from(2 * n.max(1));
    let (mut num, mut den) = (BigUint::from(1u32), BigUint::from(1u32));
    let mut j = 0;
    while num < &target * &den {
        num *= 5u32;
        den *= 4u32;
        j += 1;
    }
    2 * j
}

/// Binary, logarithmic-depth decomposition with bags at most three times
/// the input bag size. Inputs already meeting the bound are returned as-is.
pub fn balance(instance: &SparsestCutInstance, td: &TreeDecomposition) -> Result<TreeDecomposition> {
    validate(instance, td).into_result()?;
    let n = td.vertex_set().len();
    if td.is_binary() && td.depth() <= depth_bound(n) {
        return Ok(td.clone());
    }
    rebalance(instance, td)
}

/// Always rebuilds the decomposition by recursive tree-cluster splitting.
pub fn rebalance(instance: &SparsestCutInstance, td: &TreeDecomposition) -> Result<TreeDecomposition> {
    validate(instance, td).into_result()?;
    let n = td.vertex_set().len();
    let base = td.compacted().binarized();
    let m = base.num_bags();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (p, c) in base.tree_edges() {
        adj[p].push(c);
        adj[c].push(p);
    }
    let mut builder = ClusterBuilder {
        td: &base,
        adj: &adj,
        bags: Vec::new(),
        parent: Vec::new(),
    };
    let all: Vec<usize> = (0..m).collect();
    builder.build(&all, &[], None);
    let out = TreeDecomposition::from_parents(
        builder.bags.into_iter().map(normalize_bag).collect(),
        builder.parent,
        0,
    );
    let max_in = td.max_bag_size();
    if !out.is_binary() || out.depth() > depth_bound(n) || out.max_bag_size() > 3 * max_in + 3 {
        return Err(Error::invariant(format!(
            "rebalanced decomposition misses its bounds (depth {}, bag size {})",
            out.depth(),
            out.max_bag_size()
        )));
    }
    validate(instance, &out).into_result()?;
    Ok(out)
}

struct ClusterBuilder<'a> {
    td: &'a TreeDecomposition,
    adj: &'a [Vec<usize>],
    bags: Vec<Vec<VertexId>>,
    parent: Vec<Option<usize>>,
}

impl ClusterBuilder<'_> {
    fn push(&mut self, bag: Vec<VertexId>, parent: Option<usize>) -> usize {
        self.bags.push(bag);
        self.parent.push(parent);
        self.bags.len() - 1
    }

    /// `cluster` is a connected node set; `external` lists its edges
    /// `(inside, outside)` to the rest of the tree (at most two).
    fn build(&mut self, cluster: &[usize], external: &[(usize, usize)], parent: Option<usize>) {
        let in_cluster: BTreeSet<usize> = cluster.iter().copied().collect();
        let mut boundary: Vec<VertexId> = Vec::new();
        for &(x, y) in external {
            let by: BTreeSet<&VertexId> = self.td.bag(y).iter().collect();
            boundary.extend(self.td.bag(x).iter().filter(|v| by.contains(v)));
        }
        let split = if external.len() == 2 {
            self.path_split(&in_cluster, external[0].0, external[1].0)
        } else {
            self.centroid(&in_cluster)
        };
        let mut bag = boundary;
        bag.extend_from_slice(self.td.bag(split));
        let node = self.push(bag.clone(), parent);

        let mut parts: Vec<(Vec<usize>, Vec<(usize, usize)>)> = Vec::new();
        for &start in &self.adj[split] {
            if !in_cluster.contains(&start) {
                continue;
            }
            let comp = self.component(&in_cluster, split, start);
            let comp_set: BTreeSet<usize> = comp.iter().copied().collect();
            let mut ext = vec![(start, split)];
            ext.extend(external.iter().copied().filter(|(x, _)| comp_set.contains(x)));
            parts.push((comp, ext));
        }
        let attach = if parts.len() > 2 {
            // Keep the output binary: hang the last two parts under a copy.
            let hub = self.push(bag, Some(node));
            Some(hub)
        } else {
            None
        };
        for (i, (comp, ext)) in parts.iter().enumerate() {
            let p = match attach {
                Some(hub) if i >= 1 => hub,
                _ => node,
            };
            self.build(comp, ext, Some(p));
        }
    }

    fn component(&self, cluster: &BTreeSet<usize>, removed: usize, start: usize) -> Vec<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &y in &self.adj[x] {
                if y != removed && cluster.contains(&y) && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    fn subtree_sizes(&self, cluster: &BTreeSet<usize>, root: usize) -> (Vec<usize>, HashMap<usize, usize>, HashMap<usize, usize>) {
        let mut order = vec![root];
        let mut par = HashMap::from([(root, usize::MAX)]);
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            i += 1;
            for &y in &self.adj[x] {
                if cluster.contains(&y) && !par.contains_key(&y) {
                    par.insert(y, x);
                    order.push(y);
                }
            }
        }
        let mut size: HashMap<usize, usize> = order.iter().map(|&x| (x, 1)).collect();
        for &x in order.iter().rev() {
            let p = par[&x];
            if p != usize::MAX {
                let s = size[&x];
                *size.get_mut(&p).unwrap() += s;
            }
        }
        (order, par, size)
    }

    fn centroid(&self, cluster: &BTreeSet<usize>) -> usize {
        let root = *cluster.iter().next().unwrap();
        let total = cluster.len();
        let (order, par, size) = self.subtree_sizes(cluster, root);
        for &x in &order {
            let mut largest = total - size[&x];
            for &y in &self.adj[x] {
                if cluster.contains(&y) && par.get(&y) == Some(&x) {
                    largest = largest.max(size[&y]);
                }
            }
            if 2 * largest <= total {
                return x;
            }
        }
        root
    }

    /// Node on the `p`–`q` path closest to the centroid.
    fn path_split(&self, cluster: &BTreeSet<usize>, p: usize, q: usize) -> usize {
        let c = self.centroid(cluster);
        let (_, par, _) = self.subtree_sizes(cluster, c);
        let path_to_c = |mut x: usize| {
            let mut path = vec![x];
            while x != c {
                x = par[&x];
                path.push(x);
            }
            path
        };
        // The p–q path meets the centroid's tree paths at their first common node.
        let pp = path_to_c(p);
        let qp: BTreeSet<usize> = path_to_c(q).into_iter().collect();
        *pp.iter().find(|x| qp.contains(x)).unwrap()
    }
}
