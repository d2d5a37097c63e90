//! Exhaustive ground truth: exact sparsest cut, exact MaxCut, and audits of
//! universally quantified cut claims. Cuts are enumerated in Gray-code
//! order with integer-scaled weights so each step costs one vertex flip.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::generators::MaxCutInstance;
use crate::graph::{evaluate_cut, Cut, SparsestCutInstance, Sparsity, VertexId};
use crate::rational::{common_denominator, serialize_rational, Rational};

const CHUNK_BITS: u32 = 14;
const SUM_LIMIT: i128 = 1 << 62;

/// Integer-scaled supply and demand adjacency over vertex indices.
struct Scan {
    n: usize,
    supply: Vec<Vec<(usize, i128)>>,
    demand: Vec<Vec<(usize, i128)>>,
    scale: BigInt,
}

impl Scan {
    fn new(instance: &SparsestCutInstance, budgets: &Budgets) -> Result<Self> {
        let n = instance.num_vertices();
        if n > budgets.oracle_vertices || n > 62 {
            return Err(Error::Budget(format!(
                "{n} vertices exceed the enumeration limit {}",
                budgets.oracle_vertices
            )));
        }
        if n < 2 {
            return Err(Error::invalid("cut enumeration needs at least two vertices"));
        }
        let scale = common_denominator(
            instance
                .supply_edges()
                .iter()
                .chain(instance.demand_edges())
                .map(|e| &e.weight),
        );
        let mut scan = Scan {
            n,
            supply: vec![Vec::new(); n],
            demand: vec![Vec::new(); n],
            scale: scale.clone(),
        };
        for (edges, adj, total) in [
            (instance.supply_edges(), &mut scan.supply, instance.total_capacity()),
            (instance.demand_edges(), &mut scan.demand, instance.total_demand()),
        ] {
            let too_big = || Error::Budget("weights too large for integer enumeration".into());
            let t = (total * Rational::from_integer(scale.clone())).to_integer();
            if t.to_i128().is_none_or(|t| t >= SUM_LIMIT) {
                return Err(too_big());
            }
            for e in edges {
                let w = (&e.weight * Rational::from_integer(scale.clone()))
                    .to_integer()
                    .to_i128()
                    .ok_or_else(too_big)?;
                let (a, b) = (instance.index_of(e.u).unwrap(), instance.index_of(e.v).unwrap());
                adj[a].push((b, w));
                adj[b].push((a, w));
            }
        }
        Ok(scan)
    }

    fn unscale(&self, x: i128) -> Rational {
        Rational::new(BigInt::from(x), self.scale.clone())
    }

    fn sums(&self, mask: u64) -> (i128, i128) {
        let mut cap = 0;
        let mut dem = 0;
        for v in 0..self.n {
            let inside = mask >> v & 1;
            for &(u, w) in &self.supply[v] {
                if u > v && (mask >> u & 1) != inside {
                    cap += w;
                }
            }
            for &(u, w) in &self.demand[v] {
                if u > v && (mask >> u & 1) != inside {
                    dem += w;
                }
            }
        }
        (cap, dem)
    }

    /// Visits every bipartition once, as the side containing vertex index 0
    /// (the empty cut appears as the full mask). Each chunk folds into its
    /// own accumulator; accumulators are merged in chunk order.
    fn run<A, F, M>(&self, init: impl Fn() -> A + Sync, fold: F, merge: M) -> A
    where
        A: Send,
        F: Fn(&mut A, u64, i128, i128) + Sync,
        M: Fn(A, A) -> A + Sync + Send,
    {
        let free = (self.n - 1) as u32;
        let total: u64 = 1 << free;
        let chunk_bits = CHUNK_BITS.min(free);
        let chunks = total >> chunk_bits;
        let results: Vec<A> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                let k0 = c << chunk_bits;
                let gray = k0 ^ (k0 >> 1);
                let mut mask = gray << 1 | 1;
                let (mut cap, mut dem) = self.sums(mask);
                fold(&mut acc, mask, cap, dem);
                for k in k0 + 1..k0 + (1 << chunk_bits) {
                    let v = k.trailing_zeros() as usize + 1;
                    let inside = mask >> v & 1;
                    for &(u, w) in &self.supply[v] {
                        if (mask >> u & 1) == inside {
                            cap += w;
                        } else {
                            cap -= w;
                        }
                    }
                    for &(u, w) in &self.demand[v] {
                        if (mask >> u & 1) == inside {
                            dem += w;
                        } else {
                            dem -= w;
                        }
                    }
                    mask ^= 1 << v;
                    fold(&mut acc, mask, cap, dem);
                }
                acc
            })
            .collect();
        results.into_iter().reduce(merge).unwrap_or_else(init)
    }

    fn full(&self) -> u64 {
        (1u64 << self.n) - 1
    }
}

/// Lexicographic order of the sorted vertex lists encoded by two masks.
fn lex_less(a: u64, b: u64) -> bool {
    if a == b {
        return false;
    }
    let x = (a ^ b).trailing_zeros();
    let higher = if x >= 63 { 0 } else { !((1u64 << (x + 1)) - 1) };
    if a >> x & 1 == 1 {
        b & higher != 0
    } else {
        a & higher == 0
    }
}

fn side_of(instance: &SparsestCutInstance, mask: u64) -> Vec<VertexId> {
    instance
        .vertices()
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, v)| *v)
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    mask: u64,
    cap: i128,
    dem: i128,
}

/// Keeps the candidate minimising `cap/dem` (ties: lexicographically smallest side).
fn better_ratio(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            let lhs = x.cap * y.dem;
            let rhs = y.cap * x.dem;
            if lhs < rhs || (lhs == rhs && lex_less(x.mask, y.mask)) {
                Some(x)
            } else {
                Some(y)
            }
        }
    }
}

/// Global sparsest cut; among minimisers the side containing the smallest
/// vertex with the lexicographically smallest vertex list wins.
pub fn exact_sparsest_cut(instance: &SparsestCutInstance, budgets: &Budgets) -> Result<(Cut, Sparsity)> {
    let scan = Scan::new(instance, budgets)?;
    let full = scan.full();
    let best = scan.run(
        || None,
        |acc: &mut Option<Candidate>, mask, cap, dem| {
            if mask != full && dem > 0 {
                *acc = better_ratio(*acc, Some(Candidate { mask, cap, dem }));
            }
        },
        better_ratio,
    );
    let best = best.ok_or_else(|| Error::invalid("no cut separates any demand"))?;
    let cut = Cut::new(side_of(instance, best.mask));
    let sparsity = evaluate_cut(instance, &cut)?;
    Ok((cut, sparsity))
}

/// Maximum cut of an unweighted graph: `(side containing vertex 1, size)`.
pub fn exact_maxcut(h: &MaxCutInstance, budgets: &Budgets) -> Result<(BTreeSet<VertexId>, usize)> {
    let n = h.num_vertices() as usize;
    let supply = h
        .edges()
        .iter()
        .map(|&(u, v)| crate::graph::Edge::new(u, v, Rational::from_integer(1.into())))
        .collect();
    let instance = SparsestCutInstance::with_vertex_count(n as u32, supply, Vec::new(), None)?;
    let scan = Scan::new(&instance, budgets)?;
    let pick = |a: Option<(i128, u64)>, b: Option<(i128, u64)>| match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if x.0 > y.0 || (x.0 == y.0 && lex_less(x.1, y.1)) {
                Some(x)
            } else {
                Some(y)
            }
        }
    };
    let (cap, mask) = scan
        .run(
            || None,
            |acc: &mut Option<(i128, u64)>, mask, cap, _| *acc = pick(*acc, Some((cap, mask))),
            pick,
        )
        .expect("at least one cut");
    Ok((side_of(&instance, mask).into_iter().collect(), cap as usize))
}

/// A witness cut with its exact capacity and demand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub side: Vec<VertexId>,
    #[serde(serialize_with = "serialize_rational")]
    pub capacity: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub demand: Rational,
}

impl Witness {
    /// `demand / capacity`, `None` for zero capacity.
    pub fn demand_per_capacity(&self) -> Option<Rational> {
        use num_traits::Zero;
        (!self.capacity.is_zero()).then(|| &self.demand / &self.capacity)
    }
}

/// Extremes over every non-degenerate cut of an instance with terminals.
#[derive(Debug, Clone, Serialize)]
pub struct CutAudit {
    pub cuts: u64,
    pub admissible_cuts: u64,
    pub sparsest: Option<Witness>,
    pub min_admissible_capacity: Option<Witness>,
    /// Admissible cut maximising demand/capacity.
    pub max_admissible_ratio: Option<Witness>,
    /// Inadmissible cut maximising demand/capacity.
    pub max_inadmissible_ratio: Option<Witness>,
}

impl CutAudit {
    /// Every admissible cut has `dem ≤ bound · cap`.
    pub fn admissible_within(&self, bound: &Rational) -> bool {
        self.max_admissible_ratio
            .as_ref()
            .is_none_or(|w| w.demand <= bound * &w.capacity)
    }

    /// Every inadmissible cut has `dem ≤ bound · cap`.
    pub fn inadmissible_within(&self, bound: &Rational) -> bool {
        self.max_inadmissible_ratio
            .as_ref()
            .is_none_or(|w| w.demand <= bound * &w.capacity)
    }

    /// Smallest capacity of an admissible cut.
    pub fn min_admissible(&self) -> Option<&Rational> {
        self.min_admissible_capacity.as_ref().map(|w| &w.capacity)
    }
}

#[derive(Default, Clone, Copy)]
struct AuditAcc {
    cuts: u64,
    admissible: u64,
    sparsest: Option<Candidate>,
    min_cap: Option<Candidate>,
    max_adm: Option<Candidate>,
    max_inadm: Option<Candidate>,
}

fn smaller_cap(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if x.cap < y.cap || (x.cap == y.cap && lex_less(x.mask, y.mask)) {
                Some(x)
            } else {
                Some(y)
            }
        }
    }
}

/// Maximises `dem/cap`; zero-capacity cuts with demand count as infinite.
fn larger_load(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            let lhs = x.dem * y.cap;
            let rhs = y.dem * x.cap;
            if lhs > rhs || (lhs == rhs && lex_less(x.mask, y.mask)) {
                Some(x)
            } else {
                Some(y)
            }
        }
    }
}

fn merge_audit(a: AuditAcc, b: AuditAcc) -> AuditAcc {
    AuditAcc {
        cuts: a.cuts + b.cuts,
        admissible: a.admissible + b.admissible,
        sparsest: better_ratio(a.sparsest, b.sparsest),
        min_cap: smaller_cap(a.min_cap, b.min_cap),
        max_adm: larger_load(a.max_adm, b.max_adm),
        max_inadm: larger_load(a.max_inadm, b.max_inadm),
    }
}

/// Enumerates all `2^{n−1} − 1` non-degenerate cuts and records the
/// extremes needed by admissible/inadmissible cut claims.
pub fn audit_cuts(instance: &SparsestCutInstance, budgets: &Budgets) -> Result<CutAudit> {
    let (s, t) = instance
        .terminals()
        .ok_or_else(|| Error::invalid("cut audit needs designated terminals"))?;
    let scan = Scan::new(instance, budgets)?;
    let (si, ti) = (instance.index_of(s).unwrap(), instance.index_of(t).unwrap());
    let full = scan.full();
    let acc = scan.run(
        AuditAcc::default,
        |acc: &mut AuditAcc, mask, cap, dem| {
            if mask == full {
                return;
            }
            acc.cuts += 1;
            let c = Some(Candidate { mask, cap, dem });
            if dem > 0 {
                acc.sparsest = better_ratio(acc.sparsest, c);
            }
            let loaded = cap > 0 || dem > 0;
            if (mask >> si & 1) != (mask >> ti & 1) {
                acc.admissible += 1;
                acc.min_cap = smaller_cap(acc.min_cap, c);
                if loaded {
                    acc.max_adm = larger_load(acc.max_adm, c);
                }
            } else if loaded {
                acc.max_inadm = larger_load(acc.max_inadm, c);
            }
        },
        merge_audit,
    );
    let witness = |c: Option<Candidate>| {
        c.map(|c| Witness {
            side: side_of(instance, c.mask),
            capacity: scan.unscale(c.cap),
            demand: scan.unscale(c.dem),
        })
    };
    Ok(CutAudit {
        cuts: acc.cuts,
        admissible_cuts: acc.admissible,
        sparsest: witness(acc.sparsest),
        min_admissible_capacity: witness(acc.min_cap),
        max_admissible_ratio: witness(acc.max_adm),
        max_inadmissible_ratio: witness(acc.max_inadm),
    })
}
