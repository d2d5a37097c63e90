//! Line-oriented text formats. Comment lines start with `c`; blank lines
//! are ignored. Vertex ids and labels are 1-based in every file.
//!
//! - Sparsest Cut: `p ssc <n>`, `e <u> <v> <cap>`, `d <u> <v> <dem>`, `t <s> <t>`.
//! - Tree decomposition: `s td <bags> <maxbag> <n>`, `b <i> <v>...`, `<i> <j>`.
//! - MaxCut base graph: `p tw <n> <m>` then `<u> <v>` per edge.
//! - Unique label cover: `p ulc <n> <d>`, `e <u> <v> <σ(1)> ... <σ(d)>`.

use std::fmt::Write as _;

use crate::decomposition::TreeDecomposition;
use crate::error::{Error, Result};
use crate::generators::{MaxCutInstance, UlcEdge, UlcInstance};
use crate::graph::{Edge, SparsestCutInstance, VertexId};
use crate::rational::{format_decimal_or_fraction, parse_rational_at};

/// Non-comment lines with their 1-based line numbers, split on whitespace.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let words: Vec<&str> = l.split_whitespace().collect();
        match words.first() {
            None => None,
            Some(&"c") => None,
            Some(_) => Some((i + 1, words)),
        }
    })
}

fn number<T: std::str::FromStr>(word: &str, line: usize, what: &str) -> Result<T> {
    word.parse()
        .map_err(|_| Error::parse(line, format!("expected {what}, found `{word}`")))
}

fn vertex(word: &str, line: usize, n: u32) -> Result<VertexId> {
    let v: u32 = number(word, line, "a vertex id")?;
    if v == 0 || v > n {
        return Err(Error::parse(line, format!("vertex {v} out of range 1..={n}")));
    }
    Ok(VertexId(v))
}

fn arity(words: &[&str], want: usize, line: usize) -> Result<()> {
    if words.len() != want {
        return Err(Error::parse(
            line,
            format!("`{}` line needs {} fields, found {}", words[0], want, words.len()),
        ));
    }
    Ok(())
}

pub fn parse_instance(text: &str) -> Result<SparsestCutInstance> {
    let mut n: Option<u32> = None;
    let mut supply = Vec::new();
    let mut demand = Vec::new();
    let mut terminals = None;
    for (line, w) in lines(text) {
        match (w[0], n) {
            ("p", None) => {
                arity(&w, 3, line)?;
                if w[1] != "ssc" {
                    return Err(Error::parse(line, format!("unknown problem type `{}`", w[1])));
                }
                n = Some(number(w[2], line, "a vertex count")?);
            }
            ("p", Some(_)) => return Err(Error::parse(line, "duplicate header")),
            (_, None) => return Err(Error::parse(line, "missing `p ssc <n>` header")),
            ("e" | "d", Some(n)) => {
                arity(&w, 4, line)?;
                let e = Edge::new(vertex(w[1], line, n)?, vertex(w[2], line, n)?, parse_rational_at(w[3], line)?);
                if e.u == e.v {
                    return Err(Error::parse(line, "self-loop"));
                }
                if w[0] == "e" { &mut supply } else { &mut demand }.push(e);
            }
            ("t", Some(n)) => {
                arity(&w, 3, line)?;
                if terminals.is_some() {
                    return Err(Error::parse(line, "duplicate terminal line"));
                }
                terminals = Some((vertex(w[1], line, n)?, vertex(w[2], line, n)?));
            }
            (other, _) => return Err(Error::parse(line, format!("unknown line type `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| Error::parse(1, "missing `p ssc <n>` header"))?;
    SparsestCutInstance::with_vertex_count(n, supply, demand, terminals)
}

/// Writes an instance; vertices must be `1..=n`.
pub fn write_instance(instance: &SparsestCutInstance) -> String {
    let n = instance.vertices().last().map_or(0, |v| v.0);
    let mut out = format!("p ssc {n}\n");
    for e in instance.supply_edges() {
        let _ = writeln!(out, "e {} {} {}", e.u, e.v, format_decimal_or_fraction(&e.weight));
    }
    for e in instance.demand_edges() {
        let _ = writeln!(out, "d {} {} {}", e.u, e.v, format_decimal_or_fraction(&e.weight));
    }
    if let Some((s, t)) = instance.terminals() {
        let _ = writeln!(out, "t {s} {t}");
    }
    out
}

/// Reads a decomposition; bag 1 is the root.
pub fn parse_decomposition(text: &str) -> Result<TreeDecomposition> {
    let mut header: Option<(usize, usize, u32)> = None;
    let mut bags: Vec<Option<Vec<VertexId>>> = Vec::new();
    let mut edges = Vec::new();
    for (line, w) in lines(text) {
        match (w[0], header) {
            ("s", None) => {
                arity(&w, 5, line)?;
                if w[1] != "td" {
                    return Err(Error::parse(line, format!("unknown solution type `{}`", w[1])));
                }
                let h = (
                    number(w[2], line, "a bag count")?,
                    number(w[3], line, "a bag size")?,
                    number(w[4], line, "a vertex count")?,
                );
                bags = vec![None; h.0];
                header = Some(h);
            }
            ("s", Some(_)) => return Err(Error::parse(line, "duplicate header")),
            (_, None) => return Err(Error::parse(line, "missing `s td` header")),
            ("b", Some((nb, maxbag, n))) => {
                if w.len() < 2 {
                    return Err(Error::parse(line, "bag line needs an index"));
                }
                let i: usize = number(w[1], line, "a bag index")?;
                if i == 0 || i > nb {
                    return Err(Error::parse(line, format!("bag {i} out of range 1..={nb}")));
                }
                if bags[i - 1].is_some() {
                    return Err(Error::parse(line, format!("bag {i} listed twice")));
                }
                let bag = w[2..].iter().map(|x| vertex(x, line, n)).collect::<Result<Vec<_>>>()?;
                if bag.len() > maxbag {
                    return Err(Error::parse(line, format!("bag {i} exceeds declared size {maxbag}")));
                }
                bags[i - 1] = Some(bag);
            }
            (_, Some((nb, _, _))) => {
                arity(&w, 2, line)?;
                let a: usize = number(w[0], line, "a bag index")?;
                let b: usize = number(w[1], line, "a bag index")?;
                if a == 0 || b == 0 || a > nb || b > nb {
                    return Err(Error::parse(line, format!("tree edge ({a}, {b}) out of range")));
                }
                edges.push((a - 1, b - 1));
            }
        }
    }
    if header.is_none() {
        return Err(Error::parse(1, "missing `s td` header"));
    }
    let bags = bags
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| Error::invalid(format!("bag {} is never listed", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    TreeDecomposition::from_edges(bags, &edges, 0)
}

/// Writes a decomposition with the root as bag 1 and bags in BFS order.
pub fn write_decomposition(td: &TreeDecomposition, n: u32) -> String {
    let order = td.bfs_order();
    let mut pos = vec![0; td.num_bags()];
    for (i, &a) in order.iter().enumerate() {
        pos[a] = i + 1;
    }
    let mut out = format!("s td {} {} {}\n", td.num_bags(), td.max_bag_size(), n);
    for (i, &a) in order.iter().enumerate() {
        let _ = write!(out, "b {}", i + 1);
        for v in td.bag(a) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    for &a in &order {
        if let Some(p) = td.parent(a) {
            let _ = writeln!(out, "{} {}", pos[p], pos[a]);
        }
    }
    out
}

pub fn parse_maxcut(text: &str) -> Result<MaxCutInstance> {
    let mut header: Option<(u32, usize)> = None;
    let mut edges = Vec::new();
    for (line, w) in lines(text) {
        match (w[0], header) {
            ("p", None) => {
                arity(&w, 4, line)?;
                header = Some((number(w[2], line, "a vertex count")?, number(w[3], line, "an edge count")?));
            }
            ("p", Some(_)) => return Err(Error::parse(line, "duplicate header")),
            (_, None) => return Err(Error::parse(line, "missing `p tw <n> <m>` header")),
            (_, Some((n, _))) => {
                arity(&w, 2, line)?;
                edges.push((vertex(w[0], line, n)?, vertex(w[1], line, n)?));
            }
        }
    }
    let (n, m) = header.ok_or_else(|| Error::parse(1, "missing `p tw <n> <m>` header"))?;
    if m != edges.len() {
        return Err(Error::invalid(format!("header declares {m} edges, found {}", edges.len())));
    }
    MaxCutInstance::new(n, edges)
}

pub fn write_maxcut(h: &MaxCutInstance) -> String {
    let mut out = format!("p tw {} {}\n", h.num_vertices(), h.num_edges());
    for (u, v) in h.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_ulc(text: &str) -> Result<UlcInstance> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (line, w) in lines(text) {
        match (w[0], header) {
            ("p", None) => {
                arity(&w, 4, line)?;
                if w[1] != "ulc" {
                    return Err(Error::parse(line, format!("unknown problem type `{}`", w[1])));
                }
                header = Some((number(w[2], line, "a vertex count")?, number(w[3], line, "a label count")?));
            }
            ("p", Some(_)) => return Err(Error::parse(line, "duplicate header")),
            (_, None) => return Err(Error::parse(line, "missing `p ulc <n> <d>` header")),
            ("e", Some((n, d))) => {
                arity(&w, 3 + d, line)?;
                let u = vertex(w[1], line, n as u32)?.0 as usize - 1;
                let v = vertex(w[2], line, n as u32)?.0 as usize - 1;
                let sigma = w[3..]
                    .iter()
                    .map(|x| {
                        let l: usize = number(x, line, "a label")?;
                        if l == 0 || l > d {
                            return Err(Error::parse(line, format!("label {l} out of range 1..={d}")));
                        }
                        Ok(l - 1)
                    })
                    .collect::<Result<Vec<_>>>()?;
                edges.push(UlcEdge { u, v, sigma });
            }
            (other, _) => return Err(Error::parse(line, format!("unknown line type `{other}`"))),
        }
    }
    let (n, d) = header.ok_or_else(|| Error::parse(1, "missing `p ulc <n> <d>` header"))?;
    UlcInstance::new(n, d, edges, None)
}

pub fn write_ulc(ulc: &UlcInstance) -> String {
    let mut out = format!("p ulc {} {}\n", ulc.n, ulc.d);
    for e in &ulc.edges {
        let _ = write!(out, "e {} {}", e.u + 1, e.v + 1);
        for l in &e.sigma {
            let _ = write!(out, " {}", l + 1);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn instance_round_trip() {
        let text = "c example\np ssc 3\ne 1 2 0.5\ne 2 3 1/3\nd 1 3 2\nt 1 3\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.supply_edges()[1].weight, ratio(1, 3));
        assert_eq!(inst.supply_edges()[0].weight, ratio(1, 2));
        let again = parse_instance(&write_instance(&inst)).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn instance_errors_carry_lines() {
        let err = parse_instance("p ssc 2\ne 1 3 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_instance("e 1 2 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(parse_instance("p ssc 2\ne 1 2 x\n").is_err());
        assert!(parse_instance("p ssc 2\ne 1 2 -1\n").is_err());
    }

    #[test]
    fn decomposition_round_trip() {
        let text = "s td 3 2 3\nb 1 1 2\nb 2 2 3\nb 3 1\n1 2\n1 3\n";
        let td = parse_decomposition(text).unwrap();
        assert_eq!(td.width(), 1);
        let again = parse_decomposition(&write_decomposition(&td, 3)).unwrap();
        assert_eq!(again.bags(), td.bags());
        assert!(parse_decomposition("s td 2 2 3\nb 1 1 2\nb 2 2 3\n").is_err());
    }

    #[test]
    fn maxcut_and_ulc_round_trip() {
        let h = parse_maxcut("p tw 3 3\n1 2\n2 3\n1 3\n").unwrap();
        assert_eq!(parse_maxcut(&write_maxcut(&h)).unwrap(), h);
        let u = parse_ulc("p ulc 2 3\ne 1 2 2 3 1\n").unwrap();
        assert_eq!(u.edges[0].sigma, vec![1, 2, 0]);
        assert_eq!(write_ulc(&u), "p ulc 2 3\ne 1 2 2 3 1\n");
        assert!(parse_ulc("p ulc 2 2\ne 1 2 1 1\n").is_err());
    }
}
