//! Line-oriented text formats for every artifact the library reads or writes.
//!
//! All formats share the same lexical rules: UTF-8, `#` starts a comment,
//! blank lines are ignored, and each content line is `keyword: value`. The
//! first content line is a header naming the format and version.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{parse_err, Error, Result};
use crate::gsf::{GSFFamily, Mark, MarkedGraph};
use crate::hanf::{HanfAtom, HanfDNF};
use crate::neighborhoods::{Interval, NeighbourhoodProfile};
use crate::reduction::{Provenance, ReducedGraph};
use crate::structures::{Graph, Signature, Structure, Symbol};
use crate::zigzag::RotationMap;

/// Content lines with their 1-based line numbers.
struct Lines<'t> {
    items: Vec<(usize, &'t str)>,
    pos: usize,
}

impl<'t> Lines<'t> {
    fn new(text: &'t str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .filter_map(|(i, raw)| {
                let body = raw.split_once('#').map_or(raw, |(b, _)| b).trim();
                (!body.is_empty()).then_some((i + 1, body))
            })
            .collect();
        Lines { items, pos: 0 }
    }

    fn from_items(items: Vec<(usize, &'t str)>) -> Self {
        Lines { items, pos: 0 }
    }

    fn header(&mut self, expected: &str) -> Result<usize> {
        match self.items.get(self.pos) {
            Some(&(n, l)) if l == expected => {
                self.pos += 1;
                Ok(n)
            }
            Some(&(n, l)) => Err(parse_err(n, format!("expected header `{expected}`, found `{l}`"))),
            None => Err(parse_err(1, format!("missing header `{expected}`"))),
        }
    }

    fn next_field(&mut self) -> Option<Result<(usize, &'t str, &'t str)>> {
        let &(n, l) = self.items.get(self.pos)?;
        self.pos += 1;
        Some(match l.split_once(':') {
            Some((k, v)) => Ok((n, k.trim(), v.trim())),
            None => Err(parse_err(n, format!("expected `keyword: value`, found `{l}`"))),
        })
    }

    fn last_line(&self) -> usize {
        self.items.last().map_or(1, |&(n, _)| n)
    }
}

fn number<T: std::str::FromStr>(line: usize, what: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| parse_err(line, format!("{what}: `{s}` is not a number")))
}

fn once<T>(slot: &mut Option<T>, line: usize, key: &str, value: T) -> Result<()> {
    if slot.is_some() {
        return Err(parse_err(line, format!("duplicate `{key}` line")));
    }
    *slot = Some(value);
    Ok(())
}

fn required<T>(slot: Option<T>, line: usize, key: &str) -> Result<T> {
    slot.ok_or_else(|| parse_err(line, format!("missing `{key}` line")))
}

fn unknown(line: usize, key: &str) -> Error {
    parse_err(line, format!("unknown keyword `{key}`"))
}

/// Parses `E00/2, F0/2, R/2`; an empty value is the empty signature.
pub fn parse_signature(line: usize, s: &str) -> Result<Signature> {
    let mut symbols = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, arity) =
            part.rsplit_once('/').ok_or_else(|| parse_err(line, format!("symbol `{part}` lacks `/arity`")))?;
        symbols.push(Symbol { name: name.trim().to_string(), arity: number(line, "arity", arity.trim())? });
    }
    Signature::new(symbols).map_err(|e| parse_err(line, e.to_string()))
}

fn parse_interval(line: usize, s: &str) -> Result<Interval> {
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| parse_err(line, format!("interval `{s}` is not of the form [lo,hi]")))?;
    let (lo, hi) = inner.split_once(',').ok_or_else(|| parse_err(line, format!("interval `{s}` lacks a comma")))?;
    let lo = number(line, "lower bound", lo.trim())?;
    let hi = match hi.trim() {
        "inf" => None,
        h => Some(number(line, "upper bound", h)?),
    };
    let iv = Interval::new(lo, hi);
    if iv.is_empty() {
        return Err(parse_err(line, format!("empty interval `{s}`")));
    }
    Ok(iv)
}

// ---------------------------------------------------------------- structures

pub fn write_structure(a: &Structure) -> String {
    let mut out = String::from("sigma-structure v1\n");
    let _ = writeln!(out, "signature: {}", a.signature());
    let _ = writeln!(out, "degree-bound: {}", a.degree_bound());
    out.push_str("elements:");
    for id in a.ids() {
        out.push(' ');
        out.push_str(id);
    }
    out.push('\n');
    for (s, t) in a.tuples() {
        out.push_str("tuple: ");
        out.push_str(a.signature().name(s));
        for &e in t {
            out.push(' ');
            out.push_str(a.id(e));
        }
        out.push('\n');
    }
    out
}

pub fn parse_structure(text: &str) -> Result<Structure> {
    let mut lines = Lines::new(text);
    let head = lines.header("sigma-structure v1")?;
    let mut signature: Option<Signature> = None;
    let mut bound: Option<usize> = None;
    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut tuples: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut seen: HashSet<(usize, Vec<usize>)> = HashSet::new();
    let mut degree: Vec<usize> = Vec::new();
    while let Some(field) = lines.next_field() {
        let (n, key, value) = field?;
        match key {
            "signature" => once(&mut signature, n, key, parse_signature(n, value)?)?,
            "degree-bound" => once(&mut bound, n, key, number(n, key, value)?)?,
            "elements" => {
                for id in value.split_whitespace() {
                    if index.insert(id.to_string(), ids.len()).is_some() {
                        return Err(parse_err(n, format!("duplicate element `{id}`")));
                    }
                    ids.push(id.to_string());
                    degree.push(0);
                }
            }
            "tuple" => {
                let sig = signature.as_ref().ok_or_else(|| parse_err(n, "tuple before signature"))?;
                let d = bound.ok_or_else(|| parse_err(n, "tuple before degree-bound"))?;
                let mut parts = value.split_whitespace();
                let name = parts.next().ok_or_else(|| parse_err(n, "empty tuple"))?;
                let sym = sig.index_of(name).ok_or_else(|| parse_err(n, format!("unknown symbol `{name}`")))?;
                let t = parts
                    .map(|e| index.get(e).copied().ok_or_else(|| parse_err(n, format!("unknown element `{e}`"))))
                    .collect::<Result<Vec<_>>>()?;
                if t.len() != sig.arity(sym) {
                    return Err(parse_err(n, format!("`{name}` has arity {}, got {} elements", sig.arity(sym), t.len())));
                }
                if !seen.insert((sym, t.clone())) {
                    continue;
                }
                let mut members = t.clone();
                members.sort_unstable();
                members.dedup();
                for &e in &members {
                    degree[e] += 1;
                    if degree[e] > d {
                        return Err(parse_err(n, format!("element `{}` exceeds the degree bound {d}", ids[e])));
                    }
                }
                tuples.push((sym, t));
            }
            _ => return Err(unknown(n, key)),
        }
    }
    let signature = required(signature, head, "signature")?;
    let bound = required(bound, head, "degree-bound")?;
    Structure::new(signature, ids, tuples, bound).map_err(|e| parse_err(lines.last_line(), e.to_string()))
}

// -------------------------------------------------------------------- graphs

fn write_graph_body(out: &mut String, g: &Graph) {
    let _ = writeln!(out, "degree-bound: {}", g.degree_bound());
    out.push_str("vertices:");
    for id in g.ids() {
        out.push(' ');
        out.push_str(id);
    }
    out.push('\n');
    for (u, v) in g.edges() {
        let _ = writeln!(out, "edge: {} {}", g.id(u), g.id(v));
    }
    for v in g.loop_vertices() {
        let _ = writeln!(out, "loop: {}", g.id(v));
    }
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = String::from("graph v1\n");
    write_graph_body(&mut out, g);
    out
}

/// A graph with optional per-vertex marks, as read from a graph section.
struct GraphSection {
    graph: Graph,
    marks: Vec<Option<Mark>>,
    head: usize,
}

fn parse_graph_section(lines: &mut Lines<'_>, allow_marks: bool) -> Result<GraphSection> {
    let head = lines.header("graph v1")?;
    let mut bound: Option<usize> = None;
    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut edge_set: HashSet<(usize, usize)> = HashSet::new();
    let mut loops: Vec<usize> = Vec::new();
    let mut degree: Vec<usize> = Vec::new();
    let mut marks: Vec<Option<Mark>> = Vec::new();
    let bump = |v: usize, n: usize, d: usize, degree: &mut Vec<usize>, ids: &[String]| -> Result<()> {
        degree[v] += 1;
        if degree[v] > d {
            return Err(parse_err(n, format!("vertex `{}` exceeds the degree bound {d}", ids[v])));
        }
        Ok(())
    };
    let vertex = |index: &HashMap<String, usize>, n: usize, id: &str| -> Result<usize> {
        index.get(id).copied().ok_or_else(|| parse_err(n, format!("unknown vertex `{id}`")))
    };
    while let Some(field) = lines.next_field() {
        let (n, key, value) = field?;
        match key {
            "degree-bound" => once(&mut bound, n, key, number(n, key, value)?)?,
            "vertices" => {
                for id in value.split_whitespace() {
                    if index.insert(id.to_string(), ids.len()).is_some() {
                        return Err(parse_err(n, format!("duplicate vertex `{id}`")));
                    }
                    ids.push(id.to_string());
                    degree.push(0);
                    marks.push(None);
                }
            }
            "edge" => {
                let d = bound.ok_or_else(|| parse_err(n, "edge before degree-bound"))?;
                let parts: Vec<&str> = value.split_whitespace().collect();
                let [u, v] = parts[..] else {
                    return Err(parse_err(n, "an edge has exactly two endpoints"));
                };
                let (u, v) = (vertex(&index, n, u)?, vertex(&index, n, v)?);
                if u == v {
                    return Err(parse_err(n, "self-pair given as an edge; use `loop:`"));
                }
                if edge_set.insert((u.min(v), u.max(v))) {
                    bump(u, n, d, &mut degree, &ids)?;
                    bump(v, n, d, &mut degree, &ids)?;
                    edges.push((u, v));
                }
            }
            "loop" => {
                let d = bound.ok_or_else(|| parse_err(n, "loop before degree-bound"))?;
                let v = vertex(&index, n, value)?;
                if !loops.contains(&v) {
                    bump(v, n, d, &mut degree, &ids)?;
                    loops.push(v);
                }
            }
            "mark" if allow_marks => {
                let (v, m) = value.split_once(char::is_whitespace).ok_or_else(|| parse_err(n, "mark needs a vertex and a mark"))?;
                let v = vertex(&index, n, v)?;
                let m = Mark::parse(m.trim()).ok_or_else(|| parse_err(n, format!("unknown mark `{}`", m.trim())))?;
                if marks[v].replace(m).is_some() {
                    return Err(parse_err(n, format!("vertex `{}` marked twice", ids[v])));
                }
            }
            _ => return Err(unknown(n, key)),
        }
    }
    let bound = required(bound, head, "degree-bound")?;
    let graph = Graph::new(ids, &edges, &loops, bound).map_err(|e| parse_err(head, e.to_string()))?;
    Ok(GraphSection { graph, marks, head })
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    Ok(parse_graph_section(&mut Lines::new(text), false)?.graph)
}

// ------------------------------------------------------------ marked graphs

pub fn write_marked_graph(f: &MarkedGraph) -> String {
    let mut out = String::from("graph v1\n");
    write_graph_body(&mut out, &f.graph);
    for (v, m) in f.marks.iter().enumerate() {
        let _ = writeln!(out, "mark: {} {m}", f.graph.id(v));
    }
    out
}

fn marked_from_lines(lines: &mut Lines<'_>) -> Result<MarkedGraph> {
    let sec = parse_graph_section(lines, true)?;
    let marks = sec
        .marks
        .iter()
        .enumerate()
        .map(|(v, m)| m.ok_or_else(|| parse_err(sec.head, format!("vertex `{}` has no mark", sec.graph.id(v)))))
        .collect::<Result<Vec<_>>>()?;
    MarkedGraph::new(sec.graph, marks).map_err(|e| parse_err(sec.head, e.to_string()))
}

pub fn parse_marked_graph(text: &str) -> Result<MarkedGraph> {
    marked_from_lines(&mut Lines::new(text))
}

/// Members separated by `---` lines; an empty file is the empty family.
pub fn write_family(fam: &GSFFamily) -> String {
    fam.members.iter().map(write_marked_graph).collect::<Vec<_>>().join("---\n")
}

pub fn parse_family(text: &str) -> Result<GSFFamily> {
    let all = Lines::new(text).items;
    let mut members = Vec::new();
    for chunk in all.split(|&(_, l)| l == "---") {
        if chunk.is_empty() {
            if !all.is_empty() {
                let line = all.iter().find(|&&(_, l)| l == "---").map_or(1, |&(n, _)| n);
                return Err(parse_err(line, "empty family member"));
            }
            continue;
        }
        members.push(marked_from_lines(&mut Lines::from_items(chunk.to_vec()))?);
    }
    Ok(GSFFamily::new(members))
}

// ------------------------------------------------------------------ profiles

pub fn write_profile(rho: &NeighbourhoodProfile) -> String {
    let mut out = String::from("profile v1\n");
    let _ = writeln!(out, "radius: {}", rho.radius);
    let _ = writeln!(out, "degree: {}", rho.degree);
    let _ = writeln!(out, "signature: {}", rho.signature);
    let _ = writeln!(out, "keys: {}", if rho.graph { "graph" } else { "structure" });
    if rho.empirical {
        out.push_str("empirical: true\n");
    }
    for (k, iv) in &rho.bounds {
        let _ = writeln!(out, "bound: {k} {iv}");
    }
    out
}

/// Parses a profile. Without a `keys:` line the key mode is read off the
/// key prefixes (`g` graph, `s` structure), defaulting to graph mode for the
/// signature `E/2`.
pub fn parse_profile(text: &str) -> Result<NeighbourhoodProfile> {
    let mut lines = Lines::new(text);
    let head = lines.header("profile v1")?;
    let mut radius: Option<usize> = None;
    let mut degree: Option<usize> = None;
    let mut signature: Option<Signature> = None;
    let mut mode: Option<bool> = None;
    let mut empirical: Option<bool> = None;
    let mut bounds = Vec::new();
    while let Some(field) = lines.next_field() {
        let (n, key, value) = field?;
        match key {
            "radius" => once(&mut radius, n, key, number(n, key, value)?)?,
            "degree" => once(&mut degree, n, key, number(n, key, value)?)?,
            "signature" => once(&mut signature, n, key, parse_signature(n, value)?)?,
            "keys" => {
                let g = match value {
                    "graph" => true,
                    "structure" => false,
                    _ => return Err(parse_err(n, format!("key mode `{value}` is neither graph nor structure"))),
                };
                once(&mut mode, n, key, g)?
            }
            "empirical" => {
                let e = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(parse_err(n, format!("`{value}` is not true or false"))),
                };
                once(&mut empirical, n, key, e)?
            }
            "bound" => {
                let (k, iv) = value.split_once(char::is_whitespace).ok_or_else(|| parse_err(n, "bound needs a key and an interval"))?;
                bounds.push((n, k.to_string(), parse_interval(n, iv.trim())?));
            }
            _ => return Err(unknown(n, key)),
        }
    }
    let signature = required(signature, head, "signature")?;
    let graph = match mode {
        Some(g) => g,
        None => match bounds.first() {
            Some((_, k, _)) if k.starts_with('g') => true,
            Some((_, k, _)) if k.starts_with('s') => false,
            _ => signature == Signature::graph(),
        },
    };
    let mut rho = NeighbourhoodProfile::new(required(radius, head, "radius")?, required(degree, head, "degree")?, signature, graph);
    rho.empirical = empirical.unwrap_or(false);
    let prefix = if graph { 'g' } else { 's' };
    for (n, k, iv) in bounds {
        if !k.starts_with(prefix) {
            return Err(parse_err(n, format!("key `{k}` does not match the profile's key mode")));
        }
        if rho.bounds.insert(k.clone(), iv).is_some() {
            return Err(parse_err(n, format!("duplicate bound for `{k}`")));
        }
    }
    Ok(rho)
}

// ---------------------------------------------------------- Hanf sentences

pub fn write_hanf(phi: &HanfDNF) -> String {
    let mut out = String::from("hanf v1\n");
    for conj in &phi.disjuncts {
        out.push_str("disjunct:\n");
        for a in conj {
            let _ = writeln!(out, "  atom: {a}");
        }
    }
    out
}

fn parse_atom(n: usize, s: &str) -> Result<HanfAtom> {
    let (negated, rest) = match s.strip_prefix("not") {
        Some(r) => (true, r),
        None => (false, s),
    };
    let rest = rest.strip_prefix(">=").ok_or_else(|| parse_err(n, format!("atom `{s}` lacks `>=`")))?;
    let parts: Vec<&str> = rest.split_whitespace().collect();
    let [m, r, key] = parts[..] else {
        return Err(parse_err(n, "an atom is `>=m r key` or `not>=m r key`"));
    };
    let threshold: u64 = number(n, "threshold", m)?;
    if threshold == 0 {
        return Err(parse_err(n, "thresholds start at 1"));
    }
    Ok(HanfAtom { threshold, radius: number(n, "radius", r)?, key: key.to_string(), negated })
}

/// No `disjunct:` lines is the false sentence; an empty disjunct is true.
pub fn parse_hanf(text: &str) -> Result<HanfDNF> {
    let mut lines = Lines::new(text);
    lines.header("hanf v1")?;
    let mut phi = HanfDNF::falsity();
    while let Some(field) = lines.next_field() {
        let (n, key, value) = field?;
        match key {
            "disjunct" if value.is_empty() => phi.disjuncts.push(Vec::new()),
            "disjunct" => return Err(parse_err(n, "`disjunct:` takes no value")),
            "atom" => {
                let atom = parse_atom(n, value)?;
                phi.disjuncts.last_mut().ok_or_else(|| parse_err(n, "atom before the first disjunct"))?.push(atom);
            }
            _ => return Err(unknown(n, key)),
        }
    }
    Ok(phi)
}

// ------------------------------------------------------------ rotation maps

/// Vertices are written 1-based, as are ports (`i.j` for squared maps).
pub fn write_rotation_map(rot: &RotationMap) -> String {
    let mut out = String::from("rotation-map v1\n");
    let _ = writeln!(out, "vertices: {}", rot.vertices());
    let _ = writeln!(out, "degree: {}", rot.degree());
    for v in 0..rot.vertices() {
        for i in 0..rot.degree() {
            if let Some((w, j)) = rot.entry(v, i) {
                let _ = writeln!(out, "rot: {} {} {} {}", v + 1, rot.format_port(i), w + 1, rot.format_port(j));
            }
        }
    }
    out
}

/// Parses a rotation map and checks totality and the involution property,
/// reporting the offending line. Ports written `i.j` make the map a squared
/// map over `sqrt(degree)` base ports.
pub fn parse_rotation_map(text: &str) -> Result<RotationMap> {
    let mut lines = Lines::new(text);
    let head = lines.header("rotation-map v1")?;
    let mut vertices: Option<usize> = None;
    let mut degree: Option<usize> = None;
    let mut map: Option<RotationMap> = None;
    let mut origin: HashMap<(usize, usize), usize> = HashMap::new();
    while let Some(field) = lines.next_field() {
        let (n, key, value) = field?;
        match key {
            "vertices" => once(&mut vertices, n, key, number(n, key, value)?)?,
            "degree" => once(&mut degree, n, key, number(n, key, value)?)?,
            "rot" => {
                let (nv, dg) = match (vertices, degree) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(parse_err(n, "rot before vertices and degree")),
                };
                let parts: Vec<&str> = value.split_whitespace().collect();
                let [v, i, w, j] = parts[..] else {
                    return Err(parse_err(n, "rot takes `v i w j`"));
                };
                let map = map.get_or_insert_with(|| {
                    let base = i.contains('.').then(|| (1..=dg).find(|b| b * b == dg)).flatten();
                    RotationMap::blank(nv, dg).with_pair_base(base)
                });
                let vertex = |s: &str| -> Result<usize> {
                    let x: usize = number(n, "vertex", s)?;
                    (1..=nv).contains(&x).then(|| x - 1).ok_or_else(|| parse_err(n, format!("vertex {s} outside 1..={nv}")))
                };
                let port = |s: &str| map.parse_port(s).filter(|&p| p < dg).ok_or_else(|| parse_err(n, format!("bad port `{s}`")));
                let (v, i, w, j) = (vertex(v)?, port(i)?, vertex(w)?, port(j)?);
                if origin.insert((v, i), n).is_some() {
                    return Err(parse_err(n, format!("second entry for vertex {} port {}", v + 1, map.format_port(i))));
                }
                map.set(v, i, w, j).map_err(|e| parse_err(n, e.to_string()))?;
            }
            _ => return Err(unknown(n, key)),
        }
    }
    let nv = required(vertices, head, "vertices")?;
    let dg = required(degree, head, "degree")?;
    let map = map.unwrap_or_else(|| RotationMap::blank(nv, dg));
    for v in 0..nv {
        for i in 0..dg {
            let Some((w, j)) = map.entry(v, i) else {
                return Err(parse_err(lines.last_line(), format!("no entry for vertex {} port {}", v + 1, map.format_port(i))));
            };
            if map.entry(w, j) != Some((v, i)) {
                return Err(parse_err(
                    origin[&(v, i)],
                    format!("not an involution: the entry for vertex {} port {} does not point back", w + 1, map.format_port(j)),
                ));
            }
        }
    }
    Ok(map)
}

// -------------------------------------------------------- provenance files

pub fn write_provenance(rg: &ReducedGraph, a: &Structure) -> String {
    let mut out = String::from("provenance v1\n");
    for v in 0..rg.graph.len() {
        out.push_str(&rg.provenance_line(v, a));
        out.push('\n');
    }
    out
}

/// Reads a provenance sidecar against the source structure, returning one
/// `(graph vertex id, origin)` pair per line.
pub fn parse_provenance(text: &str, a: &Structure) -> Result<Vec<(String, Provenance)>> {
    let mut lines = Lines::new(text);
    lines.header("provenance v1")?;
    let mut out = Vec::new();
    while let Some(field) = lines.next_field() {
        let (n, key, value) = field?;
        if key != "vertex" {
            return Err(unknown(n, key));
        }
        let parts: Vec<&str> = value.split_whitespace().collect();
        let elem = |s: &str| a.index_of(s).ok_or_else(|| parse_err(n, format!("unknown element `{s}`")));
        let port = |s: &str| -> Result<usize> {
            let i: usize = number(n, "port", s)?;
            (1..=a.degree_bound()).contains(&i).then_some(i).ok_or_else(|| parse_err(n, format!("port {i} outside 1..={}", a.degree_bound())))
        };
        let p = match parts[..] {
            [id, "element", e] => (id, Provenance::Element(elem(e)?)),
            [id, "gadget", "v", k, e, i] => {
                let k: usize = number(n, "spine index", k)?;
                if k == 0 {
                    return Err(parse_err(n, "spine indices start at 1"));
                }
                (id, Provenance::Spine { k, a: elem(e)?, i: port(i)? })
            }
            [id, "gadget", "w", e, i] => (id, Provenance::Pendant { a: elem(e)?, i: port(i)? }),
            _ => return Err(parse_err(n, format!("unrecognised provenance `{value}`"))),
        };
        out.push((p.0.to_string(), p.1));
    }
    Ok(out)
}
