//! Relational signatures, bounded-degree structures and graphs.

use std::collections::HashMap;
use std::fmt;

use crate::canon::{self, Colored, GraphView, Scratch};
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// An ordered list of relation symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        for (i, s) in symbols.iter().enumerate() {
            if s.arity == 0 {
                return Err(Error::Signature(format!("symbol `{}` has arity 0", s.name)));
            }
            if s.name.is_empty() || s.name.chars().any(|c| c.is_whitespace() || c == ',' || c == '/') {
                return Err(Error::Signature(format!("bad symbol name `{}`", s.name)));
            }
            if symbols[..i].iter().any(|t| t.name == s.name) {
                return Err(Error::Signature(format!("duplicate symbol `{}`", s.name)));
            }
        }
        Ok(Signature { symbols })
    }

    pub fn from_pairs(pairs: &[(&str, usize)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(n, a)| Symbol { name: n.to_string(), arity: a }).collect())
    }

    /// The one-symbol signature `E/2` of undirected graphs.
    pub fn graph() -> Self {
        Signature { symbols: vec![Symbol { name: "E".into(), arity: 2 }] }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn name(&self, sym: usize) -> &str {
        &self.symbols[sym].name
    }

    pub fn arity(&self, sym: usize) -> usize {
        self.symbols[sym].arity
    }

    pub fn is_binary(&self) -> bool {
        self.symbols.iter().all(|s| s.arity == 2)
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}/{}", s.name, s.arity)?;
        }
        Ok(())
    }
}

/// Answer to the query "the i-th tuple containing a".
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TupleAnswer {
    Bottom,
    Tuple { symbol: usize, elements: Vec<usize> },
}

/// A finite relational structure with a degree bound.
///
/// Tuples are kept sorted per symbol; the canonical tuple order is by symbol
/// index, then by the element indices in universe order.
#[derive(Clone, Debug)]
pub struct Structure {
    signature: Signature,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    relations: Vec<Vec<Vec<usize>>>,
    incident: Vec<Vec<(u32, u32)>>,
    gaifman: Vec<Vec<usize>>,
    degree_bound: usize,
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature
            && self.ids == other.ids
            && self.relations == other.relations
            && self.degree_bound == other.degree_bound
    }
}

impl Eq for Structure {}

impl Structure {
    /// Builds a structure from element ids and `(symbol index, tuple)` pairs.
    /// Duplicate tuples collapse.
    pub fn new(
        signature: Signature,
        ids: Vec<String>,
        tuples: Vec<(usize, Vec<usize>)>,
        degree_bound: usize,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if id.is_empty() || id.chars().any(char::is_whitespace) {
                return Err(Error::Structure(format!("bad element id `{id}`")));
            }
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Structure(format!("duplicate element id `{id}`")));
            }
        }
        let mut relations = vec![Vec::new(); signature.len()];
        for (sym, t) in tuples {
            if sym >= signature.len() {
                return Err(Error::Structure(format!("symbol index {sym} out of range")));
            }
            if t.len() != signature.arity(sym) {
                return Err(Error::Structure(format!(
                    "tuple of length {} for `{}` of arity {}",
                    t.len(),
                    signature.name(sym),
                    signature.arity(sym)
                )));
            }
            if let Some(&e) = t.iter().find(|&&e| e >= ids.len()) {
                return Err(Error::Structure(format!("element index {e} out of range")));
            }
            relations[sym].push(t);
        }
        for r in &mut relations {
            r.sort_unstable();
            r.dedup();
        }
        Self::assemble(signature, ids, index, relations, degree_bound)
    }

    fn assemble(
        signature: Signature,
        ids: Vec<String>,
        index: HashMap<String, usize>,
        relations: Vec<Vec<Vec<usize>>>,
        degree_bound: usize,
    ) -> Result<Self> {
        let n = ids.len();
        let mut incident: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        let mut gaifman: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (sym, rel) in relations.iter().enumerate() {
            for (ti, t) in rel.iter().enumerate() {
                for (p, &a) in t.iter().enumerate() {
                    if t[..p].contains(&a) {
                        continue;
                    }
                    incident[a].push((sym as u32, ti as u32));
                    for &b in t {
                        if b != a {
                            gaifman[a].push(b);
                        }
                    }
                }
            }
        }
        for (a, inc) in incident.iter().enumerate() {
            if inc.len() > degree_bound {
                return Err(Error::DegreeBound { id: ids[a].clone(), degree: inc.len(), bound: degree_bound });
            }
        }
        for g in &mut gaifman {
            g.sort_unstable();
            g.dedup();
        }
        Ok(Structure { signature, ids, index, relations, incident, gaifman, degree_bound })
    }

    /// Builds a structure from string ids, as in hand-written fixtures.
    pub fn from_named(
        signature: Signature,
        ids: &[&str],
        tuples: &[(&str, &[&str])],
        degree_bound: usize,
    ) -> Result<Self> {
        let owned: Vec<String> = ids.iter().map(|s| s.to_string()).collect();
        let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut ts = Vec::with_capacity(tuples.len());
        for (name, elems) in tuples {
            let sym = signature.index_of(name).ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
            let t = elems
                .iter()
                .map(|e| pos.get(e).copied().ok_or_else(|| Error::UnknownElement(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            ts.push((sym, t));
        }
        Self::new(signature, owned, ts, degree_bound)
    }

    pub fn empty(signature: Signature, degree_bound: usize) -> Self {
        Self::new(signature, Vec::new(), Vec::new(), degree_bound).expect("empty structure is valid")
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, a: usize) -> &str {
        &self.ids[a]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn element(&self, id: &str) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    /// Sorted tuples of one relation.
    pub fn relation(&self, sym: usize) -> &[Vec<usize>] {
        &self.relations[sym]
    }

    pub fn contains(&self, sym: usize, tuple: &[usize]) -> bool {
        self.relations[sym].binary_search_by(|t| t.as_slice().cmp(tuple)).is_ok()
    }

    /// All tuples in canonical order.
    pub fn tuples(&self) -> impl Iterator<Item = (usize, &[usize])> + '_ {
        self.relations.iter().enumerate().flat_map(|(s, r)| r.iter().map(move |t| (s, t.as_slice())))
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.iter().map(Vec::len).sum()
    }

    /// Number of tuples containing `a` (a tuple counts once however often `a` occurs in it).
    pub fn degree(&self, a: usize) -> usize {
        self.incident[a].len()
    }

    pub fn degree_of(&self, id: &str) -> Result<usize> {
        Ok(self.degree(self.element(id)?))
    }

    pub fn max_degree(&self) -> usize {
        self.incident.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Tuples containing `a` in canonical order, as `(symbol, tuple)`.
    pub fn incident(&self, a: usize) -> impl Iterator<Item = (usize, &[usize])> + '_ {
        self.incident[a].iter().map(|&(s, t)| (s as usize, self.relations[s as usize][t as usize].as_slice()))
    }

    /// Sorted Gaifman neighbours of `a` (never `a` itself).
    pub fn neighbours(&self, a: usize) -> &[usize] {
        &self.gaifman[a]
    }

    pub(crate) fn gaifman_lists(&self) -> &[Vec<usize>] {
        &self.gaifman
    }

    /// The `i`-th tuple containing `a`, `1 ≤ i ≤ d`.
    pub fn answer(&self, a: usize, i: usize) -> Result<TupleAnswer> {
        if i == 0 || i > self.degree_bound {
            return Err(Error::QueryIndex { index: i, bound: self.degree_bound });
        }
        Ok(match self.incident[a].get(i - 1) {
            None => TupleAnswer::Bottom,
            Some(&(s, t)) => TupleAnswer::Tuple {
                symbol: s as usize,
                elements: self.relations[s as usize][t as usize].clone(),
            },
        })
    }

    pub fn answer_query(&self, id: &str, i: usize) -> Result<TupleAnswer> {
        self.answer(self.element(id)?, i)
    }

    /// Renders an answer as `R(a,b)` or `⊥`.
    pub fn format_answer(&self, ans: &TupleAnswer) -> String {
        match ans {
            TupleAnswer::Bottom => "bottom".into(),
            TupleAnswer::Tuple { symbol, elements } => {
                let es: Vec<&str> = elements.iter().map(|&e| self.id(e)).collect();
                format!("{}({})", self.signature.name(*symbol), es.join(","))
            }
        }
    }

    pub fn gaifman_graph(&self) -> Graph {
        let bound = if self.is_graph_like() {
            self.degree_bound.div_ceil(2)
        } else {
            self.degree_bound * self.signature.max_arity().saturating_sub(1).max(1)
        };
        let bound = bound.max(self.gaifman.iter().map(Vec::len).max().unwrap_or(0));
        Graph::from_parts(self.ids.clone(), self.gaifman.clone(), vec![false; self.len()], bound)
    }

    /// True for a single binary symbol with a symmetric relation.
    pub fn is_graph_like(&self) -> bool {
        self.signature.len() == 1
            && self.signature.arity(0) == 2
            && self.relations[0].iter().all(|t| self.contains(0, &[t[1], t[0]]))
    }

    /// The graph view of a graph-like structure.
    pub fn as_graph(&self) -> Result<Graph> {
        if !self.is_graph_like() {
            return Err(Error::Structure("not a symmetric binary structure".into()));
        }
        let mut loops = vec![false; self.len()];
        for t in &self.relations[0] {
            if t[0] == t[1] {
                loops[t[0]] = true;
            }
        }
        let max = (0..self.len()).map(|a| self.gaifman[a].len() + usize::from(loops[a])).max().unwrap_or(0);
        let bound = (self.degree_bound / 2).max(max);
        Ok(Graph::from_parts(self.ids.clone(), self.gaifman.clone(), loops, bound))
    }

    /// Disjoint union; ids of the two sides are prefixed with `0:` and `1:`.
    pub fn disjoint_union(&self, other: &Structure) -> Result<Structure> {
        if self.signature != other.signature {
            return Err(Error::SignatureMismatch(format!("`{}` vs `{}`", self.signature, other.signature)));
        }
        if self.degree_bound != other.degree_bound {
            return Err(Error::SignatureMismatch(format!(
                "degree bounds {} vs {}",
                self.degree_bound, other.degree_bound
            )));
        }
        let n = self.len();
        let ids = self.ids.iter().map(|i| format!("0:{i}")).chain(other.ids.iter().map(|i| format!("1:{i}"))).collect();
        let tuples = self
            .tuples()
            .map(|(s, t)| (s, t.to_vec()))
            .chain(other.tuples().map(|(s, t)| (s, t.iter().map(|&e| e + n).collect())))
            .collect();
        Structure::new(self.signature.clone(), ids, tuples, self.degree_bound)
    }

    /// Substructure induced on `elems`, in the given order.
    pub fn induced(&self, elems: &[usize]) -> Structure {
        let mut map = vec![NONE; self.len()];
        for (i, &e) in elems.iter().enumerate() {
            map[e] = i as u32;
        }
        let mut seen: Vec<(u32, u32)> = elems.iter().flat_map(|&e| self.incident[e].iter().copied()).collect();
        seen.sort_unstable();
        seen.dedup();
        let tuples = seen
            .into_iter()
            .filter_map(|(s, t)| {
                let tup = &self.relations[s as usize][t as usize];
                tup.iter()
                    .map(|&e| (map[e] != NONE).then_some(map[e] as usize))
                    .collect::<Option<Vec<_>>>()
                    .map(|mapped| (s as usize, mapped))
            })
            .collect();
        let ids = elems.iter().map(|&e| self.ids[e].clone()).collect();
        Structure::new(self.signature.clone(), ids, tuples, self.degree_bound).expect("induced substructure is valid")
    }

    /// Copy with element `i` moved to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Structure {
        let mut ids = vec![String::new(); self.len()];
        for (i, &p) in perm.iter().enumerate() {
            ids[p] = self.ids[i].clone();
        }
        let tuples = self.tuples().map(|(s, t)| (s, t.iter().map(|&e| perm[e]).collect())).collect();
        Structure::new(self.signature.clone(), ids, tuples, self.degree_bound).expect("permutation preserves validity")
    }

    /// Copy without one tuple (no-op if absent).
    pub fn without_tuple(&self, sym: usize, tuple: &[usize]) -> Structure {
        let mut relations = self.relations.clone();
        if let Ok(p) = relations[sym].binary_search_by(|t| t.as_slice().cmp(tuple)) {
            relations[sym].remove(p);
        }
        Self::assemble(self.signature.clone(), self.ids.clone(), self.index.clone(), relations, self.degree_bound)
            .expect("deleting a tuple keeps degrees bounded")
    }

    /// Copy with one more tuple; fails if a degree would exceed the bound.
    pub fn with_tuple(&self, sym: usize, tuple: Vec<usize>) -> Result<Structure> {
        let mut tuples: Vec<(usize, Vec<usize>)> = self.tuples().map(|(s, t)| (s, t.to_vec())).collect();
        tuples.push((sym, tuple));
        Structure::new(self.signature.clone(), self.ids.clone(), tuples, self.degree_bound)
    }

    /// Same structure under another degree bound.
    pub fn with_degree_bound(&self, d: usize) -> Result<Structure> {
        Self::assemble(self.signature.clone(), self.ids.clone(), self.index.clone(), self.relations.clone(), d)
    }

    /// Isomorphism-invariant key; equal keys iff isomorphic.
    pub fn canonical_key(&self) -> String {
        if self.is_graph_like() {
            let g = self.as_graph().expect("graph-like");
            return g.canonical_key();
        }
        let all: Vec<usize> = (0..self.len()).collect();
        canon::key_from_certificate('s', &self.certificate_on(&all, None))
    }

    /// Certificate of the substructure induced on `elems`, optionally pointed.
    pub(crate) fn certificate_on(&self, elems: &[usize], center: Option<usize>) -> Vec<u32> {
        let mut map = vec![NONE; self.len()];
        for (i, &e) in elems.iter().enumerate() {
            map[e] = i as u32;
        }
        let mut seen: Vec<(u32, u32)> = elems.iter().flat_map(|&e| self.incident[e].iter().copied()).collect();
        seen.sort_unstable();
        seen.dedup();
        let mut unary: Vec<Vec<u32>> = vec![Vec::new(); elems.len()];
        let mut loops: Vec<Vec<u32>> = vec![Vec::new(); elems.len()];
        let mut arcs: Vec<(usize, usize, u32)> = Vec::new();
        let mut tuple_nodes: Vec<(u32, Vec<usize>)> = Vec::new();
        for (s, t) in seen {
            let tup = &self.relations[s as usize][t as usize];
            if tup.iter().any(|&e| map[e] == NONE) {
                continue;
            }
            let local: Vec<usize> = tup.iter().map(|&e| map[e] as usize).collect();
            match local.len() {
                1 => unary[local[0]].push(s),
                2 if local[0] == local[1] => loops[local[0]].push(s),
                2 => arcs.push((local[0], local[1], (s << 8) | 0xFF)),
                _ => tuple_nodes.push((s, local)),
            }
        }
        let mut defs: Vec<Vec<u32>> = (0..elems.len())
            .map(|i| {
                let mut d = vec![0, u32::from(center == Some(elems[i])), unary[i].len() as u32];
                d.extend(&unary[i]);
                d.push(loops[i].len() as u32);
                d.extend(&loops[i]);
                d
            })
            .collect();
        for (s, _) in &tuple_nodes {
            defs.push(vec![1, *s]);
        }
        let mut g = Colored::directed(defs);
        for (a, b, l) in arcs {
            g.add_arc(a, b, l);
        }
        for (k, (s, local)) in tuple_nodes.iter().enumerate() {
            for (p, &e) in local.iter().enumerate() {
                g.add_arc(elems.len() + k, e, (s << 8) | p as u32);
            }
        }
        canon::certificate(&g)
    }
}

/// An undirected graph with a degree bound; self-loops are flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    ids: Vec<String>,
    adj: Vec<Vec<usize>>,
    loops: Vec<bool>,
    degree_bound: usize,
}

impl Graph {
    /// Builds a graph; `edges` are unordered pairs of distinct vertices.
    pub fn new(ids: Vec<String>, edges: &[(usize, usize)], loops: &[usize], degree_bound: usize) -> Result<Self> {
        let n = ids.len();
        let mut seen = std::collections::HashSet::with_capacity(n);
        for id in &ids {
            if id.is_empty() || id.chars().any(char::is_whitespace) {
                return Err(Error::Structure(format!("bad vertex id `{id}`")));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::Structure(format!("duplicate vertex id `{id}`")));
            }
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Structure(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::Structure(format!("self-pair on `{}` given as an edge", ids[u])));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut lp = vec![false; n];
        for &v in loops {
            if v >= n {
                return Err(Error::Structure(format!("loop on {v} out of range")));
            }
            lp[v] = true;
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        for v in 0..n {
            let deg = adj[v].len() + usize::from(lp[v]);
            if deg > degree_bound {
                return Err(Error::DegreeBound { id: ids[v].clone(), degree: deg, bound: degree_bound });
            }
        }
        Ok(Graph { ids, adj, loops: lp, degree_bound })
    }

    /// Graph on vertices `0..n` named by their index.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], degree_bound: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()).collect(), edges, &[], degree_bound)
    }

    pub(crate) fn from_parts(ids: Vec<String>, adj: Vec<Vec<usize>>, loops: Vec<bool>, degree_bound: usize) -> Self {
        Graph { ids, adj, loops, degree_bound }
    }

    pub fn empty(degree_bound: usize) -> Self {
        Graph { ids: Vec::new(), adj: Vec::new(), loops: Vec::new(), degree_bound }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Sorted neighbours other than `v` itself.
    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub(crate) fn adjacency(&self) -> &[Vec<usize>] {
        &self.adj
    }

    pub(crate) fn loop_flags(&self) -> &[bool] {
        &self.loops
    }

    pub fn has_loop(&self, v: usize) -> bool {
        self.loops[v]
    }

    pub fn has_loops(&self) -> bool {
        self.loops.iter().any(|&l| l)
    }

    /// Neighbour count, a loop counting once.
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len() + usize::from(self.loops[v])
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u == v {
            return self.loops[u];
        }
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn loop_vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.loops[v]).collect()
    }

    /// The `i`-th neighbour of `v` in ascending order (a loop lists `v`), `1 ≤ i ≤ d`.
    pub fn query(&self, v: usize, i: usize) -> Result<Option<usize>> {
        if i == 0 || i > self.degree_bound {
            return Err(Error::QueryIndex { index: i, bound: self.degree_bound });
        }
        if !self.loops[v] {
            return Ok(self.adj[v].get(i - 1).copied());
        }
        let pos = self.adj[v].partition_point(|&w| w < v);
        let k = i - 1;
        Ok(match k.cmp(&pos) {
            std::cmp::Ordering::Less => Some(self.adj[v][k]),
            std::cmp::Ordering::Equal => Some(v),
            std::cmp::Ordering::Greater => self.adj[v].get(k - 1).copied(),
        })
    }

    /// The symmetric `E/2` structure with degree bound `2d`.
    pub fn to_structure(&self) -> Structure {
        let mut tuples = Vec::with_capacity(2 * self.edge_count());
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                tuples.push((0, vec![u, v]));
            }
            if self.loops[u] {
                tuples.push((0, vec![u, u]));
            }
        }
        Structure::new(Signature::graph(), self.ids.clone(), tuples, 2 * self.degree_bound)
            .expect("graph degrees fit twice the bound")
    }

    /// Copy with the edge `{u, v}` flipped; degree bound is not enforced.
    pub fn with_toggled(&self, u: usize, v: usize) -> Graph {
        let mut g = self.clone();
        if u == v {
            g.loops[u] = !g.loops[u];
            return g;
        }
        match g.adj[u].binary_search(&v) {
            Ok(p) => {
                g.adj[u].remove(p);
                let q = g.adj[v].binary_search(&u).expect("symmetric");
                g.adj[v].remove(q);
            }
            Err(p) => {
                g.adj[u].insert(p, v);
                let q = g.adj[v].binary_search(&u).expect_err("symmetric");
                g.adj[v].insert(q, u);
            }
        }
        g
    }

    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let n = self.len();
        let ids = self.ids.iter().map(|i| format!("0:{i}")).chain(other.ids.iter().map(|i| format!("1:{i}"))).collect();
        let adj = self.adj.iter().cloned().chain(other.adj.iter().map(|l| l.iter().map(|&w| w + n).collect())).collect();
        let loops = self.loops.iter().chain(other.loops.iter()).copied().collect();
        Graph { ids, adj, loops, degree_bound: self.degree_bound.max(other.degree_bound) }
    }

    /// Copy with vertex `i` moved to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        let n = self.len();
        let mut ids = vec![String::new(); n];
        let mut adj = vec![Vec::new(); n];
        let mut loops = vec![false; n];
        for v in 0..n {
            ids[perm[v]] = self.ids[v].clone();
            loops[perm[v]] = self.loops[v];
            let mut l: Vec<usize> = self.adj[v].iter().map(|&w| perm[w]).collect();
            l.sort_unstable();
            adj[perm[v]] = l;
        }
        Graph { ids, adj, loops, degree_bound: self.degree_bound }
    }

    pub(crate) fn view(&self) -> GraphView<'_> {
        GraphView { adj: &self.adj, loops: &self.loops, labels: None }
    }

    /// Isomorphism-invariant key; equal keys iff isomorphic.
    pub fn canonical_key(&self) -> String {
        canon::key_from_certificate('g', &canon::graph_certificate(&self.view(), true))
    }

    /// Key of the pointed ball of radius `r` around `v`.
    pub(crate) fn ball_key(&self, v: usize, r: usize, scratch: &mut Scratch) -> String {
        canon::key_from_certificate('g', &canon::graph_ball_certificate(&self.view(), v, r, scratch))
    }

    /// Vertices within distance `r` of `v`, in BFS order.
    pub fn ball_vertices(&self, v: usize, r: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        dist[v] = 0;
        let mut out = vec![v];
        let mut head = 0;
        while head < out.len() {
            let x = out[head];
            head += 1;
            if dist[x] == r {
                continue;
            }
            for &w in &self.adj[x] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[x] + 1;
                    out.push(w);
                }
            }
        }
        out
    }

    /// Subgraph induced on `verts`, in the given order.
    pub fn induced(&self, verts: &[usize]) -> Graph {
        let mut map = vec![usize::MAX; self.len()];
        for (i, &v) in verts.iter().enumerate() {
            map[v] = i;
        }
        let adj = verts
            .iter()
            .map(|&v| {
                let mut l: Vec<usize> =
                    self.adj[v].iter().filter(|&&w| map[w] != usize::MAX).map(|&w| map[w]).collect();
                l.sort_unstable();
                l
            })
            .collect();
        let ids = verts.iter().map(|&v| self.ids[v].clone()).collect();
        let loops = verts.iter().map(|&v| self.loops[v]).collect();
        Graph { ids, adj, loops, degree_bound: self.degree_bound }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rs() -> Signature {
        Signature::from_pairs(&[("R", 2), ("S", 2)]).unwrap()
    }

    #[test]
    fn degree_counts_tuples() {
        let a = Structure::from_named(rs(), &["a", "b"], &[("R", &["a", "b"]), ("R", &["b", "a"])], 4).unwrap();
        assert_eq!(a.degree_of("a").unwrap(), 2);
        let iso = Structure::from_named(rs(), &["a"], &[], 4).unwrap();
        assert_eq!(iso.degree_of("a").unwrap(), 0);
        assert!(matches!(iso.degree_of("z"), Err(Error::UnknownElement(_))));
    }

    #[test]
    fn graph_degree_is_half_the_tuple_degree() {
        let g = Graph::from_edges(2, &[(0, 1)], 1).unwrap();
        let s = g.to_structure();
        assert_eq!(s.degree(0), 2);
        assert_eq!(g.degree(0), 1);
    }

    #[test]
    fn gaifman_of_ternary_tuple_is_triangle() {
        let sig = Signature::from_pairs(&[("S", 3)]).unwrap();
        let a = Structure::from_named(sig, &["a", "b", "c"], &[("S", &["a", "b", "c"])], 1).unwrap();
        assert_eq!(a.gaifman_graph().edges(), vec![(0, 1), (0, 2), (1, 2)]);
        let empty = Structure::from_named(rs(), &["a", "b"], &[], 1).unwrap();
        assert_eq!(empty.gaifman_graph().edge_count(), 0);
    }

    #[test]
    fn gaifman_of_graph_is_graph() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)], 2).unwrap();
        assert_eq!(g.to_structure().gaifman_graph().edges(), g.edges());
    }

    #[test]
    fn answers_follow_canonical_order() {
        let a = Structure::from_named(rs(), &["a", "b", "c"], &[("S", &["a", "c"]), ("R", &["a", "b"])], 3).unwrap();
        assert_eq!(a.answer_query("a", 1).unwrap(), TupleAnswer::Tuple { symbol: 0, elements: vec![0, 1] });
        assert_eq!(a.answer_query("a", 2).unwrap(), TupleAnswer::Tuple { symbol: 1, elements: vec![0, 2] });
        assert_eq!(a.answer_query("a", 3).unwrap(), TupleAnswer::Bottom);
        assert!(a.answer_query("a", 4).is_err());
        assert!(a.answer_query("a", 0).is_err());
    }

    #[test]
    fn degree_bound_enforced() {
        let r = Structure::from_named(rs(), &["a", "b"], &[("R", &["a", "b"]), ("S", &["a", "b"])], 1);
        assert!(matches!(r, Err(Error::DegreeBound { .. })));
    }

    #[test]
    fn keys_distinguish_cycle_and_path() {
        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], 2).unwrap();
        let p4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)], 2).unwrap();
        assert_ne!(c4.canonical_key(), p4.canonical_key());
        assert_eq!(c4.canonical_key(), c4.to_structure().canonical_key());
    }

    #[test]
    fn union_sizes_and_degrees() {
        let a = Structure::from_named(rs(), &["a", "b"], &[("R", &["a", "b"])], 2).unwrap();
        let e = Structure::empty(rs(), 2);
        let u = a.disjoint_union(&e).unwrap();
        assert_eq!(u.canonical_key(), a.canonical_key());
        let aa = a.disjoint_union(&a).unwrap();
        assert_eq!(aa.len(), 4);
        assert_eq!(aa.degree(2), a.degree(0));
        assert!(a.disjoint_union(&Structure::empty(Signature::graph(), 2)).is_err());
    }

    #[test]
    fn loop_query_position() {
        let g = Graph::new(vec!["a".into(), "b".into(), "c".into()], &[(1, 0), (1, 2)], &[1], 3).unwrap();
        assert_eq!(g.query(1, 1).unwrap(), Some(0));
        assert_eq!(g.query(1, 2).unwrap(), Some(1));
        assert_eq!(g.query(1, 3).unwrap(), Some(2));
    }

    fn arb_structure() -> impl Strategy<Value = Structure> {
        (1usize..7)
            .prop_flat_map(|n| {
                let tuple = (0usize..3, 0..n, 0..n, 0..n);
                (Just(n), proptest::collection::vec(tuple, 0..10))
            })
            .prop_map(|(n, raw)| {
                let sig = Signature::from_pairs(&[("R", 2), ("S", 2), ("T", 3)]).unwrap();
                let ids = (0..n).map(|i| format!("e{i}")).collect();
                let tuples = raw
                    .into_iter()
                    .map(|(s, a, b, c)| if s == 2 { (s, vec![a, b, c]) } else { (s, vec![a, b]) })
                    .collect();
                Structure::new(sig, ids, tuples, 64).unwrap()
            })
    }

    proptest! {
        #[test]
        fn keys_survive_relabelling(a in arb_structure(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut perm: Vec<usize> = (0..a.len()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(a.canonical_key(), a.permuted(&perm).canonical_key());
        }

        #[test]
        fn answers_are_injective(a in arb_structure()) {
            for e in 0..a.len() {
                let mut seen = std::collections::HashSet::new();
                for i in 1..=a.degree_bound() {
                    let ans = a.answer(e, i).unwrap();
                    prop_assert_eq!(ans != TupleAnswer::Bottom, i <= a.degree(e));
                    if let TupleAnswer::Tuple { elements, .. } = &ans {
                        prop_assert!(elements.contains(&e));
                        prop_assert!(seen.insert(ans.clone()));
                    }
                }
            }
        }

        #[test]
        fn union_is_symmetric_up_to_key(a in arb_structure(), b in arb_structure()) {
            prop_assert_eq!(
                a.disjoint_union(&b).unwrap().canonical_key(),
                b.disjoint_union(&a).unwrap().canonical_key()
            );
        }
    }
}
