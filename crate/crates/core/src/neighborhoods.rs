//! Balls, type catalogs, histogram vectors and neighbourhood profiles.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;

use crate::canon::{self, GraphView, Scratch};
use crate::enumerate;
use crate::error::{Error, Result};
use crate::structures::{Graph, Signature, Structure};

/// A pointed structure whose elements all lie within `radius` of the center.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub structure: Structure,
    pub center: usize,
    pub radius: usize,
}

impl Ball {
    /// Canonical key of the pointed ball; `graph` selects the graph encoding.
    pub fn key(&self, graph: bool) -> Result<String> {
        let mut typer = Typer::structure(&self.structure, self.radius, graph)?;
        Ok(typer.key(self.center))
    }
}

/// Induced substructure on the elements within distance `r` of `id`.
pub fn extract_ball(a: &Structure, id: &str, r: usize) -> Result<Ball> {
    let c = a.element(id)?;
    Ok(ball_at(a, c, r))
}

pub(crate) fn ball_at(a: &Structure, c: usize, r: usize) -> Ball {
    let elems = bfs(|v| a.neighbours(v), a.len(), c, r);
    Ball { structure: a.induced(&elems), center: 0, radius: r }
}

fn bfs<'a, F: Fn(usize) -> &'a [usize]>(nbrs: F, n: usize, c: usize, r: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; n];
    dist[c] = 0;
    let mut out = vec![c];
    let mut head = 0;
    while head < out.len() {
        let v = out[head];
        head += 1;
        if dist[v] == r {
            continue;
        }
        for &w in nbrs(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                out.push(w);
            }
        }
    }
    out
}

enum Host<'a> {
    Graph { adj: &'a [Vec<usize>], loops: Vec<bool> },
    Structure(&'a Structure),
}

/// Computes r-type keys of the elements of one host.
pub struct Typer<'a> {
    host: Host<'a>,
    r: usize,
    scratch: Scratch,
}

impl<'a> Typer<'a> {
    pub fn graph(g: &'a Graph, r: usize) -> Self {
        Typer { host: Host::Graph { adj: g.adjacency(), loops: g.loop_flags().to_vec() }, r, scratch: Scratch::default() }
    }

    /// Typer for a structure; with `graph` set the structure must be
    /// graph-like and keys agree with those of the corresponding [`Graph`].
    pub fn structure(s: &'a Structure, r: usize, graph: bool) -> Result<Self> {
        let host = if graph {
            if !s.is_graph_like() {
                return Err(Error::SignatureMismatch("graph catalog used on a non-graph structure".into()));
            }
            let mut loops = vec![false; s.len()];
            for t in s.relation(0) {
                if t[0] == t[1] {
                    loops[t[0]] = true;
                }
            }
            Host::Graph { adj: gaifman_adjacency(s), loops }
        } else {
            Host::Structure(s)
        };
        Ok(Typer { host, r, scratch: Scratch::default() })
    }

    pub fn len(&self) -> usize {
        match &self.host {
            Host::Graph { adj, .. } => adj.len(),
            Host::Structure(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn key(&mut self, v: usize) -> String {
        key_with(&self.host, self.r, v, &mut self.scratch)
    }

    /// Keys of all elements (parallel over elements).
    pub fn all_keys(&self) -> Vec<String> {
        (0..self.len())
            .into_par_iter()
            .map_init(Scratch::default, |sc, v| key_with(&self.host, self.r, v, sc))
            .collect()
    }
}

fn gaifman_adjacency(s: &Structure) -> &[Vec<usize>] {
    s.gaifman_lists()
}

fn key_with(host: &Host, r: usize, v: usize, scratch: &mut Scratch) -> String {
    match host {
        Host::Graph { adj, loops } => {
            let view = GraphView { adj, loops, labels: None };
            canon::key_from_certificate('g', &canon::graph_ball_certificate(&view, v, r, scratch))
        }
        Host::Structure(s) => {
            let elems = bfs(|x| s.neighbours(x), s.len(), v, r);
            canon::key_from_certificate('s', &s.certificate_on(&elems, Some(v)))
        }
    }
}

/// How a catalog is populated.
#[derive(Clone, Copy, Debug)]
pub enum CatalogMode<'a> {
    Exhaustive,
    Observed(&'a [Structure]),
}

/// An ordered list of canonical r-types.
#[derive(Clone, Debug)]
pub struct TypeCatalog {
    pub signature: Signature,
    pub degree: usize,
    pub radius: usize,
    /// Keys use the graph encoding (degree counts neighbours).
    pub graph: bool,
    pub exhaustive: bool,
    entries: Vec<(String, Ball)>,
    index: HashMap<String, usize>,
}

impl TypeCatalog {
    fn from_map(signature: Signature, degree: usize, radius: usize, graph: bool, exhaustive: bool, map: BTreeMap<String, Ball>) -> Self {
        let entries: Vec<(String, Ball)> = map.into_iter().collect();
        let index = entries.iter().enumerate().map(|(i, (k, _))| (k.clone(), i)).collect();
        TypeCatalog { signature, degree, radius, graph, exhaustive, entries, index }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, Ball)] {
        &self.entries
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn position(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.index.contains_key(key)
    }

    pub fn ball(&self, key: &str) -> Option<&Ball> {
        self.position(key).map(|i| &self.entries[i].1)
    }

    /// Typer matching this catalog's encoding.
    pub fn typer<'a>(&self, a: &'a Structure) -> Result<Typer<'a>> {
        Typer::structure(a, self.radius, self.graph)
    }
}

/// Whether exhaustive enumeration is offered for these parameters.
pub fn exhaustive_supported(sig: &Signature, d: usize, r: usize, graph: bool) -> bool {
    if graph {
        (d <= 3 && r <= 1) || (d <= 2 && r <= 2)
    } else {
        sig.len() == 1 && sig.arity(0) == 2 && d <= 2 && r <= 1
    }
}

/// Builds a type catalog. For `graph` catalogs `d` is the graph degree and
/// `sig` must be the graph signature.
pub fn enumerate_types(sig: &Signature, d: usize, r: usize, graph: bool, mode: CatalogMode) -> Result<TypeCatalog> {
    if graph && (sig.len() != 1 || sig.arity(0) != 2) {
        return Err(Error::SignatureMismatch("graph catalogs need one binary symbol".into()));
    }
    match mode {
        CatalogMode::Exhaustive => {
            if !exhaustive_supported(sig, d, r, graph) {
                return Err(Error::Envelope(format!("exhaustive types for d={d}, r={r}")));
            }
            if graph {
                Ok(exhaustive_graph_types(d, r))
            } else {
                Ok(exhaustive_structure_types(sig, d, r))
            }
        }
        CatalogMode::Observed(corpus) => {
            let mut map = BTreeMap::new();
            for a in corpus {
                if a.signature() != sig {
                    return Err(Error::SignatureMismatch(format!("corpus structure over `{}`", a.signature())));
                }
                let typer = Typer::structure(a, r, graph)?;
                for (v, k) in typer.all_keys().into_iter().enumerate() {
                    map.entry(k).or_insert_with(|| ball_at(a, v, r));
                }
            }
            Ok(TypeCatalog::from_map(sig.clone(), d, r, graph, false, map))
        }
    }
}

/// Catalog of the types occurring in a corpus of graphs.
pub fn observed_graph_types(corpus: &[Graph], d: usize, r: usize) -> TypeCatalog {
    let mut map = BTreeMap::new();
    for g in corpus {
        let typer = Typer::graph(g, r);
        let keys = typer.all_keys();
        let mut s = None;
        for (v, k) in keys.into_iter().enumerate() {
            map.entry(k).or_insert_with(|| ball_at(s.get_or_insert_with(|| g.to_structure()), v, r));
        }
    }
    TypeCatalog::from_map(Signature::graph(), d, r, true, false, map)
}

fn moore_bound(d: usize, r: usize) -> usize {
    let mut total = 1;
    let mut layer = d;
    for i in 0..r {
        total += layer;
        if i == 0 {
            layer = d * d.saturating_sub(1);
        } else {
            layer *= d.saturating_sub(1);
        }
    }
    total
}

fn exhaustive_graph_types(d: usize, r: usize) -> TypeCatalog {
    let mut map = BTreeMap::new();
    let mut scratch = Scratch::default();
    for g in enumerate::graphs_up_to(moore_bound(d, r), d) {
        if g.is_empty() {
            continue;
        }
        for v in 0..g.len() {
            if g.ball_vertices(v, r).len() != g.len() {
                continue;
            }
            let key = g.ball_key(v, r, &mut scratch);
            map.entry(key).or_insert_with(|| Ball { structure: g.to_structure(), center: v, radius: r });
        }
    }
    TypeCatalog::from_map(Signature::graph(), d, r, true, true, map)
}

fn exhaustive_structure_types(sig: &Signature, d: usize, r: usize) -> TypeCatalog {
    let max = 1 + d * r.min(1) + if r >= 2 { d * d } else { 0 };
    let mut map = BTreeMap::new();
    for n in 1..=max {
        for s in enumerate::labelled_structures(sig, n, d) {
            let mut typer = Typer::structure(&s, r, false).expect("structure typer");
            for v in 0..n {
                if bfs(|x| s.neighbours(x), n, v, r).len() != n {
                    continue;
                }
                let key = typer.key(v);
                map.entry(key).or_insert_with(|| Ball { structure: s.clone(), center: v, radius: r });
            }
        }
    }
    TypeCatalog::from_map(sig.clone(), d, r, false, true, map)
}

/// Per-type counts of one structure against a catalog.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistogramVector {
    pub radius: usize,
    pub counts: Vec<u64>,
}

impl HistogramVector {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Entrywise `self ≤ other`.
    pub fn dominated_by(&self, other: &HistogramVector) -> bool {
        self.counts.len() == other.counts.len() && self.counts.iter().zip(&other.counts).all(|(a, b)| a <= b)
    }
}

pub fn histogram_vector(a: &Structure, catalog: &TypeCatalog) -> Result<HistogramVector> {
    let typer = catalog.typer(a)?;
    histogram_from_keys(typer.all_keys(), catalog)
}

pub fn graph_histogram(g: &Graph, catalog: &TypeCatalog) -> Result<HistogramVector> {
    histogram_from_keys(Typer::graph(g, catalog.radius).all_keys(), catalog)
}

fn histogram_from_keys(keys: Vec<String>, catalog: &TypeCatalog) -> Result<HistogramVector> {
    let mut counts = vec![0u64; catalog.len()];
    for k in keys {
        let i = catalog.position(&k).ok_or_else(|| Error::OutOfCatalog(k.clone()))?;
        counts[i] += 1;
    }
    Ok(HistogramVector { radius: catalog.radius, counts })
}

/// Closed interval `[lo, hi]`; `hi = None` means unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: u64,
    pub hi: Option<u64>,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0, hi: Some(0) };
    pub const ANY: Interval = Interval { lo: 0, hi: None };

    pub fn new(lo: u64, hi: Option<u64>) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, c: u64) -> bool {
        c >= self.lo && self.hi.is_none_or(|h| c <= h)
    }

    pub fn is_empty(&self) -> bool {
        self.hi.is_some_and(|h| h < self.lo)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(h) => write!(f, "[{},{}]", self.lo, h),
            None => write!(f, "[{},inf]", self.lo),
        }
    }
}

/// Interval bounds per type key; keys not listed are bounded by `[0,0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighbourhoodProfile {
    pub radius: usize,
    pub degree: usize,
    pub signature: Signature,
    pub graph: bool,
    pub bounds: BTreeMap<String, Interval>,
    /// Built from observed data rather than a complete description.
    pub empirical: bool,
}

impl NeighbourhoodProfile {
    pub fn new(radius: usize, degree: usize, signature: Signature, graph: bool) -> Self {
        NeighbourhoodProfile { radius, degree, signature, graph, bounds: BTreeMap::new(), empirical: false }
    }

    /// Profile over a catalog with the same interval on every type.
    pub fn uniform(catalog: &TypeCatalog, iv: Interval) -> Self {
        let mut p = Self::new(catalog.radius, catalog.degree, catalog.signature.clone(), catalog.graph);
        for k in catalog.keys() {
            p.bounds.insert(k.to_string(), iv);
        }
        p
    }

    pub fn bound(&self, key: &str) -> Interval {
        self.bounds.get(key).copied().unwrap_or(Interval::ZERO)
    }

    pub fn is_zero_profile(&self) -> bool {
        self.bounds.values().all(|iv| iv.lo == 0)
    }

    fn check_catalog(&self, catalog: &TypeCatalog) -> Result<()> {
        if catalog.radius != self.radius || catalog.graph != self.graph || catalog.signature != self.signature {
            return Err(Error::SignatureMismatch("profile and catalog disagree".into()));
        }
        Ok(())
    }

    /// Profile as a vector of intervals indexed by catalog position.
    pub fn intervals(&self, catalog: &TypeCatalog) -> Result<Vec<Interval>> {
        self.check_catalog(catalog)?;
        Ok(catalog.keys().map(|k| self.bound(k)).collect())
    }
}

/// Whether `a` obeys `rho`. Types missing from the profile count against `[0,0]`.
pub fn obeys_profile(a: &Structure, rho: &NeighbourhoodProfile) -> bool {
    profile_violation(a, rho).is_none()
}

pub fn graph_obeys_profile(g: &Graph, rho: &NeighbourhoodProfile) -> bool {
    graph_profile_violation(g, rho, &[]).is_none()
}

/// First violated bound, as `(key, count)`, or `None` if `a` obeys `rho`.
pub fn profile_violation(a: &Structure, rho: &NeighbourhoodProfile) -> Option<(String, u64)> {
    let mut typer = match Typer::structure(a, rho.radius, rho.graph) {
        Ok(t) => t,
        Err(_) => return Some(("<signature>".into(), 0)),
    };
    if a.signature() != &rho.signature && !rho.graph {
        return Some(("<signature>".into(), 0));
    }
    let order: Vec<usize> = (0..a.len()).collect();
    scan(&order, |v| typer.key(v), rho)
}

/// Like [`graph_obeys_profile`] but types the vertices in `priority` first,
/// which finds violations early when their likely location is known.
pub fn graph_profile_violation(g: &Graph, rho: &NeighbourhoodProfile, priority: &[usize]) -> Option<(String, u64)> {
    let mut typer = Typer::graph(g, rho.radius);
    let mut seen = HashSet::new();
    let order: Vec<usize> =
        priority.iter().copied().chain(0..g.len()).filter(|&v| v < g.len() && seen.insert(v)).collect();
    scan(&order, |v| typer.key(v), rho)
}

fn scan<F: FnMut(usize) -> String>(order: &[usize], mut key: F, rho: &NeighbourhoodProfile) -> Option<(String, u64)> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for &v in order {
        let k = key(v);
        let c = counts.entry(k.clone()).or_insert(0);
        *c += 1;
        let iv = rho.bound(&k);
        if iv.hi.is_some_and(|h| *c > h) {
            return Some((k, *c));
        }
    }
    for (k, iv) in &rho.bounds {
        let c = counts.get(k).copied().unwrap_or(0);
        if !iv.contains(c) {
            return Some((k.clone(), c));
        }
    }
    None
}
