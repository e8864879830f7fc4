//! Marked graphs and generalized subgraph freeness.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rayon::prelude::*;

use crate::canon::{self, GraphView, Scratch};
use crate::error::{Error, Result};
use crate::neighborhoods::{Ball, NeighbourhoodProfile, TypeCatalog};
use crate::structures::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mark {
    Partial,
    Semifull,
    Full,
}

impl Mark {
    pub fn as_str(self) -> &'static str {
        match self {
            Mark::Full => "full",
            Mark::Semifull => "semifull",
            Mark::Partial => "partial",
        }
    }

    pub fn parse(s: &str) -> Option<Mark> {
        match s {
            "full" => Some(Mark::Full),
            "semifull" => Some(Mark::Semifull),
            "partial" => Some(Mark::Partial),
            _ => None,
        }
    }

    fn code(self) -> u32 {
        match self {
            Mark::Partial => 1,
            Mark::Semifull => 2,
            Mark::Full => 3,
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A graph with one mark per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedGraph {
    pub graph: Graph,
    pub marks: Vec<Mark>,
}

impl MarkedGraph {
    pub fn new(graph: Graph, marks: Vec<Mark>) -> Result<Self> {
        if marks.len() != graph.len() {
            return Err(Error::Structure(format!("{} marks for {} vertices", marks.len(), graph.len())));
        }
        if graph.has_loops() {
            return Err(Error::Structure("marked graphs have no loops".into()));
        }
        Ok(MarkedGraph { graph, marks })
    }

    /// Marked graph on vertices `0..n`.
    pub fn from_edges(marks: Vec<Mark>, edges: &[(usize, usize)]) -> Self {
        let n = marks.len();
        let g = Graph::from_edges(n, edges, n.max(1)).expect("valid marked graph");
        MarkedGraph { graph: g, marks }
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn canonical_key(&self) -> String {
        let labels: Vec<u32> = self.marks.iter().map(|m| m.code()).collect();
        let view = GraphView { adj: self.graph.adjacency(), loops: self.graph.loop_flags(), labels: Some(&labels) };
        canon::key_from_certificate('m', &canon::graph_certificate(&view, false))
    }
}

/// A canonical-deduplicated set of marked graphs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GSFFamily {
    pub members: Vec<MarkedGraph>,
    pub size_bound: usize,
}

impl GSFFamily {
    pub fn new(members: Vec<MarkedGraph>) -> Self {
        let mut keyed: BTreeMap<String, MarkedGraph> = BTreeMap::new();
        for m in members {
            keyed.entry(m.canonical_key()).or_insert(m);
        }
        let members: Vec<MarkedGraph> = keyed.into_values().collect();
        let size_bound = members.iter().map(MarkedGraph::len).max().unwrap_or(0);
        GSFFamily { members, size_bound }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn pair_ok(f: &MarkedGraph, g: &Graph, x: usize, y: usize, gx: usize, gy: usize) -> bool {
    let fe = f.graph.has_edge(x, y);
    let ge = g.has_edge(gx, gy);
    if fe {
        ge
    } else if f.marks[x] != Mark::Partial || f.marks[y] != Mark::Partial {
        !ge
    } else {
        true
    }
}

fn degree_ok(f: &MarkedGraph, g: &Graph, x: usize, gx: usize) -> bool {
    let df = f.graph.degree(x);
    let dg = g.degree(gx);
    if f.marks[x] == Mark::Full {
        dg == df
    } else {
        dg >= df
    }
}

fn search_order(f: &MarkedGraph) -> Vec<usize> {
    let n = f.len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let links = f.graph.neighbours(v).iter().filter(|&&w| placed[w]).count();
                (links, f.marks[v], f.graph.degree(v), std::cmp::Reverse(v))
            })
            .expect("unplaced vertex");
        placed[next] = true;
        order.push(next);
    }
    order
}

/// Backtracking embedding search. `visit` returns `true` to stop.
fn embeddings<A, V>(f: &MarkedGraph, g: &Graph, allowed: A, mut visit: V)
where
    A: Fn(usize) -> bool,
    V: FnMut(&[usize]) -> bool,
{
    let n = f.len();
    if n > g.len() {
        return;
    }
    let order = search_order(f);
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; g.len()];
    fn rec<A: Fn(usize) -> bool, V: FnMut(&[usize]) -> bool>(
        depth: usize,
        order: &[usize],
        f: &MarkedGraph,
        g: &Graph,
        allowed: &A,
        map: &mut [usize],
        used: &mut [bool],
        visit: &mut V,
    ) -> bool {
        if depth == order.len() {
            return visit(map);
        }
        let x = order[depth];
        let anchor = f.graph.neighbours(x).iter().copied().find(|&p| map[p] != usize::MAX);
        let all: Vec<usize>;
        let cands: &[usize] = match anchor {
            Some(p) => g.neighbours(map[p]),
            None => {
                all = (0..g.len()).collect();
                &all
            }
        };
        for &gx in cands {
            if used[gx] || !allowed(gx) || !degree_ok(f, g, x, gx) {
                continue;
            }
            if !order[..depth].iter().all(|&y| pair_ok(f, g, x, y, gx, map[y])) {
                continue;
            }
            map[x] = gx;
            used[gx] = true;
            let stop = rec(depth + 1, order, f, g, allowed, map, used, visit);
            used[gx] = false;
            map[x] = usize::MAX;
            if stop {
                return true;
            }
        }
        false
    }
    rec(0, &order, f, g, &allowed, &mut map, &mut used, &mut visit);
}

/// First embedding of `f` into `g` under ascending target order.
pub fn find_embedding(f: &MarkedGraph, g: &Graph) -> Option<Vec<usize>> {
    let mut out = None;
    embeddings(f, g, |_| true, |m| {
        out = Some(m.to_vec());
        true
    });
    out
}

/// All embeddings of `f` into `g`.
pub fn all_embeddings(f: &MarkedGraph, g: &Graph) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    embeddings(f, g, |_| true, |m| {
        out.push(m.to_vec());
        false
    });
    out
}

/// Checks the three embedding conditions directly on closed neighbourhoods.
pub fn is_embedding(f: &MarkedGraph, g: &Graph, map: &[usize]) -> bool {
    if map.len() != f.len() {
        return false;
    }
    let mut seen = HashSet::new();
    if !map.iter().all(|&v| v < g.len() && seen.insert(v)) {
        return false;
    }
    let image: HashSet<usize> = map.iter().copied().collect();
    (0..f.len()).all(|v| {
        let closed_g: HashSet<usize> =
            g.neighbours(map[v]).iter().copied().chain(std::iter::once(map[v])).collect();
        let closed_f: HashSet<usize> =
            f.graph.neighbours(v).iter().map(|&w| map[w]).chain(std::iter::once(map[v])).collect();
        match f.marks[v] {
            Mark::Full => closed_g == closed_f,
            Mark::Semifull => closed_g.intersection(&image).copied().collect::<HashSet<_>>() == closed_f,
            Mark::Partial => closed_f.is_subset(&closed_g),
        }
    })
}

pub fn is_family_free(g: &Graph, fam: &GSFFamily) -> bool {
    fam.members.iter().all(|f| find_embedding(f, g).is_none())
}

/// Whether every embedding of every member hits `b`.
pub fn covers_family(g: &Graph, b: &[usize], fam: &GSFFamily) -> bool {
    let mut outside = vec![true; g.len()];
    for &v in b {
        if v < g.len() {
            outside[v] = false;
        }
    }
    fam.members.iter().all(|f| {
        let mut avoided = false;
        embeddings(f, g, |v| outside[v], |_| {
            avoided = true;
            true
        });
        !avoided
    })
}

fn distances_from(g: &Graph, sources: &[usize]) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.len()];
    let mut queue = std::collections::VecDeque::new();
    for &s in sources {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbours(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

fn marks_for(g: &Graph, witnesses: &[usize], r: usize) -> Option<Vec<Mark>> {
    let dist = distances_from(g, witnesses);
    dist.iter().map(|&d| if d > r { None } else if d < r { Some(Mark::Full) } else { Some(Mark::Semifull) }).collect()
}

/// Whether `f` is a k-realisation of the r-type with graph key `tau_key`.
pub fn is_k_realisation(f: &MarkedGraph, tau_key: &str, r: usize, k: usize) -> bool {
    let mut scratch = Scratch::default();
    let cands: Vec<usize> = (0..f.len()).filter(|&v| f.graph.ball_key(v, r, &mut scratch) == tau_key).collect();
    if cands.len() < k {
        return false;
    }
    let mut pick = Vec::with_capacity(k);
    fn rec(start: usize, k: usize, cands: &[usize], pick: &mut Vec<usize>, f: &MarkedGraph, r: usize) -> bool {
        if pick.len() == k {
            return marks_for(&f.graph, pick, r).is_some_and(|m| m == f.marks);
        }
        for i in start..cands.len() {
            pick.push(cands[i]);
            if rec(i + 1, k, cands, pick, f, r) {
                return true;
            }
            pick.pop();
        }
        false
    }
    if k == 0 {
        return f.is_empty();
    }
    rec(0, k, &cands, &mut pick, f, r)
}

/// Whether k-realisations can be enumerated for these parameters.
pub fn realisation_envelope(d: usize, r: usize, k: usize) -> bool {
    d <= 3 && r <= 1 && k <= 3
}

/// All k-realisations of the type of `tau` with at most `size_bound`
/// vertices and maximum degree `d`.
///
/// Realisations are unions of `k` copies of the ball: copies are glued one
/// at a time along every injective partial identification, then edges are
/// added between boundary vertices of different copies. Candidates are
/// filtered by [`is_k_realisation`] and deduplicated by canonical key.
pub fn enumerate_k_realisations(tau: &Ball, d: usize, k: usize, size_bound: usize) -> Result<Vec<MarkedGraph>> {
    let r = tau.radius;
    if !realisation_envelope(d, r, k) {
        return Err(Error::Envelope(format!("k-realisations for d={d}, r={r}, k={k}")));
    }
    let t = tau.structure.as_graph()?;
    let key = {
        let mut sc = Scratch::default();
        t.ball_key(tau.center, r, &mut sc)
    };
    if k == 0 || size_bound == 0 {
        return Ok(Vec::new());
    }
    let tn = t.len();
    let t_edges = t.edges();

    // states: (edges, vertex count, centers), deduplicated with centers labelled
    let mut states: Vec<(Vec<(usize, usize)>, usize, Vec<usize>)> = vec![(Vec::new(), 0, Vec::new())];
    for _ in 0..k {
        let mut next = Vec::new();
        let mut seen = HashSet::new();
        for (edges, n, centers) in &states {
            let existing: Vec<usize> = (0..*n).collect();
            let mut assign = vec![usize::MAX; tn];
            glue(
                0, tn, &existing, &mut assign, &mut vec![false; *n],
                &mut |assign: &[usize]| {
                    let mut m = *n;
                    let map: Vec<usize> = assign
                        .iter()
                        .map(|&a| if a == usize::MAX { m += 1; m - 1 } else { a })
                        .collect();
                    let c = map[tau.center];
                    if centers.contains(&c) {
                        return;
                    }
                    let mut e: Vec<(usize, usize)> = edges.clone();
                    for &(a, b) in &t_edges {
                        let (x, y) = (map[a].min(map[b]), map[a].max(map[b]));
                        e.push((x, y));
                    }
                    e.sort_unstable();
                    e.dedup();
                    if m > size_bound {
                        return;
                    }
                    let Ok(g) = Graph::from_edges(m, &e, d) else { return };
                    // the new copy must induce exactly the ball
                    for (a, &ma) in map.iter().enumerate() {
                        for (b, &mb) in map.iter().enumerate().skip(a + 1) {
                            if g.has_edge(ma, mb) != t.has_edge(a, b) {
                                return;
                            }
                        }
                    }
                    let mut cs = centers.clone();
                    cs.push(c);
                    let mut labels = vec![Mark::Partial; m];
                    for &x in &cs {
                        labels[x] = Mark::Full;
                    }
                    let probe = MarkedGraph { graph: g, marks: labels };
                    if seen.insert(probe.canonical_key()) {
                        next.push((e, m, cs));
                    }
                },
            );
        }
        states = next;
    }

    let mut out: BTreeMap<String, MarkedGraph> = BTreeMap::new();
    for (edges, n, centers) in states {
        let g = Graph::from_edges(n, &edges, d).expect("checked during gluing");
        let dist: Vec<Vec<usize>> = centers.iter().map(|&c| distances_from(&g, &[c])).collect();
        let boundary: Vec<usize> =
            (0..n).filter(|&v| r > 0 && dist.iter().all(|dc| dc[v] >= r)).collect();
        let mut extra = Vec::new();
        for (i, &u) in boundary.iter().enumerate() {
            for &w in &boundary[i + 1..] {
                let share = dist.iter().any(|dc| dc[u] <= r && dc[w] <= r);
                if !share && !g.has_edge(u, w) {
                    extra.push((u, w));
                }
            }
        }
        let mut chosen = Vec::new();
        let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
        extend_edges(0, &extra, &mut chosen, &mut deg, d, &mut |added: &[(usize, usize)]| {
            let mut e = edges.clone();
            e.extend_from_slice(added);
            let h = Graph::from_edges(n, &e, d).expect("degree tracked");
            if let Some(marks) = marks_for(&h, &centers, r) {
                let f = MarkedGraph { graph: h, marks };
                if is_k_realisation(&f, &key, r, k) {
                    out.entry(f.canonical_key()).or_insert(f);
                }
            }
        });
    }
    Ok(out.into_values().collect())
}

fn glue(
    i: usize,
    tn: usize,
    existing: &[usize],
    assign: &mut Vec<usize>,
    used: &mut Vec<bool>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if i == tn {
        emit(assign);
        return;
    }
    assign[i] = usize::MAX;
    glue(i + 1, tn, existing, assign, used, emit);
    for &v in existing {
        if !used[v] {
            used[v] = true;
            assign[i] = v;
            glue(i + 1, tn, existing, assign, used, emit);
            used[v] = false;
        }
    }
    assign[i] = usize::MAX;
}

fn extend_edges(
    i: usize,
    extra: &[(usize, usize)],
    chosen: &mut Vec<(usize, usize)>,
    deg: &mut [usize],
    d: usize,
    emit: &mut dyn FnMut(&[(usize, usize)]),
) {
    if i == extra.len() {
        emit(chosen);
        return;
    }
    extend_edges(i + 1, extra, chosen, deg, d, emit);
    let (u, w) = extra[i];
    if deg[u] < d && deg[w] < d {
        deg[u] += 1;
        deg[w] += 1;
        chosen.push((u, w));
        extend_edges(i + 1, extra, chosen, deg, d, emit);
        chosen.pop();
        deg[u] -= 1;
        deg[w] -= 1;
    }
}

/// Largest `|V(F1)| + |V(F2)|` accepted by [`union_marked_graphs`].
pub const UNION_ENVELOPE: usize = 10;

/// All (not necessarily disjoint) unions of two marked graphs with maximum
/// degree `d` and at most `max_vertices` vertices.
pub fn union_marked_graphs(f1: &MarkedGraph, f2: &MarkedGraph, d: usize, max_vertices: usize) -> Result<Vec<MarkedGraph>> {
    if f1.len() + f2.len() > UNION_ENVELOPE {
        return Err(Error::Envelope(format!("union of {} and {} vertices", f1.len(), f2.len())));
    }
    let n1 = f1.len();
    let n2 = f2.len();
    let mut out: BTreeMap<String, MarkedGraph> = BTreeMap::new();
    let existing: Vec<usize> = (0..n1).collect();
    let mut assign = vec![usize::MAX; n2];
    glue(0, n2, &existing, &mut assign, &mut vec![false; n1], &mut |assign: &[usize]| {
        let mut m = n1;
        let map2: Vec<usize> =
            assign.iter().map(|&a| if a == usize::MAX { m += 1; m - 1 } else { a }).collect();
        if m > max_vertices {
            return;
        }
        let mut edges = f1.graph.edges();
        for (a, b) in f2.graph.edges() {
            edges.push((map2[a].min(map2[b]), map2[a].max(map2[b])));
        }
        edges.sort_unstable();
        edges.dedup();
        let Ok(g) = Graph::from_edges(m, &edges, d) else { return };
        let map1: Vec<usize> = (0..n1).collect();
        let plain = |h: &Graph, f: &MarkedGraph, map: &[usize]| is_embedding(f, h, map);
        if !plain(&g, f1, &map1) || !plain(&g, f2, &map2) {
            return;
        }
        let mut mark = vec![None::<Mark>; m];
        let mut in1 = vec![false; m];
        let mut in2 = vec![false; m];
        let mut semi1 = vec![false; m];
        let mut semi2 = vec![false; m];
        for (x, &v) in map1.iter().enumerate() {
            mark[v] = mark[v].max(Some(f1.marks[x]));
            in1[v] = true;
            semi1[v] |= f1.marks[x] == Mark::Semifull;
        }
        for (y, &v) in map2.iter().enumerate() {
            mark[v] = mark[v].max(Some(f2.marks[y]));
            in2[v] = true;
            semi2[v] |= f2.marks[y] == Mark::Semifull;
        }
        let marks: Vec<Mark> = mark.into_iter().map(|x| x.expect("covered")).collect();
        let mut extra = Vec::new();
        for u in 0..m {
            for w in u + 1..m {
                if g.has_edge(u, w) || marks[u] == Mark::Full || marks[w] == Mark::Full {
                    continue;
                }
                let blocked = |a: usize, b: usize| (semi1[a] && in1[b]) || (semi2[a] && in2[b]);
                if blocked(u, w) || blocked(w, u) {
                    continue;
                }
                extra.push((u, w));
            }
        }
        let mut deg: Vec<usize> = (0..m).map(|v| g.degree(v)).collect();
        extend_edges(0, &extra, &mut Vec::new(), &mut deg, d, &mut |added: &[(usize, usize)]| {
            let mut e = edges.clone();
            e.extend_from_slice(added);
            let h = Graph::from_edges(m, &e, d).expect("degree tracked");
            debug_assert!(plain(&h, f1, &map1) && plain(&h, f2, &map2));
            let f = MarkedGraph { graph: h, marks: marks.clone() };
            out.entry(f.canonical_key()).or_insert(f);
        });
    });
    Ok(out.into_values().collect())
}

/// Family whose free graphs are the graphs free of some family in `a` or of `b`.
pub fn union_families(a: &GSFFamily, b: &GSFFamily, d: usize, max_vertices: usize) -> Result<GSFFamily> {
    let pairs: Vec<(&MarkedGraph, &MarkedGraph)> =
        a.members.iter().flat_map(|x| b.members.iter().map(move |y| (x, y))).collect();
    let parts: Vec<Vec<MarkedGraph>> = pairs
        .par_iter()
        .map(|(x, y)| union_marked_graphs(x, y, d, max_vertices))
        .collect::<Result<_>>()?;
    Ok(GSFFamily::new(parts.into_iter().flatten().collect()))
}

/// Forbidden family of a 0-profile over an exhaustive graph catalog: for
/// each type bounded by `[0,k]`, all (k+1)-realisations of it.
pub fn compile_zero_profile_to_gsf(rho: &NeighbourhoodProfile, catalog: &TypeCatalog) -> Result<GSFFamily> {
    if !rho.is_zero_profile() {
        return Err(Error::NotZeroProfile);
    }
    if !catalog.exhaustive {
        return Err(Error::NonExhaustive);
    }
    if !catalog.graph || catalog.radius != rho.radius {
        return Err(Error::SignatureMismatch("profile and catalog disagree".into()));
    }
    let tasks: Vec<(&Ball, usize)> = catalog
        .entries()
        .iter()
        .filter_map(|(key, ball)| rho.bound(key).hi.map(|h| (ball, h as usize + 1)))
        .collect();
    let parts: Vec<Vec<MarkedGraph>> = tasks
        .par_iter()
        .map(|&(ball, k)| enumerate_k_realisations(ball, catalog.degree, k, k * ball.structure.len()))
        .collect::<Result<_>>()?;
    Ok(GSFFamily::new(parts.into_iter().flatten().collect()))
}

/// Family for a finite union of 0-profiles.
pub fn compile_profile_union(profiles: &[NeighbourhoodProfile], catalog: &TypeCatalog, max_vertices: usize) -> Result<GSFFamily> {
    let mut iter = profiles.iter();
    let Some(first) = iter.next() else {
        // the empty union has no members: forbid every graph
        return Ok(GSFFamily::new(vec![MarkedGraph::from_edges(Vec::new(), &[])]));
    };
    let mut fam = compile_zero_profile_to_gsf(first, catalog)?;
    for p in iter {
        let next = compile_zero_profile_to_gsf(p, catalog)?;
        fam = union_families(&fam, &next, catalog.degree, max_vertices)?;
    }
    Ok(fam)
}

/// Fixture family forbidding odd graphs outside the example property:
/// a partial path on three vertices and two full isolated vertices.
pub fn fixture_odd_family() -> GSFFamily {
    GSFFamily::new(vec![fixture_path(), fixture_two_full()])
}

/// Fixture family `{single partial vertex}`.
pub fn fixture_even_family() -> GSFFamily {
    GSFFamily::new(vec![MarkedGraph::from_edges(vec![Mark::Partial], &[])])
}

fn fixture_path() -> MarkedGraph {
    MarkedGraph::from_edges(vec![Mark::Partial; 3], &[(0, 1), (1, 2)])
}

fn fixture_two_full() -> MarkedGraph {
    MarkedGraph::from_edges(vec![Mark::Full; 2], &[])
}
