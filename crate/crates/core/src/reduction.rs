//! The gadget reduction from binary relational structures to bounded-degree
//! graphs, with gadget detection and query translation.

use std::fmt;

use crate::error::{Error, Result};
use crate::harness::CountingOracle;
use crate::neighborhoods::{Interval, NeighbourhoodProfile, Typer};
use crate::structures::{Graph, Signature, Structure, TupleAnswer};

/// Gadget shapes. Relation indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GadgetKind {
    Arrow(usize),
    Loop(usize),
    NonArrow,
}

impl fmt::Display for GadgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GadgetKind::Arrow(k) => write!(f, "arrow({k})"),
            GadgetKind::Loop(k) => write!(f, "loop({k})"),
            GadgetKind::NonArrow => f.write_str("non-arrow"),
        }
    }
}

/// Template graph of a gadget. Vertices `0..m` are the path `a_1..a_m`,
/// followed by the pendant vertices `b`.
#[derive(Clone, Debug)]
pub struct GadgetSpec {
    pub kind: GadgetKind,
    pub ell: usize,
    pub template: Graph,
    /// Template vertices fixed to the given endpoints.
    pub anchors: Vec<usize>,
}

pub fn gadget_spec(kind: GadgetKind, ell: usize) -> Result<GadgetSpec> {
    if ell == 0 {
        return Err(Error::Structure("gadgets need at least one relation".into()));
    }
    let check = |k: usize| {
        if k == 0 || k > ell {
            Err(Error::Structure(format!("relation index {k} outside 1..={ell}")))
        } else {
            Ok(())
        }
    };
    let path = |m: usize| (0..m - 1).map(|i| (i, i + 1)).collect::<Vec<_>>();
    let (n, edges, anchors) = match kind {
        GadgetKind::Arrow(k) => {
            check(k)?;
            let m = 2 * ell + 2;
            let mut e = path(m);
            e.push((ell + k, m));
            e.push((ell + k, m + 1));
            (m + 2, e, vec![0, m - 1])
        }
        GadgetKind::Loop(k) => {
            check(k)?;
            let m = ell + 1;
            let mut e = path(m);
            e.push((k - 1, m));
            (m + 1, e, vec![m - 1])
        }
        GadgetKind::NonArrow => {
            let m = ell + 1;
            let mut e = path(m);
            e.push((0, m));
            e.push((1, m));
            (m + 1, e, vec![m - 1])
        }
    };
    let template = Graph::from_edges(n, &edges, 4)?;
    Ok(GadgetSpec { kind, ell, template, anchors })
}

/// What a vertex of the reduced graph stands for. `k` and `i` are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Element(usize),
    Spine { k: usize, a: usize, i: usize },
    Pendant { a: usize, i: usize },
}

/// Vertex numbering: element `e` owns the block starting at
/// `e * (1 + d(ell+1))`; the element vertex comes first, then for each port
/// `i` the spine `v^1..v^ell` followed by `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub d: usize,
    pub ell: usize,
}

impl Layout {
    pub fn block(&self) -> usize {
        1 + self.d * (self.ell + 1)
    }

    pub fn index(&self, p: Provenance) -> usize {
        let s = self.ell + 1;
        match p {
            Provenance::Element(a) => a * self.block(),
            Provenance::Spine { k, a, i } => a * self.block() + 1 + (i - 1) * s + (k - 1),
            Provenance::Pendant { a, i } => a * self.block() + 1 + (i - 1) * s + self.ell,
        }
    }

    pub fn element(&self, a: usize) -> usize {
        self.index(Provenance::Element(a))
    }

    pub fn spine(&self, k: usize, a: usize, i: usize) -> usize {
        self.index(Provenance::Spine { k, a, i })
    }

    pub fn pendant(&self, a: usize, i: usize) -> usize {
        self.index(Provenance::Pendant { a, i })
    }

    pub fn decode(&self, v: usize) -> Provenance {
        let a = v / self.block();
        let r = v % self.block();
        if r == 0 {
            return Provenance::Element(a);
        }
        let i = (r - 1) / (self.ell + 1) + 1;
        let t = (r - 1) % (self.ell + 1);
        if t < self.ell {
            Provenance::Spine { k: t + 1, a, i }
        } else {
            Provenance::Pendant { a, i }
        }
    }

    /// `v^k_{a,i}`, reading `v^{ell+1}` as the element itself.
    fn spine_or_element(&self, k: usize, a: usize, i: usize) -> usize {
        if k > self.ell {
            self.element(a)
        } else {
            self.spine(k, a, i)
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReducedGraph {
    pub graph: Graph,
    pub layout: Layout,
    /// Element count of the source structure.
    pub elements: usize,
}

impl ReducedGraph {
    pub fn provenance(&self, v: usize) -> Provenance {
        self.layout.decode(v)
    }

    pub fn provenance_line(&self, v: usize, a: &Structure) -> String {
        let id = self.graph.id(v);
        match self.provenance(v) {
            Provenance::Element(e) => format!("vertex: {id} element {}", a.id(e)),
            Provenance::Spine { k, a: e, i } => format!("vertex: {id} gadget v {k} {} {i}", a.id(e)),
            Provenance::Pendant { a: e, i } => format!("vertex: {id} gadget w {} {i}", a.id(e)),
        }
    }
}

/// Vertex id in the reduced graph: `e:<a>`, `v:<k>:<a>:<i>` or `w:<a>:<i>`.
pub fn vertex_id(p: Provenance, a: &Structure) -> String {
    match p {
        Provenance::Element(e) => format!("e:{}", a.id(e)),
        Provenance::Spine { k, a: e, i } => format!("v:{k}:{}:{i}", a.id(e)),
        Provenance::Pendant { a: e, i } => format!("w:{}:{i}", a.id(e)),
    }
}

/// Inverse of [`vertex_id`], checked against the layout of `f(a)`.
pub fn parse_vertex_id(s: &str, a: &Structure) -> Result<Provenance> {
    let bad = || Error::Provenance(format!("`{s}` is not a reduced-graph vertex id"));
    let elem = |id: &str| a.index_of(id).ok_or_else(|| Error::UnknownElement(id.to_string()));
    let num = |t: &str| t.parse::<usize>().ok().filter(|&x| x >= 1).ok_or_else(bad);
    let (d, ell) = (a.degree_bound(), a.signature().len());
    let p = if let Some(rest) = s.strip_prefix("e:") {
        Provenance::Element(elem(rest)?)
    } else if let Some(rest) = s.strip_prefix("w:") {
        let (e, i) = rest.rsplit_once(':').ok_or_else(bad)?;
        Provenance::Pendant { a: elem(e)?, i: num(i)? }
    } else if let Some(rest) = s.strip_prefix("v:") {
        let (k, rest) = rest.split_once(':').ok_or_else(bad)?;
        let (e, i) = rest.rsplit_once(':').ok_or_else(bad)?;
        Provenance::Spine { k: num(k)?, a: elem(e)?, i: num(i)? }
    } else {
        return Err(bad());
    };
    let ok = match p {
        Provenance::Element(_) => true,
        Provenance::Spine { k, i, .. } => k <= ell && i <= d,
        Provenance::Pendant { i, .. } => i <= d,
    };
    if ok {
        Ok(p)
    } else {
        Err(bad())
    }
}

fn require_binary(sig: &Signature) -> Result<()> {
    for s in sig.symbols() {
        if s.arity != 2 {
            return Err(Error::NotBinary(s.name.clone()));
        }
    }
    if sig.is_empty() {
        return Err(Error::Signature("the reduction needs at least one relation".into()));
    }
    Ok(())
}

/// Graph degree bound of reduced graphs. Gadget vertices reach degree 4;
/// with a single relation, non-arrow pendants also attach to the element.
pub fn reduced_degree_bound(d: usize, ell: usize) -> usize {
    if ell == 1 {
        (2 * d).max(4)
    } else {
        d.max(4)
    }
}

/// `f(A)`: every element gets `d` spines; tuples become arrows or loops and
/// unused ports become non-arrows.
pub fn apply_reduction(a: &Structure) -> Result<ReducedGraph> {
    require_binary(a.signature())?;
    let d = a.degree_bound();
    let ell = a.signature().len();
    let layout = Layout { d, ell };
    let n = a.len() * layout.block();
    let ids: Vec<String> = (0..n).map(|v| vertex_id(layout.decode(v), a)).collect();
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n + 4 * a.tuple_count());
    for e in 0..a.len() {
        for i in 1..=d {
            edges.push((layout.element(e), layout.spine(ell, e, i)));
            for k in 1..ell {
                edges.push((layout.spine(k, e, i), layout.spine(k + 1, e, i)));
            }
        }
    }
    // port of each tuple at each of its elements
    let mut port = vec![Vec::<(usize, Vec<usize>)>::new(); a.len()];
    for e in 0..a.len() {
        port[e] = a.incident(e).map(|(s, t)| (s, t.to_vec())).collect();
    }
    let port_of = |e: usize, s: usize, t: &[usize]| {
        port[e].iter().position(|(s2, t2)| *s2 == s && t2 == t).expect("incident tuple") + 1
    };
    for (s, t) in a.tuples() {
        let k = s + 1;
        let (x, y) = (t[0], t[1]);
        if x == y {
            let i = port_of(x, s, t);
            edges.push((layout.spine(k, x, i), layout.pendant(x, i)));
        } else {
            let i = port_of(x, s, t);
            let j = port_of(y, s, t);
            edges.push((layout.spine(k, y, j), layout.pendant(y, j)));
            edges.push((layout.spine(k, y, j), layout.pendant(x, i)));
            edges.push((layout.spine(1, x, i), layout.spine(1, y, j)));
        }
    }
    for e in 0..a.len() {
        for i in port[e].len() + 1..=d {
            edges.push((layout.spine(1, e, i), layout.pendant(e, i)));
            edges.push((layout.spine_or_element(2, e, i), layout.pendant(e, i)));
        }
    }
    for (u, v) in &mut edges {
        if *u > *v {
            std::mem::swap(u, v);
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let graph = Graph::new(ids, &edges, &[], reduced_degree_bound(d, ell))?;
    Ok(ReducedGraph { graph, layout, elements: a.len() })
}

/// `(c1, c2) = (2d + 2d^2 ell, d + 1)`.
pub fn reduction_constants(d: usize, ell: usize) -> (usize, usize) {
    (2 * d + 2 * d * d * ell, d + 1)
}

/// Whether the template maps onto the closed neighbourhood of its inner
/// vertices with the anchors at `fixed`.
fn match_template(g: &Graph, spec: &GadgetSpec, fixed: &[usize]) -> bool {
    let t = &spec.template;
    let n = t.len();
    let mut is_anchor = vec![false; n];
    let mut map = vec![usize::MAX; n];
    let mut used = std::collections::HashSet::new();
    for (&x, &v) in spec.anchors.iter().zip(fixed) {
        if v >= g.len() || !used.insert(v) {
            return false;
        }
        is_anchor[x] = true;
        map[x] = v;
    }
    for (i, &x) in spec.anchors.iter().enumerate() {
        for &y in &spec.anchors[i + 1..] {
            if t.has_edge(x, y) != g.has_edge(map[x], map[y]) {
                return false;
            }
        }
    }
    // BFS order from the first anchor so every vertex has a placed neighbour
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([spec.anchors[0]]);
    seen[spec.anchors[0]] = true;
    while let Some(x) = queue.pop_front() {
        for &y in t.neighbours(x) {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
                if !is_anchor[y] {
                    order.push(y);
                }
            }
        }
    }
    fn rec(
        depth: usize,
        order: &[usize],
        g: &Graph,
        t: &Graph,
        is_anchor: &[bool],
        map: &mut [usize],
        used: &mut std::collections::HashSet<usize>,
    ) -> bool {
        if depth == order.len() {
            // every inner vertex must see exactly its template neighbours
            return (0..t.len()).filter(|&x| !is_anchor[x]).all(|x| {
                let mut want: Vec<usize> = t.neighbours(x).iter().map(|&y| map[y]).collect();
                want.sort_unstable();
                want == g.neighbours(map[x]) && !g.has_loop(map[x])
            });
        }
        let x = order[depth];
        let anchor = t.neighbours(x).iter().copied().find(|&y| map[y] != usize::MAX).expect("connected template");
        for &c in g.neighbours(map[anchor]) {
            if used.contains(&c) || g.degree(c) != t.degree(x) {
                continue;
            }
            let consistent = t.neighbours(x).iter().all(|&y| map[y] == usize::MAX || g.has_edge(c, map[y]));
            if !consistent {
                continue;
            }
            map[x] = c;
            used.insert(c);
            if rec(depth + 1, order, g, t, is_anchor, map, used) {
                return true;
            }
            used.remove(&c);
            map[x] = usize::MAX;
        }
        false
    }
    rec(0, &order, g, t, &is_anchor, &mut map, &mut used)
}

/// Relations `k` with a `k`-arrow from `v` to `w`.
pub fn detect_arrows(g: &Graph, v: usize, w: usize, ell: usize) -> Vec<usize> {
    if v == w {
        return Vec::new();
    }
    (1..=ell)
        .filter(|&k| {
            let spec = gadget_spec(GadgetKind::Arrow(k), ell).expect("valid k");
            match_template(g, &spec, &[v, w])
        })
        .collect()
}

/// Relations `k` with a `k`-loop at `v`.
pub fn detect_loops(g: &Graph, v: usize, ell: usize) -> Vec<usize> {
    (1..=ell)
        .filter(|&k| match_template(g, &gadget_spec(GadgetKind::Loop(k), ell).expect("valid k"), &[v]))
        .collect()
}

pub fn detect_non_arrow(g: &Graph, v: usize, ell: usize) -> bool {
    match_template(g, &gadget_spec(GadgetKind::NonArrow, ell).expect("valid"), &[v])
}

/// The first gadget hanging at `v` (towards `w` for arrows).
pub fn detect_gadget(g: &Graph, v: usize, w: Option<usize>, ell: usize) -> Option<GadgetKind> {
    if v >= g.len() {
        return None;
    }
    match w {
        Some(w) if w != v => detect_arrows(g, v, w, ell).first().map(|&k| GadgetKind::Arrow(k)),
        _ => detect_loops(g, v, ell)
            .first()
            .map(|&k| GadgetKind::Loop(k))
            .or_else(|| detect_non_arrow(g, v, ell).then_some(GadgetKind::NonArrow)),
    }
}

/// Answers neighbour queries on `f(A)` through a counting oracle on `A`.
pub struct QueryTranslator<'o, 'a> {
    oracle: &'o mut CountingOracle<'a>,
    layout: Layout,
    graph_degree: usize,
}

impl<'o, 'a> QueryTranslator<'o, 'a> {
    pub fn new(oracle: &'o mut CountingOracle<'a>) -> Result<Self> {
        let (d, sig) = oracle.structure_shape()?;
        require_binary(&sig)?;
        let layout = Layout { d, ell: sig.len() };
        Ok(QueryTranslator { oracle, layout, graph_degree: reduced_degree_bound(d, sig.len()) })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// The `port`-th neighbour (ascending) of `v` and the structure queries spent.
    pub fn translate(&mut self, v: usize, port: usize) -> Result<(Option<usize>, usize)> {
        if port == 0 || port > self.graph_degree {
            return Err(Error::QueryIndex { index: port, bound: self.graph_degree });
        }
        if v >= self.oracle.len() * self.layout.block() {
            return Err(Error::Provenance(format!("vertex {v} outside the reduced graph")));
        }
        let before = self.oracle.count();
        let mut nbrs = self.neighbours(v)?;
        nbrs.sort_unstable();
        nbrs.dedup();
        Ok((nbrs.get(port - 1).copied(), self.oracle.count() - before))
    }

    fn neighbours(&mut self, v: usize) -> Result<Vec<usize>> {
        let lay = self.layout;
        let (d, ell) = (lay.d, lay.ell);
        match lay.decode(v) {
            Provenance::Element(a) => {
                let mut out: Vec<usize> = (1..=d).map(|i| lay.spine(ell, a, i)).collect();
                if ell == 1 {
                    for i in 1..=d {
                        if self.oracle.query_tuple(a, i)? == TupleAnswer::Bottom {
                            out.push(lay.pendant(a, i));
                        }
                    }
                }
                Ok(out)
            }
            Provenance::Spine { a, i, .. } | Provenance::Pendant { a, i } => {
                let edges = self.spine_edges(a, i)?;
                Ok(edges
                    .into_iter()
                    .filter_map(|(x, y)| {
                        if x == v {
                            Some(y)
                        } else if y == v {
                            Some(x)
                        } else {
                            None
                        }
                    })
                    .collect())
            }
        }
    }

    /// All edges touching the spine `(a, i)` or its pendant.
    fn spine_edges(&mut self, a: usize, i: usize) -> Result<Vec<(usize, usize)>> {
        let lay = self.layout;
        let ell = lay.ell;
        let mut edges = vec![(lay.element(a), lay.spine(ell, a, i))];
        for k in 1..ell {
            edges.push((lay.spine(k, a, i), lay.spine(k + 1, a, i)));
        }
        match self.oracle.query_tuple(a, i)? {
            TupleAnswer::Bottom => {
                edges.push((lay.spine(1, a, i), lay.pendant(a, i)));
                edges.push((lay.spine_or_element(2, a, i), lay.pendant(a, i)));
            }
            TupleAnswer::Tuple { symbol, elements } => {
                let k = symbol + 1;
                let (x, y) = (elements[0], elements[1]);
                if x == y {
                    edges.push((lay.spine(k, a, i), lay.pendant(a, i)));
                } else {
                    let other = if a == x { y } else { x };
                    let mut j = None;
                    for jj in 1..=lay.d {
                        if let TupleAnswer::Tuple { symbol: s2, elements: e2 } = self.oracle.query_tuple(other, jj)? {
                            if s2 == symbol && e2 == elements {
                                j = Some(jj);
                                break;
                            }
                        }
                    }
                    let j = j.ok_or_else(|| Error::Provenance("tuple missing at its other element".into()))?;
                    let (ix, iy) = if a == x { (i, j) } else { (j, i) };
                    edges.push((lay.spine(1, x, ix), lay.spine(1, y, iy)));
                    edges.push((lay.spine(k, y, iy), lay.pendant(y, iy)));
                    edges.push((lay.spine(k, y, iy), lay.pendant(x, ix)));
                }
            }
        }
        Ok(edges)
    }
}

/// Empirical profile at `radius` over reduced corpus graphs: `[0,1]` at the
/// root type, `[0,inf]` at every other observed type.
pub fn build_graph_profile(corpus: &[&Graph], root_key: &str, radius: usize) -> Result<NeighbourhoodProfile> {
    if corpus.is_empty() {
        return Err(Error::Empty);
    }
    let degree = corpus.iter().map(|g| g.degree_bound()).max().unwrap_or(0);
    let mut rho = NeighbourhoodProfile::new(radius, degree, Signature::graph(), true);
    rho.empirical = true;
    for g in corpus {
        for key in Typer::graph(g, radius).all_keys() {
            rho.bounds.entry(key).or_insert(Interval::ANY);
        }
    }
    rho.bounds.insert(root_key.to_string(), Interval { lo: 0, hi: Some(1) });
    Ok(rho)
}

/// Profile radius for the reduced graphs: `4 ell + 2`.
pub fn lifted_radius(ell: usize) -> usize {
    4 * ell + 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::random_structure;
    use rand::SeedableRng;

    fn sig(n: usize) -> Signature {
        let names: Vec<String> = (0..n).map(|i| format!("R{i}")).collect();
        let pairs: Vec<(&str, usize)> = names.iter().map(|s| (s.as_str(), 2)).collect();
        Signature::from_pairs(&pairs).unwrap()
    }

    #[test]
    fn constants() {
        assert_eq!(reduction_constants(1, 1), (4, 2));
        assert_eq!(reduction_constants(2, 1), (12, 3));
        assert_eq!(reduction_constants(2, 5).1, reduction_constants(2, 1).1);
    }

    #[test]
    fn templates() {
        let a = gadget_spec(GadgetKind::Arrow(2), 3).unwrap();
        assert_eq!(a.template.len(), 2 * 3 + 4);
        assert_eq!(a.template.edge_count(), 2 * 3 + 1 + 2);
        assert_eq!(gadget_spec(GadgetKind::Loop(1), 3).unwrap().template.len(), 5);
        assert_eq!(gadget_spec(GadgetKind::NonArrow, 3).unwrap().template.len(), 5);
        assert!(gadget_spec(GadgetKind::Arrow(4), 3).is_err());
    }

    #[test]
    fn vertex_ids_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let s = random_structure(&sig(2), 3, 4, 5, &mut rng);
        let r = apply_reduction(&s).unwrap();
        for v in 0..r.graph.len() {
            assert_eq!(parse_vertex_id(r.graph.id(v), &s).unwrap(), r.provenance(v));
        }
        assert!(parse_vertex_id("v:3:e0:1", &s).is_err());
        assert!(parse_vertex_id("x:e0", &s).is_err());
    }

    #[test]
    fn layout_round_trip() {
        let lay = Layout { d: 3, ell: 4 };
        for v in 0..4 * lay.block() {
            assert_eq!(lay.index(lay.decode(v)), v);
        }
    }

    #[test]
    fn single_isolated_element() {
        let s = Structure::new(sig(1), vec!["a".into()], vec![], 1).unwrap();
        let r = apply_reduction(&s).unwrap();
        assert_eq!(r.graph.len(), 3);
        // a - v1, v1 - w, and the second attachment of w lands on a
        let mut e = r.graph.edges();
        e.sort_unstable();
        assert_eq!(e, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(apply_reduction(&Structure::empty(sig(2), 4)).unwrap().graph.len(), 0);
    }

    #[test]
    fn arity_checked() {
        let s = Structure::empty(Signature::from_pairs(&[("T", 3)]).unwrap(), 2);
        assert_eq!(apply_reduction(&s).unwrap_err(), Error::NotBinary("T".into()));
    }

    #[test]
    fn gadgets_round_trip_on_random_structures() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..15 {
            let s = random_structure(&sig(3), 4, 4, 7, &mut rng);
            let r = apply_reduction(&s).unwrap();
            let lay = r.layout;
            assert_eq!(r.graph.len(), s.len() * (1 + 4 * 4));
            assert!(r.graph.max_degree() <= 4);
            for a in 0..s.len() {
                let va = lay.element(a);
                for b in 0..s.len() {
                    if a == b {
                        continue;
                    }
                    let want: Vec<usize> = (0..3).filter(|&k| s.contains(k, &[a, b])).map(|k| k + 1).collect();
                    assert_eq!(detect_arrows(&r.graph, va, lay.element(b), 3), want);
                }
                let loops: Vec<usize> = (0..3).filter(|&k| s.contains(k, &[a, a])).map(|k| k + 1).collect();
                assert_eq!(detect_loops(&r.graph, va, 3), loops);
                assert_eq!(detect_non_arrow(&r.graph, va, 3), s.degree(a) < 4);
            }
        }
    }

    #[test]
    fn translation_matches_materialised_graph() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for n_rel in [1, 2] {
            for _ in 0..10 {
                let s = random_structure(&sig(n_rel), 4, 4, 6, &mut rng);
                let r = apply_reduction(&s).unwrap();
                let mut oracle = CountingOracle::structure(&s);
                let mut tr = QueryTranslator::new(&mut oracle).unwrap();
                for v in 0..r.graph.len() {
                    for p in 1..=r.graph.degree_bound() {
                        let (ans, used) = tr.translate(v, p).unwrap();
                        assert_eq!(ans, r.graph.query(v, p).unwrap());
                        assert!(used <= 4 + 1);
                        if n_rel >= 2 && matches!(r.provenance(v), Provenance::Element(_)) {
                            assert_eq!(used, 0);
                        }
                    }
                }
            }
        }
    }
}
