//! Canonical labelling by individualization-refinement.
//!
//! Every canonical form is a certificate: a token sequence that encodes the
//! input completely under a canonical vertex order. Equal certificates mean
//! isomorphic inputs. Graphs are first shrunk: maximal chains of degree-2
//! vertices become weighted edges and hanging trees are folded into colours,
//! so the search runs on a small core.

use sha2::{Digest, Sha256};

const TAG_CYCLE: u32 = u32::MAX - 1;
const TAG_ROUND: u32 = u32::MAX - 2;
const NONE: u32 = u32::MAX;

/// A vertex-coloured, arc-labelled graph handed to the search.
pub(crate) struct Colored {
    pub defs: Vec<Vec<u32>>,
    pub out: Vec<Vec<(u32, u32)>>,
    pub inc: Option<Vec<Vec<(u32, u32)>>>,
}

impl Colored {
    pub fn undirected(defs: Vec<Vec<u32>>) -> Self {
        let n = defs.len();
        Colored { defs, out: vec![Vec::new(); n], inc: None }
    }

    pub fn directed(defs: Vec<Vec<u32>>) -> Self {
        let n = defs.len();
        Colored { defs, out: vec![Vec::new(); n], inc: Some(vec![Vec::new(); n]) }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, label: u32) {
        self.out[u].push((label, v as u32));
        self.out[v].push((label, u as u32));
    }

    pub fn add_arc(&mut self, u: usize, v: usize, label: u32) {
        self.out[u].push((label, v as u32));
        if let Some(inc) = self.inc.as_mut() {
            inc[v].push((label, u as u32));
        }
    }

    fn n(&self) -> usize {
        self.defs.len()
    }
}

/// Certificate of a coloured graph.
pub(crate) fn certificate(g: &Colored) -> Vec<u32> {
    let n = g.n();
    let mut palette: Vec<&Vec<u32>> = g.defs.iter().collect();
    palette.sort();
    palette.dedup();
    let rank: Vec<u32> = g
        .defs
        .iter()
        .map(|d| palette.binary_search(&d).expect("palette entry") as u32)
        .collect();

    let mut cert = vec![n as u32, palette.len() as u32];
    for d in &palette {
        cert.push(d.len() as u32);
        cert.extend_from_slice(d);
    }
    if n == 0 {
        return cert;
    }

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&v| rank[v as usize]);
    let mut colors = vec![0u32; n];
    let mut start = 0u32;
    for (i, &v) in order.iter().enumerate() {
        if i > 0 && rank[v as usize] != rank[order[i - 1] as usize] {
            start = i as u32;
        }
        colors[v as usize] = start;
    }

    let mut search = Search {
        g,
        rank,
        best: None,
        best_inv: Vec::new(),
        autos: Vec::new(),
        sig: vec![Vec::new(); n],
        pairs: Vec::new(),
    };
    let mut prefix = Vec::new();
    search.visit(colors, &mut prefix);
    cert.extend(search.best.expect("search reaches a leaf"));
    cert
}

struct Search<'a> {
    g: &'a Colored,
    rank: Vec<u32>,
    best: Option<Vec<u32>>,
    best_inv: Vec<u32>,
    autos: Vec<Vec<u32>>,
    sig: Vec<Vec<u32>>,
    pairs: Vec<u64>,
}

impl Search<'_> {
    fn refine(&mut self, colors: &mut Vec<u32>) -> usize {
        let n = colors.len();
        let mut cells = count_cells(colors);
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut fresh = vec![0u32; n];
        loop {
            if cells == n {
                return cells;
            }
            for v in 0..n {
                let mut s = std::mem::take(&mut self.sig[v]);
                s.clear();
                s.push(colors[v]);
                self.pairs.clear();
                self.pairs.extend(
                    self.g.out[v].iter().map(|&(l, w)| ((l as u64) << 32) | colors[w as usize] as u64),
                );
                self.pairs.sort_unstable();
                s.push(self.pairs.len() as u32);
                for &p in &self.pairs {
                    s.push((p >> 32) as u32);
                    s.push(p as u32);
                }
                if let Some(inc) = &self.g.inc {
                    self.pairs.clear();
                    self.pairs.extend(
                        inc[v].iter().map(|&(l, w)| ((l as u64) << 32) | colors[w as usize] as u64),
                    );
                    self.pairs.sort_unstable();
                    s.push(self.pairs.len() as u32);
                    for &p in &self.pairs {
                        s.push((p >> 32) as u32);
                        s.push(p as u32);
                    }
                }
                self.sig[v] = s;
            }
            let sig = &self.sig;
            order.sort_by(|&a, &b| sig[a as usize].cmp(&sig[b as usize]));
            let mut distinct = 0;
            let mut start = 0u32;
            for (i, &v) in order.iter().enumerate() {
                if i == 0 || sig[v as usize] != sig[order[i - 1] as usize] {
                    start = i as u32;
                    distinct += 1;
                }
                fresh[v as usize] = start;
            }
            std::mem::swap(colors, &mut fresh);
            if distinct == cells {
                return cells;
            }
            cells = distinct;
        }
    }

    fn visit(&mut self, mut colors: Vec<u32>, prefix: &mut Vec<u32>) {
        let n = colors.len();
        if self.refine(&mut colors) == n {
            self.leaf(&colors);
            return;
        }
        let mut size = vec![0u32; n];
        for &c in &colors {
            size[c as usize] += 1;
        }
        let target = (0..n)
            .filter(|&c| size[c] > 1)
            .min_by_key(|&c| (size[c], c))
            .expect("non-discrete partition has a non-singleton cell") as u32;
        let members: Vec<u32> = (0..n as u32).filter(|&v| colors[v as usize] == target).collect();
        let mut done: Vec<u32> = Vec::new();
        for &v in &members {
            if !done.is_empty() && self.in_known_orbit(v, &done, prefix) {
                continue;
            }
            let mut next = colors.clone();
            for &u in &members {
                next[u as usize] = target + 1;
            }
            next[v as usize] = target;
            prefix.push(v);
            self.visit(next, prefix);
            prefix.pop();
            done.push(v);
        }
    }

    fn in_known_orbit(&self, v: u32, done: &[u32], prefix: &[u32]) -> bool {
        let gens: Vec<&Vec<u32>> = self
            .autos
            .iter()
            .filter(|g| prefix.iter().all(|&p| g[p as usize] == p))
            .collect();
        if gens.is_empty() {
            return false;
        }
        let n = self.rank.len();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(p: &mut [u32], mut x: u32) -> u32 {
            while p[x as usize] != x {
                p[x as usize] = p[p[x as usize] as usize];
                x = p[x as usize];
            }
            x
        }
        for g in gens {
            for x in 0..n as u32 {
                let a = find(&mut parent, x);
                let b = find(&mut parent, g[x as usize]);
                if a != b {
                    parent[a as usize] = b;
                }
            }
        }
        let rv = find(&mut parent, v);
        done.iter().any(|&u| find(&mut parent, u) == rv)
    }

    fn leaf(&mut self, colors: &[u32]) {
        let n = colors.len();
        let mut inv = vec![0u32; n];
        for (v, &c) in colors.iter().enumerate() {
            inv[c as usize] = v as u32;
        }
        let mut cert: Vec<u32> = inv.iter().map(|&v| self.rank[v as usize]).collect();
        let mut arcs: Vec<(u32, u32, u32)> = Vec::new();
        for (u, list) in self.g.out.iter().enumerate() {
            for &(l, w) in list {
                arcs.push((colors[u], colors[w as usize], l));
            }
        }
        arcs.sort_unstable();
        cert.push(arcs.len() as u32);
        for (a, b, l) in arcs {
            cert.extend([a, b, l]);
        }
        match &self.best {
            None => {
                self.best = Some(cert);
                self.best_inv = inv;
            }
            Some(b) => match cert.cmp(b) {
                std::cmp::Ordering::Less => {
                    self.best = Some(cert);
                    self.best_inv = inv;
                }
                std::cmp::Ordering::Equal => {
                    let gamma: Vec<u32> = (0..n).map(|v| self.best_inv[colors[v] as usize]).collect();
                    if gamma.iter().enumerate().any(|(v, &g)| g != v as u32) {
                        self.autos.push(gamma);
                    }
                }
                std::cmp::Ordering::Greater => {}
            },
        }
    }
}

fn count_cells(colors: &[u32]) -> usize {
    let mut seen = vec![false; colors.len()];
    let mut k = 0;
    for &c in colors {
        if !seen[c as usize] {
            seen[c as usize] = true;
            k += 1;
        }
    }
    k
}

/// Turns a certificate into a printable key. Short certificates are spelled
/// out; long ones are replaced by their SHA-256 digest.
pub(crate) fn key_from_certificate(prefix: char, cert: &[u32]) -> String {
    if cert.len() <= 40 {
        let mut s = String::with_capacity(cert.len() * 3 + 1);
        s.push(prefix);
        for (i, t) in cert.iter().enumerate() {
            if i > 0 {
                s.push('.');
            }
            s.push_str(&t.to_string());
        }
        s
    } else {
        let mut h = Sha256::new();
        for t in cert {
            h.update(t.to_le_bytes());
        }
        let digest = h.finalize();
        let mut s = String::with_capacity(66);
        s.push(prefix);
        s.push('x');
        for b in digest.iter() {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

/// Read-only view of an undirected simple graph (loops allowed as flags).
pub(crate) struct GraphView<'a> {
    pub adj: &'a [Vec<usize>],
    pub loops: &'a [bool],
    pub labels: Option<&'a [u32]>,
}

/// Reusable buffers sized to the host graph.
#[derive(Default)]
pub(crate) struct Scratch {
    dist: Vec<u32>,
    node: Vec<u32>,
    seen: Vec<bool>,
}

impl Scratch {
    fn fit(&mut self, n: usize) {
        if self.dist.len() < n {
            self.dist.resize(n, NONE);
            self.node.resize(n, NONE);
            self.seen.resize(n, false);
        }
    }
}

/// Breadth-first ball around `center`; returns the vertices in BFS order and
/// leaves `scratch.dist` filled for them (caller must call `clear_ball`).
pub(crate) fn bfs_ball(view: &GraphView, center: usize, r: usize, scratch: &mut Scratch) -> Vec<usize> {
    scratch.fit(view.adj.len());
    let mut out = vec![center];
    scratch.dist[center] = 0;
    let mut head = 0;
    while head < out.len() {
        let v = out[head];
        head += 1;
        let dv = scratch.dist[v];
        if dv as usize == r {
            continue;
        }
        for &w in &view.adj[v] {
            if scratch.dist[w] == NONE {
                scratch.dist[w] = dv + 1;
                out.push(w);
            }
        }
    }
    out
}

fn clear_ball(verts: &[usize], scratch: &mut Scratch) {
    for &v in verts {
        scratch.dist[v] = NONE;
    }
}

/// Certificate of the ball of radius `r` around `center`.
pub(crate) fn graph_ball_certificate(view: &GraphView, center: usize, r: usize, scratch: &mut Scratch) -> Vec<u32> {
    let verts = bfs_ball(view, center, r, scratch);
    let dist = std::mem::take(&mut scratch.dist);
    let cert = component_certificate(view, &verts, |v| dist[v] != NONE, Some(center), true, scratch);
    scratch.dist = dist;
    clear_ball(&verts, scratch);
    cert
}

/// Certificate of a whole graph (multiset of component certificates).
pub(crate) fn graph_certificate(view: &GraphView, compress: bool) -> Vec<u32> {
    let n = view.adj.len();
    let mut comp = vec![NONE; n];
    let mut certs: Vec<Vec<u32>> = Vec::new();
    let mut scratch = Scratch::default();
    scratch.fit(n);
    for s in 0..n {
        if comp[s] != NONE {
            continue;
        }
        let id = certs.len() as u32;
        let mut verts = vec![s];
        comp[s] = id;
        let mut head = 0;
        while head < verts.len() {
            let v = verts[head];
            head += 1;
            for &w in &view.adj[v] {
                if comp[w] == NONE {
                    comp[w] = id;
                    verts.push(w);
                }
            }
        }
        let c = component_certificate(view, &verts, |v| comp[v] == id, None, compress, &mut scratch);
        certs.push(c);
    }
    certs.sort();
    let mut out = vec![certs.len() as u32];
    for c in certs {
        out.push(c.len() as u32);
        out.extend(c);
    }
    out
}

struct Node {
    base: [u32; 3],
    loops: Vec<u32>,
    kids: Vec<(u32, u32)>,
    edges: Vec<(u32, u32)>,
}

fn component_certificate<F: Fn(usize) -> bool>(
    view: &GraphView,
    verts: &[usize],
    member: F,
    center: Option<usize>,
    compress: bool,
    scratch: &mut Scratch,
) -> Vec<u32> {
    scratch.fit(view.adj.len());
    let label = |v: usize| view.labels.map_or(0, |l| l[v]);
    let deg = |v: usize| view.adj[v].iter().filter(|&&w| member(w)).count();
    let is_node =
        |v: usize| !compress || view.loops[v] || Some(v) == center || label(v) != 0 || deg(v) != 2;

    let mut nodes: Vec<Node> = Vec::new();
    let mut node_of: Vec<usize> = Vec::new();
    for &v in verts {
        if is_node(v) {
            scratch.node[v] = nodes.len() as u32;
            node_of.push(v);
            nodes.push(Node {
                base: [u32::from(Some(v) == center), u32::from(view.loops[v]), label(v)],
                loops: Vec::new(),
                kids: Vec::new(),
                edges: Vec::new(),
            });
        }
    }
    if nodes.is_empty() {
        return vec![TAG_CYCLE, verts.len() as u32];
    }

    // chains between nodes become weighted edges
    let mut edge_ends: Vec<(u32, u32, u32)> = Vec::new();
    let mut touched: Vec<usize> = Vec::new();
    for (u_id, &u) in node_of.iter().enumerate() {
        for &x in &view.adj[u] {
            if !member(x) {
                continue;
            }
            if scratch.node[x] != NONE {
                let w_id = scratch.node[x] as usize;
                if u_id < w_id {
                    edge_ends.push((u_id as u32, w_id as u32, 1));
                }
                continue;
            }
            if scratch.seen[x] {
                continue;
            }
            let (mut prev, mut cur, mut len) = (u, x, 1u32);
            while scratch.node[cur] == NONE {
                scratch.seen[cur] = true;
                touched.push(cur);
                let next = view.adj[cur]
                    .iter()
                    .copied()
                    .find(|&y| y != prev && member(y))
                    .expect("chain vertex has two neighbours");
                prev = cur;
                cur = next;
                len += 1;
            }
            let w_id = scratch.node[cur] as usize;
            if w_id == u_id {
                nodes[u_id].loops.push(len);
            } else {
                edge_ends.push((u_id as u32, w_id as u32, len));
            }
        }
    }
    for v in touched {
        scratch.seen[v] = false;
    }
    for &v in &node_of {
        scratch.node[v] = NONE;
    }

    let mut alive_edge = vec![true; edge_ends.len()];
    for (e, &(a, b, _)) in edge_ends.iter().enumerate() {
        nodes[a as usize].edges.push((e as u32, b));
        nodes[b as usize].edges.push((e as u32, a));
    }
    let mut inc: Vec<usize> = nodes.iter().map(|n| n.edges.len()).collect();
    let mut alive = vec![true; nodes.len()];
    let mut alive_count = nodes.len();
    let center_id = center.map(|c| node_of.iter().position(|&v| v == c).expect("center is a node"));

    let mut table: Vec<u32> = Vec::new();
    let mut next_code = 0u32;
    loop {
        let leaves: Vec<usize> = (0..nodes.len())
            .filter(|&x| alive[x] && inc[x] == 1 && Some(x) != center_id)
            .collect();
        if leaves.is_empty() {
            break;
        }
        if center_id.is_none() && leaves.len() == alive_count {
            break;
        }
        let defs: Vec<Vec<u32>> = leaves.iter().map(|&x| node_def(&nodes[x])).collect();
        let mut sorted: Vec<&Vec<u32>> = defs.iter().collect();
        sorted.sort();
        sorted.dedup();
        table.push(TAG_ROUND);
        table.push(sorted.len() as u32);
        for d in &sorted {
            table.push(d.len() as u32);
            table.extend_from_slice(d);
        }
        for (i, &x) in leaves.iter().enumerate() {
            let code = next_code + sorted.binary_search(&&defs[i]).expect("def present") as u32;
            let &(e, p) = nodes[x]
                .edges
                .iter()
                .find(|&&(e, _)| alive_edge[e as usize])
                .expect("leaf has one live edge");
            alive_edge[e as usize] = false;
            let len = edge_ends[e as usize].2;
            nodes[p as usize].kids.push((len, code));
            inc[p as usize] -= 1;
            inc[x] = 0;
            alive[x] = false;
            alive_count -= 1;
        }
        next_code += sorted.len() as u32;
    }

    let core: Vec<usize> = (0..nodes.len()).filter(|&x| alive[x]).collect();
    let mut pos = vec![NONE; nodes.len()];
    for (i, &x) in core.iter().enumerate() {
        pos[x] = i as u32;
    }
    let mut g = Colored::undirected(core.iter().map(|&x| node_def(&nodes[x])).collect());
    for (e, &(a, b, len)) in edge_ends.iter().enumerate() {
        if alive_edge[e] {
            g.add_edge(pos[a as usize] as usize, pos[b as usize] as usize, len);
        }
    }
    let mut cert = table;
    cert.extend(certificate(&g));
    cert
}

fn node_def(n: &Node) -> Vec<u32> {
    let mut loops = n.loops.clone();
    loops.sort_unstable();
    let mut kids = n.kids.clone();
    kids.sort_unstable();
    let mut d = Vec::with_capacity(5 + loops.len() + 2 * kids.len());
    d.extend_from_slice(&n.base);
    d.push(loops.len() as u32);
    d.extend(loops);
    d.push(kids.len() as u32);
    for (l, c) in kids {
        d.push(l);
        d.push(c);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view_cert(adj: &[Vec<usize>], compress: bool) -> Vec<u32> {
        let loops = vec![false; adj.len()];
        graph_certificate(&GraphView { adj, loops: &loops, labels: None }, compress)
    }

    fn from_edges(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        adj
    }

    #[test]
    fn relabelled_cycle_matches() {
        let a = from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let b = from_edges(5, &[(0, 2), (2, 4), (4, 1), (1, 3), (3, 0)]);
        assert_eq!(view_cert(&a, true), view_cert(&b, true));
        assert_eq!(view_cert(&a, false), view_cert(&b, false));
    }

    #[test]
    fn path_and_star_differ() {
        let p = from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let s = from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_ne!(view_cert(&p, true), view_cert(&s, true));
    }

    #[test]
    fn compression_keeps_chain_lengths() {
        // theta graphs with different path lengths
        let a = from_edges(6, &[(0, 2), (2, 1), (0, 3), (3, 1), (0, 4), (4, 5), (5, 1)]);
        let b = from_edges(6, &[(0, 2), (2, 3), (3, 1), (0, 4), (4, 5), (5, 1), (0, 1)]);
        assert_ne!(view_cert(&a, true), view_cert(&b, true));
    }

    #[test]
    fn symmetric_search_terminates() {
        let mut edges = Vec::new();
        for i in 0..8 {
            for j in i + 1..8 {
                if (i + j) % 2 == 1 {
                    edges.push((i, j));
                }
            }
        }
        let k44 = from_edges(8, &edges);
        let again = from_edges(8, &edges.iter().map(|&(a, b)| (7 - a, 7 - b)).collect::<Vec<_>>());
        assert_eq!(view_cert(&k44, false), view_cert(&again, false));
    }

    #[test]
    fn long_keys_are_digests() {
        let k = key_from_certificate('g', &[1; 100]);
        assert!(k.starts_with("gx"));
        assert_eq!(k.len(), 66);
        assert_eq!(key_from_certificate('g', &[1, 2]), "g1.2");
    }
}
