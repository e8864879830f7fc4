//! Exhaustive enumeration of small graphs and structures, and random generators.

use std::collections::HashSet;

use rand::Rng;

use crate::structures::{Graph, Signature, Structure};

/// One representative per isomorphism class of graphs on exactly `n`
/// vertices with maximum degree at most `d`, in deterministic order.
///
/// Classes on `n` vertices are grown from classes on `n - 1` vertices by
/// adding a vertex with every admissible neighbourhood, then deduplicated by
/// canonical key.
pub fn graphs_of_order(n: usize, d: usize) -> Vec<Graph> {
    let mut level = vec![Graph::empty(d)];
    for k in 0..n {
        level = extend_by_vertex(&level, k, d);
    }
    level
}

/// All graphs with at most `max_n` vertices and maximum degree `d`, up to isomorphism.
pub fn graphs_up_to(max_n: usize, d: usize) -> Vec<Graph> {
    let mut out = vec![Graph::empty(d)];
    let mut level = vec![Graph::empty(d)];
    for k in 0..max_n {
        level = extend_by_vertex(&level, k, d);
        out.extend(level.iter().cloned());
    }
    out
}

fn extend_by_vertex(level: &[Graph], k: usize, d: usize) -> Vec<Graph> {
    let mut seen = HashSet::new();
    let mut next = Vec::new();
    for g in level {
        let free: Vec<usize> = (0..k).filter(|&v| g.degree(v) < d).collect();
        for mask in 0u64..(1u64 << free.len()) {
            if mask.count_ones() as usize > d {
                continue;
            }
            let mut edges = g.edges();
            for (b, &v) in free.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    edges.push((v, k));
                }
            }
            let h = Graph::from_edges(k + 1, &edges, d).expect("degrees checked");
            if seen.insert(h.canonical_key()) {
                next.push(h);
            }
        }
    }
    next
}

/// Every labelled graph on `n` vertices with maximum degree `d`.
pub fn labelled_graphs(n: usize, d: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    let mut deg = vec![0usize; n];
    let mut chosen = Vec::new();
    fn rec(
        i: usize,
        pairs: &[(usize, usize)],
        n: usize,
        d: usize,
        deg: &mut [usize],
        chosen: &mut Vec<(usize, usize)>,
        out: &mut Vec<Graph>,
    ) {
        if i == pairs.len() {
            out.push(Graph::from_edges(n, chosen, d).expect("degrees checked"));
            return;
        }
        rec(i + 1, pairs, n, d, deg, chosen, out);
        let (u, v) = pairs[i];
        if deg[u] < d && deg[v] < d {
            deg[u] += 1;
            deg[v] += 1;
            chosen.push((u, v));
            rec(i + 1, pairs, n, d, deg, chosen, out);
            chosen.pop();
            deg[u] -= 1;
            deg[v] -= 1;
        }
    }
    rec(0, &pairs, n, d, &mut deg, &mut chosen, &mut out);
    out
}

/// Every structure over `sig` on `n` labelled elements with tuple degree at
/// most `d`. Only practical for a handful of possible tuples.
pub fn labelled_structures(sig: &Signature, n: usize, d: usize) -> Vec<Structure> {
    let mut all: Vec<(usize, Vec<usize>)> = Vec::new();
    for s in 0..sig.len() {
        let ar = sig.arity(s);
        let total = n.pow(ar as u32);
        for code in 0..total {
            let mut t = Vec::with_capacity(ar);
            let mut c = code;
            for _ in 0..ar {
                t.push(c % n);
                c /= n;
            }
            t.reverse();
            all.push((s, t));
        }
    }
    let ids: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let mut out = Vec::new();
    let mut deg = vec![0usize; n];
    let mut chosen = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        all: &[(usize, Vec<usize>)],
        sig: &Signature,
        ids: &[String],
        d: usize,
        deg: &mut [usize],
        chosen: &mut Vec<(usize, Vec<usize>)>,
        out: &mut Vec<Structure>,
    ) {
        if i == all.len() {
            out.push(Structure::new(sig.clone(), ids.to_vec(), chosen.clone(), d).expect("degrees checked"));
            return;
        }
        rec(i + 1, all, sig, ids, d, deg, chosen, out);
        let mut members = all[i].1.clone();
        members.sort_unstable();
        members.dedup();
        if members.iter().all(|&e| deg[e] < d) {
            for &e in &members {
                deg[e] += 1;
            }
            chosen.push(all[i].clone());
            rec(i + 1, all, sig, ids, d, deg, chosen, out);
            chosen.pop();
            for &e in &members {
                deg[e] -= 1;
            }
        }
    }
    rec(0, &all, sig, &ids, d, &mut deg, &mut chosen, &mut out);
    out
}

/// A random structure: up to `tuples` random tuples, skipping any that would
/// break the degree bound.
pub fn random_structure<R: Rng>(sig: &Signature, n: usize, d: usize, tuples: usize, rng: &mut R) -> Structure {
    let mut deg = vec![0usize; n];
    let mut chosen: Vec<(usize, Vec<usize>)> = Vec::new();
    if n > 0 && !sig.is_empty() {
        for _ in 0..tuples {
            let s = rng.random_range(0..sig.len());
            let t: Vec<usize> = (0..sig.arity(s)).map(|_| rng.random_range(0..n)).collect();
            if chosen.iter().any(|(s2, t2)| *s2 == s && *t2 == t) {
                continue;
            }
            let mut members = t.clone();
            members.sort_unstable();
            members.dedup();
            if members.iter().all(|&e| deg[e] < d) {
                for &e in &members {
                    deg[e] += 1;
                }
                chosen.push((s, t));
            }
        }
    }
    let ids = (0..n).map(|i| format!("e{i}")).collect();
    Structure::new(sig.clone(), ids, chosen, d).expect("degrees checked")
}

/// A random graph with maximum degree `d` built from `attempts` random edge insertions.
pub fn random_graph<R: Rng>(n: usize, d: usize, attempts: usize, rng: &mut R) -> Graph {
    let mut deg = vec![0usize; n];
    let mut edges = Vec::new();
    if n >= 2 {
        for _ in 0..attempts {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u == v || deg[u] >= d || deg[v] >= d || edges.contains(&(u.min(v), u.max(v))) {
                continue;
            }
            deg[u] += 1;
            deg[v] += 1;
            edges.push((u.min(v), u.max(v)));
        }
    }
    Graph::from_edges(n, &edges, d).expect("degrees checked")
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}
