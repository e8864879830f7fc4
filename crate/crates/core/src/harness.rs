//! Query-counting oracles, exact distance search, trial runner, spectral
//! diagnostics and repair probes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gsf::{covers_family, is_family_free, GSFFamily};
use crate::neighborhoods::NeighbourhoodProfile;
use crate::structures::{Graph, Signature, Structure, TupleAnswer};

#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    Structure(&'a Structure),
    Graph(&'a Graph),
}

/// Wraps a structure or graph and counts every query.
#[derive(Clone, Debug)]
pub struct CountingOracle<'a> {
    target: Target<'a>,
    count: usize,
    log: Option<Vec<(usize, usize)>>,
    ceiling: Option<usize>,
}

impl<'a> CountingOracle<'a> {
    pub fn structure(a: &'a Structure) -> Self {
        CountingOracle { target: Target::Structure(a), count: 0, log: None, ceiling: None }
    }

    pub fn graph(g: &'a Graph) -> Self {
        CountingOracle { target: Target::Graph(g), count: 0, log: None, ceiling: None }
    }

    pub fn with_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn with_ceiling(mut self, ceiling: usize) -> Self {
        self.ceiling = Some(ceiling);
        self
    }

    pub fn target(&self) -> Target<'a> {
        self.target
    }

    /// Universe size; free of charge, as in the query model.
    pub fn len(&self) -> usize {
        match self.target {
            Target::Structure(a) => a.len(),
            Target::Graph(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn degree_bound(&self) -> usize {
        match self.target {
            Target::Structure(a) => a.degree_bound(),
            Target::Graph(g) => g.degree_bound(),
        }
    }

    pub(crate) fn structure_shape(&self) -> Result<(usize, Signature)> {
        match self.target {
            Target::Structure(a) => Ok((a.degree_bound(), a.signature().clone())),
            Target::Graph(_) => Err(Error::SignatureMismatch("oracle wraps a graph".into())),
        }
    }

    fn charge(&mut self, x: usize, i: usize) -> Result<()> {
        if let Some(c) = self.ceiling {
            if self.count >= c {
                return Err(Error::Budget(format!("query ceiling {c} reached")));
            }
        }
        self.count += 1;
        if let Some(log) = &mut self.log {
            log.push((x, i));
        }
        Ok(())
    }

    /// The `i`-th tuple containing element `a`.
    pub fn query_tuple(&mut self, a: usize, i: usize) -> Result<TupleAnswer> {
        let Target::Structure(s) = self.target else {
            return Err(Error::SignatureMismatch("tuple query on a graph".into()));
        };
        if a >= s.len() {
            return Err(Error::UnknownElement(a.to_string()));
        }
        self.charge(a, i)?;
        s.answer(a, i)
    }

    /// The `i`-th neighbour of vertex `v`.
    pub fn query_neighbour(&mut self, v: usize, i: usize) -> Result<Option<usize>> {
        let Target::Graph(g) = self.target else {
            return Err(Error::SignatureMismatch("neighbour query on a structure".into()));
        };
        if v >= g.len() {
            return Err(Error::UnknownElement(v.to_string()));
        }
        self.charge(v, i)?;
        g.query(v, i)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn log(&self) -> Option<&[(usize, usize)]> {
        self.log.as_deref()
    }

    pub fn reset(&mut self) {
        self.count = 0;
        if let Some(log) = &mut self.log {
            log.clear();
        }
    }
}

/// A single edit to a structure or graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Modification {
    Delete { symbol: usize, tuple: Vec<usize> },
    Insert { symbol: usize, tuple: Vec<usize> },
    Toggle { u: usize, v: usize },
}

impl Modification {
    pub fn describe_in(&self, a: Option<&Structure>) -> String {
        let ids = |t: &[usize]| -> String {
            t.iter().map(|&e| a.map_or(e.to_string(), |s| s.id(e).to_string())).collect::<Vec<_>>().join(",")
        };
        let name = |s: usize| a.map_or(s.to_string(), |x| x.signature().name(s).to_string());
        match self {
            Modification::Delete { symbol, tuple } => format!("delete {}({})", name(*symbol), ids(tuple)),
            Modification::Insert { symbol, tuple } => format!("insert {}({})", name(*symbol), ids(tuple)),
            Modification::Toggle { u, v } => format!("toggle {u} {v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Distance {
    /// A member is reachable with these modifications.
    Close(Vec<Modification>),
    /// No set within the budget reaches a member.
    Far,
    /// The enumeration cap was hit after this many candidate sets.
    Exhausted(u64),
}

/// Default cap on enumerated modification sets.
pub const DEFAULT_SET_CAP: u64 = 10_000_000;

/// Smallest subset (size-ordered, then lexicographic) of `universe` accepted
/// by `test`, up to `max_size` elements and `cap` candidates.
fn smallest_accepted<T, F>(universe: &[T], max_size: usize, cap: u64, mut test: F) -> (Option<Vec<usize>>, u64, bool)
where
    F: FnMut(&[usize]) -> bool,
{
    let mut tried = 0u64;
    for size in 0..=max_size.min(universe.len()) {
        let mut pick: Vec<usize> = (0..size).collect();
        loop {
            if tried >= cap {
                return (None, tried, true);
            }
            tried += 1;
            if test(&pick) {
                return (Some(pick), tried, false);
            }
            // next combination
            let n = universe.len();
            let Some(pos) = (0..size).rev().find(|&p| pick[p] < n - size + p) else { break };
            pick[pos] += 1;
            for q in pos + 1..size {
                pick[q] = pick[q - 1] + 1;
            }
        }
    }
    (None, tried, false)
}

fn modification_budget(eps: f64, d: usize, n: usize) -> usize {
    (eps * d as f64 * n as f64 + 1e-9).floor().max(0.0) as usize
}

/// Every single deletion, then every degree-respecting insertion.
pub fn structure_modifications(a: &Structure) -> Vec<Modification> {
    let mut out: Vec<Modification> =
        a.tuples().map(|(s, t)| Modification::Delete { symbol: s, tuple: t.to_vec() }).collect();
    let n = a.len();
    for s in 0..a.signature().len() {
        let ar = a.signature().arity(s);
        let total = n.checked_pow(ar as u32).unwrap_or(usize::MAX);
        for code in 0..total {
            let mut t = vec![0; ar];
            let mut c = code;
            for slot in t.iter_mut().rev() {
                *slot = c % n;
                c /= n;
            }
            if a.contains(s, &t) {
                continue;
            }
            let mut members = t.clone();
            members.sort_unstable();
            members.dedup();
            if members.iter().all(|&e| a.degree(e) < a.degree_bound()) {
                out.push(Modification::Insert { symbol: s, tuple: t });
            }
        }
    }
    out
}

/// Applies edits in order; `None` if one is not applicable.
pub fn apply_structure_modifications(a: &Structure, mods: &[&Modification]) -> Option<Structure> {
    let mut cur = a.clone();
    for m in mods {
        cur = match m {
            Modification::Delete { symbol, tuple } => {
                if !cur.contains(*symbol, tuple) {
                    return None;
                }
                cur.without_tuple(*symbol, tuple)
            }
            Modification::Insert { symbol, tuple } => cur.with_tuple(*symbol, tuple.clone()).ok()?,
            Modification::Toggle { .. } => return None,
        };
    }
    Some(cur)
}

/// Exact bounded search for at most `floor(eps*d*n)` tuple edits into `member`.
pub fn epsilon_distance_structure<P>(a: &Structure, member: P, eps: f64, cap: u64) -> Distance
where
    P: Fn(&Structure) -> bool,
{
    let budget = modification_budget(eps, a.degree_bound(), a.len());
    let universe = structure_modifications(a);
    let (found, tried, hit) = smallest_accepted(&universe, budget, cap, |pick| {
        let mods: Vec<&Modification> = pick.iter().map(|&i| &universe[i]).collect();
        apply_structure_modifications(a, &mods).is_some_and(|b| member(&b))
    });
    match found {
        Some(pick) => Distance::Close(pick.into_iter().map(|i| universe[i].clone()).collect()),
        None if hit => Distance::Exhausted(tried),
        None => Distance::Far,
    }
}

pub fn graph_toggles(g: &Graph) -> Vec<Modification> {
    let n = g.len();
    (0..n).flat_map(|u| (u + 1..n).map(move |v| Modification::Toggle { u, v })).collect()
}

pub fn apply_graph_modifications(g: &Graph, mods: &[&Modification]) -> Option<Graph> {
    let mut cur = g.clone();
    for m in mods {
        let Modification::Toggle { u, v } = m else { return None };
        cur = cur.with_toggled(*u, *v);
    }
    (cur.max_degree() <= g.degree_bound()).then_some(cur)
}

/// Exact bounded search for at most `floor(eps*d*n)` edge toggles into `member`.
pub fn epsilon_distance_graph<P>(g: &Graph, member: P, eps: f64, cap: u64) -> Distance
where
    P: Fn(&Graph) -> bool,
{
    let budget = modification_budget(eps, g.degree_bound(), g.len());
    let universe = graph_toggles(g);
    let (found, tried, hit) = smallest_accepted(&universe, budget, cap, |pick| {
        let mods: Vec<&Modification> = pick.iter().map(|&i| &universe[i]).collect();
        apply_graph_modifications(g, &mods).is_some_and(|h| member(&h))
    });
    match found {
        Some(pick) => Distance::Close(pick.into_iter().map(|i| universe[i].clone()).collect()),
        None if hit => Distance::Exhausted(tried),
        None => Distance::Far,
    }
}

/// Outcome summary of repeated tester runs.
#[derive(Clone, Debug, PartialEq)]
pub struct TesterReport {
    pub trials: usize,
    pub acceptances: usize,
    pub aborted: usize,
    pub queries_per_trial: Vec<usize>,
    pub logs: Vec<Vec<(usize, usize)>>,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TesterReport {
    /// Line-oriented report: trials, accept, est, queries.
    pub fn render(&self) -> String {
        let qs: Vec<String> = self.queries_per_trial.iter().map(usize::to_string).collect();
        let mut s = format!(
            "trials: {}\naccept: {}\nest: {:.6} {:.6} {:.6}\nqueries: {}\n",
            self.trials,
            self.acceptances,
            self.estimate,
            self.lower,
            self.upper,
            qs.join(" ")
        );
        if self.aborted > 0 {
            s.push_str(&format!("aborted: {}\n", self.aborted));
        }
        s
    }
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// A tester with oracle access: returns `true` to accept.
pub trait Tester: Sync {
    fn run(&self, oracle: &mut CountingOracle<'_>, rng: &mut ChaCha8Rng) -> Result<bool>;
}

impl<F> Tester for F
where
    F: Fn(&mut CountingOracle<'_>, &mut ChaCha8Rng) -> Result<bool> + Sync,
{
    fn run(&self, oracle: &mut CountingOracle<'_>, rng: &mut ChaCha8Rng) -> Result<bool> {
        self(oracle, rng)
    }
}

/// Per-trial generator keyed by a hash of the seed and trial index.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Runs `trials` independent trials. A trial that hits the query ceiling is
/// counted as aborted (and as a rejection).
pub fn run_trials<T: Tester + ?Sized>(
    tester: &T,
    target: Target<'_>,
    trials: usize,
    seed: u64,
    ceiling: Option<usize>,
) -> Result<TesterReport> {
    if trials == 0 {
        return Err(Error::Empty);
    }
    let results: Vec<(Option<bool>, usize, Vec<(usize, usize)>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut oracle = match target {
                Target::Structure(a) => CountingOracle::structure(a),
                Target::Graph(g) => CountingOracle::graph(g),
            }
            .with_log();
            if let Some(c) = ceiling {
                oracle = oracle.with_ceiling(c);
            }
            let mut rng = trial_rng(seed, t);
            let verdict = match tester.run(&mut oracle, &mut rng) {
                Ok(v) => Some(v),
                Err(Error::Budget(_)) => None,
                Err(e) => return Err(e),
            };
            Ok((verdict, oracle.count(), oracle.log().unwrap_or_default().to_vec()))
        })
        .collect::<Result<_>>()?;
    let acceptances = results.iter().filter(|r| r.0 == Some(true)).count();
    let aborted = results.iter().filter(|r| r.0.is_none()).count();
    let (lower, upper) = wilson_interval(acceptances, trials);
    Ok(TesterReport {
        trials,
        acceptances,
        aborted,
        queries_per_trial: results.iter().map(|r| r.1).collect(),
        logs: results.into_iter().map(|r| r.2).collect(),
        estimate: acceptances as f64 / trials as f64,
        lower,
        upper,
    })
}

pub fn always_accept(_: &mut CountingOracle<'_>, _: &mut ChaCha8Rng) -> Result<bool> {
    Ok(true)
}

pub fn coin_flip(_: &mut CountingOracle<'_>, rng: &mut ChaCha8Rng) -> Result<bool> {
    Ok(rng.random_bool(0.5))
}

/// Basic test for a 0-profile on graphs: explore the radius-r ball of a
/// uniformly random vertex through queries and reject iff its type is
/// bounded by `[0,0]`.
pub struct TypeAvoidanceTester<'p> {
    pub profile: &'p NeighbourhoodProfile,
}

impl Tester for TypeAvoidanceTester<'_> {
    fn run(&self, oracle: &mut CountingOracle<'_>, rng: &mut ChaCha8Rng) -> Result<bool> {
        if oracle.is_empty() {
            return Ok(true);
        }
        let d = oracle.degree_bound();
        let r = self.profile.radius;
        let start = rng.random_range(0..oracle.len());
        let mut local = std::collections::HashMap::from([(start, 0usize)]);
        let mut order = vec![start];
        let mut dist = vec![0usize];
        let mut edges = Vec::new();
        let mut loops = Vec::new();
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            let dv = dist[head];
            head += 1;
            for i in 1..=d {
                let Some(w) = oracle.query_neighbour(v, i)? else { break };
                if w == v {
                    loops.push(local[&v]);
                    continue;
                }
                if !local.contains_key(&w) {
                    if dv == r {
                        continue;
                    }
                    local.insert(w, order.len());
                    order.push(w);
                    dist.push(dv + 1);
                }
                let (a, b) = (local[&v], local[&w]);
                if a < b {
                    edges.push((a, b));
                }
            }
        }
        // edges between boundary vertices are seen from both ends
        for (a, b) in &mut edges {
            if *a > *b {
                std::mem::swap(a, b);
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let ids = (0..order.len()).map(|i| i.to_string()).collect();
        let ball = Graph::new(ids, &edges, &loops, d)?;
        let key = crate::neighborhoods::Typer::graph(&ball, r).key(0);
        Ok(self.profile.bound(&key).hi != Some(0))
    }
}

/// Second-largest absolute eigenvalue of `A/d` for a `d`-regular graph.
///
/// Dense tridiagonal QL for up to 512 vertices, Lanczos on the complement of
/// the constant vector above that.
pub fn spectral_gap(g: &Graph) -> Result<f64> {
    let n = g.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    let d = g.degree(0);
    if (0..n).any(|v| g.degree(v) != d) {
        return Err(Error::NotRegular);
    }
    if n == 1 {
        return Ok(0.0);
    }
    if d == 0 {
        return Ok(1.0);
    }
    if n <= 512 {
        let mut m = vec![vec![0.0f64; n]; n];
        for v in 0..n {
            for &w in g.neighbours(v) {
                m[v][w] = 1.0 / d as f64;
            }
            if g.has_loop(v) {
                m[v][v] = 1.0 / d as f64;
            }
        }
        let mut ev = symmetric_eigenvalues(m);
        ev.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        Ok(ev[1..].iter().fold(0.0f64, |acc, x| acc.max(x.abs())).min(1.0))
    } else {
        Ok(lanczos_second_eigenvalue(g, d))
    }
}

fn apply_normalised(g: &Graph, d: usize, x: &[f64], out: &mut [f64]) {
    for v in 0..g.len() {
        let mut s: f64 = g.neighbours(v).iter().map(|&w| x[w]).sum();
        if g.has_loop(v) {
            s += x[v];
        }
        out[v] = s / d as f64;
    }
}

/// Largest absolute eigenvalue of the walk operator on the complement of the
/// constant vector, by Lanczos with full reorthogonalisation.
fn lanczos_second_eigenvalue(g: &Graph, d: usize) -> f64 {
    const MAX_STEPS: usize = 600;
    let n = g.len();
    let steps = MAX_STEPS.min(n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let unit = 1.0 / (n as f64).sqrt();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let orthogonalise = |w: &mut [f64], basis: &[Vec<f64>]| {
        for _ in 0..2 {
            let c = w.iter().sum::<f64>() * unit;
            w.iter_mut().for_each(|v| *v -= c * unit);
            for q in basis {
                let c = dot(w, q);
                w.iter_mut().zip(q).for_each(|(v, qv)| *v -= c * qv);
            }
        }
    };
    let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    orthogonalise(&mut q, &[]);
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|v| *v /= norm);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut last = f64::NAN;
    loop {
        let k = basis.len() - 1;
        apply_normalised(g, d, &basis[k], &mut w);
        alpha.push(dot(&w, &basis[k]));
        orthogonalise(&mut w, &basis);
        let b = dot(&w, &w).sqrt();
        let done = basis.len() >= steps || b < 1e-12;
        if done || basis.len() % 10 == 0 {
            let m = alpha.len();
            let mut t = vec![vec![0.0; m]; m];
            for i in 0..m {
                t[i][i] = alpha[i];
                if i + 1 < m {
                    t[i][i + 1] = beta[i];
                    t[i + 1][i] = beta[i];
                }
            }
            let top = symmetric_eigenvalues(t).into_iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            if done || (top - last).abs() < 1e-13 {
                return top.min(1.0);
            }
            last = top;
        }
        beta.push(b);
        basis.push(w.iter().map(|v| v / b).collect());
    }
}

/// Eigenvalues of a symmetric matrix: Householder reduction to tridiagonal
/// form followed by the implicit QL iteration.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[i][k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i][l];
            } else {
                for k in 0..=l {
                    a[i][k] /= scale;
                    h += a[i][k] * a[i][k];
                }
                let f = a[i][l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i][l] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j][k] * a[i][k];
                    }
                    for k in j + 1..=l {
                        g += a[k][j] * a[i][k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i][j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i][j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j][k] -= f * e[k] + g * a[i][k];
                    }
                }
            }
        } else {
            e[i] = a[i][l];
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = a[i][i];
    }
    // QL with implicit shifts on (d, e)
    for i in 1..n {
        e[i - 1] = e[i];
    }
    if n > 0 {
        e[n - 1] = 0.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}

/// Result of probing whether a vertex set covers a family and how far the
/// graph is from being free of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    pub covers: bool,
    /// Fewest edge toggles reaching freeness, within the budget.
    pub repair: Option<usize>,
    /// Whether the repair only touches vertices within distance 1 of `B`.
    pub repair_near_b: Option<bool>,
    pub exhausted: bool,
}

pub fn propagation_probe(g: &Graph, fam: &GSFFamily, b: &[usize], budget: usize, cap: u64) -> ProbeReport {
    let covers = covers_family(g, b, fam);
    let universe = graph_toggles(g);
    let (found, _, hit) = smallest_accepted(&universe, budget, cap, |pick| {
        let mods: Vec<&Modification> = pick.iter().map(|&i| &universe[i]).collect();
        apply_graph_modifications(g, &mods).is_some_and(|h| is_family_free(&h, fam))
    });
    let mut near = vec![false; g.len()];
    for &v in b {
        if v < g.len() {
            near[v] = true;
            for &w in g.neighbours(v) {
                near[w] = true;
            }
        }
    }
    let repair_near_b = found.as_ref().map(|pick| {
        pick.iter().all(|&i| match universe[i] {
            Modification::Toggle { u, v } => near[u] && near[v],
            _ => false,
        })
    });
    ProbeReport { covers, repair: found.map(|p| p.len()), repair_near_b, exhausted: hit }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::graphs_up_to;
    use crate::gsf::{Mark, MarkedGraph};

    #[test]
    fn counter_tracks_log() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)], 2).unwrap();
        let mut o = CountingOracle::graph(&g).with_log();
        assert_eq!(o.query_neighbour(1, 1).unwrap(), Some(0));
        assert_eq!(o.query_neighbour(1, 2).unwrap(), Some(2));
        assert_eq!(o.query_neighbour(0, 2).unwrap(), None);
        assert_eq!(o.count(), 3);
        assert_eq!(o.log().unwrap().len(), 3);
        assert!(o.query_tuple(0, 1).is_err());
        o.reset();
        assert_eq!(o.count(), 0);
        let mut capped = CountingOracle::graph(&g).with_ceiling(1);
        capped.query_neighbour(0, 1).unwrap();
        assert!(matches!(capped.query_neighbour(0, 1), Err(Error::Budget(_))));
    }

    #[test]
    fn distance_examples() {
        let empty4 = Graph::from_edges(4, &[], 2).unwrap();
        let has_triangle = |g: &Graph| {
            (0..g.len()).any(|a| {
                g.neighbours(a).iter().any(|&b| g.neighbours(b).iter().any(|&c| c != a && g.has_edge(a, c)))
            })
        };
        assert_eq!(epsilon_distance_graph(&empty4, has_triangle, 0.25, DEFAULT_SET_CAP), Distance::Far);
        assert_eq!(epsilon_distance_graph(&empty4, |_| true, 0.0, DEFAULT_SET_CAP), Distance::Close(vec![]));
        let with3 = epsilon_distance_graph(&empty4, has_triangle, 0.375, DEFAULT_SET_CAP);
        let Distance::Close(w) = with3 else { panic!("expected close") };
        assert_eq!(w.len(), 3);
        let refs: Vec<&Modification> = w.iter().collect();
        assert!(has_triangle(&apply_graph_modifications(&empty4, &refs).unwrap()));
        assert!(matches!(epsilon_distance_graph(&empty4, has_triangle, 0.375, 5), Distance::Exhausted(5)));
    }

    #[test]
    fn structure_distance_finds_reinsertion() {
        let sig = Signature::from_pairs(&[("R", 2)]).unwrap();
        let full = Structure::from_named(sig.clone(), &["a", "b"], &[("R", &["a", "b"])], 2).unwrap();
        let cut = full.without_tuple(0, &[0, 1]);
        let member = |s: &Structure| s.contains(0, &[0, 1]);
        match epsilon_distance_structure(&cut, member, 0.25, DEFAULT_SET_CAP) {
            Distance::Close(w) => assert_eq!(w, vec![Modification::Insert { symbol: 0, tuple: vec![0, 1] }]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trial_runner() {
        let g = Graph::from_edges(4, &[(0, 1)], 2).unwrap();
        let rep = run_trials(&always_accept, Target::Graph(&g), 20, 1, None).unwrap();
        assert_eq!(rep.acceptances, 20);
        assert!(rep.queries_per_trial.iter().all(|&q| q == 0));
        let probe = |o: &mut CountingOracle<'_>, rng: &mut ChaCha8Rng| -> Result<bool> {
            let v = rng.random_range(0..o.len());
            Ok(o.query_neighbour(v, 1)?.is_some() || rng.random_bool(0.5))
        };
        let a = run_trials(&probe, Target::Graph(&g), 50, 7, None).unwrap();
        let b = run_trials(&probe, Target::Graph(&g), 50, 7, None).unwrap();
        assert_eq!(a, b);
        for (q, log) in a.queries_per_trial.iter().zip(&a.logs) {
            assert_eq!(*q, log.len());
        }
        let hungry = |o: &mut CountingOracle<'_>, _: &mut ChaCha8Rng| -> Result<bool> {
            for _ in 0..10 {
                o.query_neighbour(0, 1)?;
            }
            Ok(true)
        };
        let capped = run_trials(&hungry, Target::Graph(&g), 3, 0, Some(4)).unwrap();
        assert_eq!(capped.aborted, 3);
        assert_eq!(capped.acceptances, 0);
    }

    #[test]
    fn coin_flip_estimates_converge() {
        let g = Graph::from_edges(1, &[], 1).unwrap();
        let mut good = 0;
        let mut ests = Vec::new();
        for seed in 0..100 {
            let rep = run_trials(&coin_flip, Target::Graph(&g), 10_000, seed, None).unwrap();
            ests.push(rep.estimate);
            if (rep.estimate - 0.5).abs() <= 3.0 * (0.25f64 / 10_000.0).sqrt() {
                good += 1;
            }
        }
        assert!(good >= 99, "{ests:?}");
    }

    #[test]
    fn spectral_examples() {
        let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], 3).unwrap();
        assert!((spectral_gap(&k4).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], 2).unwrap();
        assert!((spectral_gap(&c4).unwrap() - 1.0).abs() < 1e-12);
        let two = Graph::from_edges(4, &[(0, 1), (2, 3)], 1).unwrap();
        assert!((spectral_gap(&two).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(spectral_gap(&Graph::empty(2)).unwrap_err(), Error::Empty);
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)], 2).unwrap();
        assert_eq!(spectral_gap(&path).unwrap_err(), Error::NotRegular);
    }

    fn nalgebra_gap(g: &Graph) -> f64 {
        let n = g.len();
        let d = g.degree(0) as f64;
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            if g.has_edge(i, j) || (i == j && g.has_loop(i)) {
                1.0 / d
            } else {
                0.0
            }
        });
        let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        ev[1..].iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    #[test]
    fn spectral_matches_dense_oracle() {
        let mut checked = 0;
        for g in graphs_up_to(7, 6) {
            if g.len() < 2 || g.degree(0) == 0 || (0..g.len()).any(|v| g.degree(v) != g.degree(0)) {
                continue;
            }
            assert!((spectral_gap(&g).unwrap() - nalgebra_gap(&g)).abs() < 1e-9);
            checked += 1;
        }
        assert!(checked > 10);
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        // cycles above 512 vertices take the iterative path
        let n = 600;
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        let c = Graph::from_edges(n, &edges, 2).unwrap();
        assert!((spectral_gap(&c).unwrap() - 1.0).abs() < 1e-6);
        let odd: Vec<(usize, usize)> = (0..601).map(|i| (i, (i + 1) % 601)).collect();
        let c = Graph::from_edges(601, &odd, 2).unwrap();
        let want = (std::f64::consts::PI / 601.0).cos();
        assert!((spectral_gap(&c).unwrap() - want).abs() < 1e-6);
        let n = 700;
        let mut edges = Vec::new();
        for i in 0..n {
            for j in [1, 7, 31] {
                edges.push((i, (i + j) % n));
            }
        }
        let g = Graph::from_edges(n, &edges, 6).unwrap();
        let mut m = vec![vec![0.0; n]; n];
        for &(u, v) in &edges {
            m[u][v] = 1.0 / 6.0;
            m[v][u] = 1.0 / 6.0;
        }
        let mut ev = symmetric_eigenvalues(m);
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let want = ev[1..].iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        assert!((spectral_gap(&g).unwrap() - want).abs() < 1e-6);
    }

    #[test]
    fn probe_examples() {
        let fam = GSFFamily::new(vec![MarkedGraph::from_edges(vec![Mark::Full], &[])]);
        let single = Graph::from_edges(1, &[], 1).unwrap();
        let r = propagation_probe(&single, &fam, &[], 2, DEFAULT_SET_CAP);
        assert!(!r.covers);
        assert_eq!(r.repair, None);
        let edge = Graph::from_edges(2, &[(0, 1)], 1).unwrap();
        let r = propagation_probe(&edge, &fam, &[0], 2, DEFAULT_SET_CAP);
        assert!(r.covers);
        assert_eq!(r.repair, Some(0));
        let three = Graph::from_edges(3, &[(0, 1)], 1).unwrap();
        let r = propagation_probe(&three, &fam, &[2], 2, DEFAULT_SET_CAP);
        assert!(r.covers);
        // the isolated vertex cannot gain an edge without breaking the bound
        assert_eq!(r.repair, None);
        let free = |h: &Graph| is_family_free(h, &fam);
        let wide = Graph::from_edges(2, &[], 1).unwrap();
        let r = propagation_probe(&wide, &fam, &[0], 2, DEFAULT_SET_CAP);
        let Distance::Close(w) = epsilon_distance_graph(&wide, free, 1.0, DEFAULT_SET_CAP) else { panic!() };
        assert_eq!(r.repair, Some(w.len()));
        // the repair edge reaches vertex 1, outside N[B]
        assert_eq!(r.repair_near_b, Some(false));
        let r = propagation_probe(&wide, &fam, &[0, 1], 2, DEFAULT_SET_CAP);
        assert_eq!(r.repair_near_b, Some(true));
    }
}
