//! Rotation maps, the zig-zag tree-of-expanders structures and direct
//! checkers for each conjunct of the defining sentence.
//!
//! Index conventions: `[D]` is `0..D`; a pair `(i, j)` in `[D]^2` is the
//! number `i*D + j`; a vertex `(p, q)` of the base graph, with `p, q` in
//! `[D]^2`, is `p*D^2 + q`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::neighborhoods::{Interval, NeighbourhoodProfile, TypeCatalog};
use crate::structures::{Signature, Structure, Symbol};

/// A port-labelled regular graph: `rot(v, i) = (w, j)` means port `i` of `v`
/// leads to `w`, arriving at port `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationMap {
    vertices: usize,
    degree: usize,
    table: Vec<Option<(usize, usize)>>,
    /// Set for squared maps: ports are pairs over `[pair_base]`.
    pair_base: Option<usize>,
}

impl RotationMap {
    /// A map with no entries yet.
    pub fn blank(vertices: usize, degree: usize) -> Self {
        RotationMap { vertices, degree, table: vec![None; vertices * degree], pair_base: None }
    }

    /// Builds and validates a map from a full table indexed by `v*degree + i`.
    pub fn from_table(vertices: usize, degree: usize, table: Vec<(usize, usize)>) -> Result<Self> {
        if table.len() != vertices * degree {
            return Err(Error::RotationMap(format!("table has {} entries, expected {}", table.len(), vertices * degree)));
        }
        let map = RotationMap { vertices, degree, table: table.into_iter().map(Some).collect(), pair_base: None };
        map.validate().map_err(Error::RotationMap)?;
        Ok(map)
    }

    pub fn set(&mut self, v: usize, i: usize, w: usize, j: usize) -> Result<()> {
        if v >= self.vertices || i >= self.degree {
            return Err(Error::RotationMap(format!("entry ({v},{i}) outside the domain")));
        }
        self.table[v * self.degree + i] = Some((w, j));
        Ok(())
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn pair_base(&self) -> Option<usize> {
        self.pair_base
    }

    pub fn entry(&self, v: usize, i: usize) -> Option<(usize, usize)> {
        self.table.get(v * self.degree + i).copied().flatten()
    }

    /// Lookup on a validated map.
    pub fn rot(&self, v: usize, i: usize) -> (usize, usize) {
        self.entry(v, i).expect("validated rotation map")
    }

    /// Totality and involution, reporting the first violating pair.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for v in 0..self.vertices {
            for i in 0..self.degree {
                let Some((w, j)) = self.entry(v, i) else {
                    return Err(format!("no entry for ({v},{i})"));
                };
                if w >= self.vertices || j >= self.degree {
                    return Err(format!("({v},{i}) maps outside the domain to ({w},{j})"));
                }
                if self.entry(w, j) != Some((v, i)) {
                    return Err(format!("rot(rot({v},{i})) != ({v},{i})"));
                }
            }
        }
        Ok(())
    }

    pub fn format_port(&self, p: usize) -> String {
        match self.pair_base {
            Some(b) => format!("{}.{}", p / b + 1, p % b + 1),
            None => (p + 1).to_string(),
        }
    }

    /// Parses a 1-based port, or an `i.j` pair for squared maps.
    pub fn parse_port(&self, s: &str) -> Option<usize> {
        let one = |t: &str| t.parse::<usize>().ok().filter(|&x| x >= 1).map(|x| x - 1);
        match (s.split_once('.'), self.pair_base) {
            (Some((a, b)), Some(base)) => {
                let (a, b) = (one(a)?, one(b)?);
                (a < base && b < base).then_some(a * base + b)
            }
            (None, _) => one(s),
            _ => None,
        }
    }

    pub fn with_pair_base(mut self, base: Option<usize>) -> Self {
        self.pair_base = base;
        self
    }
}

pub fn validate_rotation_map(rot: &RotationMap) -> bool {
    rot.validate().is_ok()
}

/// The square: `rot2(v, (i,j)) = (w, (j', i'))` where `rot(v,i) = (u,i')`
/// and `rot(u,j) = (w,j')`.
pub fn square_rotation(rot: &RotationMap) -> Result<RotationMap> {
    rot.validate().map_err(Error::RotationMap)?;
    let d = rot.degree;
    let mut table = Vec::with_capacity(rot.vertices * d * d);
    for v in 0..rot.vertices {
        for i in 0..d {
            let (u, i2) = rot.rot(v, i);
            for j in 0..d {
                let (w, j2) = rot.rot(u, j);
                table.push((w, j2 * d + i2));
            }
        }
    }
    Ok(RotationMap::from_table(rot.vertices, d * d, table)?.with_pair_base(Some(d)))
}

/// Circulant map on `D^4` vertices: ports `2j` and `2j+1` step by `+(j+1)`
/// and `-(j+1)`; odd `D` adds a self-loop port.
pub fn toy_rotation_map(d: usize) -> Result<RotationMap> {
    if d < 2 {
        return Err(Error::RotationMap("base degree must be at least 2".into()));
    }
    let n = d.pow(4);
    let mut table = Vec::with_capacity(n * d);
    for v in 0..n {
        for p in 0..d {
            let j = p / 2;
            if d % 2 == 1 && p == d - 1 {
                table.push((v, p));
            } else if p % 2 == 0 {
                table.push(((v + j + 1) % n, p + 1));
            } else {
                table.push(((v + n - j - 1) % n, p - 1));
            }
        }
    }
    RotationMap::from_table(n, d, table)
}

/// Symbol layout for base degree `D`: `E_{i,j}` at `i*D^2 + j`, then `F_k`,
/// then `R`, then `L_k`.
#[derive(Clone, Debug)]
pub struct ZigZagSignature {
    pub base_degree: usize,
    pub signature: Signature,
}

impl ZigZagSignature {
    pub fn new(base_degree: usize) -> Self {
        let p = base_degree * base_degree;
        let k = p * p;
        let sep = if p > 10 { "_" } else { "" };
        let mut syms = Vec::with_capacity(3 * k + 1);
        for i in 0..p {
            for j in 0..p {
                syms.push(Symbol { name: format!("E{i}{sep}{j}"), arity: 2 });
            }
        }
        for x in 0..k {
            syms.push(Symbol { name: format!("F{x}"), arity: 2 });
        }
        syms.push(Symbol { name: "R".into(), arity: 2 });
        for x in 0..k {
            syms.push(Symbol { name: format!("L{x}"), arity: 2 });
        }
        ZigZagSignature { base_degree, signature: Signature::new(syms).expect("distinct names") }
    }

    /// Recovers `D` from a signature with `3D^4 + 1` symbols, if it matches.
    pub fn detect(sig: &Signature) -> Option<Self> {
        let n = sig.len();
        let d = (2..8).find(|d: &usize| 3 * d.pow(4) + 1 == n)?;
        let zz = ZigZagSignature::new(d);
        (zz.signature == *sig).then_some(zz)
    }

    pub fn ports(&self) -> usize {
        self.base_degree * self.base_degree
    }

    pub fn branching(&self) -> usize {
        self.ports() * self.ports()
    }

    pub fn e(&self, i: usize, j: usize) -> usize {
        i * self.ports() + j
    }

    pub fn f(&self, k: usize) -> usize {
        self.branching() + k
    }

    pub fn r(&self) -> usize {
        2 * self.branching()
    }

    pub fn l(&self, k: usize) -> usize {
        2 * self.branching() + 1 + k
    }

    /// Degree bound of canonical models: `2D^4 + 1`.
    pub fn degree_bound(&self) -> usize {
        2 * self.branching() + 1
    }
}

/// Element ids: `r` for the root, then `.k` per child step.
pub fn build_canonical_model(rot_h: &RotationMap, levels: usize, budget: usize) -> Result<Structure> {
    let d = rot_h.degree();
    let zz = ZigZagSignature::new(d);
    let (p, b) = (zz.ports(), zz.branching());
    if rot_h.vertices() != b {
        return Err(Error::RotationMap(format!("base map has {} vertices, expected {}", rot_h.vertices(), b)));
    }
    rot_h.validate().map_err(Error::RotationMap)?;
    if levels == 0 {
        return Err(Error::Budget("at least one level is required".into()));
    }
    let mut total = 1usize;
    let mut width = 1usize;
    for _ in 0..levels {
        width = width.checked_mul(b).ok_or_else(|| Error::Budget("level too wide".into()))?;
        total = total.checked_add(width).ok_or_else(|| Error::Budget("too many elements".into()))?;
    }
    if total > budget {
        return Err(Error::Budget(format!("{total} elements exceed the budget {budget}")));
    }

    let mut ids = vec!["r".to_string()];
    let mut tuples: Vec<(usize, Vec<usize>)> = Vec::new();
    tuples.push((zz.r(), vec![0, 0]));
    for i in 0..p {
        for j in 0..p {
            tuples.push((zz.e(i, j), vec![0, 0]));
        }
    }
    // level m: element indices start at `offset`, vertex x of the level is offset + x
    let mut offset = 0usize;
    let mut count = 1usize;
    let squared = square_rotation(rot_h)?;
    let mut level_rot: Vec<(usize, usize)> = Vec::new();
    for m in 1..=levels {
        let next_offset = offset + count;
        for x in 0..count {
            for k in 0..b {
                let child = next_offset + x * b + k;
                ids.push(format!("{}.{k}", ids[offset + x]));
                tuples.push((zz.f(k), vec![offset + x, child]));
            }
        }
        let next_count = count * b;
        let next_rot: Vec<(usize, usize)> = if m == 1 {
            (0..b).flat_map(|k| (0..p).map(move |i| (k, i))).map(|(k, i)| squared.rot(k, i)).collect()
        } else {
            let mut out = Vec::with_capacity(next_count * p);
            for x in 0..count {
                for k in 0..b {
                    for i in 0..d {
                        let (u, i2) = rot_h.rot(k, i);
                        let (k1, k2) = (u / p, u % p);
                        let (y, l1) = level_rot[x * p + k1];
                        let (z, l2) = level_rot[y * p + k2];
                        for j in 0..d {
                            let (l, j2) = rot_h.rot(l2 * p + l1, j);
                            out.push((z * b + l, j2 * d + i2));
                        }
                    }
                }
            }
            out
        };
        for v in 0..next_count {
            for port in 0..p {
                let (w, q) = next_rot[v * p + port];
                tuples.push((zz.e(port, q), vec![next_offset + v, next_offset + w]));
            }
        }
        level_rot = next_rot;
        offset = next_offset;
        count = next_count;
    }
    for leaf in offset..offset + count {
        for k in 0..b {
            tuples.push((zz.l(k), vec![leaf, leaf]));
        }
    }
    Structure::new(zz.signature.clone(), ids, tuples, zz.degree_bound())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Component {
    Tree,
    TreePrime,
    /// Tree conjunct without the root count.
    TreeTilde,
    RotationMap,
    Base,
    Recursion,
    Zigzag,
    ZigzagPrime,
    ZigzagTilde,
}

impl Component {
    pub const ALL: [Component; 9] = [
        Component::Tree,
        Component::TreePrime,
        Component::TreeTilde,
        Component::RotationMap,
        Component::Base,
        Component::Recursion,
        Component::Zigzag,
        Component::ZigzagPrime,
        Component::ZigzagTilde,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Component::Tree => "tree",
            Component::TreePrime => "tree'",
            Component::TreeTilde => "tree~",
            Component::RotationMap => "rotationMap",
            Component::Base => "base",
            Component::Recursion => "recursion",
            Component::Zigzag => "zigzag",
            Component::ZigzagPrime => "zigzag'",
            Component::ZigzagTilde => "zigzag~",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.replace("-prime", "'").replace("-tilde", "~").replace('-', "");
        Component::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(&s))
            .ok_or_else(|| Error::Structure(format!("unknown component `{s}`")))
    }
}

/// A failed clause and the elements witnessing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub component: Component,
    pub clause: String,
    pub elements: Vec<usize>,
}

impl Violation {
    pub fn describe(&self, a: &Structure) -> String {
        let ids: Vec<&str> = self.elements.iter().map(|&e| a.id(e)).collect();
        format!("{}: {} at [{}]", self.component, self.clause, ids.join(", "))
    }
}

struct Adjacency {
    e_out: Vec<Vec<(usize, usize, usize)>>,
    e_in: Vec<Vec<(usize, usize, usize)>>,
    f_out: Vec<Vec<(usize, usize)>>,
    f_in: Vec<Vec<(usize, usize)>>,
    r_out: Vec<Vec<usize>>,
    r_in: Vec<Vec<usize>>,
    l_out: Vec<Vec<(usize, usize)>>,
    l_in: Vec<Vec<(usize, usize)>>,
}

/// Checkers for one base rotation map.
#[derive(Clone, Debug)]
pub struct ZigZag {
    pub sig: ZigZagSignature,
    pub base: RotationMap,
    squared: RotationMap,
}

impl ZigZag {
    pub fn new(base: RotationMap) -> Result<Self> {
        let sig = ZigZagSignature::new(base.degree());
        if base.vertices() != sig.branching() {
            return Err(Error::RotationMap(format!(
                "base map needs {} vertices, has {}",
                sig.branching(),
                base.vertices()
            )));
        }
        let squared = square_rotation(&base)?;
        Ok(ZigZag { sig, base, squared })
    }

    pub fn toy(d: usize) -> Result<Self> {
        Self::new(toy_rotation_map(d)?)
    }

    pub fn canonical_model(&self, levels: usize, budget: usize) -> Result<Structure> {
        build_canonical_model(&self.base, levels, budget)
    }

    fn adjacency(&self, a: &Structure) -> Adjacency {
        let n = a.len();
        let (p, b) = (self.sig.ports(), self.sig.branching());
        let mut adj = Adjacency {
            e_out: vec![Vec::new(); n],
            e_in: vec![Vec::new(); n],
            f_out: vec![Vec::new(); n],
            f_in: vec![Vec::new(); n],
            r_out: vec![Vec::new(); n],
            r_in: vec![Vec::new(); n],
            l_out: vec![Vec::new(); n],
            l_in: vec![Vec::new(); n],
        };
        for (sym, t) in a.tuples() {
            let (x, y) = (t[0], t[1]);
            if sym < b {
                adj.e_out[x].push((sym / p, sym % p, y));
                adj.e_in[y].push((sym / p, sym % p, x));
            } else if sym < 2 * b {
                adj.f_out[x].push((sym - b, y));
                adj.f_in[y].push((sym - b, x));
            } else if sym == 2 * b {
                adj.r_out[x].push(y);
                adj.r_in[y].push(x);
            } else {
                adj.l_out[x].push((sym - 2 * b - 1, y));
                adj.l_in[y].push((sym - 2 * b - 1, x));
            }
        }
        adj
    }

    fn require_signature(&self, a: &Structure) -> Result<()> {
        if a.signature() != &self.sig.signature {
            return Err(Error::SignatureMismatch("structure is not over the zig-zag signature".into()));
        }
        Ok(())
    }

    /// `Ok(None)` when the component holds, otherwise the least witness.
    pub fn check(&self, a: &Structure, which: Component) -> Result<Option<Violation>> {
        self.require_signature(a)?;
        let adj = self.adjacency(a);
        let parts: &[Component] = match which {
            Component::Zigzag => &[Component::Tree, Component::RotationMap, Component::Base, Component::Recursion],
            Component::ZigzagPrime => {
                &[Component::TreePrime, Component::RotationMap, Component::Base, Component::Recursion]
            }
            Component::ZigzagTilde => {
                &[Component::TreeTilde, Component::RotationMap, Component::Base, Component::Recursion]
            }
            _ => std::slice::from_ref(&which),
        };
        for &part in parts {
            let v = match part {
                Component::Tree | Component::TreePrime | Component::TreeTilde => self.check_tree(a, &adj, part),
                Component::RotationMap => self.check_rotation(a, &adj),
                Component::Base => self.check_base(a, &adj),
                Component::Recursion => self.check_recursion(a, &adj),
                _ => unreachable!("composite components are expanded"),
            };
            if let Some(mut v) = v {
                v.component = part;
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    pub fn holds(&self, a: &Structure, which: Component) -> Result<bool> {
        Ok(self.check(a, which)?.is_none())
    }

    fn check_tree(&self, a: &Structure, adj: &Adjacency, which: Component) -> Option<Violation> {
        let b = self.sig.branching();
        let fail = |clause: &str, elements: Vec<usize>| {
            Some(Violation { component: which, clause: clause.to_string(), elements })
        };
        let roots: Vec<usize> = (0..a.len()).filter(|&x| adj.f_in[x].is_empty()).collect();
        match which {
            Component::Tree if roots.len() != 1 => return fail("exactly one root", roots.into_iter().take(2).collect()),
            Component::TreePrime if roots.len() > 1 => return fail("at most one root", roots[..2].to_vec()),
            _ => {}
        }
        for x in 0..a.len() {
            let is_root = adj.f_in[x].is_empty();
            let root_ok = is_root && adj.r_out[x].contains(&x);
            let mut parents: Vec<usize> = adj.f_in[x].iter().map(|&(_, y)| y).collect();
            parents.sort_unstable();
            parents.dedup();
            let child_ok = parents.len() == 1 && adj.r_out[x].is_empty() && adj.r_in[x].is_empty();
            if !root_ok && !child_ok {
                return fail("root with R-loop or unique parent without R", vec![x]);
            }
            let leaf_ok = adj.f_out[x].is_empty()
                && (0..b).all(|k| adj.l_out[x].contains(&(k, x)))
                && adj.l_out[x].iter().chain(&adj.l_in[x]).all(|&(_, y)| y == x);
            let inner_ok = adj.l_out[x].is_empty()
                && adj.l_in[x].is_empty()
                && (0..b).all(|k| {
                    let targets: Vec<usize> = adj.f_out[x].iter().filter(|&&(k2, _)| k2 == k).map(|&(_, y)| y).collect();
                    targets.len() == 1
                        && targets[0] != x
                        && adj.f_out[x].iter().filter(|&&(_, y)| y == targets[0]).count() == 1
                });
            if !leaf_ok && !inner_ok {
                return fail("leaf with all L-loops or exactly one child per F-label", vec![x]);
            }
        }
        None
    }

    fn check_rotation(&self, a: &Structure, adj: &Adjacency) -> Option<Violation> {
        let p = self.sig.ports();
        let fail = |clause: &str, elements: Vec<usize>| {
            Some(Violation { component: Component::RotationMap, clause: clause.to_string(), elements })
        };
        for x in 0..a.len() {
            for &(i, j, y) in &adj.e_out[x] {
                if !adj.e_out[y].contains(&(j, i, x)) {
                    return fail("E_{i,j}(x,y) implies E_{j,i}(y,x)", vec![x, y]);
                }
            }
            // root elements carry every E-loop and are exempt from functionality
            if adj.f_in[x].is_empty() {
                continue;
            }
            for i in 0..p {
                let out: Vec<(usize, usize)> =
                    adj.e_out[x].iter().filter(|&&(i2, _, _)| i2 == i).map(|&(_, j, y)| (j, y)).collect();
                if out.len() != 1 {
                    return fail("each port has exactly one E-successor", vec![x]);
                }
            }
        }
        None
    }

    fn check_base(&self, a: &Structure, adj: &Adjacency) -> Option<Violation> {
        let (p, b) = (self.sig.ports(), self.sig.branching());
        let fail = |clause: &str, elements: Vec<usize>| {
            Some(Violation { component: Component::Base, clause: clause.to_string(), elements })
        };
        for x in (0..a.len()).filter(|&x| adj.f_in[x].is_empty()) {
            for i in 0..p {
                for j in 0..p {
                    if !adj.e_out[x].contains(&(i, j, x)) {
                        return fail("root has every E-loop", vec![x]);
                    }
                }
            }
            if let Some(&(_, _, y)) = adj.e_out[x].iter().chain(&adj.e_in[x]).find(|&&(_, _, y)| y != x) {
                return fail("root has no E-edge to another element", vec![x, y]);
            }
            for k in 0..b {
                for i in 0..p {
                    let (k2, i2) = self.squared.rot(k, i);
                    let ok = adj.f_out[x].iter().filter(|&&(kk, _)| kk == k).any(|&(_, y)| {
                        adj.f_out[x]
                            .iter()
                            .filter(|&&(kk, _)| kk == k2)
                            .any(|&(_, y2)| adj.e_out[y].contains(&(i, i2, y2)))
                    });
                    if !ok {
                        return fail("children of the root realise the squared base map", vec![x]);
                    }
                }
            }
        }
        None
    }

    fn check_recursion(&self, a: &Structure, adj: &Adjacency) -> Option<Violation> {
        let d = self.base.degree();
        let p = self.sig.ports();
        let is_root = |x: usize| adj.f_in[x].is_empty();
        for x in 0..a.len() {
            if is_root(x) {
                continue;
            }
            for &(k1, l1, y) in &adj.e_out[x] {
                for &(k2, l2, z) in &adj.e_out[y] {
                    if is_root(z) || (adj.f_out[x].is_empty() && adj.f_out[z].is_empty()) {
                        continue;
                    }
                    for i2 in 0..d {
                        let (k, i) = self.base.rot(k1 * p + k2, i2);
                        for j in 0..d {
                            let (l, j2) = self.base.rot(l2 * p + l1, j);
                            let (src, dst) = (i * d + j, j2 * d + i2);
                            let ok = adj.f_out[x].iter().filter(|&&(kk, _)| kk == k).any(|&(_, x2)| {
                                adj.f_out[z]
                                    .iter()
                                    .filter(|&&(ll, _)| ll == l)
                                    .any(|&(_, z2)| adj.e_out[x2].contains(&(src, dst, z2)))
                            });
                            if !ok {
                                return Some(Violation {
                                    component: Component::Recursion,
                                    clause: "children of E^2-related elements realise the zig-zag step".into(),
                                    elements: vec![x, z],
                                });
                            }
                        }
                    }
                }
            }
        }
        None
    }
}

/// Whether the undirected F-graph is connected (true when empty).
pub fn check_connected_f(a: &Structure, zz: &ZigZagSignature) -> bool {
    let n = a.len();
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for k in 0..zz.branching() {
        for t in a.relation(zz.f(k)) {
            adj[t[0]].push(t[1]);
            adj[t[1]].push(t[0]);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

/// One profile per observed root type: `[0,1]` at the root type, `[0,inf]`
/// on every other type seen in models with that root type, `[0,0]` elsewhere.
pub fn root_type_profiles(models: &[Structure], catalog: &TypeCatalog) -> Result<Vec<NeighbourhoodProfile>> {
    let mut by_root: std::collections::BTreeMap<String, std::collections::BTreeSet<String>> = Default::default();
    for m in models {
        let keys = catalog.typer(m)?.all_keys();
        let f_syms: Vec<usize> = match ZigZagSignature::detect(m.signature()) {
            Some(zz) => (0..zz.branching()).map(|k| zz.f(k)).collect(),
            None => return Err(Error::SignatureMismatch("not a zig-zag structure".into())),
        };
        let mut has_parent = vec![false; m.len()];
        for &s in &f_syms {
            for t in m.relation(s) {
                has_parent[t[1]] = true;
            }
        }
        for (x, key) in keys.iter().enumerate() {
            if !has_parent[x] {
                by_root.entry(key.clone()).or_default().extend(keys.iter().cloned());
            }
        }
    }
    Ok(by_root
        .into_iter()
        .map(|(root, seen)| {
            let mut rho = NeighbourhoodProfile::new(catalog.radius, catalog.degree, catalog.signature.clone(), catalog.graph);
            for key in seen {
                rho.bounds.insert(key, Interval::ANY);
            }
            rho.bounds.insert(root, Interval { lo: 0, hi: Some(1) });
            rho
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle4() -> RotationMap {
        let table = (0..4).flat_map(|v| [((v + 1) % 4, 1), ((v + 3) % 4, 0)]).collect();
        RotationMap::from_table(4, 2, table).unwrap()
    }

    #[test]
    fn rotation_validation() {
        let loops = RotationMap::from_table(3, 2, (0..3).flat_map(|v| [(v, 0), (v, 1)]).collect()).unwrap();
        assert!(validate_rotation_map(&loops));
        let c = cycle4();
        for v in 0..4 {
            for i in 0..2 {
                let (w, j) = c.rot(v, i);
                assert_eq!(c.rot(w, j), (v, i));
            }
        }
        let mut broken = RotationMap::blank(2, 1);
        broken.set(0, 0, 1, 0).unwrap();
        broken.set(1, 0, 1, 0).unwrap();
        assert!(!validate_rotation_map(&broken));
        assert!(!validate_rotation_map(&RotationMap::blank(1, 1)));
    }

    #[test]
    fn squaring() {
        let loops = RotationMap::from_table(2, 2, (0..2).flat_map(|v| [(v, 0), (v, 1)]).collect()).unwrap();
        let sq = square_rotation(&loops).unwrap();
        for v in 0..2 {
            for p in 0..4 {
                let (w, q) = sq.rot(v, p);
                assert_eq!(w, v);
                assert_eq!(q, (p % 2) * 2 + p / 2);
            }
        }
        let c = square_rotation(&cycle4()).unwrap();
        assert!(validate_rotation_map(&c));
        // walks of length two from v end at v or at v+2
        for v in 0..4 {
            let mut ends: Vec<usize> = (0..4).map(|p| c.rot(v, p).0).collect();
            ends.sort_unstable();
            let mut want = vec![v, v, (v + 2) % 4, (v + 2) % 4];
            want.sort_unstable();
            assert_eq!(ends, want);
        }
        assert_eq!(c.format_port(3), "2.2");
        assert_eq!(c.parse_port("2.1"), Some(2));
    }

    #[test]
    fn toy_map_shape() {
        for d in 2..=3 {
            let t = toy_rotation_map(d).unwrap();
            assert_eq!(t.vertices(), d.pow(4));
            assert!(validate_rotation_map(&t));
        }
    }

    #[test]
    fn model_sizes_and_checks() {
        let zz = ZigZag::toy(2).unwrap();
        let m1 = zz.canonical_model(1, 10_000).unwrap();
        assert_eq!(m1.len(), 17);
        let m2 = zz.canonical_model(2, 10_000).unwrap();
        assert_eq!(m2.len(), 273);
        for m in [&m1, &m2] {
            for c in Component::ALL {
                assert_eq!(zz.check(m, c).unwrap(), None, "{c}");
            }
            assert!(check_connected_f(m, &zz.sig));
            assert!(m.max_degree() <= zz.sig.degree_bound());
        }
        let root = m2.index_of("r").unwrap();
        let f_syms: Vec<usize> = (0..16).map(|k| zz.sig.f(k)).collect();
        assert!(m2.incident(root).all(|(s, t)| !f_syms.contains(&s) || t[0] == root));
        assert!(zz.canonical_model(3, 1000).is_err());
    }

    #[test]
    fn empty_and_unions() {
        let zz = ZigZag::toy(2).unwrap();
        let empty = Structure::empty(zz.sig.signature.clone(), zz.sig.degree_bound());
        assert!(zz.holds(&empty, Component::ZigzagPrime).unwrap());
        assert!(!zz.holds(&empty, Component::Zigzag).unwrap());
        assert!(check_connected_f(&empty, &zz.sig));
        let m = zz.canonical_model(1, 100).unwrap();
        let two = m.disjoint_union(&m).unwrap();
        let v = zz.check(&two, Component::TreePrime).unwrap().unwrap();
        assert_eq!(v.elements.len(), 2);
        assert!(zz.holds(&two, Component::ZigzagTilde).unwrap());
        assert!(!check_connected_f(&two, &zz.sig));
        let single = Structure::new(zz.sig.signature.clone(), vec!["a".into()], vec![], 33).unwrap();
        assert!(check_connected_f(&single, &zz.sig));
    }

    #[test]
    fn every_deletion_is_caught() {
        let zz = ZigZag::toy(2).unwrap();
        for levels in 1..=2 {
            let m = zz.canonical_model(levels, 10_000).unwrap();
            let tuples: Vec<(usize, Vec<usize>)> = m.tuples().map(|(s, t)| (s, t.to_vec())).collect();
            for (s, t) in tuples {
                let cut = m.without_tuple(s, &t);
                assert!(!zz.holds(&cut, Component::Zigzag).unwrap(), "{} {:?}", m.signature().name(s), t);
            }
        }
    }

    #[test]
    fn models_obey_root_type_profiles() {
        use crate::neighborhoods::{enumerate_types, obeys_profile, CatalogMode};
        let zz = ZigZag::toy(2).unwrap();
        let models = vec![zz.canonical_model(1, 100).unwrap(), zz.canonical_model(2, 1000).unwrap()];
        let cat = enumerate_types(&zz.sig.signature, zz.sig.degree_bound(), 2, false, CatalogMode::Observed(&models)).unwrap();
        let profiles = root_type_profiles(&models, &cat).unwrap();
        assert_eq!(profiles.len(), 2);
        for m in &models {
            assert!(profiles.iter().any(|rho| obeys_profile(m, rho)));
        }
        let empty = Structure::empty(zz.sig.signature.clone(), zz.sig.degree_bound());
        assert!(profiles.iter().all(|rho| obeys_profile(&empty, rho)));
        let m = &models[0];
        let tuples: Vec<(usize, Vec<usize>)> = m.tuples().map(|(s, t)| (s, t.to_vec())).collect();
        for (s, t) in tuples {
            let cut = m.without_tuple(s, &t);
            assert!(!zz.holds(&cut, Component::ZigzagPrime).unwrap());
            assert!(profiles.iter().all(|rho| !obeys_profile(&cut, rho)));
        }
    }

    #[test]
    fn wrong_signature_rejected() {
        let zz = ZigZag::toy(2).unwrap();
        let s = Structure::empty(Signature::graph(), 2);
        assert!(zz.check(&s, Component::Tree).is_err());
        assert_eq!("zigzag-prime".parse::<Component>().unwrap(), Component::ZigzagPrime);
        assert_eq!("rotation-map".parse::<Component>().unwrap(), Component::RotationMap);
        assert_eq!("rotationMap".parse::<Component>().unwrap(), Component::RotationMap);
    }
}
