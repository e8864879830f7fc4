//! Sentences in Hanf normal form: evaluation, radius lifting and
//! translation to and from neighbourhood profiles.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::Rng;

use crate::enumerate;
use crate::error::{Error, Result};
use crate::neighborhoods::{Interval, NeighbourhoodProfile, TypeCatalog, Typer};
use crate::structures::Structure;

/// `∃^{≥m} x φ_τ(x)`, or its negation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HanfAtom {
    pub threshold: u64,
    pub radius: usize,
    pub key: String,
    pub negated: bool,
}

impl HanfAtom {
    pub fn at_least(threshold: u64, radius: usize, key: impl Into<String>) -> Self {
        HanfAtom { threshold, radius, key: key.into(), negated: false }
    }

    pub fn fewer_than(threshold: u64, radius: usize, key: impl Into<String>) -> Self {
        HanfAtom { threshold, radius, key: key.into(), negated: true }
    }

    fn holds(&self, count: u64) -> bool {
        (count >= self.threshold) != self.negated
    }
}

impl fmt::Display for HanfAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = if self.negated { "not" } else { "" };
        write!(f, "{neg}>={} {} {}", self.threshold, self.radius, self.key)
    }
}

/// A disjunction of conjunctions of atoms. No disjuncts is false; one empty
/// disjunct is true.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct HanfDNF {
    pub disjuncts: Vec<Vec<HanfAtom>>,
}

impl HanfDNF {
    pub fn truth() -> Self {
        HanfDNF { disjuncts: vec![Vec::new()] }
    }

    pub fn falsity() -> Self {
        HanfDNF { disjuncts: Vec::new() }
    }

    pub fn atom(a: HanfAtom) -> Self {
        HanfDNF { disjuncts: vec![vec![a]] }
    }

    pub fn radii(&self) -> BTreeSet<usize> {
        self.disjuncts.iter().flatten().map(|a| a.radius).collect()
    }

    /// Conjunction, distributed back into disjunctive form.
    pub fn and(&self, other: &HanfDNF) -> HanfDNF {
        let mut out = Vec::new();
        for a in &self.disjuncts {
            for b in &other.disjuncts {
                let mut c = a.clone();
                c.extend(b.iter().cloned());
                c.sort();
                c.dedup();
                out.push(c);
            }
        }
        HanfDNF { disjuncts: out }
    }
}

/// Evaluates a sentence; `catalogs` supply the key encoding per radius.
pub fn evaluate_hanf(phi: &HanfDNF, a: &Structure, catalogs: &[&TypeCatalog]) -> Result<bool> {
    let mut counts: HashMap<usize, HashMap<String, u64>> = HashMap::new();
    for r in phi.radii() {
        let cat = catalogs.iter().find(|c| c.radius == r).ok_or(Error::MissingRadius(r))?;
        let typer = cat.typer(a)?;
        let mut m = HashMap::new();
        for k in typer.all_keys() {
            *m.entry(k).or_insert(0) += 1;
        }
        counts.insert(r, m);
    }
    Ok(phi.disjuncts.iter().any(|conj| {
        conj.iter().all(|at| at.holds(counts[&at.radius].get(&at.key).copied().unwrap_or(0)))
    }))
}

/// Ordered compositions of `m` into `k` nonnegative parts.
pub fn compositions(m: u64, k: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(left: u64, k: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() + 1 == k {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in (0..=left).rev() {
            cur.push(x);
            rec(left - x, k, cur, out);
            cur.pop();
        }
    }
    if k == 0 {
        if m == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(m, k, &mut cur, &mut out);
    out
}

/// The types of an exhaustive catalog whose centers restrict to `key` at radius `r_small`.
pub fn restricting_types(key: &str, r_small: usize, catalog: &TypeCatalog) -> Result<Vec<String>> {
    if !catalog.exhaustive {
        return Err(Error::NonExhaustive);
    }
    let mut out = Vec::new();
    for (k, ball) in catalog.entries() {
        let mut typer = Typer::structure(&ball.structure, r_small, catalog.graph)?;
        if typer.key(ball.center) == key {
            out.push(k.clone());
        }
    }
    Ok(out)
}

/// Rewrites an atom of radius `r' ≤ r` as an equivalent sentence over the
/// `r`-types of `catalog`.
pub fn lift_radius(atom: &HanfAtom, r: usize, catalog: &TypeCatalog) -> Result<HanfDNF> {
    if atom.radius == r {
        return Ok(HanfDNF::atom(atom.clone()));
    }
    if atom.radius > r || catalog.radius != r {
        return Err(Error::MixedRadii);
    }
    let taus = restricting_types(&atom.key, atom.radius, catalog)?;
    let k = taus.len();
    let mut disjuncts = Vec::new();
    if !atom.negated {
        // at least m elements spread over the finer types
        for c in compositions(atom.threshold, k) {
            let conj = c
                .iter()
                .zip(&taus)
                .filter(|(&mi, _)| mi > 0)
                .map(|(&mi, t)| HanfAtom::at_least(mi, r, t.clone()))
                .collect();
            disjuncts.push(conj);
        }
    } else {
        // at most m-1 elements: counts bounded by some composition of m-1
        if k == 0 {
            return Ok(HanfDNF::truth());
        }
        for c in compositions(atom.threshold - 1, k) {
            let conj = c.iter().zip(&taus).map(|(&ci, t)| HanfAtom::fewer_than(ci + 1, r, t.clone())).collect();
            disjuncts.push(conj);
        }
    }
    Ok(HanfDNF { disjuncts })
}

/// Lifts every atom of a sentence to radius `r`.
pub fn lift_sentence(phi: &HanfDNF, r: usize, catalog: &TypeCatalog) -> Result<HanfDNF> {
    let mut out = HanfDNF::falsity();
    for conj in &phi.disjuncts {
        let mut acc = HanfDNF::truth();
        for atom in conj {
            acc = acc.and(&lift_radius(atom, r, catalog)?);
        }
        out.disjuncts.extend(acc.disjuncts);
    }
    Ok(out)
}

/// Outcome of the bounded model search for a compiled disjunct.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Satisfiability {
    /// A model within the search bound was found.
    Sat,
    /// No model within the bound; the disjunct is kept.
    Unknown,
}

#[derive(Clone, Debug)]
pub struct CompiledDisjunct {
    pub profile: NeighbourhoodProfile,
    pub status: Satisfiability,
}

/// Compiles a single-radius sentence into one profile per surviving disjunct.
///
/// A disjunct is dropped only when it is contradictory: some type needs at
/// least `k` and fewer than `k` elements, or a positive atom names a type
/// missing from the exhaustive catalog. Survivors are labelled by a model
/// search over structures with at most `search_bound` elements.
pub fn compile_hanf_to_profiles(
    phi: &HanfDNF,
    catalog: &TypeCatalog,
    search_bound: usize,
) -> Result<Vec<CompiledDisjunct>> {
    let radii = phi.radii();
    if radii.len() > 1 {
        return Err(Error::MixedRadii);
    }
    if let Some(&r) = radii.iter().next() {
        if r != catalog.radius {
            return Err(Error::MissingRadius(r));
        }
    }
    if !catalog.exhaustive {
        return Err(Error::NonExhaustive);
    }
    let mut out = Vec::new();
    let mut models: Option<Vec<Structure>> = None;
    'disjuncts: for conj in &phi.disjuncts {
        let mut lo: BTreeMap<&str, u64> = BTreeMap::new();
        let mut hi: BTreeMap<&str, u64> = BTreeMap::new();
        for a in conj {
            if a.negated {
                let e = hi.entry(a.key.as_str()).or_insert(u64::MAX);
                *e = (*e).min(a.threshold - 1);
            } else {
                if !catalog.contains(&a.key) {
                    continue 'disjuncts;
                }
                let e = lo.entry(a.key.as_str()).or_insert(0);
                *e = (*e).max(a.threshold);
            }
        }
        let mut rho = NeighbourhoodProfile::uniform(catalog, Interval::ANY);
        for k in catalog.keys() {
            let l = lo.get(k).copied().unwrap_or(0);
            let h = hi.get(k).copied();
            if h.is_some_and(|h| l > h) {
                continue 'disjuncts;
            }
            rho.bounds.insert(k.to_string(), Interval::new(l, h));
        }
        let pool = models.get_or_insert_with(|| small_models(catalog, search_bound));
        let sat = pool.iter().any(|m| crate::neighborhoods::obeys_profile(m, &rho));
        out.push(CompiledDisjunct {
            profile: rho,
            status: if sat { Satisfiability::Sat } else { Satisfiability::Unknown },
        });
    }
    Ok(out)
}

fn small_models(catalog: &TypeCatalog, bound: usize) -> Vec<Structure> {
    if catalog.graph {
        enumerate::graphs_up_to(bound, catalog.degree).iter().map(|g| g.to_structure()).collect()
    } else {
        (0..=bound.min(3)).flat_map(|n| enumerate::labelled_structures(&catalog.signature, n, catalog.degree)).collect()
    }
}

/// The sentence `φ_ρ` with exactly the models of `ρ`. Types of `catalog`
/// absent from the profile get the implicit `[0,0]` bound.
pub fn profile_to_hanf(rho: &NeighbourhoodProfile, catalog: &TypeCatalog) -> HanfDNF {
    let keys: BTreeSet<&str> = catalog.keys().chain(rho.bounds.keys().map(String::as_str)).collect();
    let mut conj = Vec::new();
    for k in keys {
        let iv = rho.bound(k);
        if iv.lo > 0 {
            conj.push(HanfAtom::at_least(iv.lo, rho.radius, k));
        }
        if let Some(h) = iv.hi {
            conj.push(HanfAtom::fewer_than(h + 1, rho.radius, k));
        }
    }
    HanfDNF { disjuncts: vec![conj] }
}

/// A random sentence over the types of `catalog`.
pub fn random_hanf<R: Rng>(
    catalog: &TypeCatalog,
    disjuncts: usize,
    atoms: usize,
    max_threshold: u64,
    rng: &mut R,
) -> HanfDNF {
    let keys: Vec<&str> = catalog.keys().collect();
    let mut out = Vec::new();
    for _ in 0..disjuncts {
        let n = rng.random_range(0..=atoms);
        let conj = (0..n)
            .map(|_| HanfAtom {
                threshold: rng.random_range(1..=max_threshold),
                radius: catalog.radius,
                key: keys[rng.random_range(0..keys.len())].to_string(),
                negated: rng.random_bool(0.5),
            })
            .collect();
        out.push(conj);
    }
    HanfDNF { disjuncts: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::graphs_up_to;
    use crate::neighborhoods::{enumerate_types, obeys_profile, CatalogMode};
    use crate::structures::{Graph, Signature};
    use rand::SeedableRng;

    fn cat(d: usize, r: usize) -> TypeCatalog {
        enumerate_types(&Signature::graph(), d, r, true, CatalogMode::Exhaustive).unwrap()
    }

    fn key_of(g: &Graph, v: usize, r: usize) -> String {
        Typer::graph(g, r).key(v)
    }

    #[test]
    fn constant_sentences() {
        let c = cat(2, 1);
        let g = Graph::from_edges(3, &[(0, 1)], 2).unwrap().to_structure();
        assert!(evaluate_hanf(&HanfDNF::truth(), &g, &[&c]).unwrap());
        assert!(!evaluate_hanf(&HanfDNF::falsity(), &g, &[&c]).unwrap());
    }

    #[test]
    fn threshold_atoms() {
        let c = cat(2, 1);
        let one = Graph::from_edges(1, &[], 2).unwrap();
        let iso = key_of(&one, 0, 1);
        assert!(evaluate_hanf(&HanfDNF::atom(HanfAtom::at_least(1, 1, &iso)), &one.to_structure(), &[&c]).unwrap());
        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], 2).unwrap();
        let k = key_of(&c4, 0, 1);
        let s = c4.to_structure();
        assert!(!evaluate_hanf(&HanfDNF::atom(HanfAtom::at_least(5, 1, &k)), &s, &[&c]).unwrap());
        assert!(evaluate_hanf(&HanfDNF::atom(HanfAtom::at_least(4, 1, &k)), &s, &[&c]).unwrap());
        let two = HanfDNF::atom(HanfAtom::at_least(2, 2, &k));
        assert_eq!(evaluate_hanf(&two, &s, &[&c]), Err(Error::MissingRadius(2)));
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(compositions(3, 3).len(), 10);
        assert_eq!(compositions(0, 0).len(), 1);
        assert!(compositions(1, 0).is_empty());
    }

    #[test]
    fn lifting_preserves_models() {
        let c1 = cat(2, 1);
        let c2 = cat(2, 2);
        let graphs: Vec<Structure> = graphs_up_to(5, 2).iter().map(Graph::to_structure).collect();
        for key in c1.keys() {
            for m in 1..=3 {
                for neg in [false, true] {
                    let atom = HanfAtom { threshold: m, radius: 1, key: key.to_string(), negated: neg };
                    let lifted = lift_radius(&atom, 2, &c2).unwrap();
                    assert_eq!(lift_radius(&atom, 1, &c1).unwrap(), HanfDNF::atom(atom.clone()));
                    for g in &graphs {
                        let before = evaluate_hanf(&HanfDNF::atom(atom.clone()), g, &[&c1]).unwrap();
                        let after = evaluate_hanf(&lifted, g, &[&c2]).unwrap();
                        assert_eq!(before, after, "{atom}");
                    }
                }
            }
        }
    }

    #[test]
    fn compile_single_atom() {
        let c = cat(2, 1);
        let k = c.keys().next().unwrap().to_string();
        let out = compile_hanf_to_profiles(&HanfDNF::atom(HanfAtom::at_least(2, 1, &k)), &c, 4).unwrap();
        assert_eq!(out.len(), 1);
        let rho = &out[0].profile;
        assert_eq!(rho.bound(&k), Interval::new(2, None));
        assert!(c.keys().filter(|x| *x != k).all(|x| rho.bound(x) == Interval::ANY));
        let t = compile_hanf_to_profiles(&HanfDNF::truth(), &c, 4).unwrap();
        assert!(t[0].profile.bounds.values().all(|&iv| iv == Interval::ANY));
        let contradiction = HanfDNF {
            disjuncts: vec![vec![HanfAtom::at_least(2, 1, &k), HanfAtom::fewer_than(2, 1, &k)]],
        };
        assert!(compile_hanf_to_profiles(&contradiction, &c, 4).unwrap().is_empty());
    }

    #[test]
    fn compile_agrees_with_evaluation() {
        let c = cat(2, 1);
        let graphs: Vec<Structure> = graphs_up_to(6, 2).iter().map(Graph::to_structure).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let phi = random_hanf(&c, 3, 3, 3, &mut rng);
            let profiles = compile_hanf_to_profiles(&phi, &c, 4).unwrap();
            for g in &graphs {
                let direct = evaluate_hanf(&phi, g, &[&c]).unwrap();
                let via = profiles.iter().any(|p| obeys_profile(g, &p.profile));
                assert_eq!(direct, via);
            }
        }
    }

    #[test]
    fn profile_round_trip() {
        let c = cat(2, 1);
        let all = NeighbourhoodProfile::uniform(&c, Interval::ANY);
        assert_eq!(profile_to_hanf(&all, &c), HanfDNF::truth());
        let mut z = all.clone();
        let k = c.keys().next().unwrap().to_string();
        z.bounds.insert(k.clone(), Interval::ZERO);
        assert_eq!(profile_to_hanf(&z, &c).disjuncts[0], vec![HanfAtom::fewer_than(1, 1, &k)]);
    }

    #[test]
    fn mixed_radii_rejected() {
        let c = cat(2, 1);
        let phi = HanfDNF {
            disjuncts: vec![vec![HanfAtom::at_least(1, 1, "g1"), HanfAtom::at_least(1, 2, "g2")]],
        };
        assert_eq!(compile_hanf_to_profiles(&phi, &c, 3).unwrap_err(), Error::MixedRadii);
    }
}
