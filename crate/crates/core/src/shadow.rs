//! Shadowings, daisies and bunches, private covers, privatization, and the
//! strong-triple audit.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::constants::{self, ids};
use crate::error::{Error, Result};
use crate::graph::{Digraph, Graph};
use crate::set::VertexSet;
use crate::solvers::{self, Limits};
use crate::structures;
use crate::template::{
    self, AuditReport, Cleanliness, LemmaVerdict, Template, TemplateArray, VerdictStatus,
};

/// Cap on the number of daisies enumerated by [`find_bunch`].
pub const MAX_DAISIES: usize = 20_000;

// --- shadowings -------------------------------------------------------------

/// A partition of `U` into blocks `B₁..Bₙ`, each vertex of `Bᵢ` having a
/// neighbour in `Hᵢ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shadowing {
    pub blocks: Vec<VertexSet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShadowStrategy {
    /// Least index with a neighbour in `Hᵢ`.
    LeastIndex,
    /// Vertices of `x` with at least `min` neighbours in some `Hᵢ` go to the
    /// least such index; all others by least index.
    Heavy { min: usize },
}

impl Shadowing {
    /// Index of the block containing `v`.
    pub fn block_of(&self, v: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(v))
    }

    /// Every failed shadowing condition for `t`.
    pub fn violations(&self, g: &Graph, t: &TemplateArray) -> Vec<String> {
        let mut out = Vec::new();
        if self.blocks.len() != t.n() {
            out.push(format!("{} blocks for {} templates", self.blocks.len(), t.n()));
            return out;
        }
        let mut seen = VertexSet::new();
        for (i, b) in self.blocks.iter().enumerate() {
            if seen.intersects(b) {
                out.push(format!("block {i} overlaps an earlier block"));
            }
            seen.union_with(b);
            if let Some(v) = b.iter().find(|&v| !g.touches(v, &t.sequence[i].h)) {
                out.push(format!("vertex {v} of block {i} has no neighbour in H{i}"));
            }
        }
        if seen != t.u {
            out.push("blocks do not partition U".into());
        }
        out
    }

    /// Checks the heavy-strategy constraint: each vertex of `Bᵢ ∩ x` has at
    /// least `min` neighbours in `Hᵢ`.
    pub fn heavy_holds(&self, g: &Graph, t: &TemplateArray, x: &VertexSet, min: usize) -> bool {
        self.blocks
            .iter()
            .enumerate()
            .all(|(i, b)| b.intersection(x).iter().all(|v| g.degree_into(v, &t.sequence[i].h) >= min))
    }
}

pub fn build_shadowing(g: &Graph, t: &TemplateArray, strategy: ShadowStrategy, x: &VertexSet) -> Shadowing {
    let mut blocks = vec![VertexSet::new(); t.n()];
    for v in t.u.iter() {
        let heavy = match strategy {
            ShadowStrategy::Heavy { min } if x.contains(v) => {
                (0..t.n()).find(|&i| g.degree_into(v, &t.sequence[i].h) >= min)
            }
            _ => None,
        };
        if let Some(i) = heavy.or_else(|| (0..t.n()).find(|&i| g.touches(v, &t.sequence[i].h))) {
            blocks[i].insert(v);
        }
    }
    Shadowing { blocks }
}

/// Largest number of blocks `i` with `N(v) ∩ Bᵢ ∩ x ≠ ∅` over `v ∈ V(𝒯)`,
/// with the lowest vertex attaining it.
pub fn shadowing_degree(g: &Graph, t: &TemplateArray, s: &Shadowing, x: &VertexSet) -> (usize, Option<usize>) {
    let parts: Vec<VertexSet> = s.blocks.iter().map(|b| b.intersection(x)).collect();
    let mut best = (0, None);
    for v in t.v_all().iter() {
        let c = parts.iter().filter(|p| g.touches(v, p)).count();
        if c > best.0 {
            best = (c, Some(v));
        }
    }
    best
}

// --- daisies ----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Daisy {
    pub root: usize,
    pub eye: usize,
    pub petals: VertexSet,
    pub root_index: usize,
    pub petal_index: usize,
}

impl Daisy {
    pub fn vertices(&self) -> VertexSet {
        let mut s = self.petals.clone();
        s.insert(self.root);
        s.insert(self.eye);
        s
    }

    /// Checks every daisy clause from scratch.
    pub fn verify(&self, g: &Graph, t: &TemplateArray, s: &Shadowing) -> bool {
        let delta = t.params.delta;
        let n = t.n();
        if self.root_index >= n || self.petal_index >= n || self.root_index == self.petal_index {
            return false;
        }
        let all = self.vertices();
        if all.bound() > g.n() || all.len() != delta + 2 {
            return false;
        }
        let h = t.h_all();
        all.intersection(&h) == VertexSet::singleton(self.root)
            && t.sequence[self.root_index].h.contains(self.root)
            && t.u.contains(self.eye)
            && self.petals.is_subset(&s.blocks[self.petal_index])
            && g.has_edge(self.root, self.eye)
            && self.petals.iter().all(|p| g.has_edge(self.eye, p))
            && !g.touches(self.root, &self.petals)
            && g.is_stable(&self.petals).unwrap_or(false)
    }
}

/// Lexicographically least stable `k`-subset of `cands`.
fn stable_subset(g: &Graph, cands: &VertexSet, k: usize) -> Option<VertexSet> {
    fn go(g: &Graph, rest: &[usize], k: usize, chosen: &mut VertexSet) -> bool {
        if chosen.len() == k {
            return true;
        }
        for (idx, &v) in rest.iter().enumerate() {
            if rest.len() - idx < k - chosen.len() {
                return false;
            }
            if g.touches(v, chosen) {
                continue;
            }
            chosen.insert(v);
            if go(g, &rest[idx + 1..], k, chosen) {
                return true;
            }
            chosen.remove(v);
        }
        false
    }
    let list = cands.to_vec();
    let mut chosen = VertexSet::new();
    go(g, &list, k, &mut chosen).then_some(chosen)
}

/// Every stable `k`-subset of `cands`, in lexicographic order, stopping
/// after `cap` sets.
fn stable_subsets(g: &Graph, cands: &VertexSet, k: usize, cap: usize, out: &mut Vec<VertexSet>) {
    fn go(g: &Graph, rest: &[usize], k: usize, cap: usize, chosen: &mut VertexSet, out: &mut Vec<VertexSet>) {
        if out.len() >= cap {
            return;
        }
        if chosen.len() == k {
            out.push(chosen.clone());
            return;
        }
        for (idx, &v) in rest.iter().enumerate() {
            if rest.len() - idx < k - chosen.len() {
                return;
            }
            if g.touches(v, chosen) {
                continue;
            }
            chosen.insert(v);
            go(g, &rest[idx + 1..], k, cap, chosen, out);
            chosen.remove(v);
        }
    }
    let list = cands.to_vec();
    go(g, &list, k, cap, &mut VertexSet::new(), out);
}

fn template_index(t: &TemplateArray, v: usize) -> Option<usize> {
    t.sequence.iter().position(|ti| ti.h.contains(v))
}

/// Candidate petals for eye `v` and root `u` in block `j`.
fn petal_candidates(g: &Graph, s: &Shadowing, x: &VertexSet, u: usize, v: usize, j: usize) -> VertexSet {
    g.neighbors(v)
        .intersection(&s.blocks[j])
        .intersection(x)
        .difference(g.neighbors(u))
}

/// First daisy in `G[H(𝒯) ∪ x]` by (eye, root, petal block, petals).
pub fn find_daisy(g: &Graph, t: &TemplateArray, s: &Shadowing, x: &VertexSet) -> Result<Option<Daisy>> {
    g.check_set(x)?;
    let delta = t.params.delta;
    let h = t.h_all();
    for v in t.u.intersection(x).iter() {
        for u in g.neighbors(v).intersection(&h).iter() {
            let Some(i) = template_index(t, u) else { continue };
            for j in (0..t.n()).filter(|&j| j != i) {
                let cands = petal_candidates(g, s, x, u, v, j);
                if let Some(petals) = stable_subset(g, &cands, delta) {
                    return Ok(Some(Daisy {
                        root: u,
                        eye: v,
                        petals,
                        root_index: i,
                        petal_index: j,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// All daisies with eye and petals in `x`, at most [`MAX_DAISIES`].
pub fn all_daisies(g: &Graph, t: &TemplateArray, s: &Shadowing, x: &VertexSet) -> Result<Vec<Daisy>> {
    g.check_set(x)?;
    let delta = t.params.delta;
    let h = t.h_all();
    let mut out = Vec::new();
    for v in t.u.intersection(x).iter() {
        for u in g.neighbors(v).intersection(&h).iter() {
            let Some(i) = template_index(t, u) else { continue };
            for j in (0..t.n()).filter(|&j| j != i) {
                let cands = petal_candidates(g, s, x, u, v, j);
                let mut sets = Vec::new();
                stable_subsets(g, &cands, delta, MAX_DAISIES + 1 - out.len(), &mut sets);
                out.extend(sets.into_iter().map(|petals| Daisy {
                    root: u,
                    eye: v,
                    petals,
                    root_index: i,
                    petal_index: j,
                }));
                if out.len() > MAX_DAISIES {
                    return Err(Error::TooLarge {
                        what: "daisy enumeration",
                        size: out.len(),
                        limit: MAX_DAISIES,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Whether `d1` and `d2` may both belong to one bunch.
fn compatible(g: &Graph, d1: &Daisy, d2: &Daisy) -> bool {
    let mut a = d1.petals.clone();
    a.insert(d1.eye);
    let mut b = d2.petals.clone();
    b.insert(d2.eye);
    d1.petal_index != d2.petal_index
        && a.is_disjoint(&b)
        && !a.iter().any(|v| g.touches(v, &b))
        && !g.touches(d1.root, &d2.petals)
        && !g.touches(d2.root, &d1.petals)
}

/// Checks the bunch clauses, each daisy, and that no petal index equals the
/// common root index.
pub fn verify_bunch(g: &Graph, t: &TemplateArray, s: &Shadowing, bunch: &[Daisy]) -> bool {
    let Some(first) = bunch.first() else {
        return true;
    };
    let i = first.root_index;
    bunch.iter().all(|d| d.verify(g, t, s) && d.root_index == i && d.petal_index != i)
        && bunch
            .iter()
            .enumerate()
            .all(|(a, d1)| bunch[a + 1..].iter().all(|d2| compatible(g, d1, d2)))
}

/// A bunch of `count` daisies with eyes and petals in `U`, found by
/// exhaustive search over root index and petal blocks.
pub fn find_bunch(g: &Graph, t: &TemplateArray, s: &Shadowing, count: usize) -> Result<Option<Vec<Daisy>>> {
    if count == 0 {
        return Ok(Some(Vec::new()));
    }
    let daisies = all_daisies(g, t, s, &t.u)?;
    for i in 0..t.n() {
        // candidates grouped by petal block
        let mut by_block: Vec<Vec<&Daisy>> = vec![Vec::new(); t.n()];
        for d in daisies.iter().filter(|d| d.root_index == i) {
            by_block[d.petal_index].push(d);
        }
        let blocks: Vec<usize> = (0..t.n()).filter(|&j| !by_block[j].is_empty()).collect();
        if blocks.len() < count {
            continue;
        }
        let mut chosen: Vec<&Daisy> = Vec::new();
        if grow_bunch(g, &by_block, &blocks, count, &mut chosen) {
            let bunch: Vec<Daisy> = chosen.into_iter().cloned().collect();
            debug_assert!(verify_bunch(g, t, s, &bunch));
            return Ok(Some(bunch));
        }
    }
    Ok(None)
}

fn grow_bunch<'a>(
    g: &Graph,
    by_block: &[Vec<&'a Daisy>],
    blocks: &[usize],
    count: usize,
    chosen: &mut Vec<&'a Daisy>,
) -> bool {
    if chosen.len() == count {
        return true;
    }
    for (k, &j) in blocks.iter().enumerate() {
        if blocks.len() - k < count - chosen.len() {
            return false;
        }
        for &d in &by_block[j] {
            if chosen.iter().all(|c| compatible(g, c, d)) {
                chosen.push(d);
                if grow_bunch(g, by_block, &blocks[k + 1..], count, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
    }
    false
}

/// A vertex of `Hᵢ ∪ Bᵢ` adjacent to the eyes and to none of the petals of
/// at least `q` daisies of the bunch, with the positions of the first `q`.
pub fn common_root(
    g: &Graph,
    t: &TemplateArray,
    s: &Shadowing,
    i: usize,
    bunch: &[Daisy],
    q: usize,
) -> Option<(usize, Vec<usize>)> {
    let pool = t.sequence.get(i)?.h.union(s.blocks.get(i)?);
    pool.iter().find_map(|u| {
        let hits: Vec<usize> = bunch
            .iter()
            .enumerate()
            .filter(|(_, d)| g.has_edge(u, d.eye) && !g.touches(u, &d.petals))
            .map(|(k, _)| k)
            .take(q)
            .collect();
        (hits.len() == q).then_some((u, hits))
    })
}

// --- private covers ---------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivateCover {
    pub a_prime: VertexSet,
    pub b_prime: VertexSet,
    /// `d` matching-covered sets with union `b_prime`.
    pub decomposition: Vec<VertexSet>,
}

fn covers(g: &Graph, a: &VertexSet, b: &VertexSet) -> bool {
    b.iter().all(|v| g.touches(v, a))
}

/// Builds `A′ ⊆ a` and `B′ ⊆ b` level by level: at each level `A′` is made
/// minimal by deleting vertices in increasing order while it still covers
/// the uncovered part of `b`, then each `u ∈ A′` takes its lowest private
/// vertex.
pub fn private_cover(g: &Graph, a: &VertexSet, b: &VertexSet, d: usize) -> Result<PrivateCover> {
    g.check_set(a)?;
    g.check_set(b)?;
    if a.intersects(b) {
        return Err(Error::Precondition("A and B intersect".into()));
    }
    if let Some(v) = b.iter().find(|&v| !g.touches(v, a)) {
        return Err(Error::Precondition(format!("vertex {v} of B has no neighbour in A")));
    }
    let mut a_prime = a.clone();
    let mut b_prime = VertexSet::new();
    let mut decomposition = Vec::with_capacity(d);
    for _ in 0..d {
        let rest = b.difference(&b_prime);
        for u in a_prime.clone().iter() {
            a_prime.remove(u);
            if !covers(g, &a_prime, &rest) {
                a_prime.insert(u);
            }
        }
        let mut x = VertexSet::new();
        for u in a_prime.iter() {
            let private = rest
                .iter()
                .find(|&v| g.has_edge(u, v) && g.degree_into(v, &a_prime) == 1)
                .ok_or_else(|| Error::Precondition(format!("vertex {u} of A′ has no private vertex")))?;
            x.insert(private);
        }
        b_prime.union_with(&x);
        decomposition.push(x);
    }
    Ok(PrivateCover {
        a_prime,
        b_prime,
        decomposition,
    })
}

/// Every failed clause of the private-cover guarantee.
pub fn private_cover_violations(g: &Graph, a: &VertexSet, b: &VertexSet, d: usize, pc: &PrivateCover) -> Vec<String> {
    let mut out = Vec::new();
    if !pc.a_prime.is_subset(a) || !pc.b_prime.is_subset(b) {
        out.push("A′ or B′ not inside A or B".into());
    }
    if !covers(g, &pc.a_prime, &b.difference(&pc.b_prime)) {
        out.push("A′ does not cover B ∖ B′".into());
    }
    if pc.decomposition.len() != d {
        out.push(format!("{} decomposition sets, expected {d}", pc.decomposition.len()));
    }
    let mut union = VertexSet::new();
    for (k, x) in pc.decomposition.iter().enumerate() {
        union.union_with(x);
        if !structures::is_matching_covered(g, x).unwrap_or(false) {
            out.push(format!("decomposition set {k} is not matching-covered"));
        }
    }
    if union != pc.b_prime {
        out.push("decomposition union differs from B′".into());
    }
    if let Some(v) = pc.b_prime.iter().find(|&v| g.degree_into(v, &pc.a_prime) > 1) {
        out.push(format!("vertex {v} of B′ has several neighbours in A′"));
    }
    if let Some(u) = pc.a_prime.iter().find(|&u| g.degree_into(u, &pc.b_prime) != d) {
        out.push(format!("vertex {u} of A′ has {} neighbours in B′, expected {d}", g.degree_into(u, &pc.b_prime)));
    }
    out
}

// --- privatization ----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Privatization {
    pub pi: VertexSet,
    /// `(π, z)`: the unique `Z`-neighbour of each vertex of `Π`.
    pub private_neighbor: Vec<(usize, usize)>,
    pub cover_decomposition: Vec<VertexSet>,
}

impl Privatization {
    /// Every failed privatization clause for `t`.
    pub fn violations(&self, g: &Graph, t: &TemplateArray) -> Vec<String> {
        let dt = t.params.delta * t.params.tau;
        let (y, z) = (t.y_all(), t.z_all());
        let mut out = Vec::new();
        if !self.pi.is_subset(&t.u) {
            out.push("Π is not inside U".into());
        }
        for v in self.pi.iter() {
            if g.touches(v, &y) || g.degree_into(v, &z) != 1 {
                out.push(format!("vertex {v} of Π does not have exactly one Z-neighbour and no Y-neighbour"));
            }
        }
        if let Some(w) = z.iter().find(|&w| g.degree_into(w, &self.pi) != dt) {
            out.push(format!("Z-vertex {w} has {} neighbours in Π, expected {dt}", g.degree_into(w, &self.pi)));
        }
        let mut union = VertexSet::new();
        for (k, x) in self.cover_decomposition.iter().enumerate() {
            union.union_with(x);
            if !structures::is_matching_covered(g, x).unwrap_or(false) {
                out.push(format!("decomposition set {k} is not matching-covered"));
            }
        }
        if !self.pi.is_subset(&union) {
            out.push("Π is not inside the decomposition union".into());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Privatized {
    pub array: TemplateArray,
    pub privatization: Privatization,
    /// `B′ ∖ Π`, dropped from `U`.
    pub dropped: VertexSet,
    pub chi_u_before: Option<usize>,
    pub chi_rest_after: Option<usize>,
    /// `χ(U′ ∖ Π) ≥ χ(U) − δτ²`, when both sides are computable.
    pub within_claim: Option<bool>,
}

/// Shrinks the `Zᵢ` to a private cover of the `U`-vertices without a
/// `Y`-neighbour.
pub fn privatize(g: &Graph, t: &TemplateArray, limits: &Limits) -> Result<Privatized> {
    t.validate(g)?;
    if !template::is_2_cleaned(g, t) {
        return Err(Error::Precondition("privatization needs a 2-cleaned array".into()));
    }
    let (delta, tau) = (t.params.delta, t.params.tau);
    let y = t.y_all();
    let z = t.z_all();
    let b: VertexSet = t.u.iter().filter(|&v| !g.touches(v, &y)).collect();
    let pc = private_cover(g, &z, &b, delta * tau)?;
    let pi: VertexSet = pc.b_prime.iter().filter(|&v| g.touches(v, &pc.a_prime)).collect();
    let sequence = t
        .sequence
        .iter()
        .map(|ti| Template {
            core: ti.core.clone(),
            h: ti.h.intersection(&pc.a_prime).union(&ti.y()),
        })
        .collect();
    let array = TemplateArray {
        sequence,
        u: t.u.difference(&pc.b_prime).union(&pi),
        params: t.params.clone(),
        cleanliness: Cleanliness::Clean2,
    };
    let private_neighbor = pi
        .iter()
        .filter_map(|v| g.neighbors(v).intersection(&pc.a_prime).first().map(|w| (v, w)))
        .collect();
    let privatization = Privatization {
        pi: pi.clone(),
        private_neighbor,
        cover_decomposition: pc.decomposition,
    };
    if let Some(v) = array.violations(g).into_iter().chain(privatization.violations(g, &array)).next() {
        return Err(Error::Precondition(format!("privatization produced an invalid result: {v}")));
    }
    let fits = |s: &VertexSet| s.len() <= limits.solver;
    let rest = array.u.difference(&pi);
    let (chi_u_before, chi_rest_after) = if fits(&t.u) && fits(&rest) {
        (
            Some(solvers::chromatic_number_of(g, &t.u, limits)?),
            Some(solvers::chromatic_number_of(g, &rest, limits)?),
        )
    } else {
        (None, None)
    };
    let within_claim = match (chi_u_before, chi_rest_after) {
        (Some(b), Some(a)) => Some(a + delta * tau * tau >= b),
        _ => None,
    };
    Ok(Privatized {
        dropped: pc.b_prime.difference(&pi),
        array,
        privatization,
        chi_u_before,
        chi_rest_after,
        within_claim,
    })
}

// --- stable-set lemma ---------------------------------------------------------

/// Lowest vertex of `x` with at least `d` neighbours outside `x`.
pub fn outside_heavy_vertex(g: &Graph, x: &VertexSet, d: usize) -> Option<usize> {
    let rest = g.vertices().difference(x);
    x.iter().find(|&v| g.degree_into(v, &rest) >= d)
}

/// Whether `x` is stable, `χ(G) > d` and `χ(G ∖ x) < χ(G)`.
pub fn stable_removal_hypotheses(g: &Graph, x: &VertexSet, d: usize, limits: &Limits) -> Result<bool> {
    if !g.is_stable(x)? {
        return Ok(false);
    }
    let chi = solvers::chromatic_number(g, limits)?.0;
    let rest = g.vertices().difference(x);
    Ok(chi > d && solvers::chromatic_number_of(g, &rest, limits)? < chi)
}

// --- strong triples ---------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongTriple {
    pub i: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub u: usize,
    pub v: usize,
    pub near: VertexSet,
    pub far: VertexSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongTripleAudit {
    pub triples: Vec<StrongTriple>,
    /// `(i, k)`: a greedily built family of `k` triples strong from `i` with
    /// pairwise disjoint index sets.
    pub disjoint_families: Vec<(usize, usize)>,
    /// The `s` used: one more than the largest observed second-neighbourhood
    /// index count.
    pub s: u64,
    pub r: BigUint,
    /// Palette of the Gallai–Roy colouring of the earlier-to-later
    /// orientation of `G[U ∖ Π]` minus intra-block edges.
    pub orientation_palette: usize,
    pub orientation_proper: bool,
    pub report: AuditReport,
}

/// Enumerates the strong triples `(i, a, b, c)` of the least-index
/// shadowing, one witness each, over `U ∖ Π`.
pub fn strong_triples(g: &Graph, t: &TemplateArray, s: &Shadowing, pi: &VertexSet) -> Vec<StrongTriple> {
    let delta = t.params.delta;
    let n = t.n();
    let free: Vec<VertexSet> = s.blocks.iter().map(|b| b.difference(pi)).collect();
    let mut seen = VertexSet::new();
    let mut out = Vec::new();
    let key = |i: usize, a: usize, b: usize, c: usize| ((i * n + a) * n + b) * n + c;
    for i in 0..n {
        for u in free[i].iter() {
            for a in i + 1..n {
                for v in g.neighbors(u).intersection(&free[a]).iter() {
                    for b in i + 1..n {
                        let Some(near) = stable_subset(g, &g.neighbors(u).intersection(&free[b]), delta) else {
                            continue;
                        };
                        for c in a + 1..n {
                            if seen.contains(key(i, a, b, c)) {
                                continue;
                            }
                            let cands = g.neighbors(v).intersection(&free[c]).difference(g.neighbors(u));
                            if let Some(far) = stable_subset(g, &cands, delta) {
                                seen.insert(key(i, a, b, c));
                                out.push(StrongTriple {
                                    i,
                                    a,
                                    b,
                                    c,
                                    u,
                                    v,
                                    near: near.clone(),
                                    far,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort_by_key(|t| (t.i, t.a, t.b, t.c));
    out
}

/// Counts strong triples against the bound `r`, and colours the
/// earlier-to-later orientation of `G[U ∖ Π]`.
pub fn strong_triple_audit(
    g: &Graph,
    t: &TemplateArray,
    s: &Shadowing,
    p: &Privatization,
) -> Result<StrongTripleAudit> {
    t.validate(g)?;
    if let Some(v) = s.violations(g, t).into_iter().next() {
        return Err(Error::Precondition(v));
    }
    let mut report = AuditReport {
        precondition_failure: None,
        verdicts: Vec::new(),
    };
    if !template::is_2_cleaned(g, t) {
        report.precondition_failure = Some("needs a 2-cleaned array".into());
    } else if let Some(v) = p.violations(g, t).into_iter().next() {
        report.precondition_failure = Some(v);
    }
    let observed = t
        .u
        .iter()
        .map(|v| template::second_neighbourhood_indices(g, t, v) as u64)
        .max()
        .unwrap_or(0);
    let s_used = observed + 1;
    let (_, r, _) = constants::strong_triple_bound(&t.params, s_used);
    let triples = strong_triples(g, t, s, &p.pi);
    let mut disjoint_families = Vec::new();
    for i in 0..t.n() {
        let mut used = VertexSet::new();
        let mut k = 0;
        for tr in triples.iter().filter(|tr| tr.i == i) {
            let idx = VertexSet::from([tr.a, tr.b, tr.c]);
            if !used.intersects(&idx) {
                used.union_with(&idx);
                k += 1;
            }
        }
        if k > 0 {
            disjoint_families.push((i, k));
        }
    }
    // earlier-to-later orientation
    let w = t.u.difference(&p.pi);
    let list = w.to_vec();
    let mut d = Digraph::empty(list.len())?;
    for (x, &a) in list.iter().enumerate() {
        for (y, &b) in list.iter().enumerate() {
            if g.has_edge(a, b) && s.block_of(a) < s.block_of(b) {
                d.add_arc(x, y)?;
            }
        }
    }
    let col = template::gallai_roy_color(&d)?;
    let orientation_proper = solvers::validate_coloring(&d.underlying(), &col)?;
    if report.precondition_failure.is_none() {
        let top = disjoint_families.iter().max_by_key(|f| f.1).copied();
        let status = if top.is_none_or(|f| BigUint::from(f.1) < r) {
            VerdictStatus::Pass
        } else {
            VerdictStatus::Violation
        };
        report.verdicts.push(LemmaVerdict {
            theorem: ids::STRONG_TRIPLES.into(),
            status,
            bound: format!("fewer than r = {r} disjoint strong triples per index, s = {s_used}"),
            observed: Some(top.map_or(0, |f| f.1 as u64)),
            argmax: top.map(|f| f.0),
            counters: disjoint_families.iter().map(|&(i, k)| (i, k as u64)).collect(),
            note: format!(
                "{} strong triples; earlier-to-later orientation uses {} colours",
                triples.len(),
                col.palette_size
            ),
            witness: None,
        });
    }
    Ok(StrongTripleAudit {
        triples,
        disjoint_families,
        s: s_used,
        r,
        orientation_palette: col.palette_size,
        orientation_proper,
        report,
    })
}
