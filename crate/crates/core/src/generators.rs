//! Seeded graph families and versioned hand-built fixtures.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`; pairs `u < v`
//! are visited in lexicographic order, so a spec and seed fix the graph.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, MAX_VERTICES};
use crate::set::VertexSet;
use crate::structures::{CoreWitness, Params};
use crate::template::{Cleanliness, Template, TemplateArray};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    ErdosRenyi { n: usize, p: f64 },
    MycielskiTower { base: Box<Family>, levels: usize },
    Kneser { n: usize, k: usize },
    CompleteMultipartite { parts: Vec<usize> },
    Cycle { n: usize },
    Path { n: usize },
    PlantedCore { n: usize, a: usize, b: usize, noise: f64 },
    Fixture { id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub seed: u64,
}

impl Family {
    /// Short human-readable name, e.g. `kneser(5,2)`.
    pub fn label(&self) -> String {
        match self {
            Family::ErdosRenyi { n, p } => format!("erdos_renyi({n},{p})"),
            Family::MycielskiTower { base, levels } => format!("mycielski_tower({},{levels})", base.label()),
            Family::Kneser { n, k } => format!("kneser({n},{k})"),
            Family::CompleteMultipartite { parts } => format!("complete_multipartite({parts:?})"),
            Family::Cycle { n } => format!("cycle({n})"),
            Family::Path { n } => format!("path({n})"),
            Family::PlantedCore { n, a, b, noise } => format!("planted_core({n},{a},{b},{noise})"),
            Family::Fixture { id } => format!("fixture({id})"),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::ErdosRenyi { .. } => "erdos_renyi",
            Family::MycielskiTower { .. } => "mycielski_tower",
            Family::Kneser { .. } => "kneser",
            Family::CompleteMultipartite { .. } => "complete_multipartite",
            Family::Cycle { .. } => "cycle",
            Family::Path { .. } => "path",
            Family::PlantedCore { .. } => "planted_core",
            Family::Fixture { .. } => "fixture",
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")))
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_VERTICES {
        return Err(Error::GraphTooLarge { n, max: MAX_VERTICES });
    }
    Ok(())
}

pub fn generate(spec: &GenSpec) -> Result<Graph> {
    build(&spec.family, spec.seed)
}

fn build(family: &Family, seed: u64) -> Result<Graph> {
    match family {
        Family::ErdosRenyi { n, p } => erdos_renyi(*n, *p, seed),
        Family::MycielskiTower { base, levels } => {
            let mut g = build(base, seed)?;
            for _ in 0..*levels {
                g = mycielskian(&g)?;
            }
            Ok(g)
        }
        Family::Kneser { n, k } => kneser(*n, *k),
        Family::CompleteMultipartite { parts } => complete_multipartite(parts).map(|(g, _)| g),
        Family::Cycle { n } => cycle(*n),
        Family::Path { n } => path(*n),
        Family::PlantedCore { n, a, b, noise } => plant_core(*n, *a, *b, *noise, seed).map(|(g, _)| g),
        Family::Fixture { id } => fixture(id).map(|f| f.graph),
    }
}

pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    check_probability(p)?;
    check_size(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter("a cycle needs at least 3 vertices".into()));
    }
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

pub fn path(n: usize) -> Result<Graph> {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i)))
}

/// Vertices `0..n` are the original, `n..2n` their shadows, `2n` the apex.
pub fn mycielskian(g: &Graph) -> Result<Graph> {
    let n = g.n();
    check_size(2 * n + 1)?;
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    for (u, v) in g.edges() {
        edges.push((u, n + v));
        edges.push((v, n + u));
    }
    edges.extend((0..n).map(|i| (n + i, 2 * n)));
    Graph::from_edges(2 * n + 1, edges)
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let mut r: usize = 1;
    for i in 0..k.min(n - k.min(n)) {
        r = r.checked_mul(n - i)? / (i + 1);
    }
    Some(r)
}

/// `k`-subsets of `0..n` in lexicographic order, adjacent when disjoint.
pub fn kneser(n: usize, k: usize) -> Result<Graph> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("kneser needs 1 ≤ k ≤ n; got n={n}, k={k}")));
    }
    let count = binomial(n, k).unwrap_or(usize::MAX);
    check_size(count)?;
    let mut sets: Vec<u64> = Vec::with_capacity(count);
    fn go(start: usize, n: usize, k: usize, cur: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(cur);
            return;
        }
        for v in start..n {
            go(v + 1, n, k - 1, cur | 1 << v, out);
        }
    }
    if n > 64 {
        return Err(Error::InvalidParameter("kneser ground set above 64".into()));
    }
    go(0, n, k, 0, &mut sets);
    let mut edges = Vec::new();
    for (a, &x) in sets.iter().enumerate() {
        for (b, &y) in sets.iter().enumerate().skip(a + 1) {
            if x & y == 0 {
                edges.push((a, b));
            }
        }
    }
    Graph::from_edges(sets.len(), edges)
}

/// Parts occupy consecutive vertex ranges.
pub fn complete_multipartite(parts: &[usize]) -> Result<(Graph, Vec<VertexSet>)> {
    let n: usize = parts.iter().sum();
    check_size(n)?;
    let mut sets = Vec::with_capacity(parts.len());
    let mut start = 0;
    for &p in parts {
        sets.push((start..start + p).collect::<VertexSet>());
        start += p;
    }
    let mut edges = Vec::new();
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            edges.extend(a.iter().flat_map(|u| b.iter().map(move |v| (u, v))));
        }
    }
    Ok((Graph::from_edges(n, edges)?, sets))
}

/// A planted `(a, b)`-core on a random `ab`-subset of `0..n`, plus noise
/// edges with probability `noise_p` on every pair not inside the core.
pub fn plant_core(n: usize, a: usize, b: usize, noise_p: f64, seed: u64) -> Result<(Graph, CoreWitness)> {
    check_probability(noise_p)?;
    check_size(n)?;
    if a == 0 || b == 0 || a * b > n {
        return Err(Error::InvalidParameter(format!("need 1 ≤ a, 1 ≤ b, ab ≤ n; got a={a}, b={b}, n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    // partial Fisher–Yates for the core positions
    for i in 0..a * b {
        let j = rng.gen_range(i..n);
        order.swap(i, j);
    }
    let parts: Vec<VertexSet> = (0..b)
        .map(|k| order[k * a..(k + 1) * a].iter().copied().collect())
        .collect();
    let core: VertexSet = order[..a * b].iter().copied().collect();
    let part_of = |v: usize| parts.iter().position(|p| p.contains(v));
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let inside = core.contains(u) && core.contains(v);
            if inside {
                if part_of(u) != part_of(v) {
                    edges.push((u, v));
                }
            } else if rng.gen_bool(noise_p) {
                edges.push((u, v));
            }
        }
    }
    let mut parts = parts;
    parts.sort_by_key(|p| p.first());
    Ok((Graph::from_edges(n, edges)?, CoreWitness { parts }))
}

// --- fixtures ---------------------------------------------------------------

/// A hand-built graph, with a template array where the scenario needs one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub id: String,
    pub graph: Graph,
    pub array: Option<TemplateArray>,
    pub note: String,
}

/// Every fixture id, versioned by the `@` suffix.
pub const FIXTURE_IDS: &[&str] = &[
    "petersen@1",
    "grotzsch@1",
    "k22-pair@1",
    "y-violation@1",
    "h-violation@1",
    "h-clique@1",
    "daisy@1",
    "no-daisy@1",
    "bunch@1",
    "bunch-blocked@1",
    "cross-edge@1",
    "z-triangle@1",
    "strong-triple@1",
];

fn k22(base: usize) -> (Vec<(usize, usize)>, CoreWitness) {
    let b = base;
    (
        vec![(b, b + 2), (b, b + 3), (b + 1, b + 2), (b + 1, b + 3)],
        CoreWitness {
            parts: vec![VertexSet::from([b, b + 1]), VertexSet::from([b + 2, b + 3])],
        },
    )
}

/// `ζ = 2, β = 2, η = 1, α = 1, δ = 1`.
pub fn fixture_params(tau: usize) -> Params {
    let mut p = Params::minimal(1, tau, 1, 2);
    p.zeta = 2;
    p.eta = 1;
    p
}

/// `k` templates on `K_{2,2}` cores at `5k..5k+4`, each with one `Z`-vertex
/// `5k+4` adjacent to `5k`; further vertices start at `5k`.
fn templates(k: usize, extra: usize, edges: &[(usize, usize)], u: &[usize], tau: usize) -> Result<(Graph, TemplateArray)> {
    let mut e = Vec::new();
    let mut seq = Vec::new();
    for c in 0..k {
        let (ec, core) = k22(5 * c);
        e.extend(ec);
        e.push((5 * c + 4, 5 * c));
        seq.push(Template {
            h: core.vertices().union(&VertexSet::singleton(5 * c + 4)),
            core,
        });
    }
    e.extend_from_slice(edges);
    let g = Graph::from_edges(5 * k + extra, e)?;
    let t = TemplateArray {
        sequence: seq,
        u: u.iter().copied().collect(),
        params: fixture_params(tau),
        cleanliness: Cleanliness::Raw,
    };
    Ok((g, t))
}

/// Three `K_{2,2}` cores; vertex 15 attaches to each through `uᵢ = 5i+4`.
fn h_fixture(clique: bool) -> Result<(Graph, TemplateArray)> {
    let mut e = vec![(15, 4), (15, 9), (15, 14)];
    if clique {
        e.extend([(4, 9), (4, 14), (9, 14)]);
    }
    let (g, mut t) = templates(3, 1, &e, &[15], 0)?;
    if clique {
        // cross edges inside Z break nothing below 1-cleaned
        t.cleanliness = Cleanliness::Clean1;
    } else {
        t.cleanliness = Cleanliness::Clean2;
    }
    Ok((g, t))
}

pub fn fixture(id: &str) -> Result<Fixture> {
    let (graph, array, note): (Graph, Option<TemplateArray>, &str) = match id {
        "petersen@1" => (kneser(5, 2)?, None, "Kneser graph K(5,2)"),
        "grotzsch@1" => (mycielskian(&cycle(5)?)?, None, "Mycielskian of C5"),
        "k22-pair@1" => {
            let (mut e, _) = k22(0);
            e.extend(k22(4).0);
            (Graph::from_edges(8, e)?, None, "two disjoint K_{2,2}")
        }
        "y-violation@1" => {
            // v = 12 has one neighbour in each part of three cores
            let mut e = Vec::new();
            let mut seq = Vec::new();
            for c in 0..3 {
                let (ec, core) = k22(4 * c);
                e.extend(ec);
                e.extend([(12, 4 * c), (12, 4 * c + 2)]);
                seq.push(Template { h: core.vertices(), core });
            }
            let t = TemplateArray {
                sequence: seq,
                u: VertexSet::from([12]),
                params: fixture_params(1),
                cleanliness: Cleanliness::Raw,
            };
            (Graph::from_edges(13, e)?, Some(t), "2δ+1 cores around one vertex, δ = 1")
        }
        "h-violation@1" => {
            let (g, t) = h_fixture(false)?;
            (g, Some(t), "vertex 15 sees three Z-vertices, pairwise non-adjacent; τ = 0")
        }
        "h-clique@1" => {
            let (g, t) = h_fixture(true)?;
            (g, Some(t), "vertex 15 sees three Z-vertices forming a triangle; τ = 0")
        }
        "daisy@1" => {
            let (g, t) = templates(2, 2, &[(10, 4), (10, 11), (11, 9)], &[10, 11], 1)?;
            (g, Some(t), "root 4, eye 10, petal 11")
        }
        "no-daisy@1" => {
            let (g, t) = templates(2, 2, &[(10, 4), (10, 9), (10, 11), (11, 4), (11, 9)], &[10, 11], 1)?;
            (g, Some(t), "every candidate petal sees every root")
        }
        "bunch@1" | "bunch-blocked@1" => {
            // root 4 with eyes 15, 16; petals 17 ∈ B2 and 18 ∈ B3
            let mut e = vec![(15, 4), (16, 4), (15, 17), (16, 18), (17, 9), (18, 14)];
            if id == "bunch-blocked@1" {
                e.push((17, 18));
            }
            let (g, t) = templates(3, 4, &e, &[15, 16, 17, 18], 1)?;
            (g, Some(t), "two daisies sharing root 4")
        }
        "cross-edge@1" => {
            let (g, mut t) = templates(2, 0, &[(4, 9)], &[], 1)?;
            t.cleanliness = Cleanliness::Clean1;
            (g, Some(t), "one edge between Z1 and Z2")
        }
        "z-triangle@1" => {
            // Y = K_{3,3} on 0..6, Z = triangle 6,7,8 each seeing 0; 9 in U
            let mut e: Vec<(usize, usize)> = (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect();
            e.extend([(6, 7), (7, 8), (6, 8), (6, 0), (7, 0), (8, 0), (9, 6)]);
            let g = Graph::from_edges(10, e)?;
            let core = CoreWitness {
                parts: vec![VertexSet::from([0, 1, 2]), VertexSet::from([3, 4, 5])],
            };
            let mut p = Params::minimal(1, 1, 2, 2);
            p.zeta = 3;
            p.eta = 1;
            let t = TemplateArray {
                sequence: vec![Template {
                    h: (0..9).collect(),
                    core,
                }],
                u: VertexSet::from([9]),
                params: p,
                cleanliness: Cleanliness::Clean1,
            };
            (g, Some(t), "triangle inside Z1")
        }
        "strong-triple@1" => {
            let (u, v, p, q) = (20, 21, 22, 23);
            let e = [(u, 4), (v, 9), (p, 14), (q, 19), (u, v), (u, p), (v, q)];
            let (g, mut t) = templates(4, 4, &e, &[u, v, p, q], 1)?;
            t.cleanliness = Cleanliness::Clean2;
            (g, Some(t), "index 0 strong to (1, 2, 3)")
        }
        other => return Err(Error::InvalidParameter(format!("unknown fixture {other}"))),
    };
    Ok(Fixture {
        id: id.into(),
        graph,
        array,
        note: note.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{self, Limits};
    use crate::structures;

    fn spec(family: Family, seed: u64) -> GenSpec {
        GenSpec { family, seed }
    }

    #[test]
    fn named_constructions() {
        let p = kneser(5, 2).unwrap();
        assert_eq!((p.n(), p.edge_count()), (10, 15));
        assert!((0..10).all(|v| p.degree(v) == 3));
        let g = mycielskian(&cycle(5).unwrap()).unwrap();
        assert_eq!(g.n(), 11);
        let limits = Limits::default();
        assert_eq!(solvers::clique_number(&g, &limits).unwrap().0, 2);
        assert_eq!(solvers::chromatic_number(&g, &limits).unwrap().0, 4);
        let (c4, _) = complete_multipartite(&[2, 2]).unwrap();
        assert_eq!(c4, Graph::from_edges(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap());
    }

    #[test]
    fn kneser_degrees() {
        for (n, k) in [(5, 2), (6, 2), (7, 3), (6, 1), (8, 3)] {
            let g = kneser(n, k).unwrap();
            let d = binomial(n - k, k).unwrap();
            assert!((0..g.n()).all(|v| g.degree(v) == d), "K({n},{k})");
        }
    }

    #[test]
    fn mycielski_tower_levels() {
        let limits = Limits::default();
        let mut g = cycle(5).unwrap();
        let mut chi = 3;
        for _ in 0..2 {
            g = mycielskian(&g).unwrap();
            chi += 1;
            assert_eq!(solvers::clique_number(&g, &limits).unwrap().0, 2);
            assert_eq!(solvers::chromatic_number(&g, &limits).unwrap().0, chi);
        }
        let spec = spec(
            Family::MycielskiTower {
                base: Box::new(Family::Cycle { n: 5 }),
                levels: 2,
            },
            0,
        );
        assert_eq!(generate(&spec).unwrap(), g);
    }

    #[test]
    fn determinism() {
        let er = spec(Family::ErdosRenyi { n: 30, p: 0.3 }, 9);
        assert_eq!(generate(&er).unwrap(), generate(&er).unwrap());
        assert_ne!(generate(&er).unwrap(), generate(&GenSpec { seed: 10, ..er.clone() }).unwrap());
        let pc = spec(Family::PlantedCore { n: 12, a: 2, b: 3, noise: 0.2 }, 4);
        assert_eq!(generate(&pc).unwrap(), generate(&pc).unwrap());
    }

    #[test]
    fn planted_cores() {
        let (g, core) = plant_core(6, 2, 3, 0.0, 1).unwrap();
        // n = ab without noise: exactly K_{2,2,2} on the planted parts
        assert!(core.verify(&g));
        assert_eq!(g.edge_count(), 12);
        let (g, core) = plant_core(8, 2, 2, 0.1, 42).unwrap();
        assert!(core.verify(&g));
        let found = structures::find_core(&g, 2, 2, &Limits::default()).unwrap().unwrap();
        assert!(found.verify(&g));
        let (g, core) = plant_core(5, 3, 1, 0.0, 0).unwrap();
        assert!(g.is_stable(&core.vertices()).unwrap() && core.b() == 1);
        assert!(plant_core(5, 3, 2, 0.0, 0).is_err());
        assert!(erdos_renyi(5, 1.5, 0).is_err());
    }

    #[test]
    fn fixtures_are_valid() {
        for id in FIXTURE_IDS {
            let f = fixture(id).unwrap();
            if let Some(t) = &f.array {
                assert!(t.declared_holds(&f.graph), "{id}: {:?}", t.violations(&f.graph));
            }
        }
        assert!(fixture("nope@1").is_err());
    }

    #[test]
    fn labels() {
        let s = spec(Family::Kneser { n: 5, k: 2 }, 3);
        assert_eq!(s.family.label(), "kneser(5,2)");
        assert_eq!(s.family.name(), "kneser");
    }
}
