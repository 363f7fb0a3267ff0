//! Seeded property suites. Each trial draws a random instance, runs the
//! library routine, and re-checks the result with code that does not share
//! the routine's logic.

use broomlab_core::generators::{self, fixture_params};
use broomlab_core::graph::Digraph;
use broomlab_core::shadow;
use broomlab_core::structures;
use broomlab_core::template;
use broomlab_core::trees::{self, PatternTree};
use broomlab_core::{solvers, Coloring, Graph, Limits, VertexSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::pipeline;

pub const SUITES: &[&str] = &[
    "containment",
    "digraph",
    "gallai-roy",
    "private-cover",
    "stable-removal",
    "pipeline",
];

/// Failures kept in detail; the count is always exact.
const MAX_REPORTED: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub failures: Vec<Failure>,
}

impl SuiteOutcome {
    pub fn ok(&self) -> bool {
        self.failed == 0 && self.passed == self.trials
    }

    pub fn into_result(self) -> Result<SuiteOutcome> {
        if self.ok() {
            Ok(self)
        } else {
            Err(LabError::SuiteFailed {
                suite: self.suite,
                failed: self.failed,
                trials: self.trials,
            })
        }
    }
}

type Trial = Result<std::result::Result<(), String>>;

fn run_trials(suite: &str, trials: usize, seed: u64, mut trial: impl FnMut(&mut ChaCha8Rng) -> Trial) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SuiteOutcome {
        suite: suite.into(),
        seed,
        trials,
        passed: 0,
        failed: 0,
        failures: Vec::new(),
    };
    for k in 0..trials {
        match trial(&mut rng)? {
            Ok(()) => out.passed += 1,
            Err(detail) => {
                out.failed += 1;
                if out.failures.len() < MAX_REPORTED {
                    out.failures.push(Failure { trial: k, detail });
                }
            }
        }
    }
    Ok(out)
}

pub fn run_suite(name: &str, trials: usize, seed: u64, limits: &Limits) -> Result<SuiteOutcome> {
    match name {
        "containment" => containment(trials, seed, limits),
        "digraph" => digraph(trials, seed),
        "gallai-roy" => gallai_roy(trials, seed),
        "private-cover" => private_cover(trials, seed),
        "stable-removal" => stable_removal(trials, seed, limits),
        "pipeline" => pipeline_suite(trials, seed, limits),
        other => Err(LabError::Usage(format!(
            "unknown suite {other:?}; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

// --- random instances -------------------------------------------------------

pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("vertex count within range")
}

pub fn random_tree(rng: &mut impl Rng, n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|v| (rng.gen_range(0..v), v))).expect("vertex count within range")
}

/// Out-degree at most `bound`; with `acyclic`, arcs follow a random order.
pub fn random_digraph(rng: &mut impl Rng, n: usize, bound: usize, acyclic: bool) -> Digraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut arcs = Vec::new();
    for (pos, &v) in order.iter().enumerate() {
        let pool: Vec<usize> = if acyclic {
            order[pos + 1..].to_vec()
        } else {
            (0..n).filter(|&w| w != v).collect()
        };
        let k = rng.gen_range(0..=bound.min(pool.len()));
        for &w in pool.choose_multiple(rng, k) {
            arcs.push((v, w));
        }
    }
    Digraph::from_arcs(n, arcs).expect("vertex count within range")
}

// --- oracles ----------------------------------------------------------------

/// Every injective map of the pattern into the host, checked pair by pair.
pub fn naive_contains(host: &Graph, pattern: &Graph) -> bool {
    fn extend(host: &Graph, pattern: &Graph, map: &mut Vec<usize>) -> bool {
        let i = map.len();
        if i == pattern.n() {
            return true;
        }
        for h in 0..host.n() {
            if map.contains(&h) || (0..i).any(|j| pattern.has_edge(i, j) != host.has_edge(h, map[j])) {
                continue;
            }
            map.push(h);
            if extend(host, pattern, map) {
                return true;
            }
            map.pop();
        }
        false
    }
    extend(host, pattern, &mut Vec::new())
}

fn is_induced_copy(host: &Graph, pattern: &Graph, map: &[usize]) -> bool {
    let mut seen = map.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len() == pattern.n()
        && map.len() == pattern.n()
        && (0..pattern.n()).all(|i| (0..i).all(|j| pattern.has_edge(i, j) == host.has_edge(map[i], map[j])))
}

fn is_proper(g: &Graph, c: &Coloring) -> bool {
    c.colors.len() == g.n() && g.edges().all(|(u, v)| c.colors[u] != c.colors[v])
}

fn palette(c: &Coloring) -> usize {
    let mut used = c.colors.clone();
    used.sort_unstable();
    used.dedup();
    used.len()
}

/// Each member has a neighbour outside the set adjacent to no other member.
fn matching_covered_naive(g: &Graph, x: &[usize]) -> bool {
    x.iter().all(|&v| {
        (0..g.n()).any(|w| !x.contains(&w) && g.has_edge(v, w) && x.iter().all(|&o| o == v || !g.has_edge(o, w)))
    })
}

// --- suites -----------------------------------------------------------------

fn containment(trials: usize, seed: u64, limits: &Limits) -> Result<SuiteOutcome> {
    run_trials("containment", trials, seed, |rng| {
        let hn = rng.gen_range(1..=8);
        let pn = rng.gen_range(1..=6);
        let p = rng.gen_range(0.1..0.8);
        let host = random_graph(rng, hn, p);
        let tree = random_tree(rng, pn);
        let handle = rng.gen_range(0..pn);
        let pattern = PatternTree::new(tree, handle)?;
        let got = trees::contains_induced(&host, &pattern, limits)?;
        let expected = naive_contains(&host, &pattern.tree);
        Ok(match got {
            Some(_) if !expected => Err(format!("matcher found a copy the oracle rejects: {host:?}")),
            None if expected => Err(format!("matcher missed a copy: {host:?} {:?}", pattern.tree)),
            Some(e) if !is_induced_copy(&host, &pattern.tree, &e.map) => Err(format!("embedding {:?} is not induced", e.map)),
            _ => Ok(()),
        })
    })
}

fn digraph(trials: usize, seed: u64) -> Result<SuiteOutcome> {
    run_trials("digraph", trials, seed, |rng| {
        let n = rng.gen_range(1..=60);
        let bound = rng.gen_range(1..=5);
        for (acyclic, cap) in [(false, 2 * bound + 1), (true, bound + 1)] {
            let d = random_digraph(rng, n, bound, acyclic);
            let c = template::color_bounded_outdegree(&d, bound)?;
            let g = d.underlying();
            if !is_proper(&g, &c) {
                return Ok(Err(format!("improper colouring, n={n}, bound={bound}, acyclic={acyclic}")));
            }
            if palette(&c) > cap {
                return Ok(Err(format!("{} colours, cap {cap}, acyclic={acyclic}", palette(&c))));
            }
        }
        Ok(Ok(()))
    })
}

fn gallai_roy(trials: usize, seed: u64) -> Result<SuiteOutcome> {
    run_trials("gallai-roy", trials, seed, |rng| {
        let n = rng.gen_range(1..=40);
        let bound = rng.gen_range(1..=4);
        let d = random_digraph(rng, n, bound, true);
        let labels = template::longest_path_labels(&d)?;
        if let Some((a, b)) = d.arcs().find(|&(a, b)| labels[a] >= labels[b]) {
            return Ok(Err(format!("label does not increase along arc {a}->{b}")));
        }
        let c = template::gallai_roy_color(&d)?;
        let longest = labels.iter().copied().max().unwrap_or(0);
        Ok(if !is_proper(&d.underlying(), &c) {
            Err("improper colouring".into())
        } else if palette(&c) > longest {
            Err(format!("{} colours for longest path on {longest} vertices", palette(&c)))
        } else {
            Ok(())
        })
    })
}

fn private_cover(trials: usize, seed: u64) -> Result<SuiteOutcome> {
    run_trials("private-cover", trials, seed, |rng| {
        let na = rng.gen_range(1..=5);
        let nb = rng.gen_range(0..=10);
        let n = na + nb;
        let mut e: Vec<(usize, usize)> = (na..n).map(|v| (rng.gen_range(0..na), v)).collect();
        e.extend(random_graph(rng, n, 0.25).edges());
        let g = Graph::from_edges(n, e)?;
        let a = VertexSet::full(na);
        let b = VertexSet::full(n).difference(&a);
        let d = rng.gen_range(0..=3);
        let pc = shadow::private_cover(&g, &a, &b, d)?;
        let ap: Vec<usize> = pc.a_prime.iter().collect();
        let bp: Vec<usize> = pc.b_prime.iter().collect();
        let nbrs = |v: usize, s: &[usize]| s.iter().filter(|&&w| g.has_edge(v, w)).count();
        if !pc.a_prime.is_subset(&a) || !pc.b_prime.is_subset(&b) {
            return Ok(Err("A′ or B′ escapes A or B".into()));
        }
        if let Some(v) = b.iter().find(|&v| !pc.b_prime.contains(v) && nbrs(v, &ap) == 0) {
            return Ok(Err(format!("A′ does not cover {v}")));
        }
        if pc.decomposition.len() != d {
            return Ok(Err(format!("{} decomposition sets for d={d}", pc.decomposition.len())));
        }
        let mut union = VertexSet::new();
        for x in &pc.decomposition {
            union.union_with(x);
            let xs: Vec<usize> = x.iter().collect();
            let naive = matching_covered_naive(&g, &xs);
            if naive != structures::is_matching_covered(&g, x)? {
                return Ok(Err(format!("matching-covered verdicts disagree on {xs:?}")));
            }
            if !naive {
                return Ok(Err(format!("{xs:?} is not matching-covered")));
            }
        }
        Ok(if union != pc.b_prime {
            Err("decomposition union differs from B′".into())
        } else if let Some(&v) = bp.iter().find(|&&v| nbrs(v, &ap) > 1) {
            Err(format!("{v} ∈ B′ has several neighbours in A′"))
        } else if let Some(&u) = ap.iter().find(|&&u| nbrs(u, &bp) != d) {
            Err(format!("{u} ∈ A′ has {} neighbours in B′, expected {d}", nbrs(u, &bp)))
        } else {
            Ok(())
        })
    })
}

/// `X` is an optimal colour class grown to a maximal stable set, so
/// `χ(G ∖ X) < χ(G)` by construction; the hypotheses are re-checked anyway.
fn stable_removal(trials: usize, seed: u64, limits: &Limits) -> Result<SuiteOutcome> {
    run_trials("stable-removal", trials, seed, |rng| {
        let n = rng.gen_range(2..=10);
        let p = rng.gen_range(0.2..0.8);
        let g = random_graph(rng, n, p);
        let (chi, col) = solvers::chromatic_number(&g, limits)?;
        let mut x = col.class(rng.gen_range(0..chi));
        for v in 0..n {
            if !x.contains(v) && !g.touches(v, &x) && rng.gen_bool(0.5) {
                x.insert(v);
            }
        }
        let d = rng.gen_range(0..chi);
        if !shadow::stable_removal_hypotheses(&g, &x, d, limits)? {
            return Ok(Err(format!("constructed instance misses the hypotheses: {g:?} {x:?} d={d}")));
        }
        let rest = g.vertices().difference(&x);
        Ok(match shadow::outside_heavy_vertex(&g, &x, d) {
            Some(v) if x.contains(v) && g.degree_into(v, &rest) >= d => Ok(()),
            Some(v) => Err(format!("returned vertex {v} is not a witness")),
            None => Err(format!("no witness in {x:?} for d={d}: {g:?}")),
        })
    })
}

/// Planted cores (one or two, with cross noise) and the fixture graphs,
/// n ≤ 40, τ ∈ {0, 1, 2}.
fn pipeline_suite(trials: usize, seed: u64, limits: &Limits) -> Result<SuiteOutcome> {
    let fixtures: Vec<Graph> = generators::FIXTURE_IDS
        .iter()
        .map(|id| generators::fixture(id).map(|f| f.graph))
        .collect::<broomlab_core::Result<_>>()?;
    let mut k = 0;
    run_trials("pipeline", trials, seed, |rng| {
        k += 1;
        let g = if k % 4 == 0 {
            fixtures[(k / 4) % fixtures.len()].clone()
        } else if k % 4 == 1 {
            let (g1, _) = generators::plant_core(rng.gen_range(6..=18), 2, 2, 0.15, rng.gen())?;
            let (g2, _) = generators::plant_core(rng.gen_range(6..=18), 2, 2, 0.15, rng.gen())?;
            let g = g1.disjoint_union(&g2)?;
            let mut e: Vec<(usize, usize)> = g.edges().collect();
            for _ in 0..rng.gen_range(0..6) {
                let (u, v) = (rng.gen_range(0..g1.n()), rng.gen_range(g1.n()..g.n()));
                e.push((u, v));
            }
            Graph::from_edges(g.n(), e)?
        } else {
            let (g, _) = generators::plant_core(rng.gen_range(4..=40), 2, 2, rng.gen_range(0.0..0.3), rng.gen())?;
            g
        };
        let tau = rng.gen_range(0..=2);
        let tr = pipeline::run_pipeline(&g, &fixture_params(tau), limits)?;
        Ok(if tr.stages.len() != 5 || !tr.stages.iter().all(|s| s.declared_holds) {
            Err(format!("stage failed: {g:?}"))
        } else if tr.leftover_core_free.value != Some(true) {
            Err(format!("leftover region holds a core or was skipped: {g:?}"))
        } else {
            Ok(())
        })
    })
}
