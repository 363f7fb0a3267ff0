//! Brooms, multibrooms and `T(δ)`; induced tree containment.
//!
//! Pattern layout: the handle is vertex 0. Each broom contributes its path
//! vertices (nearest the handle first) followed by its leaves, brooms in the
//! order given.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::set::VertexSet;
use crate::solvers::Limits;

/// One broom inside a multibroom: its shape and the pattern vertices it
/// occupies (handle excluded).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BroomTag {
    pub k: usize,
    pub leaves: usize,
    pub vertices: Vec<usize>,
}

/// A tree with a designated handle vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternTree {
    pub tree: Graph,
    pub handle: usize,
    pub broom_tags: Option<Vec<BroomTag>>,
}

impl PatternTree {
    /// Wraps a tree, checking it is connected and acyclic.
    pub fn new(tree: Graph, handle: usize) -> Result<PatternTree> {
        tree.check_vertex(handle)?;
        if tree.edge_count() + 1 != tree.n() || tree.component(handle)?.len() != tree.n() {
            return Err(Error::InvalidParameter("pattern is not a tree".into()));
        }
        Ok(PatternTree {
            tree,
            handle,
            broom_tags: None,
        })
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    /// Index of the broom realizing pattern vertex `v`, if tagged.
    pub fn broom_of(&self, v: usize) -> Option<usize> {
        self.broom_tags
            .as_ref()?
            .iter()
            .position(|t| t.vertices.contains(&v))
    }
}

/// Broom of length `k` with `leaves` extra leaves at the far end.
pub fn build_broom(k: usize, leaves: usize) -> Result<PatternTree> {
    build_multibroom(&[(k, leaves)])
}

/// Brooms `(kᵢ, leavesᵢ)` glued at a common handle.
pub fn build_multibroom(specs: &[(usize, usize)]) -> Result<PatternTree> {
    if specs.is_empty() {
        return Err(Error::InvalidParameter("multibroom needs at least one broom".into()));
    }
    if let Some(&(k, _)) = specs.iter().find(|(k, _)| *k == 0) {
        return Err(Error::InvalidParameter(format!("broom length {k} must be at least 1")));
    }
    let n = 1 + specs.iter().map(|(k, l)| k + l).sum::<usize>();
    let mut edges = Vec::with_capacity(n - 1);
    let mut tags = Vec::with_capacity(specs.len());
    let mut next = 1;
    for &(k, leaves) in specs {
        let mut vertices = Vec::with_capacity(k + leaves);
        let mut prev = 0;
        for _ in 0..k {
            edges.push((prev, next));
            vertices.push(next);
            prev = next;
            next += 1;
        }
        for _ in 0..leaves {
            edges.push((prev, next));
            vertices.push(next);
            next += 1;
        }
        tags.push(BroomTag { k, leaves, vertices });
    }
    let mut tree = PatternTree::new(Graph::from_edges(n, edges)?, 0)?;
    tree.broom_tags = Some(tags);
    Ok(tree)
}

/// Vertex count of `T(δ)`.
pub fn t_delta_order(delta: usize) -> usize {
    1 + delta * (2 * delta + 3)
}

/// `T(δ)`: δ `(1,δ)`-brooms then δ `(2,δ)`-brooms, glued at the handle.
#[allow(non_snake_case)]
pub fn build_T(delta: usize) -> Result<PatternTree> {
    if delta == 0 {
        return Err(Error::InvalidParameter("δ must be at least 1".into()));
    }
    let mut specs = vec![(1, delta); delta];
    specs.extend(vec![(2, delta); delta]);
    build_multibroom(&specs)
}

/// Injective map from pattern vertices to host vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub map: Vec<usize>,
}

impl Embedding {
    pub fn image(&self) -> VertexSet {
        self.map.iter().copied().collect()
    }

    /// True iff the map is injective and both adjacency and non-adjacency
    /// are preserved.
    pub fn verify(&self, host: &Graph, pattern: &Graph) -> bool {
        if self.map.len() != pattern.n() || self.map.iter().any(|&h| h >= host.n()) {
            return false;
        }
        if self.image().len() != self.map.len() {
            return false;
        }
        (0..pattern.n()).all(|a| {
            (a + 1..pattern.n())
                .all(|b| pattern.has_edge(a, b) == host.has_edge(self.map[a], self.map[b]))
        })
    }
}

struct Matcher<'a> {
    host: &'a Graph,
    pattern: &'a Graph,
    order: Vec<usize>,
    parent: Vec<usize>,
    allowed: VertexSet,
    eff_degree: Vec<usize>,
    map: Vec<usize>,
    used: VertexSet,
    /// Placed images adjacent to each host vertex.
    count: Vec<u32>,
}

impl<'a> Matcher<'a> {
    fn new(host: &'a Graph, pattern: &'a PatternTree, allowed: VertexSet, roots: &VertexSet) -> Self {
        let p = &pattern.tree;
        let mut order = vec![pattern.handle];
        let mut parent = vec![usize::MAX; p.n()];
        let mut seen = VertexSet::singleton(pattern.handle);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for w in p.neighbors(v).iter() {
                if seen.insert(w) {
                    parent[w] = v;
                    order.push(w);
                }
            }
        }
        let reach = allowed.union(roots);
        let eff_degree = (0..host.n()).map(|h| host.degree_into(h, &reach)).collect();
        Matcher {
            host,
            pattern: p,
            order,
            parent,
            allowed,
            eff_degree,
            map: vec![usize::MAX; p.n()],
            used: VertexSet::new(),
            count: vec![0; host.n()],
        }
    }

    fn place(&mut self, pv: usize, h: usize) {
        self.map[pv] = h;
        self.used.insert(h);
        for w in self.host.neighbors(h).iter() {
            self.count[w] += 1;
        }
    }

    fn unplace(&mut self, pv: usize, h: usize) {
        self.map[pv] = usize::MAX;
        self.used.remove(h);
        for w in self.host.neighbors(h).iter() {
            self.count[w] -= 1;
        }
    }

    fn extend(&mut self, i: usize) -> bool {
        if i == self.order.len() {
            return true;
        }
        let pv = self.order[i];
        let need = self.pattern.degree(pv);
        let anchor = self.map[self.parent[pv]];
        let mut cands = self.host.neighbors(anchor).intersection(&self.allowed);
        cands.difference_with(&self.used);
        for h in cands.iter() {
            // the parent must be the only placed neighbour
            if self.count[h] != 1 || self.eff_degree[h] < need {
                continue;
            }
            self.place(pv, h);
            if self.extend(i + 1) {
                return true;
            }
            self.unplace(pv, h);
        }
        false
    }

    fn run(mut self, roots: &VertexSet) -> Option<Embedding> {
        let handle = self.order[0];
        let need = self.pattern.degree(handle);
        for r in roots.iter() {
            if self.eff_degree[r] < need {
                continue;
            }
            self.place(handle, r);
            if self.extend(1) {
                return Some(Embedding { map: self.map });
            }
            self.unplace(handle, r);
        }
        None
    }
}

fn check_host(host: &Graph, limits: &Limits) -> Result<()> {
    if host.n() > limits.solver {
        return Err(Error::TooLarge {
            what: "induced containment",
            size: host.n(),
            limit: limits.solver,
        });
    }
    Ok(())
}

/// An induced copy of `pattern` in `host`, lexicographically least by
/// handle image then BFS order.
pub fn contains_induced(host: &Graph, pattern: &PatternTree, limits: &Limits) -> Result<Option<Embedding>> {
    check_host(host, limits)?;
    if pattern.n() > host.n() {
        return Ok(None);
    }
    let all = host.vertices();
    Ok(Matcher::new(host, pattern, all.clone(), &all).run(&all))
}

#[allow(non_snake_case)]
pub fn is_T_delta_free(host: &Graph, delta: usize, limits: &Limits) -> Result<bool> {
    let t = build_T(delta)?;
    Ok(contains_induced(host, &t, limits)?.is_none())
}

/// An induced `(k, leaves)`-broom with the given handle whose other vertices
/// lie in `allowed ∖ forbidden`.
pub fn find_rooted_broom(
    host: &Graph,
    handle: usize,
    k: usize,
    leaves: usize,
    allowed: &VertexSet,
    forbidden: &VertexSet,
    limits: &Limits,
) -> Result<Option<Embedding>> {
    check_host(host, limits)?;
    host.check_vertex(handle)?;
    host.check_set(allowed)?;
    host.check_set(forbidden)?;
    if forbidden.contains(handle) {
        return Err(Error::Precondition("handle is forbidden".into()));
    }
    if allowed.intersects(forbidden) {
        return Err(Error::Precondition("allowed and forbidden sets overlap".into()));
    }
    let broom = build_broom(k, leaves)?;
    let mut pool = allowed.difference(forbidden);
    pool.remove(handle);
    let root = VertexSet::singleton(handle);
    Ok(Matcher::new(host, &broom, pool, &root).run(&root))
}

/// Outcome of gluing broom embeddings into a `T(δ)` candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assembly {
    Found(Embedding),
    /// Host edge between vertices that are non-adjacent in `T(δ)`.
    CrossEdge(usize, usize),
    /// Missing host edge required by `T(δ)`.
    MissingEdge(usize, usize),
}

/// Glues δ `(1,δ)`-broom and δ `(2,δ)`-broom embeddings sharing `handle`
/// and verifies the union is an induced `T(δ)`.
#[allow(non_snake_case)]
pub fn assemble_T_delta(
    host: &Graph,
    handle: usize,
    delta: usize,
    short: &[Embedding],
    long: &[Embedding],
) -> Result<Assembly> {
    let t = build_T(delta)?;
    if short.len() != delta || long.len() != delta {
        return Err(Error::InvalidParameter(format!(
            "need {delta} pieces of each length, got {} and {}",
            short.len(),
            long.len()
        )));
    }
    let mut map = vec![handle];
    let mut seen = VertexSet::singleton(handle);
    for (piece, size) in short
        .iter()
        .map(|p| (p, 2 + delta))
        .chain(long.iter().map(|p| (p, 3 + delta)))
    {
        if piece.map.len() != size {
            return Err(Error::SizeMismatch {
                expected: size,
                found: piece.map.len(),
            });
        }
        if piece.map[0] != handle {
            return Err(Error::Precondition("piece does not start at the handle".into()));
        }
        for &h in &piece.map[1..] {
            host.check_vertex(h)?;
            if !seen.insert(h) {
                return Err(Error::Precondition(format!("pieces overlap at vertex {h}")));
            }
            map.push(h);
        }
    }
    for a in 0..t.n() {
        for b in a + 1..t.n() {
            let (x, y) = (map[a], map[b]);
            match (t.tree.has_edge(a, b), host.has_edge(x, y)) {
                (false, true) => return Ok(Assembly::CrossEdge(x.min(y), x.max(y))),
                (true, false) => return Ok(Assembly::MissingEdge(x.min(y), x.max(y))),
                _ => {}
            }
        }
    }
    Ok(Assembly::Found(Embedding { map }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn petersen() -> Graph {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        Graph::from_edges(10, outer.chain(spokes).chain(inner)).unwrap()
    }

    /// Independent oracle: every injective map, checked pair by pair.
    fn naive_contains(host: &Graph, pattern: &Graph) -> bool {
        fn go(host: &Graph, pattern: &Graph, map: &mut Vec<usize>) -> bool {
            let i = map.len();
            if i == pattern.n() {
                return true;
            }
            for h in 0..host.n() {
                if map.contains(&h) {
                    continue;
                }
                if (0..i).all(|j| pattern.has_edge(i, j) == host.has_edge(h, map[j])) {
                    map.push(h);
                    if go(host, pattern, map) {
                        return true;
                    }
                    map.pop();
                }
            }
            false
        }
        go(host, pattern, &mut Vec::new())
    }

    fn is_path(g: &Graph) -> bool {
        let degs: Vec<usize> = (0..g.n()).map(|v| g.degree(v)).collect();
        g.edge_count() + 1 == g.n()
            && g.component(0).unwrap().len() == g.n()
            && degs.iter().all(|&d| d <= 2)
    }

    #[test]
    fn broom_shapes() {
        let b = build_broom(1, 1).unwrap();
        assert!(is_path(&b.tree) && b.n() == 3 && b.tree.degree(b.handle) == 1);
        let b = build_broom(2, 1).unwrap();
        assert!(is_path(&b.tree) && b.n() == 4 && b.tree.degree(b.handle) == 1);
        let b = build_broom(2, 3).unwrap();
        assert_eq!(b.n(), 6);
        assert_eq!(b.tree.degree(2), 4);
        assert!(build_broom(0, 2).is_err());
    }

    #[test]
    fn multibroom_shapes() {
        let m = build_multibroom(&[(1, 1), (2, 1)]).unwrap();
        assert_eq!(m.n(), 6);
        assert!(is_path(&m.tree));
        let k2 = build_multibroom(&[(1, 0)]).unwrap();
        assert_eq!((k2.n(), k2.tree.edge_count()), (2, 1));
        let ds = build_multibroom(&[(1, 2), (1, 2)]).unwrap();
        assert_eq!(ds.n(), 7);
        assert_eq!(ds.tree.degree(ds.handle), 2);
        assert_eq!(ds.tree.degree(1), 3);
        assert!(build_multibroom(&[]).is_err());
        assert_eq!(m.broom_of(4), Some(1));
        assert_eq!(m.broom_of(0), None);
    }

    #[test]
    fn t_delta_sizes() {
        let t1 = build_T(1).unwrap();
        assert!(is_path(&t1.tree) && t1.n() == 6);
        let t2 = build_T(2).unwrap();
        assert_eq!((t2.n(), t2.tree.degree(t2.handle)), (15, 4));
        for d in 1..=5 {
            assert_eq!(build_T(d).unwrap().n(), 1 + d * (2 * d + 3));
        }
        assert_eq!(build_T(3).unwrap().n(), 28);
        assert!(build_T(0).is_err());
    }

    #[test]
    fn containment_examples() {
        let lim = Limits::default();
        let p6 = PatternTree::new(path(6), 0).unwrap();
        let e = contains_induced(&cycle(7), &p6, &lim).unwrap().unwrap();
        assert!(e.verify(&cycle(7), &p6.tree));
        let k4 = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let p3 = PatternTree::new(path(3), 0).unwrap();
        assert!(contains_induced(&k4, &p3, &lim).unwrap().is_none());
        assert!(contains_induced(&petersen(), &p6, &lim).unwrap().is_none());
        assert!(!naive_contains(&petersen(), &path(6)));
        assert!(is_T_delta_free(&petersen(), 1, &lim).unwrap());
        assert!(!is_T_delta_free(&cycle(7), 1, &lim).unwrap());
        assert!(is_T_delta_free(&cycle(14), 2, &lim).unwrap());
        assert!(is_T_delta_free(&path(14), 2, &lim).unwrap());
    }

    #[test]
    fn rooted_brooms() {
        let lim = Limits::default();
        // star K_{1,3}, handle = centre: the path vertex exists but cannot
        // carry 2 leaves
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let all = star.vertices();
        let none = VertexSet::new();
        assert!(find_rooted_broom(&star, 0, 1, 2, &all, &none, &lim).unwrap().is_none());
        // K_{2,3}: A = {0,1}, B = {2,3,4}; handle 2, path end 0, leaf 3
        let k23 = Graph::from_edges(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap();
        let e = find_rooted_broom(&k23, 2, 1, 1, &k23.vertices(), &none, &lim)
            .unwrap()
            .unwrap();
        assert_eq!(e.map, vec![2, 0, 3]);
        assert!(e.verify(&k23, &build_broom(1, 1).unwrap().tree));
        let forbid = k23.vertices().difference(&VertexSet::singleton(2));
        assert!(find_rooted_broom(&k23, 2, 1, 1, &VertexSet::new(), &forbid, &lim)
            .unwrap()
            .is_none());
        assert!(find_rooted_broom(&k23, 2, 1, 1, &all, &VertexSet::singleton(2), &lim).is_err());
    }

    #[test]
    fn assembly() {
        let c7 = cycle(7);
        // P6 = 5-4-3 | 0 ... handle 3? use handle 2: short 2-1-0, long 2-3-4-5
        let short = Embedding { map: vec![2, 1, 0] };
        let long = Embedding { map: vec![2, 3, 4, 5] };
        match assemble_T_delta(&c7, 2, 1, std::slice::from_ref(&short), &[long]).unwrap() {
            Assembly::Found(e) => assert!(e.verify(&c7, &build_T(1).unwrap().tree)),
            other => panic!("{other:?}"),
        }
        // in C6 the ends 0 and 5 are adjacent
        let c6 = cycle(6);
        let long = Embedding { map: vec![2, 3, 4, 5] };
        assert_eq!(
            assemble_T_delta(&c6, 2, 1, std::slice::from_ref(&short), &[long]).unwrap(),
            Assembly::CrossEdge(0, 5)
        );
        let overlap = Embedding { map: vec![2, 3, 4, 1] };
        assert!(assemble_T_delta(&c7, 2, 1, &[short], &[overlap]).is_err());
    }

    fn random_tree(rng: &mut impl Rng, n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|v| (rng.gen_range(0..v), v))).unwrap()
    }

    fn random_graph(rng: &mut impl Rng, n: usize) -> Graph {
        let p: f64 = rng.gen_range(0.1..0.8);
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect::<Vec<_>>()
            .into_iter()
            .filter(|_| rng.gen_bool(p))
            .collect();
        Graph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn matcher_agrees_with_naive_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let lim = Limits::default();
        for _ in 0..500 {
            let hn = rng.gen_range(1..=8);
            let pn = rng.gen_range(1..=6);
            let host = random_graph(&mut rng, hn);
            let tree = random_tree(&mut rng, pn);
            let handle = rng.gen_range(0..pn);
            let pattern = PatternTree::new(tree, handle).unwrap();
            let got = contains_induced(&host, &pattern, &lim).unwrap();
            assert_eq!(got.is_some(), naive_contains(&host, &pattern.tree));
            if let Some(e) = got {
                assert!(e.verify(&host, &pattern.tree));
            }
        }
    }

    #[test]
    fn freeness_is_hereditary() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let lim = Limits::default();
        for _ in 0..60 {
            let g = random_graph(&mut rng, 10);
            if !is_T_delta_free(&g, 1, &lim).unwrap() {
                continue;
            }
            let keep: VertexSet = (0..10).filter(|_| rng.gen_bool(0.7)).collect();
            let sub = g.induced(&keep).unwrap().graph;
            assert!(is_T_delta_free(&sub, 1, &lim).unwrap());
        }
    }
}
