//! Immutable simple graphs and digraphs over dense vertex ids.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::VertexSet;

/// Largest vertex count any graph may have.
pub const MAX_VERTICES: usize = 1024;

/// A simple undirected graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<VertexSet>,
}

/// An induced subgraph together with the order-preserving relabelling that
/// produced it: local vertex `i` is host vertex `map[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Induced {
    pub graph: Graph,
    pub map: Vec<usize>,
}

impl Induced {
    pub fn to_host(&self, local: &VertexSet) -> VertexSet {
        local.iter().map(|v| self.map[v]).collect()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_VERTICES {
        return Err(Error::GraphTooLarge { n, max: MAX_VERTICES });
    }
    Ok(())
}

impl Graph {
    /// The edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Graph> {
        check_n(n)?;
        Ok(Graph {
            adj: vec![VertexSet::new(); n],
        })
    }

    /// Builds a graph from an edge list. Repeated edges collapse.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n)?;
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.n();
        for w in [u, v] {
            if w >= n {
                return Err(Error::VertexOutOfRange { vertex: w, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        Ok(())
    }

    /// Builds from adjacency sets, symmetrizing them.
    pub fn from_adjacency(adj: Vec<VertexSet>) -> Result<Graph> {
        let n = adj.len();
        let mut g = Graph::empty(n)?;
        for (u, set) in adj.iter().enumerate() {
            for v in set {
                g.add_edge(u, v)?;
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(VertexSet::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].contains(v)
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, set)| set.iter().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.n() });
        }
        Ok(())
    }

    pub fn check_set(&self, s: &VertexSet) -> Result<()> {
        match s.last() {
            Some(v) if v >= self.n() => Err(Error::VertexOutOfRange { vertex: v, n: self.n() }),
            _ => Ok(()),
        }
    }

    /// Number of neighbours of `v` inside `s`.
    pub fn degree_into(&self, v: usize, s: &VertexSet) -> usize {
        self.adj[v].intersection_len(s)
    }

    /// Does `v` have a neighbour in `s`?
    pub fn touches(&self, v: usize, s: &VertexSet) -> bool {
        self.adj[v].intersects(s)
    }

    /// Union of the open neighbourhoods of the members of `s`.
    pub fn neighborhood_of_set(&self, s: &VertexSet) -> VertexSet {
        let mut out = VertexSet::new();
        for v in s {
            out.union_with(&self.adj[v]);
        }
        out
    }

    /// BFS distances from `v`, `None` for unreachable vertices.
    pub fn distances(&self, v: usize) -> Result<Vec<Option<usize>>> {
        self.check_vertex(v)?;
        let mut dist = vec![None; self.n()];
        dist[v] = Some(0);
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    /// `N^k(v)`: vertices at distance exactly `k` from `v`.
    pub fn neighborhood_exact(&self, v: usize, k: usize) -> Result<VertexSet> {
        let dist = self.distances(v)?;
        Ok(dist
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == Some(k))
            .map(|(u, _)| u)
            .collect())
    }

    /// `N^k[v]`: vertices at distance at most `k` from `v`.
    pub fn neighborhood_closed(&self, v: usize, k: usize) -> Result<VertexSet> {
        self.check_vertex(v)?;
        let mut ball = VertexSet::singleton(v);
        let mut frontier = ball.clone();
        for _ in 0..k {
            let next = self.neighborhood_of_set(&frontier).difference(&ball);
            if next.is_empty() {
                break;
            }
            ball.union_with(&next);
            frontier = next;
        }
        Ok(ball)
    }

    /// `G[s]`, relabelled in increasing host order.
    pub fn induced(&self, s: &VertexSet) -> Result<Induced> {
        self.check_set(s)?;
        let map = s.to_vec();
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in map.iter().enumerate() {
            local[v] = i;
        }
        let adj = map
            .iter()
            .map(|&v| self.adj[v].intersection(s).iter().map(|w| local[w]).collect())
            .collect();
        Ok(Induced {
            graph: Graph { adj },
            map,
        })
    }

    pub fn is_stable(&self, s: &VertexSet) -> Result<bool> {
        self.check_set(s)?;
        Ok(s.iter().all(|v| !self.adj[v].intersects(s)))
    }

    pub fn is_clique(&self, s: &VertexSet) -> Result<bool> {
        self.check_set(s)?;
        let k = s.len();
        Ok(s.iter().all(|v| self.adj[v].intersection_len(s) + 1 == k))
    }

    pub fn complement(&self) -> Graph {
        let n = self.n();
        let adj = (0..n)
            .map(|v| {
                let mut s = VertexSet::full(n).difference(&self.adj[v]);
                s.remove(v);
                s
            })
            .collect();
        Graph { adj }
    }

    /// Disjoint union: `other`'s vertices are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Result<Graph> {
        let shift = self.n();
        let edges = self
            .edges()
            .chain(other.edges().map(|(u, v)| (u + shift, v + shift)));
        Graph::from_edges(self.n() + other.n(), edges)
    }

    /// Vertex set of the connected component containing `v`.
    pub fn component(&self, v: usize) -> Result<VertexSet> {
        self.neighborhood_closed(v, self.n())
    }
}

impl core::fmt::Debug for Graph {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Graph(n={}, edges=", self.n())?;
        f.debug_list().entries(self.edges()).finish()?;
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        GraphRepr {
            n: self.n(),
            edges: self.edges().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let repr = GraphRepr::deserialize(d)?;
        Graph::from_edges(repr.n, repr.edges).map_err(serde::de::Error::custom)
    }
}

/// A directed graph on `0..n` without self-arcs; parallel arcs collapse.
#[derive(Clone, PartialEq, Eq)]
pub struct Digraph {
    out: Vec<VertexSet>,
}

impl Digraph {
    pub fn empty(n: usize) -> Result<Digraph> {
        check_n(n)?;
        Ok(Digraph {
            out: vec![VertexSet::new(); n],
        })
    }

    pub fn from_arcs<I>(n: usize, arcs: I) -> Result<Digraph>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut d = Digraph::empty(n)?;
        for (u, v) in arcs {
            d.add_arc(u, v)?;
        }
        Ok(d)
    }

    pub fn add_arc(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.n();
        for w in [u, v] {
            if w >= n {
                return Err(Error::VertexOutOfRange { vertex: w, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        self.out[u].insert(v);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn out_neighbors(&self, v: usize) -> &VertexSet {
        &self.out[v]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].len()
    }

    pub fn max_out_degree(&self) -> usize {
        self.out.iter().map(VertexSet::len).max().unwrap_or(0)
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, set)| set.iter().map(move |v| (u, v)))
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(VertexSet::len).sum()
    }

    /// The underlying simple graph (antiparallel arcs become one edge).
    pub fn underlying(&self) -> Graph {
        let mut adj = self.out.clone();
        for (u, v) in self.arcs() {
            adj[v].insert(u);
        }
        Graph { adj }
    }

    /// A topological order (lowest-index-first Kahn), or the vertex of some
    /// directed cycle when none exists.
    pub fn topological_order(&self) -> core::result::Result<Vec<usize>, usize> {
        let n = self.n();
        let mut indeg = vec![0usize; n];
        for (_, v) in self.arcs() {
            indeg[v] += 1;
        }
        let mut ready: VertexSet = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = ready.first() {
            ready.remove(u);
            order.push(u);
            for v in &self.out[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    ready.insert(v);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err((0..n).find(|&v| indeg[v] > 0).unwrap_or(0))
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }
}

impl core::fmt::Debug for Digraph {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Digraph(n={}, arcs=", self.n())?;
        f.debug_list().entries(self.arcs()).finish()?;
        write!(f, ")")
    }
}
