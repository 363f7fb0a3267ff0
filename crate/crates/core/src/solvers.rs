//! Exact chromatic number, clique number and the local measure `χᵏ`.
//!
//! All solvers are exact and refuse instances above their configured limit
//! rather than approximating.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::set::VertexSet;

/// Size limits for the exact solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest vertex count handed to an exact colouring or clique search.
    pub solver: usize,
    /// Largest vertex count for exhaustive subset scans.
    pub exhaustive: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            solver: 64,
            exhaustive: 16,
        }
    }
}

impl Limits {
    pub fn with_solver(solver: usize) -> Self {
        Limits {
            solver,
            ..Limits::default()
        }
    }

    fn check(&self, what: &'static str, size: usize) -> Result<()> {
        if size > self.solver {
            return Err(Error::TooLarge {
                what,
                size,
                limit: self.solver,
            });
        }
        Ok(())
    }
}

/// A vertex colouring `colors[v] ∈ 0..palette_size`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub colors: Vec<usize>,
    pub palette_size: usize,
}

impl Coloring {
    /// Builds a colouring whose palette is exactly the colours used.
    pub fn from_colors(colors: Vec<usize>) -> Coloring {
        let palette_size = colors.iter().map(|&c| c + 1).max().unwrap_or(0);
        Coloring {
            colors,
            palette_size,
        }
    }

    /// Number of distinct colours actually used.
    pub fn used(&self) -> usize {
        let mut seen = VertexSet::new();
        seen.extend(self.colors.iter().copied());
        seen.len()
    }

    /// Vertices receiving colour `c`.
    pub fn class(&self, c: usize) -> VertexSet {
        self.colors
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == c)
            .map(|(v, _)| v)
            .collect()
    }

    /// Colour classes `0..palette_size`, empty ones included.
    pub fn classes(&self) -> Vec<VertexSet> {
        let mut out = vec![VertexSet::new(); self.palette_size];
        for (v, &c) in self.colors.iter().enumerate() {
            if c < out.len() {
                out[c].insert(v);
            }
        }
        out
    }
}

/// True iff `c` colours every vertex of `g` within its palette and no edge
/// is monochromatic.
pub fn validate_coloring(g: &Graph, c: &Coloring) -> Result<bool> {
    if c.colors.len() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            found: c.colors.len(),
        });
    }
    if c.colors.iter().any(|&x| x >= c.palette_size) {
        return Ok(false);
    }
    Ok(g.edges().all(|(u, v)| c.colors[u] != c.colors[v]))
}

// --- clique ---------------------------------------------------------------

/// Greedy colour-class ordering used as the branch-and-bound bound.
fn color_sort(g: &Graph, p: &VertexSet) -> (Vec<usize>, Vec<usize>) {
    let mut order = Vec::with_capacity(p.len());
    let mut bounds = Vec::with_capacity(p.len());
    let mut uncolored = p.clone();
    let mut k = 0;
    while !uncolored.is_empty() {
        k += 1;
        let mut q = uncolored.clone();
        while let Some(v) = q.first() {
            q.remove(v);
            q.difference_with(g.neighbors(v));
            uncolored.remove(v);
            order.push(v);
            bounds.push(k);
        }
    }
    (order, bounds)
}

fn expand_clique(g: &Graph, current: &mut Vec<usize>, mut p: VertexSet, best: &mut Vec<usize>) {
    let (order, bounds) = color_sort(g, &p);
    for idx in (0..order.len()).rev() {
        if current.len() + bounds[idx] <= best.len() {
            return;
        }
        let v = order[idx];
        current.push(v);
        let next = p.intersection(g.neighbors(v));
        if next.is_empty() {
            if current.len() > best.len() {
                best.clone_from(current);
            }
        } else {
            expand_clique(g, current, next, best);
        }
        current.pop();
        p.remove(v);
    }
}

/// Maximum clique inside `within`.
pub fn max_clique_in(g: &Graph, within: &VertexSet, limits: &Limits) -> Result<VertexSet> {
    g.check_set(within)?;
    limits.check("clique", within.len())?;
    let mut best = Vec::new();
    expand_clique(g, &mut Vec::new(), within.clone(), &mut best);
    Ok(best.into_iter().collect())
}

/// `ω(g)` with a witness clique.
pub fn clique_number(g: &Graph, limits: &Limits) -> Result<(usize, VertexSet)> {
    let clique = max_clique_in(g, &g.vertices(), limits)?;
    Ok((clique.len(), clique))
}

/// Maximum stable set inside `within`.
pub fn max_stable_in(g: &Graph, within: &VertexSet, limits: &Limits) -> Result<VertexSet> {
    g.check_set(within)?;
    limits.check("stable set", within.len())?;
    let sub = g.induced(within)?;
    let local = max_clique_in(&sub.graph.complement(), &sub.graph.vertices(), limits)?;
    Ok(sub.to_host(&local))
}

// --- colouring ------------------------------------------------------------

struct KColor<'a> {
    g: &'a Graph,
    k: usize,
    color: Vec<Option<usize>>,
    /// `count[v * k + c]`: coloured neighbours of `v` with colour `c`.
    count: Vec<u32>,
    sat: Vec<usize>,
    uncolored: VertexSet,
}

impl<'a> KColor<'a> {
    fn new(g: &'a Graph, k: usize) -> Self {
        KColor {
            g,
            k,
            color: vec![None; g.n()],
            count: vec![0; g.n() * k],
            sat: vec![0; g.n()],
            uncolored: g.vertices(),
        }
    }

    /// Colours `v` with `c`; returns false if some neighbour is left with no
    /// available colour (the assignment is still applied).
    fn assign(&mut self, v: usize, c: usize) -> bool {
        self.color[v] = Some(c);
        self.uncolored.remove(v);
        let mut ok = true;
        for w in self.g.neighbors(v).iter() {
            let slot = &mut self.count[w * self.k + c];
            *slot += 1;
            if *slot == 1 {
                self.sat[w] += 1;
                if self.color[w].is_none() && self.sat[w] == self.k {
                    ok = false;
                }
            }
        }
        ok
    }

    fn unassign(&mut self, v: usize, c: usize) {
        self.color[v] = None;
        self.uncolored.insert(v);
        for w in self.g.neighbors(v).iter() {
            let slot = &mut self.count[w * self.k + c];
            *slot -= 1;
            if *slot == 0 {
                self.sat[w] -= 1;
            }
        }
    }

    /// Max saturation, then max uncoloured degree, then lowest index.
    fn pick(&self) -> Option<usize> {
        let mut best: Option<(usize, usize, usize)> = None;
        for v in self.uncolored.iter() {
            let key = (self.sat[v], self.g.degree_into(v, &self.uncolored));
            match best {
                Some((s, d, _)) if (s, d) >= key => {}
                _ => best = Some((key.0, key.1, v)),
            }
        }
        best.map(|(_, _, v)| v)
    }

    fn search(&mut self, used: usize) -> bool {
        let v = match self.pick() {
            None => return true,
            Some(v) => v,
        };
        // colours >= used are interchangeable, so only the first is tried
        let top = core::cmp::min(self.k, used + 1);
        for c in 0..top {
            if self.count[v * self.k + c] > 0 {
                continue;
            }
            let ok = self.assign(v, c);
            if ok && self.search(core::cmp::max(used, c + 1)) {
                return true;
            }
            self.unassign(v, c);
        }
        false
    }
}

/// Decides `k`-colourability exactly; `seed_clique` members are pre-coloured
/// `0, 1, ..` for symmetry breaking.
fn k_colorable(g: &Graph, k: usize, seed_clique: &[usize]) -> Option<Coloring> {
    if g.n() == 0 {
        return Some(Coloring::from_colors(Vec::new()));
    }
    if k == 0 || seed_clique.len() > k {
        return None;
    }
    let mut state = KColor::new(g, k);
    for (c, &v) in seed_clique.iter().enumerate() {
        if !state.assign(v, c) {
            return None;
        }
    }
    if !state.search(seed_clique.len()) {
        return None;
    }
    let colors = state.color.into_iter().map(|c| c.unwrap_or(0)).collect();
    Some(Coloring {
        colors,
        palette_size: k,
    })
}

/// Exact `k`-colourability test with a witness.
pub fn is_colorable(g: &Graph, k: usize, limits: &Limits) -> Result<Option<Coloring>> {
    limits.check("colouring", g.n())?;
    let (_, clique) = clique_number(g, limits)?;
    if clique.len() > k {
        return Ok(None);
    }
    Ok(k_colorable(g, k, &clique.to_vec()))
}

/// DSATUR greedy colouring: proper, but only an upper bound on `χ`.
pub fn greedy_coloring(g: &Graph) -> Coloring {
    let n = g.n();
    let mut color: Vec<Option<usize>> = vec![None; n];
    let mut seen: Vec<VertexSet> = vec![VertexSet::new(); n];
    let mut uncolored = g.vertices();
    while !uncolored.is_empty() {
        let mut best: Option<(usize, usize, usize)> = None;
        for v in uncolored.iter() {
            let key = (seen[v].len(), g.degree_into(v, &uncolored));
            match best {
                Some((s, d, _)) if (s, d) >= key => {}
                _ => best = Some((key.0, key.1, v)),
            }
        }
        let v = best.map(|b| b.2).unwrap_or(0);
        let c = (0..).find(|c| !seen[v].contains(*c)).unwrap_or(0);
        color[v] = Some(c);
        uncolored.remove(v);
        for w in g.neighbors(v).iter() {
            seen[w].insert(c);
        }
    }
    Coloring::from_colors(color.into_iter().map(|c| c.unwrap_or(0)).collect())
}

/// `χ(g)` with a proper colouring using exactly `χ(g)` colours.
pub fn chromatic_number(g: &Graph, limits: &Limits) -> Result<(usize, Coloring)> {
    limits.check("chromatic number", g.n())?;
    if g.n() == 0 {
        return Ok((0, Coloring::from_colors(Vec::new())));
    }
    let (omega, clique) = clique_number(g, limits)?;
    let upper = greedy_coloring(g);
    let seed = clique.to_vec();
    for k in omega..upper.palette_size {
        if let Some(c) = k_colorable(g, k, &seed) {
            return Ok((k, Coloring::from_colors(c.colors)));
        }
    }
    Ok((upper.palette_size, upper))
}

/// `χ(G[s])`.
pub fn chromatic_number_of(g: &Graph, s: &VertexSet, limits: &Limits) -> Result<usize> {
    limits.check("chromatic number", s.len())?;
    let sub = g.induced(s)?;
    Ok(chromatic_number(&sub.graph, limits)?.0)
}

/// `χ(G[s]) <= k`, decided without computing `χ` itself.
pub fn chi_at_most(g: &Graph, s: &VertexSet, k: usize, limits: &Limits) -> Result<bool> {
    limits.check("colouring", s.len())?;
    let sub = g.induced(s)?;
    Ok(is_colorable(&sub.graph, k, limits)?.is_some())
}

/// `χᵏ(g)`: the largest chromatic number of a radius-`k` ball; 0 for the
/// null graph.
pub fn chi_local(g: &Graph, k: usize, limits: &Limits) -> Result<usize> {
    let mut balls: BTreeMap<VertexSet, ()> = BTreeMap::new();
    for v in 0..g.n() {
        let ball = g.neighborhood_closed(v, k)?;
        limits.check("ball chromatic number", ball.len())?;
        balls.insert(ball, ());
    }
    let mut best = 0;
    for ball in balls.keys() {
        best = core::cmp::max(best, chromatic_number_of(g, ball, limits)?);
    }
    Ok(best)
}
