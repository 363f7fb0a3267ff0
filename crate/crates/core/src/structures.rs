//! Cores, dense and η-mixed vertices, matching-covered sets, and the
//! five standing conditions on a host graph.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::set::VertexSet;
use crate::solvers::{self, Limits};
use crate::trees;

/// An `(a, b)`-core: `b` disjoint stable parts of size `a`, complete to
/// each other.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoreWitness {
    pub parts: Vec<VertexSet>,
}

impl CoreWitness {
    pub fn a(&self) -> usize {
        self.parts.first().map_or(0, |p| p.len())
    }

    pub fn b(&self) -> usize {
        self.parts.len()
    }

    pub fn vertices(&self) -> VertexSet {
        let mut all = VertexSet::new();
        for p in &self.parts {
            all.union_with(p);
        }
        all
    }

    /// Re-checks every core condition against `g`.
    pub fn verify(&self, g: &Graph) -> bool {
        let a = self.a();
        if a == 0 || self.parts.iter().any(|p| p.len() != a || p.bound() > g.n()) {
            return false;
        }
        if self.vertices().len() != a * self.b() {
            return false;
        }
        for (i, p) in self.parts.iter().enumerate() {
            if !g.is_stable(p).unwrap_or(false) {
                return false;
            }
            for q in &self.parts[i + 1..] {
                if p.iter().any(|u| !q.is_subset(g.neighbors(u))) {
                    return false;
                }
            }
        }
        true
    }
}

/// A non-decreasing function `ℕ → ℕ` given by a finite table and extended
/// by its last value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theta {
    pub table: Vec<u64>,
}

impl Theta {
    /// The identity on `0..=8`. An arbitrary placeholder: no useful table is
    /// known in general.
    pub fn identity() -> Theta {
        Theta {
            table: (0..=8).collect(),
        }
    }

    pub fn value(&self, a: usize) -> u64 {
        match self.table.get(a) {
            Some(&v) => v,
            None => self.table.last().copied().unwrap_or(0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.table.is_empty() {
            return Err(Error::InvalidParameter("theta table is empty".into()));
        }
        if self.table.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("theta table is not non-decreasing".into()));
        }
        Ok(())
    }
}

impl Default for Theta {
    fn default() -> Self {
        Theta::identity()
    }
}

/// Parameters shared by every stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub delta: usize,
    pub kappa: usize,
    pub tau: usize,
    pub alpha: usize,
    pub beta: usize,
    pub zeta: usize,
    pub eta: usize,
    pub theta: Theta,
}

impl Params {
    /// Smallest `η, ζ` meeting the cleaning side conditions:
    /// `η = δ`, `ζ = max(η, α) + δ`.
    pub fn minimal(delta: usize, tau: usize, alpha: usize, beta: usize) -> Params {
        let eta = delta;
        Params {
            delta,
            kappa: beta,
            tau,
            alpha,
            beta,
            zeta: eta.max(alpha) + delta,
            eta,
            theta: Theta::identity(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta < 1 {
            return Err(Error::InvalidParameter("δ must be at least 1".into()));
        }
        if self.alpha < 1 {
            return Err(Error::InvalidParameter("α must be at least 1".into()));
        }
        if self.beta < 2 {
            return Err(Error::InvalidParameter("β must be at least 2".into()));
        }
        self.theta.validate()
    }

    /// `η ≥ 1` and `ζ ≥ max(η, α)`: needed for template arrays.
    pub fn check_template_side(&self) -> Result<()> {
        self.validate()?;
        if self.eta < 1 || self.zeta < self.eta.max(self.alpha) {
            return Err(Error::Precondition(format!(
                "need η ≥ 1 and ζ ≥ max(η, α); got η={}, ζ={}, α={}",
                self.eta, self.zeta, self.alpha
            )));
        }
        Ok(())
    }

    /// `η ≥ δ` and `ζ ≥ max(η, α) + δ`: needed from 2-cleaning on.
    pub fn check_cleaning_side(&self) -> Result<()> {
        self.check_template_side()?;
        if self.eta < self.delta || self.zeta < self.eta.max(self.alpha) + self.delta {
            return Err(Error::Precondition(format!(
                "need η ≥ δ and ζ ≥ max(η, α) + δ; got η={}, ζ={}, δ={}",
                self.eta, self.zeta, self.delta
            )));
        }
        Ok(())
    }
}

impl Default for Params {
    fn default() -> Self {
        Params::minimal(1, 1, 1, 2)
    }
}

// --- cores ----------------------------------------------------------------

struct CoreSearch<'a> {
    g: &'a Graph,
    a: usize,
    b: usize,
    parts: Vec<Vec<usize>>,
}

impl CoreSearch<'_> {
    fn start_part(&mut self, pool: VertexSet) -> bool {
        let j = self.parts.len();
        if j == self.b {
            return true;
        }
        if pool.len() < self.a * (self.b - j) {
            return false;
        }
        let floor = self.parts.last().map_or(0, |p| p[0] + 1);
        for v in pool.iter().filter(|&v| v >= floor) {
            let cand: VertexSet = pool
                .difference(self.g.neighbors(v))
                .iter()
                .filter(|&w| w > v)
                .collect();
            let next = pool.intersection(self.g.neighbors(v));
            self.parts.push(vec![v]);
            if self.fill_part(cand, next) {
                return true;
            }
            self.parts.pop();
        }
        false
    }

    fn fill_part(&mut self, cand: VertexSet, next: VertexSet) -> bool {
        let j = self.parts.len() - 1;
        if self.parts[j].len() == self.a {
            return self.start_part(next);
        }
        let later = self.a * (self.b - j - 1);
        if next.len() < later || cand.len() < self.a - self.parts[j].len() {
            return false;
        }
        for w in cand.iter() {
            let next_w = next.intersection(self.g.neighbors(w));
            if next_w.len() < later {
                continue;
            }
            let cand_w: VertexSet = cand
                .difference(self.g.neighbors(w))
                .iter()
                .filter(|&x| x > w)
                .collect();
            self.parts[j].push(w);
            if self.fill_part(cand_w, next_w) {
                return true;
            }
            self.parts[j].pop();
        }
        false
    }
}

/// The lexicographically least `(a, b)`-core inside `within` (parts ordered
/// by least element), if any.
pub fn find_core_in(
    g: &Graph,
    within: &VertexSet,
    a: usize,
    b: usize,
    limits: &Limits,
) -> Result<Option<CoreWitness>> {
    if a == 0 || b == 0 {
        return Err(Error::InvalidParameter("core sizes must be at least 1".into()));
    }
    g.check_set(within)?;
    if within.len() > limits.solver {
        return Err(Error::TooLarge {
            what: "core search",
            size: within.len(),
            limit: limits.solver,
        });
    }
    let mut search = CoreSearch {
        g,
        a,
        b,
        parts: Vec::new(),
    };
    if search.start_part(within.clone()) {
        let parts = search.parts.iter().map(|p| p.iter().copied().collect()).collect();
        Ok(Some(CoreWitness { parts }))
    } else {
        Ok(None)
    }
}

pub fn find_core(g: &Graph, a: usize, b: usize, limits: &Limits) -> Result<Option<CoreWitness>> {
    find_core_in(g, &g.vertices(), a, b, limits)
}

/// Neighbour counts of `v` in each part of `core`.
pub fn part_counts(g: &Graph, v: usize, core: &CoreWitness) -> Vec<usize> {
    core.parts
        .iter()
        .map(|p| g.neighbors(v).intersection_len(p))
        .collect()
}

fn dense_counts(counts: &[usize], alpha: usize) -> bool {
    counts.iter().all(|&c| c >= alpha)
}

/// `v` (outside the core) has at least `α` neighbours in every part.
pub fn is_dense_to(g: &Graph, v: usize, core: &CoreWitness, alpha: usize) -> Result<bool> {
    g.check_vertex(v)?;
    if core.vertices().contains(v) {
        return Err(Error::Precondition(format!("vertex {v} lies in the core")));
    }
    Ok(dense_counts(&part_counts(g, v, core), alpha))
}

/// Core members are η-mixed; other vertices are η-mixed when not dense and
/// with at least `η` neighbours in some part.
pub fn is_eta_mixed(g: &Graph, v: usize, core: &CoreWitness, eta: usize, alpha: usize) -> Result<bool> {
    g.check_vertex(v)?;
    if core.vertices().contains(v) {
        return Ok(true);
    }
    let counts = part_counts(g, v, core);
    Ok(!dense_counts(&counts, alpha) && counts.iter().any(|&c| c >= eta))
}

/// All vertices outside the core that are dense to it.
pub fn dense_set(g: &Graph, core: &CoreWitness, alpha: usize) -> VertexSet {
    let y = core.vertices();
    g.vertices()
        .difference(&y)
        .iter()
        .filter(|&v| dense_counts(&part_counts(g, v, core), alpha))
        .collect()
}

/// All vertices η-mixed on the core, core included.
pub fn mixed_set(g: &Graph, core: &CoreWitness, eta: usize, alpha: usize) -> VertexSet {
    let y = core.vertices();
    g.vertices()
        .iter()
        .filter(|&v| {
            if y.contains(v) {
                return true;
            }
            let counts = part_counts(g, v, core);
            !dense_counts(&counts, alpha) && counts.iter().any(|&c| c >= eta)
        })
        .collect()
}

// --- matching-covered sets -------------------------------------------------

/// For each member of `x` (ascending), its lowest private outside neighbour,
/// or `None` if `x` is not matching-covered.
pub fn private_witnesses(g: &Graph, x: &VertexSet) -> Result<Option<Vec<(usize, usize)>>> {
    g.check_set(x)?;
    let mut out = Vec::with_capacity(x.len());
    for v in x.iter() {
        let private = g
            .neighbors(v)
            .difference(x)
            .iter()
            .find(|&y| g.neighbors(y).intersection_len(x) == 1);
        match private {
            Some(y) => out.push((v, y)),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

pub fn is_matching_covered(g: &Graph, x: &VertexSet) -> Result<bool> {
    Ok(private_witnesses(g, x)?.is_some())
}

/// Result of scanning matching-covered sets for `χ > τ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum McVerdict {
    /// Every matching-covered set was examined.
    AllWithin { maximal_sets: usize },
    /// Sampling only: no violation seen, nothing proved.
    NoViolationInSample { samples: usize },
    /// A matching-covered set with `χ > τ`, shrunk greedily.
    Violation { set: VertexSet, chi: usize },
}

impl McVerdict {
    pub fn passes(&self) -> bool {
        !matches!(self, McVerdict::Violation { .. })
    }
}

struct McScan<'a> {
    g: &'a Graph,
    tau: usize,
    limits: &'a Limits,
    maximal: usize,
    found: Option<VertexSet>,
}

impl McScan<'_> {
    fn is_maximal(&self, x: &VertexSet) -> Result<bool> {
        for v in self.g.vertices().difference(x).iter() {
            let mut y = x.clone();
            y.insert(v);
            if is_matching_covered(self.g, &y)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn walk(&mut self, next: usize, x: &mut VertexSet) -> Result<()> {
        if self.found.is_some() {
            return Ok(());
        }
        if next == self.g.n() {
            if self.is_maximal(x)? {
                self.maximal += 1;
                if !solvers::chi_at_most(self.g, x, self.tau, self.limits)? {
                    self.found = Some(x.clone());
                }
            }
            return Ok(());
        }
        x.insert(next);
        if is_matching_covered(self.g, x)? {
            self.walk(next + 1, x)?;
        }
        x.remove(next);
        self.walk(next + 1, x)
    }
}

fn shrink_violation(g: &Graph, mut set: VertexSet, tau: usize, limits: &Limits) -> Result<(VertexSet, usize)> {
    for v in set.to_vec() {
        let mut smaller = set.clone();
        smaller.remove(v);
        if !solvers::chi_at_most(g, &smaller, tau, limits)? {
            set = smaller;
        }
    }
    let chi = solvers::chromatic_number_of(g, &set, limits)?;
    Ok((set, chi))
}

/// Checks that every matching-covered set has `χ ≤ τ`: exhaustively up to
/// the exhaustive limit, by seeded greedy sampling above it.
pub fn max_matching_covered_chi(
    g: &Graph,
    tau: usize,
    limits: &Limits,
    samples: usize,
    seed: u64,
) -> Result<McVerdict> {
    if g.n() <= limits.exhaustive {
        let mut scan = McScan {
            g,
            tau,
            limits,
            maximal: 0,
            found: None,
        };
        scan.walk(0, &mut VertexSet::new())?;
        return match scan.found {
            Some(set) => {
                let (set, chi) = shrink_violation(g, set, tau, limits)?;
                Ok(McVerdict::Violation { set, chi })
            }
            None => Ok(McVerdict::AllWithin {
                maximal_sets: scan.maximal,
            }),
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..g.n()).collect();
    for _ in 0..samples {
        order.shuffle(&mut rng);
        let mut x = VertexSet::new();
        for &v in &order {
            x.insert(v);
            if !is_matching_covered(g, &x)? {
                x.remove(v);
            }
        }
        if !solvers::chi_at_most(g, &x, tau, limits)? {
            let (set, chi) = shrink_violation(g, x, tau, limits)?;
            return Ok(McVerdict::Violation { set, chi });
        }
    }
    Ok(McVerdict::NoViolationInSample { samples })
}

// --- conditions -----------------------------------------------------------

/// Verdict on one standing condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub holds: bool,
    /// False when the verdict rests on sampling.
    pub exhaustive: bool,
    pub detail: String,
}

impl ConditionVerdict {
    fn exact(holds: bool, detail: String) -> Self {
        ConditionVerdict {
            holds,
            exhaustive: true,
            detail,
        }
    }
}

/// Verdicts on conditions (i)-(v) for one graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub t_delta_free: ConditionVerdict,
    pub chi2_bounded: ConditionVerdict,
    pub matching_covered_bounded: ConditionVerdict,
    pub cores_forced: ConditionVerdict,
    pub no_wide_core: ConditionVerdict,
}

impl ConditionReport {
    pub fn verdicts(&self) -> [&ConditionVerdict; 5] {
        [
            &self.t_delta_free,
            &self.chi2_bounded,
            &self.matching_covered_bounded,
            &self.cores_forced,
            &self.no_wide_core,
        ]
    }

    pub fn all_hold(&self) -> bool {
        self.verdicts().iter().all(|v| v.holds)
    }

    /// All five hold and none rests on sampling.
    pub fn verified(&self) -> bool {
        self.verdicts().iter().all(|v| v.holds && v.exhaustive)
    }
}

/// Checks (i)-(v). Condition (iv) is checked only for the arguments
/// `a ≥ 1` listed in the theta table.
pub fn check_conditions(g: &Graph, p: &Params, limits: &Limits, samples: usize, seed: u64) -> Result<ConditionReport> {
    p.validate()?;
    let free = trees::is_T_delta_free(g, p.delta, limits)?;
    let t_delta_free = ConditionVerdict::exact(free, format!("T({})-free: {free}", p.delta));

    let chi2 = solvers::chi_local(g, 2, limits)?;
    let chi2_bounded = ConditionVerdict::exact(chi2 <= p.tau, format!("χ² = {chi2}, τ = {}", p.tau));

    let mc = max_matching_covered_chi(g, p.tau, limits, samples, seed)?;
    let matching_covered_bounded = ConditionVerdict {
        holds: mc.passes(),
        exhaustive: !matches!(mc, McVerdict::NoViolationInSample { .. }),
        detail: match &mc {
            McVerdict::AllWithin { maximal_sets } => format!("{maximal_sets} maximal sets checked"),
            McVerdict::NoViolationInSample { samples } => format!("{samples} samples, no violation"),
            McVerdict::Violation { set, chi } => format!("{set:?} has χ = {chi}"),
        },
    };

    let chi = solvers::chromatic_number(g, limits)?.0 as u64;
    let mut forced = true;
    let mut detail = format!("χ = {chi}");
    for a in 1..p.theta.table.len() {
        if chi > p.theta.value(a) && find_core(g, a, p.beta, limits)?.is_none() {
            forced = false;
            detail = format!("χ = {chi} > θ({a}) = {} but no ({a},{})-core", p.theta.value(a), p.beta);
            break;
        }
    }
    let cores_forced = ConditionVerdict::exact(forced, detail);

    let wide = find_core(g, p.alpha, p.beta + 1, limits)?;
    let no_wide_core = ConditionVerdict::exact(
        wide.is_none(),
        match &wide {
            Some(c) => format!("({},{})-core {:?}", p.alpha, p.beta + 1, c.parts),
            None => format!("no ({},{})-core", p.alpha, p.beta + 1),
        },
    );

    Ok(ConditionReport {
        t_delta_free,
        chi2_bounded,
        matching_covered_bounded,
        cores_forced,
        no_wide_core,
    })
}
