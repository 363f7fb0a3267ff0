//! JSON reports. Field order is fixed by declaration order; every numeric
//! result carries its provenance.

use std::time::Instant;

use broomlab_core::structures::{self, CoreWitness, Params};
use broomlab_core::{solvers, trees, Error as CoreError, Graph, Limits};
use serde::Serialize;

use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Computed by an exact solver.
    Exact,
    /// Computed by an independent brute-force oracle.
    Oracle,
    /// Not computed; `reason` says why.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tagged<T> {
    pub value: Option<T>,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl<T> Tagged<T> {
    pub fn exact(value: T) -> Tagged<T> {
        Tagged {
            value: Some(value),
            provenance: Provenance::Exact,
            reason: None,
        }
    }

    pub fn oracle(value: T) -> Tagged<T> {
        Tagged {
            value: Some(value),
            provenance: Provenance::Oracle,
            reason: None,
        }
    }

    pub fn skipped(reason: impl Into<String>) -> Tagged<T> {
        Tagged {
            value: None,
            provenance: Provenance::Skipped,
            reason: Some(reason.into()),
        }
    }

    /// Solver refusals become skipped values; other errors propagate.
    pub fn from_solver(r: broomlab_core::Result<T>) -> Result<Tagged<T>> {
        match r {
            Ok(v) => Ok(Tagged::exact(v)),
            Err(e @ (CoreError::TooLarge { .. } | CoreError::GraphTooLarge { .. })) => {
                Ok(Tagged::skipped(e.to_string()))
            }
            Err(e) => Err(e.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instance {
    pub source: String,
    pub n: usize,
    pub m: usize,
}

impl Instance {
    pub fn new(source: impl Into<String>, g: &Graph) -> Instance {
        Instance {
            source: source.into(),
            n: g.n(),
            m: g.edge_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BestCore {
    pub a: usize,
    pub b: usize,
    pub witness: CoreWitness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Analysis {
    pub omega: Tagged<usize>,
    pub chi: Tagged<usize>,
    pub chi1: Tagged<usize>,
    pub chi2: Tagged<usize>,
    pub t_delta_free: Tagged<bool>,
    /// Largest `a·b` over `(a, b)`-cores with `b ≥ 2`; ties go to larger `b`.
    pub best_core: Tagged<Option<BestCore>>,
}

/// Wall-clock milliseconds per step, present only when requested.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings(pub Vec<(String, f64)>);

impl Timings {
    pub fn time<T>(&mut self, enabled: bool, step: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if enabled {
            self.0.push((step.into(), start.elapsed().as_secs_f64() * 1e3));
        }
        out
    }
}

/// Common envelope of every report.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub command: String,
    pub version: &'static str,
    pub instance: Instance,
    pub params: Params,
    pub seed: u64,
    pub limits: Limits,
    pub result: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl<T: Serialize> Report<T> {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn best_core(g: &Graph, limits: &Limits) -> broomlab_core::Result<Option<BestCore>> {
    let mut best: Option<BestCore> = None;
    let mut a = 1;
    while 2 * a <= g.n() {
        let mut found = None;
        let mut b = 2;
        while a * b <= g.n() {
            match structures::find_core(g, a, b, limits)? {
                Some(w) => found = Some((b, w)),
                None => break,
            }
            b += 1;
        }
        let Some((b, witness)) = found else { break };
        if best.as_ref().is_none_or(|c| (a * b, b) > (c.a * c.b, c.b)) {
            best = Some(BestCore { a, b, witness });
        }
        a += 1;
    }
    Ok(best)
}

pub fn analyze(g: &Graph, delta: usize, limits: &Limits, timings: &mut Timings, timed: bool) -> Result<Analysis> {
    Ok(Analysis {
        omega: timings.time(timed, "omega", || {
            Tagged::from_solver(solvers::clique_number(g, limits).map(|x| x.0))
        })?,
        chi: timings.time(timed, "chi", || {
            Tagged::from_solver(solvers::chromatic_number(g, limits).map(|x| x.0))
        })?,
        chi1: timings.time(timed, "chi1", || Tagged::from_solver(solvers::chi_local(g, 1, limits)))?,
        chi2: timings.time(timed, "chi2", || Tagged::from_solver(solvers::chi_local(g, 2, limits)))?,
        t_delta_free: timings.time(timed, "t_delta_free", || {
            Tagged::from_solver(trees::is_T_delta_free(g, delta, limits))
        })?,
        best_core: timings.time(timed, "best_core", || Tagged::from_solver(best_core(g, limits)))?,
    })
}
