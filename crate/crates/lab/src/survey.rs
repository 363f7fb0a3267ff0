//! Manifest sweeps. Instances run in parallel; rows come back in manifest
//! order, one per instance, refusals included.
//!
//! A manifest is `{"delta": 1, "instances": [{"id": .., "graph": ..}]}`
//! where `graph` is a generator spec (`{"family": "cycle", "n": 5}`) or a
//! file (`{"path": "g.col", "format": "dimacs"}`), relative to the
//! manifest.

use std::path::Path;

use broomlab_core::generators::{self, GenSpec};
use broomlab_core::{solvers, trees, Error as CoreError, Graph, Limits};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::io;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Source {
    Generated(GenSpec),
    File { path: String, format: Option<io::Format> },
}

#[derive(Debug, Clone, Deserialize)]
pub struct Entry {
    pub id: String,
    pub graph: Source,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    #[serde(default = "default_delta")]
    pub delta: usize,
    pub instances: Vec<Entry>,
}

fn default_delta() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub graph_id: String,
    pub family: String,
    pub n: Option<usize>,
    pub omega: Option<usize>,
    pub chi: Option<usize>,
    pub t_delta_free: Option<bool>,
    /// `ok`, `refused: …` or `error: …`.
    pub status: String,
}

fn refusal(e: &CoreError) -> bool {
    matches!(e, CoreError::TooLarge { .. } | CoreError::GraphTooLarge { .. })
}

fn load(entry: &Entry, base: &Path) -> Result<Graph> {
    match &entry.graph {
        Source::Generated(spec) => Ok(generators::generate(spec)?),
        Source::File { path, format } => io::read_graph(&base.join(path), *format),
    }
}

fn survey_one(entry: &Entry, base: &Path, delta: usize, limits: &Limits) -> Row {
    let mut row = Row {
        graph_id: entry.id.clone(),
        family: match &entry.graph {
            Source::Generated(spec) => spec.family.name().into(),
            Source::File { .. } => "file".into(),
        },
        n: None,
        omega: None,
        chi: None,
        t_delta_free: None,
        status: "ok".into(),
    };
    let g = match load(entry, base) {
        Ok(g) => g,
        Err(e) => {
            row.status = format!("error: {e}");
            return row;
        }
    };
    row.n = Some(g.n());
    let mut notes = Vec::new();
    let mut note = |e: CoreError| {
        notes.push(if refusal(&e) { format!("refused: {e}") } else { format!("error: {e}") });
    };
    match solvers::clique_number(&g, limits) {
        Ok((w, _)) => row.omega = Some(w),
        Err(e) => note(e),
    }
    match solvers::chromatic_number(&g, limits) {
        Ok((c, _)) => row.chi = Some(c),
        Err(e) => note(e),
    }
    match trees::is_T_delta_free(&g, delta, limits) {
        Ok(f) => row.t_delta_free = Some(f),
        Err(e) => note(e),
    }
    if !notes.is_empty() {
        row.status = notes.join("; ");
    }
    row
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path)?;
    let m: Manifest = serde_json::from_str(&text)?;
    let mut ids: Vec<&str> = m.instances.iter().map(|e| e.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(LabError::Usage(format!("duplicate instance id {:?}", w[0])));
    }
    Ok(m)
}

/// One row per instance, in manifest order.
pub fn run_survey(m: &Manifest, base: &Path, limits: &Limits) -> Vec<Row> {
    m.instances
        .par_iter()
        .map(|e| survey_one(e, base, m.delta, limits))
        .collect()
}

/// RFC 4180 CSV with a header row.
pub fn to_csv(rows: &[Row]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MANIFEST: &str = r#"{
        "instances": [
            {"id": "c5", "graph": {"family": "cycle", "n": 5}},
            {"id": "pet", "graph": {"family": "fixture", "id": "petersen@1"}},
            {"id": "big", "graph": {"family": "erdos_renyi", "n": 70, "p": 0.5, "seed": 3}},
            {"id": "gone", "graph": {"path": "missing.txt"}}
        ]
    }"#;

    #[test]
    fn one_row_per_instance_in_order() {
        let m: Manifest = serde_json::from_str(MANIFEST).unwrap();
        let rows = run_survey(&m, Path::new("."), &Limits::default());
        let ids: Vec<&str> = rows.iter().map(|r| r.graph_id.as_str()).collect();
        assert_eq!(ids, ["c5", "pet", "big", "gone"]);
        assert_eq!((rows[0].chi, rows[0].t_delta_free), (Some(3), Some(true)));
        assert_eq!((rows[1].omega, rows[1].chi, rows[1].t_delta_free), (Some(2), Some(3), Some(true)));
        assert!(rows[2].status.starts_with("refused"));
        assert!(rows[3].status.starts_with("error"));
        let csv = to_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("graph_id,family,n,omega,chi,t_delta_free,status\r\n"));
    }
}
