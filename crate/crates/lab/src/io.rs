//! Edge-list and DIMACS `col` graph files.
//!
//! Edge list: an optional header line holding the vertex count, then one
//! `u v` pair per line, 0-indexed; `#` starts a comment. Without a header
//! the vertex count is one more than the largest endpoint.
//!
//! DIMACS: `c` comment lines, one `p edge N M` line, then `e u v` lines,
//! 1-indexed on the wire.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use broomlab_core::Graph;
use clap::ValueEnum;
use serde::Deserialize;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Edgelist,
    Dimacs,
}

impl Format {
    /// `.col` and `.dimacs` files are DIMACS; everything else is an edge list.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("col" | "dimacs") => Format::Dimacs,
            _ => Format::Edgelist,
        }
    }
}

fn number<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| LabError::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| LabError::parse(line, format!("{what} {tok:?} is not a non-negative integer")))
}

fn build(n: usize, edges: Vec<(usize, usize, usize)>) -> Result<Graph> {
    for &(u, v, line) in &edges {
        if u >= n || v >= n {
            return Err(LabError::parse(line, format!("edge {u}-{v} leaves the {n} declared vertices")));
        }
        if u == v {
            return Err(LabError::parse(line, format!("self-loop at {u}")));
        }
    }
    Ok(Graph::from_edges(n, edges.into_iter().map(|(u, v, _)| (u, v)))?)
}

pub fn parse_edgelist(text: &str) -> Result<Graph> {
    let mut header: Option<usize> = None;
    let mut edges = Vec::new();
    let mut seen_line = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let first = toks.next();
        let second = toks.next();
        if toks.next().is_some() {
            return Err(LabError::parse(line, "expected at most two fields"));
        }
        match second {
            None if !seen_line => header = Some(number::<usize>(first, line, "vertex count")?),
            None => return Err(LabError::parse(line, "expected an edge `u v`")),
            Some(_) => {
                let u: usize = number(first, line, "endpoint")?;
                let v: usize = number(second, line, "endpoint")?;
                edges.push((u, v, line));
            }
        }
        seen_line = true;
    }
    let n = header.unwrap_or_else(|| edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0));
    build(n, edges)
}

pub fn parse_dimacs(text: &str) -> Result<Graph> {
    let mut declared: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut toks = raw.split_whitespace();
        match toks.next() {
            None | Some("c") => {}
            Some("p") => {
                if declared.is_some() {
                    return Err(LabError::parse(line, "second problem line"));
                }
                match toks.next() {
                    Some("edge" | "col") => {}
                    other => return Err(LabError::parse(line, format!("unsupported problem type {other:?}"))),
                }
                declared = Some((number(toks.next(), line, "vertex count")?, number(toks.next(), line, "edge count")?));
            }
            Some("e") => {
                if declared.is_none() {
                    return Err(LabError::parse(line, "edge before the problem line"));
                }
                let u: usize = number(toks.next(), line, "endpoint")?;
                let v: usize = number(toks.next(), line, "endpoint")?;
                if u == 0 || v == 0 {
                    return Err(LabError::parse(line, "DIMACS vertices are 1-indexed"));
                }
                edges.push((u - 1, v - 1, line));
            }
            Some(other) => return Err(LabError::parse(line, format!("unknown line type {other:?}"))),
        }
    }
    let (n, _) = declared.ok_or_else(|| LabError::parse(0, "missing problem line"))?;
    build(n, edges)
}

pub fn parse_graph(text: &str, format: Format) -> Result<Graph> {
    match format {
        Format::Edgelist => parse_edgelist(text),
        Format::Dimacs => parse_dimacs(text),
    }
}

/// Canonical text: vertex count header, edges `u < v` in sorted order, LF
/// line endings.
pub fn write_graph(g: &Graph, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Edgelist => {
            out.push_str(&format!("{}\n", g.n()));
            for (u, v) in g.edges() {
                out.push_str(&format!("{u} {v}\n"));
            }
        }
        Format::Dimacs => {
            out.push_str(&format!("p edge {} {}\n", g.n(), g.edge_count()));
            for (u, v) in g.edges() {
                out.push_str(&format!("e {} {}\n", u + 1, v + 1));
            }
        }
    }
    out
}

pub fn read_graph(path: &Path, format: Option<Format>) -> Result<Graph> {
    let text = fs::read_to_string(path)?;
    parse_graph(&text, format.unwrap_or_else(|| Format::from_path(path)))
}
