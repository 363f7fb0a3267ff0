#![cfg_attr(not(test), no_std)]

//! # broomlab-core
//!
//! Exact, deterministic graph algorithms for studying graphs that exclude
//! the multibroom `T(δ)` as an induced subgraph: induced tree containment,
//! exact colouring, complete multipartite cores, template arrays and their
//! cleaning passes, shadowings, daisies, privatization, and an exact ledger
//! of every derived constant.
//!
//! Everything here is pure computation over immutable values. File formats,
//! reports and the command line live in the `broomlab` crate.

extern crate alloc;

pub mod constants;
pub mod error;
pub mod generators;
pub mod graph;
pub mod set;
pub mod shadow;
pub mod solvers;
pub mod structures;
pub mod template;
pub mod trees;

pub use error::{Error, Result};
pub use graph::{Digraph, Graph, Induced, MAX_VERTICES};
pub use set::VertexSet;
pub use solvers::{Coloring, Limits};
