//! # broomlab
//!
//! File formats, JSON reports, the extraction-and-cleaning pipeline driver,
//! seeded property suites and manifest surveys on top of `broomlab-core`.

pub mod error;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod suites;
pub mod survey;

pub use error::{LabError, Result};
