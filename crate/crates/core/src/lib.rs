//! Verification engine for graph-indexed dyadic multilinear forms and their
//! Bellman-function estimates.
//!
//! Functions live on dyadic grids ([`dyadic`]), forms are built from symbolic
//! paraproduct-type terms ([`term`]), graphs choose which terms ([`graph`]),
//! and [`partition`] and [`estimates`] turn each step of the domination
//! argument into a numeric check.

pub mod cli;
pub mod dyadic;
pub mod error;
pub mod estimates;
pub mod gen;
pub mod graph;
pub mod partition;
pub mod term;
pub mod walkthrough;

pub use error::{Error, Result};
