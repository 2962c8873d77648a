//! Semantic differencing of UML-style activity diagrams.
//!
//! Two diagrams are compared by their execution traces: `addiff(ad1, ad2)`
//! lists the shortest traces of `ad1` that `ad2` cannot reproduce, one per
//! input assignment. See [`diff::addiff`] and [`diff::compare`].

pub mod benchgen;
pub mod dd;
pub mod diag;
pub mod diff;
pub mod encode;
pub mod expr;
pub mod fixtures;
pub mod model;
pub mod report;
pub mod semantics;
pub mod smv;
pub mod text;

pub use diff::{addiff, compare, Algorithm, CompareResult, DiffOptions, DiffTrace};
pub use model::{validate, ActivityDiagram};
pub use text::{parse, serialize};
