//! The hiring and project workflows shipped in `fixtures/`.

use crate::model::ActivityDiagram;
use crate::text::parse;

pub const HIRE_SOURCES: [&str; 4] = [
    include_str!("../fixtures/hire1.ad"),
    include_str!("../fixtures/hire2.ad"),
    include_str!("../fixtures/hire3.ad"),
    include_str!("../fixtures/hire4.ad"),
];

pub const PROJ_SOURCES: [&str; 3] = [
    include_str!("../fixtures/proj1.ad"),
    include_str!("../fixtures/proj2.ad"),
    include_str!("../fixtures/proj3.ad"),
];

fn load(src: &str) -> ActivityDiagram {
    parse(src).unwrap_or_else(|e| panic!("bundled fixture does not parse: {e:?}"))
}

/// Hiring workflow version `v` (1 to 4).
pub fn hire(v: usize) -> ActivityDiagram {
    load(HIRE_SOURCES[v - 1])
}

/// Project workflow version `v` (1 to 3).
pub fn proj(v: usize) -> ActivityDiagram {
    load(PROJ_SOURCES[v - 1])
}

pub fn hire_history() -> Vec<ActivityDiagram> {
    (1..=4).map(hire).collect()
}

pub fn proj_history() -> Vec<ActivityDiagram> {
    (1..=3).map(proj).collect()
}

/// Every fixture with its file stem.
pub fn all() -> Vec<(&'static str, ActivityDiagram)> {
    let names = ["hire1", "hire2", "hire3", "hire4", "proj1", "proj2", "proj3"];
    let ads = hire_history().into_iter().chain(proj_history());
    names.into_iter().zip(ads).collect()
}
