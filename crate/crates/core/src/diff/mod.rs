//! Semantic differencing of two activity diagrams.
//!
//! `addiff(ad1, ad2)` is a set of shortest traces of `ad1` whose last step
//! cannot be matched by any run of `ad2` that matches all earlier steps, with
//! at most one trace per input assignment of `ad1`. Two algorithms compute
//! it: an explicit breadth-first search over state pairs ([`concrete`]) and
//! a backward fixpoint over decision diagrams ([`symbolic`]).

pub mod concrete;
pub mod conformance;
pub mod symbolic;

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dd::{DdError, DEFAULT_NODE_BUDGET};
use crate::expr::Env;
use crate::model::{ActivityDiagram, Domain};
use crate::semantics::{AdState, Label, Machine, SemanticsError, DEFAULT_STATE_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Dd(#[from] DdError),
    #[error("input `{name}` is declared as {left} in one diagram and {right} in the other")]
    IncomparableInputs { name: String, left: Domain, right: Domain },
}

impl DiffError {
    /// True when the computation ran out of states or decision-diagram nodes.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            DiffError::Semantics(SemanticsError::StateBudget(_)) | DiffError::Dd(DdError::NodeBudget(_))
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Concrete,
    #[default]
    Symbolic,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Concrete => "concrete",
            Algorithm::Symbolic => "symbolic",
        })
    }
}

#[derive(Clone, Debug)]
pub struct DiffOptions {
    pub algorithm: Algorithm,
    /// Stop after witnesses for this many input assignments.
    pub max_traces: Option<usize>,
    pub state_budget: usize,
    pub node_budget: usize,
}

impl Default for DiffOptions {
    fn default() -> Self {
        DiffOptions {
            algorithm: Algorithm::Symbolic,
            max_traces: None,
            state_budget: DEFAULT_STATE_BUDGET,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

impl DiffOptions {
    pub fn with_algorithm(algorithm: Algorithm) -> DiffOptions {
        DiffOptions {
            algorithm,
            ..DiffOptions::default()
        }
    }
}

/// A state as reported in a diff trace, independent of any compiled machine.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceState {
    pub node: String,
    pub label: Label,
    pub env: Env,
    /// Indices of transitions holding a token.
    pub marking: Vec<usize>,
}

impl TraceState {
    pub fn from_state(m: &Machine, s: &AdState) -> TraceState {
        TraceState {
            node: m.node_id(s.node).to_string(),
            label: m.label(s).clone(),
            env: m.env(s),
            marking: s.marking.iter().collect(),
        }
    }

    pub fn to_state(&self, m: &Machine) -> Option<AdState> {
        m.state_from(&self.node, &self.env, &self.marking)
    }
}

/// One step of a diff trace: the `ad1` state and its `ad2` counterpart,
/// which is absent only in the last step.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CombinedState {
    pub s1: TraceState,
    pub s2: Option<TraceState>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiffTrace {
    /// Name of the diagram the trace belongs to.
    pub ad1: String,
    /// Name of the diagram that cannot follow it.
    pub ad2: String,
    /// Input assignment of `ad1` the trace starts from.
    pub inputs: Env,
    pub steps: Vec<CombinedState>,
}

impl DiffTrace {
    /// Number of states, the initial state included.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Labels of the `ad1` states, initial state included.
    pub fn labels(&self) -> Vec<&str> {
        self.steps.iter().map(|c| c.s1.label.as_str()).collect()
    }

    /// Action names along the trace, skipping the initial and final markers.
    pub fn actions(&self) -> Vec<&str> {
        self.steps
            .iter()
            .filter_map(|c| match &c.s1.label {
                Label::Action(a) => Some(a.as_str()),
                _ => None,
            })
            .collect()
    }
}

/// Four-valued outcome of [`compare`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareResult {
    /// Only the second diagram has extra behaviour.
    #[serde(rename = "<")]
    Less,
    /// Only the first diagram has extra behaviour.
    #[serde(rename = ">")]
    Greater,
    #[serde(rename = "≡")]
    Equivalent,
    #[serde(rename = "<>")]
    Incomparable,
}

impl CompareResult {
    pub fn from_directions(forward: bool, backward: bool) -> CompareResult {
        match (forward, backward) {
            (false, true) => CompareResult::Less,
            (true, false) => CompareResult::Greater,
            (false, false) => CompareResult::Equivalent,
            (true, true) => CompareResult::Incomparable,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CompareResult::Less => "<",
            CompareResult::Greater => ">",
            CompareResult::Equivalent => "≡",
            CompareResult::Incomparable => "<>",
        }
    }

    /// The result with the operands swapped.
    pub fn flip(self) -> CompareResult {
        match self {
            CompareResult::Less => CompareResult::Greater,
            CompareResult::Greater => CompareResult::Less,
            other => other,
        }
    }
}

impl fmt::Display for CompareResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Shared inputs of two machines and a common numbering of their labels.
#[derive(Clone, Debug)]
pub struct Correspondence {
    /// `(position in ad1 env, position in ad2 env)` for equally named inputs.
    pub shared: Vec<(usize, usize)>,
    label1: Vec<u32>,
    label2: Vec<u32>,
}

impl Correspondence {
    pub fn new(m1: &Machine, m2: &Machine) -> Result<Correspondence, DiffError> {
        let mut shared = Vec::new();
        for (i, v1) in m1.vars()[..m1.num_inputs()].iter().enumerate() {
            if let Some(j) = m2.vars()[..m2.num_inputs()].iter().position(|v| v.name == v1.name) {
                let v2 = &m2.vars()[j];
                if v1.domain != v2.domain {
                    return Err(DiffError::IncomparableInputs {
                        name: v1.name.clone(),
                        left: v1.domain.clone(),
                        right: v2.domain.clone(),
                    });
                }
                shared.push((i, j));
            }
        }
        let mut names: Vec<Label> = Vec::new();
        let mut id = |l: &Label| -> u32 {
            match names.iter().position(|x| x == l) {
                Some(p) => p as u32,
                None => {
                    names.push(l.clone());
                    (names.len() - 1) as u32
                }
            }
        };
        let label1 = (0..m1.ad().nodes.len() as u32).map(|n| id(m1.node_label(n))).collect();
        let label2 = (0..m2.ad().nodes.len() as u32).map(|n| id(m2.node_label(n))).collect();
        Ok(Correspondence {
            shared,
            label1,
            label2,
        })
    }

    /// `s1 ~ s2`: equal labels and equal values on shared inputs.
    pub fn holds(&self, s1: &AdState, s2: &AdState) -> bool {
        self.label1[s1.node as usize] == self.label2[s2.node as usize]
            && self.shared.iter().all(|&(i, j)| s1.env[i] == s2.env[j])
    }
}

/// `s1 ~ s2` for states of the two given machines.
pub fn corresponding(m1: &Machine, s1: &AdState, m2: &Machine, s2: &AdState) -> Result<bool, DiffError> {
    Ok(Correspondence::new(m1, m2)?.holds(s1, s2))
}

#[derive(Clone, Debug)]
pub struct DiffOutcome {
    pub algorithm: Algorithm,
    pub traces: Vec<DiffTrace>,
    /// Time until the existence of a difference was settled.
    pub decide: Duration,
    pub total: Duration,
}

/// Computes `addiff(ad1, ad2)` with the selected algorithm. Traces are
/// ordered by the input assignment of `ad1`.
pub fn addiff(ad1: &ActivityDiagram, ad2: &ActivityDiagram, opts: &DiffOptions) -> Result<DiffOutcome, DiffError> {
    let start = Instant::now();
    let m1 = Machine::new(ad1)?.with_state_budget(opts.state_budget);
    let m2 = Machine::new(ad2)?.with_state_budget(opts.state_budget);
    let mut out = match opts.algorithm {
        Algorithm::Concrete => concrete::run(&m1, &m2, opts.max_traces, false)?,
        Algorithm::Symbolic => symbolic::run(&m1, &m2, opts, false)?,
    };
    let offset = start.elapsed() - out.total;
    out.decide += offset;
    out.total += offset;
    Ok(out)
}

pub fn concrete_addiff(ad1: &ActivityDiagram, ad2: &ActivityDiagram) -> Result<Vec<DiffTrace>, DiffError> {
    Ok(addiff(ad1, ad2, &DiffOptions::with_algorithm(Algorithm::Concrete))?.traces)
}

pub fn symbolic_addiff(ad1: &ActivityDiagram, ad2: &ActivityDiagram) -> Result<Vec<DiffTrace>, DiffError> {
    Ok(addiff(ad1, ad2, &DiffOptions::with_algorithm(Algorithm::Symbolic))?.traces)
}

/// Settles whether `addiff(ad1, ad2)` is non-empty, stopping as early as
/// the algorithm allows. The outcome holds at most one trace, which need
/// not be the first of the full result.
pub fn decide(ad1: &ActivityDiagram, ad2: &ActivityDiagram, opts: &DiffOptions) -> Result<DiffOutcome, DiffError> {
    let start = Instant::now();
    let m1 = Machine::new(ad1)?.with_state_budget(opts.state_budget);
    let m2 = Machine::new(ad2)?.with_state_budget(opts.state_budget);
    let mut out = match opts.algorithm {
        Algorithm::Concrete => concrete::run(&m1, &m2, Some(1), true)?,
        Algorithm::Symbolic => symbolic::run(&m1, &m2, opts, true)?,
    };
    let offset = start.elapsed() - out.total;
    out.decide += offset;
    out.total += offset;
    Ok(out)
}

/// Whether `addiff(ad1, ad2)` is non-empty.
pub fn has_difference(ad1: &ActivityDiagram, ad2: &ActivityDiagram, opts: &DiffOptions) -> Result<bool, DiffError> {
    Ok(!decide(ad1, ad2, opts)?.traces.is_empty())
}

/// Refinement/equivalence check; the two directions run in parallel.
pub fn compare(ad1: &ActivityDiagram, ad2: &ActivityDiagram, opts: &DiffOptions) -> Result<CompareResult, DiffError> {
    let (fwd, bwd) = std::thread::scope(|s| {
        let h = s.spawn(|| has_difference(ad2, ad1, opts));
        let fwd = has_difference(ad1, ad2, opts);
        (fwd, h.join().expect("comparison thread panicked"))
    });
    Ok(CompareResult::from_directions(fwd?, bwd?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub from: String,
    pub to: String,
    pub result: CompareResult,
}

/// Compares every version with its successor, in order.
pub fn analyze_history(ads: &[ActivityDiagram], opts: &DiffOptions) -> Result<Vec<HistoryEntry>, DiffError> {
    let results: Vec<Result<CompareResult, DiffError>> = std::thread::scope(|s| {
        let handles: Vec<_> = ads
            .windows(2)
            .map(|w| s.spawn(move || compare(&w[0], &w[1], opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("comparison thread panicked"))
            .collect()
    });
    ads.windows(2)
        .zip(results)
        .map(|(w, r)| {
            Ok(HistoryEntry {
                from: w[0].name.clone(),
                to: w[1].name.clone(),
                result: r?,
            })
        })
        .collect()
}

pub(crate) fn sort_traces(m1: &Machine, traces: &mut [DiffTrace]) {
    let key = |t: &DiffTrace| -> Vec<u64> {
        m1.vars()[..m1.num_inputs()]
            .iter()
            .map(|v| t.inputs.get(&v.name).and_then(|x| v.domain.index_of(x)).unwrap_or(0))
            .collect()
    };
    traces.sort_by_cached_key(key);
}

pub(crate) fn input_env(m: &Machine, s: &AdState) -> Env {
    m.vars()[..m.num_inputs()]
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.clone(), m.value(s, i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compare_table() {
        assert_eq!(CompareResult::from_directions(false, true), CompareResult::Less);
        assert_eq!(CompareResult::from_directions(true, false), CompareResult::Greater);
        assert_eq!(CompareResult::from_directions(false, false).to_string(), "≡");
        assert_eq!(CompareResult::Incomparable.flip(), CompareResult::Incomparable);
    }
}
