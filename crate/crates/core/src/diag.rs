use std::fmt;

use serde::Serialize;

use crate::expr::Value;

/// Well-formedness rules checked by [`crate::model::validate`] and
/// [`crate::model::check_guard_exclusivity`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    DuplicateNode,
    DuplicateVariable,
    EmptyDomain,
    DomainTooLarge,
    UnknownEndpoint,
    InitialCount,
    FinalMissing,
    InitialIncoming,
    FinalOutgoing,
    AdjacentPseudoNodes,
    GuardOnNonDecision,
    NodeDegree,
    ForkJoinBalance,
    FinalInFork,
    RepeatedForkedAction,
    FirstActionAssignsLocals,
    AssignToInput,
    UndeclaredVariable,
    TypeMismatch,
    GuardNotBool,
    GuardsOverlap,
    GuardsNotExhaustive,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::DuplicateNode => "duplicate node",
            Rule::DuplicateVariable => "duplicate variable",
            Rule::EmptyDomain => "empty domain",
            Rule::DomainTooLarge => "domain too large",
            Rule::UnknownEndpoint => "unknown endpoint",
            Rule::InitialCount => "exactly one initial node",
            Rule::FinalMissing => "at least one final node",
            Rule::InitialIncoming => "initial node has incoming transition",
            Rule::FinalOutgoing => "final node has outgoing transition",
            Rule::AdjacentPseudoNodes => "adjacent pseudo nodes",
            Rule::GuardOnNonDecision => "guard outside decision",
            Rule::NodeDegree => "node degree",
            Rule::ForkJoinBalance => "fork/join balance",
            Rule::FinalInFork => "final node inside fork",
            Rule::RepeatedForkedAction => "action repeated across forked branches",
            Rule::FirstActionAssignsLocals => "first action assigns all locals",
            Rule::AssignToInput => "assignment to input variable",
            Rule::UndeclaredVariable => "undeclared variable",
            Rule::TypeMismatch => "type mismatch",
            Rule::GuardNotBool => "guard is not boolean",
            Rule::GuardsOverlap => "overlapping guards",
            Rule::GuardsNotExhaustive => "non-exhaustive guards",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Location {
    Diagram,
    Node(String),
    /// Index into the diagram's transition list.
    Transition(usize),
    Var(String),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Diagram => f.write_str("diagram"),
            Location::Node(n) => write!(f, "node `{n}`"),
            Location::Transition(t) => write!(f, "transition #{t}"),
            Location::Var(v) => write!(f, "variable `{v}`"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Diagnostic {
    pub rule: Rule,
    pub location: Location,
    pub message: String,
    /// Satisfying assignment demonstrating the problem (guard checks only).
    pub witness: Option<Vec<(String, Value)>>,
}

impl Diagnostic {
    pub fn new(rule: Rule, location: Location, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            rule,
            location,
            message: message.into(),
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: Vec<(String, Value)>) -> Diagnostic {
        self.witness = Some(witness);
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.location, self.rule, self.message)?;
        if let Some(w) = &self.witness {
            let parts: Vec<String> = w.iter().map(|(n, v)| format!("{n}={v}")).collect();
            write!(f, " (witness: {})", parts.join(", "))?;
        }
        Ok(())
    }
}
