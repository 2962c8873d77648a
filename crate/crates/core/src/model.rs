//! In-memory activity diagrams and their well-formedness rules.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, Location, Rule};
use crate::expr::{self, type_check, Expr, Type, Value};

/// Upper bound on the cardinality of a bounded-integer domain.
pub const DEFAULT_MAX_DOMAIN: u64 = 1 << 16;

/// Assignment spaces up to this size are checked by enumeration.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    Bool,
    Int { lo: i64, hi: i64 },
    Enum(Vec<String>),
}

impl Domain {
    pub fn cardinality(&self) -> u64 {
        match self {
            Domain::Bool => 2,
            Domain::Int { lo, hi } => {
                if lo > hi {
                    0
                } else {
                    (*hi as i128 - *lo as i128 + 1).min(u64::MAX as i128) as u64
                }
            }
            Domain::Enum(lits) => lits.len() as u64,
        }
    }

    /// The value with domain index `idx`; indices follow declaration order
    /// (`false < true`, ascending integers, enum literals as listed).
    pub fn value_at(&self, idx: u64) -> Value {
        match self {
            Domain::Bool => Value::Bool(idx != 0),
            Domain::Int { lo, .. } => Value::Int(lo + idx as i64),
            Domain::Enum(lits) => Value::enum_lit(&lits[idx as usize]),
        }
    }

    pub fn index_of(&self, v: &Value) -> Option<u64> {
        match (self, v) {
            (Domain::Bool, Value::Bool(b)) => Some(*b as u64),
            (Domain::Int { lo, hi }, Value::Int(i)) if lo <= i && i <= hi => Some((i - lo) as u64),
            (Domain::Enum(lits), Value::Enum(s)) => {
                lits.iter().position(|l| l.as_str() == &**s).map(|p| p as u64)
            }
            _ => None,
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.index_of(v).is_some()
    }

    pub fn values(&self) -> impl Iterator<Item = Value> + '_ {
        (0..self.cardinality()).map(move |i| self.value_at(i))
    }

    pub fn min_value(&self) -> Value {
        self.value_at(0)
    }

    pub fn type_tag(&self) -> Type {
        match self {
            Domain::Bool => Type::Bool,
            Domain::Int { .. } => Type::Int,
            Domain::Enum(_) => Type::Enum,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Bool => f.write_str("bool"),
            Domain::Int { lo, hi } => write!(f, "{lo}..{hi}"),
            Domain::Enum(lits) => write!(f, "enum {{{}}}", lits.join(", ")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Input,
    Local,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarDecl {
    pub name: String,
    pub domain: Domain,
    pub kind: VarKind,
}

impl VarDecl {
    pub fn new(name: &str, domain: Domain, kind: VarKind) -> VarDecl {
        VarDecl {
            name: name.to_string(),
            domain,
            kind,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Action,
    Initial,
    Final,
    Decision,
    Merge,
    Fork,
    Join,
}

impl NodeKind {
    pub fn is_pseudo(self) -> bool {
        self != NodeKind::Action
    }

    pub fn keyword(self) -> &'static str {
        match self {
            NodeKind::Action => "action",
            NodeKind::Initial => "initial",
            NodeKind::Final => "final",
            NodeKind::Decision => "decision",
            NodeKind::Merge => "merge",
            NodeKind::Fork => "fork",
            NodeKind::Join => "join",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    /// Action name; `None` for pseudo nodes.
    pub action: Option<String>,
    /// Local-variable assignments, applied simultaneously.
    pub assignments: Vec<(String, Expr)>,
}

impl Node {
    pub fn pseudo(id: &str, kind: NodeKind) -> Node {
        Node {
            id: id.to_string(),
            kind,
            action: None,
            assignments: Vec::new(),
        }
    }

    pub fn action(id: &str, name: &str) -> Node {
        Node {
            id: id.to_string(),
            kind: NodeKind::Action,
            action: Some(name.to_string()),
            assignments: Vec::new(),
        }
    }

    pub fn assign(mut self, var: &str, e: Expr) -> Node {
        self.assignments.push((var.to_string(), e));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub src: String,
    pub trg: String,
    pub guard: Expr,
}

impl Transition {
    pub fn new(src: &str, trg: &str) -> Transition {
        Transition {
            src: src.to_string(),
            trg: trg.to_string(),
            guard: Expr::tt(),
        }
    }

    pub fn guarded(src: &str, trg: &str, guard: Expr) -> Transition {
        Transition {
            src: src.to_string(),
            trg: trg.to_string(),
            guard,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityDiagram {
    pub name: String,
    pub input_vars: Vec<VarDecl>,
    pub local_vars: Vec<VarDecl>,
    pub nodes: Vec<Node>,
    pub transitions: Vec<Transition>,
}

impl ActivityDiagram {
    pub fn new(name: &str) -> ActivityDiagram {
        ActivityDiagram {
            name: name.to_string(),
            ..Default::default()
        }
    }

    /// Inputs followed by locals, in declaration order. This is the
    /// positional order of every state environment.
    pub fn vars(&self) -> impl Iterator<Item = &VarDecl> {
        self.input_vars.iter().chain(self.local_vars.iter())
    }

    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars().find(|v| v.name == name)
    }

    pub fn var_decls(&self) -> Vec<VarDecl> {
        self.vars().cloned().collect()
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn initial_node(&self) -> Option<&Node> {
        self.nodes.iter().find(|n| n.kind == NodeKind::Initial)
    }

    pub fn outgoing(&self, id: &str) -> impl Iterator<Item = (usize, &Transition)> + '_ {
        let id = id.to_string();
        self.transitions
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.src == id)
    }

    pub fn incoming(&self, id: &str) -> impl Iterator<Item = (usize, &Transition)> + '_ {
        let id = id.to_string();
        self.transitions
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.trg == id)
    }

    pub fn with_input(mut self, name: &str, domain: Domain) -> Self {
        self.input_vars.push(VarDecl::new(name, domain, VarKind::Input));
        self
    }

    pub fn with_local(mut self, name: &str, domain: Domain) -> Self {
        self.local_vars.push(VarDecl::new(name, domain, VarKind::Local));
        self
    }

    pub fn with_node(mut self, node: Node) -> Self {
        self.nodes.push(node);
        self
    }

    pub fn with_edge(mut self, t: Transition) -> Self {
        self.transitions.push(t);
        self
    }
}

/// The set of action names used by `ad`.
pub fn action_alphabet(ad: &ActivityDiagram) -> BTreeSet<String> {
    ad.nodes.iter().filter_map(|n| n.action.clone()).collect()
}

#[derive(Clone, Debug)]
pub struct ValidationOptions {
    pub max_domain: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            max_domain: DEFAULT_MAX_DOMAIN,
        }
    }
}

/// All well-formedness violations of `ad`; empty iff well-formed.
pub fn validate(ad: &ActivityDiagram) -> Vec<Diagnostic> {
    validate_with(ad, &ValidationOptions::default())
}

pub fn validate_with(ad: &ActivityDiagram, opts: &ValidationOptions) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_declarations(ad, opts, &mut out);
    let structure_ok = check_structure(ad, &mut out);
    check_expressions(ad, &mut out);
    if structure_ok {
        check_first_action(ad, &mut out);
        ForkAnalysis::new(ad).run(&mut out);
    }
    out.sort();
    out.dedup();
    out
}

fn check_declarations(ad: &ActivityDiagram, opts: &ValidationOptions, out: &mut Vec<Diagnostic>) {
    let mut seen = HashSet::new();
    for v in ad.vars() {
        if !seen.insert(v.name.as_str()) {
            out.push(Diagnostic::new(
                Rule::DuplicateVariable,
                Location::Var(v.name.clone()),
                format!("variable `{}` declared twice", v.name),
            ));
        }
        let card = v.domain.cardinality();
        if card == 0 {
            out.push(Diagnostic::new(
                Rule::EmptyDomain,
                Location::Var(v.name.clone()),
                format!("domain of `{}` is empty", v.name),
            ));
        }
        if let Domain::Enum(lits) = &v.domain {
            let distinct: HashSet<_> = lits.iter().collect();
            if distinct.len() != lits.len() {
                out.push(Diagnostic::new(
                    Rule::EmptyDomain,
                    Location::Var(v.name.clone()),
                    format!("enumeration of `{}` repeats a literal", v.name),
                ));
            }
        }
        if matches!(v.domain, Domain::Int { .. }) && card > opts.max_domain {
            out.push(Diagnostic::new(
                Rule::DomainTooLarge,
                Location::Var(v.name.clone()),
                format!(
                    "domain of `{}` has {card} values, limit is {}",
                    v.name, opts.max_domain
                ),
            ));
        }
    }
}

/// Returns false when node/edge references are too broken for the graph
/// analyses to run.
fn check_structure(ad: &ActivityDiagram, out: &mut Vec<Diagnostic>) -> bool {
    let mut ok = true;
    let mut kinds: HashMap<&str, NodeKind> = HashMap::new();
    for n in &ad.nodes {
        if kinds.insert(n.id.as_str(), n.kind).is_some() {
            ok = false;
            out.push(Diagnostic::new(
                Rule::DuplicateNode,
                Location::Node(n.id.clone()),
                format!("node id `{}` used more than once", n.id),
            ));
        }
    }
    for (i, t) in ad.transitions.iter().enumerate() {
        for end in [&t.src, &t.trg] {
            if !kinds.contains_key(end.as_str()) {
                ok = false;
                out.push(Diagnostic::new(
                    Rule::UnknownEndpoint,
                    Location::Transition(i),
                    format!("transition {} -> {} names unknown node `{end}`", t.src, t.trg),
                ));
            }
        }
    }
    let initials: Vec<_> = ad.nodes.iter().filter(|n| n.kind == NodeKind::Initial).collect();
    if initials.len() != 1 {
        ok = false;
        out.push(Diagnostic::new(
            Rule::InitialCount,
            Location::Diagram,
            format!("expected exactly one initial node, found {}", initials.len()),
        ));
    }
    if !ad.nodes.iter().any(|n| n.kind == NodeKind::Final) {
        out.push(Diagnostic::new(
            Rule::FinalMissing,
            Location::Diagram,
            "no final node",
        ));
    }

    let mut indeg: HashMap<&str, usize> = HashMap::new();
    let mut outdeg: HashMap<&str, usize> = HashMap::new();
    for (i, t) in ad.transitions.iter().enumerate() {
        *outdeg.entry(t.src.as_str()).or_default() += 1;
        *indeg.entry(t.trg.as_str()).or_default() += 1;
        let (Some(&sk), Some(&tk)) = (kinds.get(t.src.as_str()), kinds.get(t.trg.as_str())) else {
            continue;
        };
        if sk.is_pseudo() && tk.is_pseudo() {
            out.push(Diagnostic::new(
                Rule::AdjacentPseudoNodes,
                Location::Transition(i),
                format!(
                    "{} `{}` is directly followed by {} `{}`",
                    sk.keyword(),
                    t.src,
                    tk.keyword(),
                    t.trg
                ),
            ));
        }
        if sk != NodeKind::Decision && !t.guard.is_true() {
            out.push(Diagnostic::new(
                Rule::GuardOnNonDecision,
                Location::Transition(i),
                format!("transition {} -> {} is guarded but leaves a {}", t.src, t.trg, sk.keyword()),
            ));
        }
    }

    for n in &ad.nodes {
        let i = indeg.get(n.id.as_str()).copied().unwrap_or(0);
        let o = outdeg.get(n.id.as_str()).copied().unwrap_or(0);
        let loc = || Location::Node(n.id.clone());
        match n.kind {
            NodeKind::Initial if i > 0 => out.push(Diagnostic::new(
                Rule::InitialIncoming,
                loc(),
                "initial node has incoming transitions",
            )),
            NodeKind::Final if o > 0 => out.push(Diagnostic::new(
                Rule::FinalOutgoing,
                loc(),
                "final node has outgoing transitions",
            )),
            _ => {}
        }
        let (in_ok, out_ok, want) = match n.kind {
            NodeKind::Action => (i >= 1, o == 1, "at least 1 incoming and exactly 1 outgoing"),
            NodeKind::Initial => (true, o == 1, "exactly 1 outgoing"),
            NodeKind::Final => (i >= 1, true, "at least 1 incoming"),
            NodeKind::Decision => (i == 1, o >= 2, "exactly 1 incoming and at least 2 outgoing"),
            NodeKind::Merge => (i >= 2, o == 1, "at least 2 incoming and exactly 1 outgoing"),
            // single-branch fork/join pairs occur in the width-1 forking benchmark
            NodeKind::Fork => (i == 1, o >= 1, "exactly 1 incoming and at least 1 outgoing"),
            NodeKind::Join => (i >= 1, o == 1, "at least 1 incoming and exactly 1 outgoing"),
        };
        if !in_ok || !out_ok {
            ok = false;
            out.push(Diagnostic::new(
                Rule::NodeDegree,
                loc(),
                format!("{} node needs {want}, has {i} in / {o} out", n.kind.keyword()),
            ));
        }
        if n.kind == NodeKind::Action && n.action.as_deref().unwrap_or("").is_empty() {
            out.push(Diagnostic::new(Rule::NodeDegree, loc(), "action node without a name"));
        }
    }
    ok
}

fn check_expressions(ad: &ActivityDiagram, out: &mut Vec<Diagnostic>) {
    let decls = ad.var_decls();
    for (i, t) in ad.transitions.iter().enumerate() {
        match type_check(&t.guard, &decls) {
            Ok(Type::Bool) => {}
            Ok(other) => out.push(Diagnostic::new(
                Rule::GuardNotBool,
                Location::Transition(i),
                format!("guard `{}` has type {other}", t.guard),
            )),
            Err(diags) => out.extend(diags.into_iter().map(|mut d| {
                if d.location == Location::Diagram {
                    d.location = Location::Transition(i);
                }
                d
            })),
        }
    }
    for n in &ad.nodes {
        let mut assigned = HashSet::new();
        for (var, e) in &n.assignments {
            if !assigned.insert(var.as_str()) {
                out.push(Diagnostic::new(
                    Rule::DuplicateVariable,
                    Location::Node(n.id.clone()),
                    format!("`{var}` assigned twice in one action"),
                ));
            }
            let target = ad.var(var);
            match target {
                None => out.push(Diagnostic::new(
                    Rule::UndeclaredVariable,
                    Location::Node(n.id.clone()),
                    format!("assignment to undeclared variable `{var}`"),
                )),
                Some(v) if v.kind == VarKind::Input => out.push(Diagnostic::new(
                    Rule::AssignToInput,
                    Location::Node(n.id.clone()),
                    format!("input variable `{var}` cannot be assigned"),
                )),
                Some(_) => {}
            }
            match type_check(e, &decls) {
                Ok(t) => {
                    if let Some(v) = target {
                        if v.domain.type_tag() != t {
                            out.push(Diagnostic::new(
                                Rule::TypeMismatch,
                                Location::Node(n.id.clone()),
                                format!("`{var}` has type {} but `{e}` has type {t}", v.domain.type_tag()),
                            ));
                        } else if let Expr::Const(c) = e {
                            if !v.domain.contains(c) {
                                out.push(Diagnostic::new(
                                    Rule::TypeMismatch,
                                    Location::Node(n.id.clone()),
                                    format!("constant {c} is outside the domain of `{var}`"),
                                ));
                            }
                        }
                    }
                }
                Err(diags) => out.extend(diags.into_iter().map(|mut d| {
                    if d.location == Location::Diagram {
                        d.location = Location::Node(n.id.clone());
                    }
                    d
                })),
            }
        }
        if n.kind != NodeKind::Action && !n.assignments.is_empty() {
            out.push(Diagnostic::new(
                Rule::TypeMismatch,
                Location::Node(n.id.clone()),
                "only action nodes carry assignments",
            ));
        }
    }
}

fn check_first_action(ad: &ActivityDiagram, out: &mut Vec<Diagnostic>) {
    if ad.local_vars.is_empty() {
        return;
    }
    let Some(init) = ad.initial_node() else { return };
    let Some((_, t)) = ad.outgoing(&init.id).next() else { return };
    let Some(first) = ad.node(&t.trg) else { return };
    for v in &ad.local_vars {
        if !first.assignments.iter().any(|(n, _)| n == &v.name) {
            out.push(Diagnostic::new(
                Rule::FirstActionAssignsLocals,
                Location::Node(first.id.clone()),
                format!("first action `{}` does not assign local `{}`", first.id, v.name),
            ));
        }
    }
}

/// Matches every fork with its join and checks the regions in between.
struct ForkAnalysis<'a> {
    ad: &'a ActivityDiagram,
    succ: Vec<Vec<(usize, usize)>>,
    kind: Vec<NodeKind>,
    memo: HashMap<usize, Option<Region>>,
    in_progress: HashSet<usize>,
}

#[derive(Clone)]
struct Region {
    join: usize,
    actions: BTreeSet<String>,
}

impl<'a> ForkAnalysis<'a> {
    fn new(ad: &'a ActivityDiagram) -> Self {
        let idx: HashMap<&str, usize> =
            ad.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let mut succ = vec![Vec::new(); ad.nodes.len()];
        for (ti, t) in ad.transitions.iter().enumerate() {
            succ[idx[t.src.as_str()]].push((ti, idx[t.trg.as_str()]));
        }
        ForkAnalysis {
            ad,
            succ,
            kind: ad.nodes.iter().map(|n| n.kind).collect(),
            memo: HashMap::new(),
            in_progress: HashSet::new(),
        }
    }

    fn run(mut self, out: &mut Vec<Diagnostic>) {
        let forks: Vec<usize> = (0..self.kind.len())
            .filter(|&i| self.kind[i] == NodeKind::Fork)
            .collect();
        for f in forks {
            self.region(f, out);
        }
        let matched: HashSet<usize> = self.memo.values().flatten().map(|r| r.join).collect();
        for (i, n) in self.ad.nodes.iter().enumerate() {
            if n.kind == NodeKind::Join && !matched.contains(&i) {
                out.push(Diagnostic::new(
                    Rule::ForkJoinBalance,
                    Location::Node(n.id.clone()),
                    "join is not the matching join of any fork",
                ));
            }
        }
    }

    fn region(&mut self, fork: usize, out: &mut Vec<Diagnostic>) -> Option<Region> {
        if let Some(r) = self.memo.get(&fork) {
            return r.clone();
        }
        let fork_id = self.ad.nodes[fork].id.clone();
        if !self.in_progress.insert(fork) {
            out.push(Diagnostic::new(
                Rule::ForkJoinBalance,
                Location::Node(fork_id),
                "fork is re-entered before its join is reached",
            ));
            return None;
        }
        let result = self.analyse(fork, &fork_id, out);
        self.in_progress.remove(&fork);
        self.memo.insert(fork, result.clone());
        result
    }

    fn analyse(&mut self, fork: usize, fork_id: &str, out: &mut Vec<Diagnostic>) -> Option<Region> {
        let branches = self.succ[fork].clone();
        let mut joins = BTreeSet::new();
        let mut entry_edges: Vec<BTreeSet<usize>> = Vec::new();
        let mut names: Vec<BTreeSet<String>> = Vec::new();
        let mut failed = false;
        for &branch in &branches {
            let mut seen = HashSet::new();
            let mut stack = Vec::new();
            let mut edges = BTreeSet::new();
            let mut acts = BTreeSet::new();
            self.follow(&[branch], &mut stack, &mut edges, &mut joins);
            while let Some(n) = stack.pop() {
                if !seen.insert(n) {
                    continue;
                }
                match self.kind[n] {
                    NodeKind::Join => unreachable!("joins are handled at the edge"),
                    NodeKind::Final => {
                        out.push(Diagnostic::new(
                            Rule::FinalInFork,
                            Location::Node(self.ad.nodes[n].id.clone()),
                            format!("final node reachable inside the region of fork `{fork_id}`"),
                        ));
                        failed = true;
                        continue;
                    }
                    NodeKind::Fork if n == fork => {
                        out.push(Diagnostic::new(
                            Rule::ForkJoinBalance,
                            Location::Node(fork_id.to_string()),
                            "branch loops back to its own fork",
                        ));
                        failed = true;
                        continue;
                    }
                    NodeKind::Fork => {
                        let Some(inner) = self.region(n, out) else {
                            failed = true;
                            continue;
                        };
                        acts.extend(inner.actions.iter().cloned());
                        let after = self.succ[inner.join].clone();
                        self.follow(&after, &mut stack, &mut edges, &mut joins);
                        continue;
                    }
                    NodeKind::Action => {
                        if let Some(a) = &self.ad.nodes[n].action {
                            acts.insert(a.clone());
                        }
                    }
                    _ => {}
                }
                let next = self.succ[n].clone();
                self.follow(&next, &mut stack, &mut edges, &mut joins);
            }
            entry_edges.push(edges);
            names.push(acts);
        }
        if failed {
            return None;
        }
        if joins.len() != 1 {
            out.push(Diagnostic::new(
                Rule::ForkJoinBalance,
                Location::Node(fork_id.to_string()),
                format!("branches of the fork reach {} distinct joins, expected 1", joins.len()),
            ));
            return None;
        }
        let join = *joins.iter().next().unwrap();
        let join_in: BTreeSet<usize> = self
            .ad
            .incoming(&self.ad.nodes[join].id)
            .map(|(i, _)| i)
            .collect();
        let mut used = BTreeSet::new();
        let mut balanced = true;
        for e in &entry_edges {
            if e.len() != 1 || !used.insert(*e.iter().next().unwrap()) {
                balanced = false;
            }
        }
        if !balanced || used != join_in {
            out.push(Diagnostic::new(
                Rule::ForkJoinBalance,
                Location::Node(fork_id.to_string()),
                format!(
                    "each branch must enter join `{}` through its own transition",
                    self.ad.nodes[join].id
                ),
            ));
            return None;
        }
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                for a in names[i].intersection(&names[j]) {
                    out.push(Diagnostic::new(
                        Rule::RepeatedForkedAction,
                        Location::Node(fork_id.to_string()),
                        format!("action `{a}` occurs on more than one branch"),
                    ));
                }
            }
        }
        Some(Region {
            join,
            actions: names.into_iter().flatten().collect(),
        })
    }

    fn follow(
        &self,
        next: &[(usize, usize)],
        stack: &mut Vec<usize>,
        edges: &mut BTreeSet<usize>,
        joins: &mut BTreeSet<usize>,
    ) {
        for &(ti, m) in next {
            if self.kind[m] == NodeKind::Join {
                joins.insert(m);
                edges.insert(ti);
            } else {
                stack.push(m);
            }
        }
    }
}

/// Checks that the outgoing guards of every decision are pairwise exclusive
/// and jointly exhaustive. Each finding carries a witness assignment.
pub fn check_guard_exclusivity(ad: &ActivityDiagram) -> Vec<Diagnostic> {
    check_guard_exclusivity_with(ad, ENUMERATION_LIMIT)
}

/// As [`check_guard_exclusivity`], switching to the decision-diagram check
/// when a decision's assignment space exceeds `enumeration_limit`.
pub fn check_guard_exclusivity_with(ad: &ActivityDiagram, enumeration_limit: u64) -> Vec<Diagnostic> {
    let decls = ad.var_decls();
    let mut out = Vec::new();
    for n in ad.nodes.iter().filter(|n| n.kind == NodeKind::Decision) {
        let guards: Vec<&Expr> = ad.outgoing(&n.id).map(|(_, t)| &t.guard).collect();
        if guards.iter().any(|g| type_check(g, &decls) != Ok(Type::Bool)) {
            continue;
        }
        let mut names = BTreeSet::new();
        for g in &guards {
            names.extend(expr::free_vars(g));
        }
        let vars: Vec<&VarDecl> = decls.iter().filter(|d| names.contains(&d.name)).collect();
        let space = vars
            .iter()
            .try_fold(1u64, |acc, v| acc.checked_mul(v.domain.cardinality()));
        let findings = match space {
            Some(s) if s <= enumeration_limit => guard_findings_enumerated(&vars, &guards),
            _ => crate::encode::guard_findings_symbolic(&vars, &guards),
        };
        for f in findings {
            out.push(f.into_diagnostic(ad, &n.id));
        }
    }
    out.sort();
    out
}

/// A guard problem found at one decision node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum GuardFinding {
    Overlap(usize, usize, Vec<(String, Value)>),
    Gap(Vec<(String, Value)>),
}

impl GuardFinding {
    fn into_diagnostic(self, ad: &ActivityDiagram, node: &str) -> Diagnostic {
        let targets: Vec<&str> = ad.outgoing(node).map(|(_, t)| t.trg.as_str()).collect();
        match self {
            GuardFinding::Overlap(i, j, w) => Diagnostic::new(
                Rule::GuardsOverlap,
                Location::Node(node.to_string()),
                format!(
                    "guards towards `{}` and `{}` can hold at the same time",
                    targets[i], targets[j]
                ),
            )
            .with_witness(w),
            GuardFinding::Gap(w) => Diagnostic::new(
                Rule::GuardsNotExhaustive,
                Location::Node(node.to_string()),
                "some assignment satisfies no outgoing guard",
            )
            .with_witness(w),
        }
    }
}

/// Brute force over the product of the guards' variable domains; each
/// witness is the first offending assignment in lexicographic order.
pub(crate) fn guard_findings_enumerated(vars: &[&VarDecl], guards: &[&Expr]) -> Vec<GuardFinding> {
    let k = guards.len();
    let mut overlap: Vec<Option<Vec<(String, Value)>>> = vec![None; k * k];
    let mut gap = None;
    let names: Vec<String> = vars.iter().map(|v| v.name.clone()).collect();
    let cards: Vec<u64> = vars.iter().map(|v| v.domain.cardinality()).collect();
    let mut idx = vec![0u64; vars.len()];
    loop {
        let values: Vec<Value> = vars
            .iter()
            .zip(&idx)
            .map(|(v, &i)| v.domain.value_at(i))
            .collect();
        let env = expr::Positional {
            names: &names,
            values: &values,
        };
        let sat: Vec<bool> = guards
            .iter()
            .map(|g| expr::eval_bool(g, &env).unwrap_or(false))
            .collect();
        let witness = || names.iter().cloned().zip(values.iter().cloned()).collect::<Vec<_>>();
        if gap.is_none() && !sat.iter().any(|&b| b) {
            gap = Some(witness());
        }
        for i in 0..k {
            for j in i + 1..k {
                if sat[i] && sat[j] && overlap[i * k + j].is_none() {
                    overlap[i * k + j] = Some(witness());
                }
            }
        }
        // odometer, last variable fastest
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                let mut res = Vec::new();
                for i in 0..k {
                    for j in i + 1..k {
                        if let Some(w) = overlap[i * k + j].take() {
                            res.push(GuardFinding::Overlap(i, j, w));
                        }
                    }
                }
                if let Some(w) = gap {
                    res.push(GuardFinding::Gap(w));
                }
                return res;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < cards[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
}
