//! Operational semantics: an activity diagram as an explicit transition
//! system.
//!
//! Control flow is tracked with one boolean token per transition. A state
//! records the node executed last, the variable valuation and the marking
//! *after* pseudo nodes have been routed, so every step executes exactly one
//! action or reaches a final node.

use std::collections::VecDeque;
use std::fmt;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{apply_binop, BinOp, Env, EvalError, Expr, Value};
use crate::model::{ActivityDiagram, NodeKind, VarDecl, VarKind};

pub use crate::smv::emit_smv;

pub const INIT_LABEL: &str = "⊥init";
pub const FIN_LABEL: &str = "⊥fin";

/// Default cap on explored states for explicit-state operations.
pub const DEFAULT_STATE_BUDGET: usize = 5_000_000;

/// The observable label of a state: `ac` in the state tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Init,
    Action(String),
    Fin,
}

impl Label {
    pub fn as_str(&self) -> &str {
        match self {
            Label::Init => INIT_LABEL,
            Label::Action(a) => a,
            Label::Fin => FIN_LABEL,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("pseudo nodes keep routing tokens without executing an action")]
    NonTermination,
    #[error("action `{node}` assigns {value} to `{var}`, outside its domain")]
    OutOfDomain { node: String, var: String, value: Value },
    #[error("no outgoing guard of decision `{0}` holds")]
    NoGuardEnabled(String),
    #[error("several outgoing guards of decision `{0}` hold")]
    GuardsOverlap(String),
    #[error("node `{0}` puts a second token on a transition")]
    UnsafeMarking(String),
    #[error("in `{node}`: {source}")]
    Eval { node: String, source: EvalError },
    #[error("state budget of {0} states exceeded")]
    StateBudget(usize),
    #[error("diagram cannot be executed: {0}")]
    Malformed(String),
}

/// Set of transitions holding a token.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(Box<[u64]>);

impl Marking {
    pub fn empty(transitions: usize) -> Marking {
        Marking(vec![0; transitions.div_ceil(64).max(1)].into_boxed_slice())
    }

    pub fn get(&self, t: usize) -> bool {
        self.0[t / 64] >> (t % 64) & 1 == 1
    }

    pub fn set(&mut self, t: usize) {
        self.0[t / 64] |= 1 << (t % 64);
    }

    pub fn clear(&mut self, t: usize) {
        self.0[t / 64] &= !(1 << (t % 64));
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Marked transitions in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(i, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| i * 64 + b)
        })
    }
}

/// A state: node executed last (index into `ad.nodes`), domain indices of
/// all variables (inputs first, then locals) and the stabilized marking.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdState {
    pub node: u32,
    pub env: Box<[u32]>,
    pub marking: Marking,
}

/// A trace `s0 … sk` with `s0` initial.
pub type Trace = Vec<AdState>;

#[derive(Clone, Debug)]
enum CExpr {
    Const(Value),
    Var(usize),
    Not(Box<CExpr>),
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
}

/// An activity diagram compiled for fast successor computation.
#[derive(Clone, Debug)]
pub struct Machine {
    ad: ActivityDiagram,
    vars: Vec<VarDecl>,
    n_inputs: usize,
    kinds: Vec<NodeKind>,
    labels: Vec<Label>,
    /// Position of each node when sorted by id.
    rank: Vec<u32>,
    src: Vec<usize>,
    trg: Vec<usize>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    guards: Vec<Option<CExpr>>,
    assigns: Vec<Vec<(usize, CExpr)>>,
    initial: usize,
    /// Action and final nodes in canonical order.
    steppers: Vec<usize>,
    pseudo: Vec<usize>,
    budget: usize,
}

impl Machine {
    /// Compiles `ad`. The diagram should have passed validation; only
    /// problems that make execution impossible are reported here.
    pub fn new(ad: &ActivityDiagram) -> Result<Machine, SemanticsError> {
        let vars: Vec<VarDecl> = ad.vars().cloned().collect();
        let n_inputs = ad.input_vars.len();
        let index = |id: &str| {
            ad.node_index(id)
                .ok_or_else(|| SemanticsError::Malformed(format!("unknown node `{id}`")))
        };
        let n = ad.nodes.len();
        let mut src = Vec::new();
        let mut trg = Vec::new();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        let mut guards = Vec::new();
        for (i, t) in ad.transitions.iter().enumerate() {
            let (s, d) = (index(&t.src)?, index(&t.trg)?);
            src.push(s);
            trg.push(d);
            out_edges[s].push(i);
            in_edges[d].push(i);
            guards.push(if t.guard.is_true() {
                None
            } else {
                Some(compile(&t.guard, &vars).map_err(SemanticsError::Malformed)?)
            });
        }
        let mut assigns = Vec::with_capacity(n);
        for node in &ad.nodes {
            let mut a = Vec::new();
            for (var, e) in &node.assignments {
                let pos = vars
                    .iter()
                    .position(|v| &v.name == var && v.kind == VarKind::Local)
                    .ok_or_else(|| SemanticsError::Malformed(format!("`{var}` is not a local variable")))?;
                a.push((pos, compile(e, &vars).map_err(SemanticsError::Malformed)?));
            }
            assigns.push(a);
        }
        let initials: Vec<usize> = (0..n).filter(|&i| ad.nodes[i].kind == NodeKind::Initial).collect();
        if initials.len() != 1 || out_edges[initials[0]].len() != 1 {
            return Err(SemanticsError::Malformed(
                "need exactly one initial node with one outgoing transition".into(),
            ));
        }
        for (i, node) in ad.nodes.iter().enumerate() {
            if node.kind == NodeKind::Action && out_edges[i].len() != 1 {
                return Err(SemanticsError::Malformed(format!(
                    "action `{}` needs exactly one outgoing transition",
                    node.id
                )));
            }
        }
        let mut by_id: Vec<usize> = (0..n).collect();
        by_id.sort_by(|&a, &b| ad.nodes[a].id.cmp(&ad.nodes[b].id));
        let mut rank = vec![0u32; n];
        for (r, &i) in by_id.iter().enumerate() {
            rank[i] = r as u32;
        }
        let kinds: Vec<NodeKind> = ad.nodes.iter().map(|n| n.kind).collect();
        let labels = ad
            .nodes
            .iter()
            .map(|n| match n.kind {
                NodeKind::Initial => Label::Init,
                NodeKind::Final => Label::Fin,
                _ => Label::Action(n.action.clone().unwrap_or_default()),
            })
            .collect();
        let steppers = by_id
            .iter()
            .copied()
            .filter(|&i| matches!(kinds[i], NodeKind::Action | NodeKind::Final))
            .collect();
        let pseudo = (0..n)
            .filter(|&i| {
                matches!(
                    kinds[i],
                    NodeKind::Decision | NodeKind::Merge | NodeKind::Fork | NodeKind::Join
                )
            })
            .collect();
        Ok(Machine {
            ad: ad.clone(),
            vars,
            n_inputs,
            kinds,
            labels,
            rank,
            src,
            trg,
            out_edges,
            in_edges,
            guards,
            assigns,
            initial: initials[0],
            steppers,
            pseudo,
            budget: DEFAULT_STATE_BUDGET,
        })
    }

    pub fn with_state_budget(mut self, budget: usize) -> Machine {
        self.budget = budget;
        self
    }

    pub fn state_budget(&self) -> usize {
        self.budget
    }

    pub fn ad(&self) -> &ActivityDiagram {
        &self.ad
    }

    /// Inputs followed by locals; the positional order of [`AdState::env`].
    pub fn vars(&self) -> &[VarDecl] {
        &self.vars
    }

    pub fn num_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn num_transitions(&self) -> usize {
        self.src.len()
    }

    pub fn node_kind(&self, node: u32) -> NodeKind {
        self.kinds[node as usize]
    }

    pub fn node_id(&self, node: u32) -> &str {
        &self.ad.nodes[node as usize].id
    }

    pub fn label(&self, s: &AdState) -> &Label {
        &self.labels[s.node as usize]
    }

    pub fn node_label(&self, node: u32) -> &Label {
        &self.labels[node as usize]
    }

    pub fn initial_node(&self) -> u32 {
        self.initial as u32
    }

    /// Position of `node` in id order.
    pub fn rank(&self, node: u32) -> u32 {
        self.rank[node as usize]
    }

    pub fn transition_ends(&self, t: usize) -> (usize, usize) {
        (self.src[t], self.trg[t])
    }

    pub fn value(&self, s: &AdState, var: usize) -> Value {
        self.vars[var].domain.value_at(s.env[var] as u64)
    }

    pub fn env(&self, s: &AdState) -> Env {
        (0..self.vars.len())
            .map(|i| (self.vars[i].name.clone(), self.value(s, i)))
            .collect()
    }

    /// Input part of the valuation.
    pub fn inputs<'s>(&self, s: &'s AdState) -> &'s [u32] {
        &s.env[..self.n_inputs]
    }

    /// Canonical state order: node id, then valuation, then marking.
    pub fn canonical_cmp(&self, a: &AdState, b: &AdState) -> std::cmp::Ordering {
        self.rank[a.node as usize]
            .cmp(&self.rank[b.node as usize])
            .then_with(|| a.env.cmp(&b.env))
            .then_with(|| a.marking.cmp(&b.marking))
    }

    /// Every input assignment in lexicographic order of domain indices.
    pub fn input_assignments(&self) -> Vec<Vec<u32>> {
        let cards: Vec<u64> = self.vars[..self.n_inputs]
            .iter()
            .map(|v| v.domain.cardinality())
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0u32; cards.len()];
        loop {
            out.push(idx.clone());
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                idx[pos] += 1;
                if (idx[pos] as u64) < cards[pos] {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    /// The initial state for one input assignment.
    pub fn initial_state(&self, inputs: &[u32]) -> Result<AdState, SemanticsError> {
        let mut env: Vec<u32> = inputs.to_vec();
        env.resize(self.vars.len(), 0);
        let mut marking = Marking::empty(self.num_transitions());
        marking.set(self.out_edges[self.initial][0]);
        let marking = self.stabilize(&marking, &env)?;
        Ok(AdState {
            node: self.initial as u32,
            env: env.into_boxed_slice(),
            marking,
        })
    }

    /// One initial state per input assignment, in lexicographic input order.
    pub fn initial_states(&self) -> Result<Vec<AdState>, SemanticsError> {
        self.input_assignments()
            .iter()
            .map(|i| self.initial_state(i))
            .collect()
    }

    fn eval(&self, e: &CExpr, env: &[u32], node: usize) -> Result<Value, SemanticsError> {
        let wrap = |source| SemanticsError::Eval {
            node: self.ad.nodes[node].id.clone(),
            source,
        };
        match e {
            CExpr::Const(v) => Ok(v.clone()),
            CExpr::Var(i) => Ok(self.vars[*i].domain.value_at(env[*i] as u64)),
            CExpr::Not(inner) => match self.eval(inner, env, node)? {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                other => Err(wrap(EvalError::NotBool(other.type_tag()))),
            },
            CExpr::Bin(op, l, r) => {
                let lv = self.eval(l, env, node)?;
                let rv = self.eval(r, env, node)?;
                apply_binop(*op, &lv, &rv).map_err(wrap)
            }
        }
    }

    fn guard_holds(&self, t: usize, env: &[u32]) -> Result<bool, SemanticsError> {
        match &self.guards[t] {
            None => Ok(true),
            Some(g) => match self.eval(g, env, self.src[t])? {
                Value::Bool(b) => Ok(b),
                other => Err(SemanticsError::Eval {
                    node: self.ad.nodes[self.src[t]].id.clone(),
                    source: EvalError::NotBool(other.type_tag()),
                }),
            },
        }
    }

    fn pseudo_enabled(&self, m: &Marking, n: usize) -> bool {
        match self.kinds[n] {
            NodeKind::Join => self.in_edges[n].iter().all(|&t| m.get(t)),
            _ => self.in_edges[n].iter().any(|&t| m.get(t)),
        }
    }

    fn emit(&self, m: &mut Marking, t: usize, by: usize) -> Result<(), SemanticsError> {
        if m.get(t) {
            return Err(SemanticsError::UnsafeMarking(self.ad.nodes[by].id.clone()));
        }
        m.set(t);
        Ok(())
    }

    fn fire_pseudo(&self, m: &mut Marking, env: &[u32], n: usize) -> Result<(), SemanticsError> {
        match self.kinds[n] {
            NodeKind::Join => {
                for &t in &self.in_edges[n] {
                    m.clear(t);
                }
            }
            _ => {
                let t = *self.in_edges[n].iter().find(|&&t| m.get(t)).unwrap();
                m.clear(t);
            }
        }
        match self.kinds[n] {
            NodeKind::Fork => {
                for &t in &self.out_edges[n] {
                    self.emit(m, t, n)?;
                }
            }
            NodeKind::Decision => {
                let mut chosen = None;
                for &t in &self.out_edges[n] {
                    if self.guard_holds(t, env)? {
                        if chosen.is_some() {
                            return Err(SemanticsError::GuardsOverlap(self.ad.nodes[n].id.clone()));
                        }
                        chosen = Some(t);
                    }
                }
                let t = chosen.ok_or_else(|| SemanticsError::NoGuardEnabled(self.ad.nodes[n].id.clone()))?;
                self.emit(m, t, n)?;
            }
            _ => {
                for &t in &self.out_edges[n] {
                    self.emit(m, t, n)?;
                }
            }
        }
        Ok(())
    }

    /// Routes tokens through pseudo nodes until none is enabled.
    pub fn stabilize(&self, marking: &Marking, env: &[u32]) -> Result<Marking, SemanticsError> {
        self.stabilize_with(marking, env, &mut |_| 0)
    }

    /// As [`Machine::stabilize`], letting `choose` pick which enabled pseudo
    /// node fires next (it receives the candidates in node order).
    pub fn stabilize_with(
        &self,
        marking: &Marking,
        env: &[u32],
        choose: &mut dyn FnMut(&[usize]) -> usize,
    ) -> Result<Marking, SemanticsError> {
        let mut m = marking.clone();
        let mut seen: FxHashSet<Marking> = FxHashSet::default();
        let mut enabled = Vec::new();
        loop {
            enabled.clear();
            enabled.extend(self.pseudo.iter().copied().filter(|&n| self.pseudo_enabled(&m, n)));
            if enabled.is_empty() {
                return Ok(m);
            }
            if !seen.insert(m.clone()) {
                return Err(SemanticsError::NonTermination);
            }
            let pick = enabled[choose(&enabled) % enabled.len()];
            self.fire_pseudo(&mut m, env, pick)?;
        }
    }

    pub fn is_final(&self, s: &AdState) -> bool {
        self.kinds[s.node as usize] == NodeKind::Final
    }

    /// All one-step successors of `s` in canonical order.
    pub fn successors(&self, s: &AdState) -> Result<Vec<AdState>, SemanticsError> {
        let mut out = Vec::new();
        self.successors_into(s, &mut out)?;
        Ok(out)
    }

    /// Appends the successors of `s` to `out`, in canonical order.
    pub fn successors_into(&self, s: &AdState, out: &mut Vec<AdState>) -> Result<(), SemanticsError> {
        if self.is_final(s) {
            return Ok(());
        }
        let start = out.len();
        for &n in &self.steppers {
            let Some(&t_in) = self.in_edges[n].iter().find(|&&t| s.marking.get(t)) else {
                continue;
            };
            if self.kinds[n] == NodeKind::Final {
                out.push(AdState {
                    node: n as u32,
                    env: s.env.clone(),
                    marking: Marking::empty(self.num_transitions()),
                });
                continue;
            }
            let mut env = s.env.clone();
            for (pos, e) in &self.assigns[n] {
                let v = self.eval(e, &s.env, n)?;
                let idx = self.vars[*pos].domain.index_of(&v).ok_or_else(|| {
                    SemanticsError::OutOfDomain {
                        node: self.ad.nodes[n].id.clone(),
                        var: self.vars[*pos].name.clone(),
                        value: v.clone(),
                    }
                })?;
                env[*pos] = idx as u32;
            }
            let mut m = s.marking.clone();
            m.clear(t_in);
            self.emit(&mut m, self.out_edges[n][0], n)?;
            let m = self.stabilize(&m, &env)?;
            out.push(AdState {
                node: n as u32,
                env,
                marking: m,
            });
        }
        // steppers are already in id order and each yields one state
        debug_assert!(out[start..]
            .windows(2)
            .all(|w| self.canonical_cmp(&w[0], &w[1]).is_lt()));
        Ok(())
    }

    /// Every reachable state, in BFS order from the initial states.
    pub fn reachable_states(&self) -> Result<Vec<AdState>, SemanticsError> {
        let mut seen: FxHashSet<AdState> = FxHashSet::default();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for s in self.initial_states()? {
            if seen.insert(s.clone()) {
                order.push(s.clone());
                queue.push_back(s);
            }
        }
        let mut succ = Vec::new();
        while let Some(s) = queue.pop_front() {
            succ.clear();
            self.successors_into(&s, &mut succ)?;
            for t in succ.drain(..) {
                if !seen.contains(&t) {
                    if seen.len() >= self.budget {
                        return Err(SemanticsError::StateBudget(self.budget));
                    }
                    seen.insert(t.clone());
                    order.push(t.clone());
                    queue.push_back(t);
                }
            }
        }
        Ok(order)
    }

    /// All traces with at most `max_len` states. The state budget bounds the
    /// number of traces produced.
    pub fn enumerate_traces(&self, max_len: usize) -> Result<Vec<Trace>, SemanticsError> {
        assert!(max_len >= 1, "traces contain at least the initial state");
        let mut out: Vec<Trace> = Vec::new();
        let mut frontier: Vec<Trace> = self.initial_states()?.into_iter().map(|s| vec![s]).collect();
        let mut len = 1;
        loop {
            if out.len() + frontier.len() > self.budget {
                return Err(SemanticsError::StateBudget(self.budget));
            }
            if len == max_len {
                out.extend(frontier);
                return Ok(out);
            }
            let mut next = Vec::new();
            for t in &frontier {
                for s in self.successors(t.last().unwrap())? {
                    let mut longer = t.clone();
                    longer.push(s);
                    next.push(longer);
                }
            }
            out.extend(frontier);
            if next.is_empty() {
                return Ok(out);
            }
            frontier = next;
            len += 1;
        }
    }

    /// A trace is accepting when it ends in a final node.
    pub fn is_accepting(&self, t: &[AdState]) -> bool {
        t.last().is_some_and(|s| self.is_final(s))
    }

    /// Looks up a state from its external description.
    pub fn state_from(&self, node: &str, env: &Env, marking: &[usize]) -> Option<AdState> {
        let n = self.ad.node_index(node)?;
        let mut idx = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            idx.push(v.domain.index_of(env.get(&v.name)?)? as u32);
        }
        let mut m = Marking::empty(self.num_transitions());
        for &t in marking {
            if t >= self.num_transitions() {
                return None;
            }
            m.set(t);
        }
        Some(AdState {
            node: n as u32,
            env: idx.into_boxed_slice(),
            marking: m,
        })
    }

    /// How the token emitted by action `n` is routed before the next state
    /// is reached. Pseudo nodes never follow each other, so one routing step
    /// always suffices on a stable marking.
    pub(crate) fn routing_after(&self, n: usize) -> (usize, Routing) {
        let t_o = self.out_edges[n][0];
        let p = self.trg[t_o];
        let r = match self.kinds[p] {
            NodeKind::Merge => Routing::Merge(self.out_edges[p][0]),
            NodeKind::Fork => Routing::Fork(self.out_edges[p].clone()),
            NodeKind::Decision => Routing::Decision(
                self.out_edges[p]
                    .iter()
                    .map(|&t| (t, self.ad.transitions[t].guard.clone()))
                    .collect(),
            ),
            NodeKind::Join => Routing::Join {
                others: self.in_edges[p].iter().copied().filter(|&t| t != t_o).collect(),
                out: self.out_edges[p][0],
            },
            _ => Routing::Direct,
        };
        (t_o, r)
    }

    pub(crate) fn assignments_of(&self, node: usize) -> impl Iterator<Item = (usize, &Expr)> + '_ {
        self.ad.nodes[node]
            .assignments
            .iter()
            .map(move |(v, e)| (self.vars.iter().position(|d| &d.name == v).unwrap(), e))
    }

    pub(crate) fn in_edges(&self, node: usize) -> &[usize] {
        &self.in_edges[node]
    }

    pub(crate) fn steppers(&self) -> &[usize] {
        &self.steppers
    }
}

/// Where the token leaving an action ends up; see [`Machine::routing_after`].
#[derive(Clone, Debug)]
pub(crate) enum Routing {
    /// The target is an action or final node.
    Direct,
    Merge(usize),
    Fork(Vec<usize>),
    /// Outgoing edges with their guards, read on the updated valuation.
    Decision(Vec<(usize, Expr)>),
    /// Fires when every other incoming edge already holds a token.
    Join { others: Vec<usize>, out: usize },
}

fn compile(e: &Expr, vars: &[VarDecl]) -> Result<CExpr, String> {
    Ok(match e {
        Expr::Const(v) => CExpr::Const(v.clone()),
        Expr::Var(n) => CExpr::Var(
            vars.iter()
                .position(|v| &v.name == n)
                .ok_or_else(|| format!("undeclared variable `{n}`"))?,
        ),
        Expr::Not(inner) => CExpr::Not(Box::new(compile(inner, vars)?)),
        Expr::Binary(op, l, r) => CExpr::Bin(*op, Box::new(compile(l, vars)?), Box::new(compile(r, vars)?)),
    })
}

/// Initial states of `ad`, one per input assignment.
pub fn initial_states(ad: &ActivityDiagram) -> Result<Vec<AdState>, SemanticsError> {
    Machine::new(ad)?.initial_states()
}

pub fn successors(s: &AdState, ad: &ActivityDiagram) -> Result<Vec<AdState>, SemanticsError> {
    Machine::new(ad)?.successors(s)
}

pub fn reachable_states(ad: &ActivityDiagram) -> Result<Vec<AdState>, SemanticsError> {
    Machine::new(ad)?.reachable_states()
}

pub fn enumerate_traces(ad: &ActivityDiagram, max_len: usize) -> Result<Vec<Trace>, SemanticsError> {
    Machine::new(ad)?.enumerate_traces(max_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse;

    fn machine(src: &str) -> Machine {
        Machine::new(&parse(src).unwrap()).unwrap()
    }

    #[test]
    fn initial_state_counts() {
        let m = machine(r#"activity a { initial i; action x "x"; final f; i -> x; x -> f; }"#);
        assert_eq!(m.initial_states().unwrap().len(), 1);
        assert_eq!(m.reachable_states().unwrap().len(), 3);
        let m = machine(
            r#"activity a { input b: bool; input c: 0..3;
               initial i; action x "x"; final f; i -> x; x -> f; }"#,
        );
        assert_eq!(m.initial_states().unwrap().len(), 8);
    }

    #[test]
    fn fork_join_interleavings() {
        let m = machine(
            r#"activity a {
                initial i; action s "s"; fork k; action p "p"; action q "q"; join j;
                action e "e"; final f;
                i -> s; s -> k; k -> p; k -> q; p -> j; q -> j; j -> e; e -> f;
            }"#,
        );
        let init = &m.initial_states().unwrap()[0];
        let after_s = &m.successors(init).unwrap()[0];
        let succ = m.successors(after_s).unwrap();
        let names: Vec<&str> = succ.iter().map(|s| m.label(s).as_str()).collect();
        assert_eq!(names, vec!["p", "q"]);
        // join waits for both branches
        let after_p = &succ[0];
        assert_eq!(
            m.successors(after_p).unwrap().iter().map(|s| m.label(s).as_str()).collect::<Vec<_>>(),
            vec!["q"]
        );
        // init, s, p, q, q-after-p, p-after-q, e, fin
        assert_eq!(m.reachable_states().unwrap().len(), 8);
        let traces = m.enumerate_traces(10).unwrap();
        let accepting = traces.iter().filter(|t| m.is_accepting(t)).count();
        assert_eq!(accepting, 2);
        assert!(!m.is_accepting(&traces[0]));
    }

    #[test]
    fn out_of_domain_assignment_is_an_error() {
        let m = machine(
            r#"activity a { local c: 0..1;
               initial i; action x "x" { c = 0; }; action y "y" { c = c + 2; }; final f;
               i -> x; x -> y; y -> f; }"#,
        );
        let s0 = &m.initial_states().unwrap()[0];
        let s1 = &m.successors(s0).unwrap()[0];
        assert!(matches!(m.successors(s1), Err(SemanticsError::OutOfDomain { .. })));
    }

    #[test]
    fn pseudo_cycle_detected() {
        // not a valid diagram, but stabilize must not spin
        let mut ad = parse(
            r#"activity a { initial i; action x "x"; merge m1; merge m2; final f;
               i -> x; x -> m1; m2 -> m1; m1 -> m2; m2 -> f; }"#,
        )
        .unwrap();
        ad.transitions.retain(|t| !(t.src == "m2" && t.trg == "f"));
        let m = Machine::new(&ad).unwrap();
        let s0 = &m.initial_states().unwrap()[0];
        assert_eq!(m.successors(s0), Err(SemanticsError::NonTermination));
    }
}
