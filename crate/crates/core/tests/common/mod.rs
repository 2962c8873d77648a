//! Helpers shared by the integration tests: a generator of small random
//! diagrams and a brute-force diff-trace enumerator that does not reuse any
//! of the library's diff code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use addiff::expr::{BinOp, Env, Expr, Value};
use addiff::model::{check_guard_exclusivity, validate, ActivityDiagram, Domain, Node, NodeKind, Transition, VarDecl, VarKind};
use addiff::semantics::{AdState, Machine};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generated diagrams have at most this many nodes.
pub const MAX_NODES: usize = 12;

const NAMES: [&str; 5] = ["a", "b", "c", "d", "e"];

/// Up to two variables over domains of at most 4 values.
pub fn random_vars(rng: &mut TestRng) -> Vec<VarDecl> {
    let n = rng.gen_range(0..=2);
    (0..n)
        .map(|i| {
            let domain = if rng.gen_bool(0.3) {
                Domain::Bool
            } else {
                Domain::Int {
                    lo: 0,
                    hi: rng.gen_range(1..=3),
                }
            };
            let kind = if rng.gen_bool(0.6) { VarKind::Input } else { VarKind::Local };
            let name = ["x", "y"][i];
            VarDecl::new(name, domain, kind)
        })
        .collect()
}

struct Builder<'a> {
    rng: &'a mut TestRng,
    vars: &'a [VarDecl],
    nodes: Vec<Node>,
    edges: Vec<Transition>,
    next: usize,
}

impl<'a> Builder<'a> {
    fn fresh(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{prefix}{}", self.next)
    }

    fn pseudo(&mut self, kind: NodeKind) -> String {
        let id = self.fresh(kind.keyword());
        self.nodes.push(Node::pseudo(&id, kind));
        id
    }

    fn random_value(&mut self, d: &Domain) -> Expr {
        match d {
            Domain::Bool => Expr::Const(Value::Bool(self.rng.gen_bool(0.5))),
            Domain::Int { lo, hi } => Expr::int(self.rng.gen_range(*lo..=*hi)),
            Domain::Enum(vals) => Expr::Const(Value::enum_lit(vals.choose(self.rng).unwrap())),
        }
    }

    /// A value for `target`: a constant or a copy of a variable of the same
    /// domain.
    fn assigned_value(&mut self, target: &VarDecl) -> Expr {
        let sources: Vec<&VarDecl> = self
            .vars
            .iter()
            .filter(|v| v.name != target.name && v.domain == target.domain)
            .collect();
        if !sources.is_empty() && self.rng.gen_bool(0.5) {
            Expr::var(&sources.choose(self.rng).unwrap().name)
        } else {
            self.random_value(&target.domain)
        }
    }

    fn action(&mut self, name: &str, assign_all: bool) -> String {
        let id = self.fresh("n");
        let mut node = Node::action(&id, name);
        let locals: Vec<VarDecl> = self.vars.iter().filter(|v| v.kind == VarKind::Local).cloned().collect();
        for l in &locals {
            if assign_all || self.rng.gen_bool(0.3) {
                let e = self.assigned_value(l);
                node = node.assign(&l.name, e);
            }
        }
        self.nodes.push(node);
        id
    }

    fn named_action(&mut self) -> String {
        let name = *NAMES.choose(self.rng).unwrap();
        self.action(name, false)
    }

    fn edge(&mut self, src: &str, trg: &str) {
        self.edges.push(Transition::new(src, trg));
    }

    /// Two exclusive, exhaustive guards over one variable.
    fn guards(&mut self) -> Option<(Expr, Expr)> {
        let v = self.vars.choose(self.rng)?.clone();
        let g = match &v.domain {
            Domain::Bool => Expr::var(&v.name),
            Domain::Int { lo, hi } => {
                let c = self.rng.gen_range(*lo + 1..=*hi);
                let op = if self.rng.gen_bool(0.5) { BinOp::Lt } else { BinOp::Eq };
                Expr::bin(op, Expr::var(&v.name), Expr::int(c))
            }
            Domain::Enum(_) => return None,
        };
        Some((g.clone(), Expr::not(g)))
    }

    /// A fragment using at most `budget` nodes, entered and left through an
    /// action. Returns the entry, the exit and the number of nodes used.
    fn block(&mut self, budget: usize, depth: usize) -> (String, String, usize) {
        let mut options = vec![0];
        if depth < 3 && !self.vars.is_empty() {
            if budget >= 5 {
                options.push(1);
            }
            if budget >= 3 {
                options.push(2);
            }
        }
        if depth < 3 && budget >= 6 {
            options.push(3);
        }
        if budget >= 2 {
            options.push(4);
        }
        match *options.choose(self.rng).unwrap() {
            // choice, joined by a merge node or directly at the next action
            1 => {
                let (g, ng) = self.guards().unwrap();
                let p = self.named_action();
                let dec = self.pseudo(NodeKind::Decision);
                let with_merge = budget >= 6 && self.rng.gen_bool(0.5);
                let fixed = if with_merge { 4 } else { 3 };
                let room = budget - fixed;
                let (e1, x1, u1) = self.block(room / 2, depth + 1);
                let (e2, x2, u2) = self.block(room - u1, depth + 1);
                let q = self.named_action();
                self.edge(&p, &dec);
                self.edges.push(Transition::guarded(&dec, &e1, g));
                self.edges.push(Transition::guarded(&dec, &e2, ng));
                if with_merge {
                    let m = self.pseudo(NodeKind::Merge);
                    self.edge(&x1, &m);
                    self.edge(&x2, &m);
                    self.edge(&m, &q);
                } else {
                    self.edge(&x1, &q);
                    self.edge(&x2, &q);
                }
                (p, q, fixed + u1 + u2)
            }
            // loop back to the body's entry
            2 => {
                let (g, ng) = self.guards().unwrap();
                let (e, x, u) = self.block(budget - 2, depth + 1);
                let dec = self.pseudo(NodeKind::Decision);
                let q = self.named_action();
                self.edge(&x, &dec);
                let (back, out) = if self.rng.gen_bool(0.5) { (g, ng) } else { (ng, g) };
                self.edges.push(Transition::guarded(&dec, &e, back));
                self.edges.push(Transition::guarded(&dec, &q, out));
                (e, q, u + 2)
            }
            // fork with two branches of distinct actions
            3 => {
                let p = self.named_action();
                let fork = self.pseudo(NodeKind::Fork);
                let join = self.pseudo(NodeKind::Join);
                self.edge(&p, &fork);
                let extra = self.rng.gen_range(0..=(budget - 6).min(2));
                let first = self.rng.gen_range(0..=extra);
                let lens = [1 + first, 1 + extra - first];
                let mut names: Vec<&str> = NAMES.to_vec();
                names.shuffle(self.rng);
                let mut names = names.into_iter();
                for len in lens {
                    let mut prev = fork.clone();
                    for _ in 0..len {
                        let n = self.action(names.next().unwrap(), false);
                        self.edge(&prev, &n);
                        prev = n;
                    }
                    self.edge(&prev, &join);
                }
                let q = self.named_action();
                self.edge(&join, &q);
                (p, q, 4 + lens[0] + lens[1])
            }
            // a short sequence
            _ => {
                let len = self.rng.gen_range(1..=budget.min(2));
                let first = self.named_action();
                let mut last = first.clone();
                for _ in 1..len {
                    let n = self.named_action();
                    self.edge(&last, &n);
                    last = n;
                }
                (first, last, len)
            }
        }
    }
}

/// A random diagram over `vars`, or `None` when the draw is not well formed.
pub fn try_random_ad(rng: &mut TestRng, name: &str, vars: &[VarDecl]) -> Option<ActivityDiagram> {
    let mut b = Builder {
        rng,
        vars,
        nodes: Vec::new(),
        edges: Vec::new(),
        next: 0,
    };
    let init = b.pseudo(NodeKind::Initial);
    let first_name = *NAMES.choose(b.rng).unwrap();
    let first = b.action(first_name, true);
    b.edge(&init, &first);
    let (e, x, _) = b.block(MAX_NODES - 4, 0);
    let fin = b.pseudo(NodeKind::Final);
    b.edge(&first, &e);
    b.edge(&x, &fin);
    let mut ad = ActivityDiagram::new(name);
    ad.input_vars = vars.iter().filter(|v| v.kind == VarKind::Input).cloned().collect();
    ad.local_vars = vars.iter().filter(|v| v.kind == VarKind::Local).cloned().collect();
    ad.nodes = b.nodes;
    ad.transitions = b.edges;
    well_formed(&ad).then_some(ad)
}

pub fn well_formed(ad: &ActivityDiagram) -> bool {
    ad.nodes.len() <= MAX_NODES && validate(ad).is_empty() && check_guard_exclusivity(ad).is_empty()
}

pub fn random_ad(rng: &mut TestRng, name: &str, vars: &[VarDecl]) -> ActivityDiagram {
    for _ in 0..1000 {
        if let Some(ad) = try_random_ad(rng, name, vars) {
            return ad;
        }
    }
    panic!("generator keeps producing ill-formed diagrams");
}

/// A small edit of `ad`: a renamed action, new guards on one decision, or a
/// changed assignment.
pub fn try_mutate(rng: &mut TestRng, ad: &ActivityDiagram) -> Option<ActivityDiagram> {
    let vars = ad.var_decls();
    let mut out = ad.clone();
    out.name = format!("{}_m", ad.name);
    match rng.gen_range(0..3) {
        0 => {
            let actions: Vec<usize> = (0..out.nodes.len())
                .filter(|&i| out.nodes[i].kind == NodeKind::Action)
                .collect();
            let i = *actions.choose(rng)?;
            out.nodes[i].action = Some(NAMES.choose(rng).unwrap().to_string());
        }
        1 => {
            let decisions: Vec<String> = out
                .nodes
                .iter()
                .filter(|n| n.kind == NodeKind::Decision)
                .map(|n| n.id.clone())
                .collect();
            let d = decisions.choose(rng)?.clone();
            let mut b = Builder {
                rng,
                vars: &vars,
                nodes: Vec::new(),
                edges: Vec::new(),
                next: 0,
            };
            let (g, ng) = b.guards()?;
            let mut gs = [g, ng].into_iter();
            for t in out.transitions.iter_mut().filter(|t| t.src == d) {
                t.guard = gs.next()?;
            }
        }
        _ => {
            let i = rng.gen_range(0..out.nodes.len());
            let n = &mut out.nodes[i];
            let (v, _) = n.assignments.choose(rng)?.clone();
            let decl = ad.var(&v)?.clone();
            let mut b = Builder {
                rng,
                vars: &vars,
                nodes: Vec::new(),
                edges: Vec::new(),
                next: 0,
            };
            let e = b.assigned_value(&decl);
            let slot = out.nodes[i].assignments.iter_mut().find(|(n, _)| *n == v)?;
            slot.1 = e;
        }
    }
    well_formed(&out).then_some(out)
}

/// A pair of diagrams to compare: usually one is an edit of the other, and
/// sometimes both are drawn independently over related variables.
pub fn random_pair(rng: &mut TestRng, idx: usize) -> (ActivityDiagram, ActivityDiagram) {
    let vars = random_vars(rng);
    let ad1 = random_ad(rng, &format!("r{idx}"), &vars);
    if rng.gen_bool(0.25) {
        let mut vars2 = vars.clone();
        if !vars2.is_empty() && rng.gen_bool(0.3) {
            vars2.remove(rng.gen_range(0..vars2.len()));
        }
        let ad2 = random_ad(rng, &format!("r{idx}_b"), &vars2);
        return (ad1, ad2);
    }
    let mut ad2 = ad1.clone();
    let edits = rng.gen_range(1..=2);
    for _ in 0..edits {
        for _ in 0..50 {
            if let Some(m) = try_mutate(rng, &ad2) {
                ad2 = m;
                break;
            }
        }
    }
    ad2.name = format!("r{idx}_b");
    (ad1, ad2)
}

/// `s1 ~ s2` computed from labels and named valuations.
pub fn corresponds(m1: &Machine, s1: &AdState, m2: &Machine, s2: &AdState) -> bool {
    if m1.label(s1) != m2.label(s2) {
        return false;
    }
    let (e1, e2) = (m1.env(s1), m2.env(s2));
    let inputs2: BTreeSet<&str> = m2.vars()[..m2.num_inputs()].iter().map(|v| v.name.as_str()).collect();
    m1.vars()[..m1.num_inputs()]
        .iter()
        .filter(|v| inputs2.contains(v.name.as_str()))
        .all(|v| e1.get(&v.name) == e2.get(&v.name))
}

/// Result of exhaustively exploring `(ad1 state, set of matching ad2 states)`
/// configurations.
#[derive(Debug, Default)]
pub struct BruteForce {
    /// For each initial state of `ad1`, the length (in states) of its
    /// shortest diff trace, if any.
    pub shortest: BTreeMap<AdState, Option<usize>>,
    /// Number of configurations visited.
    pub explored: usize,
}

fn matched_successors(m1: &Machine, next1: &AdState, m2: &Machine, set: &[AdState]) -> Vec<AdState> {
    let mut out: Vec<AdState> = Vec::new();
    for t in set {
        for t2 in m2.successors(t).unwrap() {
            if corresponds(m1, next1, m2, &t2) && !out.contains(&t2) {
                out.push(t2);
            }
        }
    }
    out.sort();
    out
}

/// Whether some state of `set` has no successor corresponding to `next1`.
fn some_cannot_follow(m1: &Machine, next1: &AdState, m2: &Machine, set: &[AdState]) -> bool {
    set.iter().any(|t| {
        !m2.successors(t)
            .unwrap()
            .iter()
            .any(|t2| corresponds(m1, next1, m2, t2))
    })
}

fn initial_matches(m1: &Machine, s0: &AdState, m2: &Machine) -> Vec<AdState> {
    let mut v: Vec<AdState> = m2
        .initial_states()
        .unwrap()
        .into_iter()
        .filter(|t| corresponds(m1, s0, m2, t))
        .collect();
    v.sort();
    v
}

/// Breadth-first search over configurations, stopping once more than `cap`
/// configurations have been visited (`None`).
pub fn brute_force(m1: &Machine, m2: &Machine, cap: usize) -> Option<BruteForce> {
    let mut out = BruteForce::default();
    for s0 in m1.initial_states().unwrap() {
        let start = initial_matches(m1, &s0, m2);
        let mut found = None;
        if !start.is_empty() {
            let mut seen: HashSet<(AdState, Vec<AdState>)> = HashSet::new();
            let mut queue = VecDeque::new();
            seen.insert((s0.clone(), start.clone()));
            queue.push_back((s0.clone(), start, 1usize));
            'bfs: while let Some((s, set, len)) = queue.pop_front() {
                out.explored += 1;
                if out.explored > cap {
                    return None;
                }
                for s1 in m1.successors(&s).unwrap() {
                    if some_cannot_follow(m1, &s1, m2, &set) {
                        found = Some(len + 1);
                        break 'bfs;
                    }
                    let next = matched_successors(m1, &s1, m2, &set);
                    if seen.insert((s1.clone(), next.clone())) {
                        queue.push_back((s1, next, len + 1));
                    }
                }
            }
        }
        out.shortest.insert(s0, found);
    }
    Some(out)
}

/// Checks the diff-trace definition directly on a sequence of `ad1` states.
pub fn is_diff_trace(m1: &Machine, m2: &Machine, trace: &[AdState]) -> bool {
    if trace.len() < 2 || !m1.initial_states().unwrap().contains(&trace[0]) {
        return false;
    }
    for w in trace.windows(2) {
        if !m1.successors(&w[0]).unwrap().contains(&w[1]) {
            return false;
        }
    }
    let mut set = initial_matches(m1, &trace[0], m2);
    let k = trace.len() - 2;
    for s in &trace[1..=k] {
        set = matched_successors(m1, s, m2, &set);
    }
    !set.is_empty() && some_cannot_follow(m1, &trace[k + 1], m2, &set)
}

/// Input valuation of a state, by name.
pub fn inputs_of(m: &Machine, s: &AdState) -> Env {
    let env = m.env(s);
    let mut out = Env::new();
    for v in &m.vars()[..m.num_inputs()] {
        out.insert(&v.name, env.get(&v.name).unwrap().clone());
    }
    out
}
