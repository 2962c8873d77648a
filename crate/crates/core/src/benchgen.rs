//! Synthetic diagram families for scalability experiments, and the
//! mutations used to derive second versions from them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::Diagnostic;
use crate::expr::{BinOp, Expr};
use crate::model::{check_guard_exclusivity, validate, ActivityDiagram, Domain, Node, NodeKind, Transition};

/// Node id (and action name) of the last action of a forking diagram.
pub const FORK_END: &str = "a_end";

/// `initial → a0 → fork → W branches of L actions → join → a_end → final`.
/// Branch actions are named `b<w>_<l>`, both counted from 1.
pub fn gen_forking(width: usize, len: usize) -> ActivityDiagram {
    assert!(width >= 1 && len >= 1, "forking diagrams need W, L >= 1");
    let mut ad = ActivityDiagram::new(&format!("forking_w{width}_l{len}"))
        .with_node(Node::pseudo("init", NodeKind::Initial))
        .with_node(Node::action("a0", "a0"))
        .with_node(Node::pseudo("fork", NodeKind::Fork));
    for w in 1..=width {
        for l in 1..=len {
            let id = format!("b{w}_{l}");
            ad = ad.with_node(Node::action(&id, &id));
        }
    }
    ad = ad
        .with_node(Node::pseudo("join", NodeKind::Join))
        .with_node(Node::action(FORK_END, FORK_END))
        .with_node(Node::pseudo("fin", NodeKind::Final))
        .with_edge(Transition::new("init", "a0"))
        .with_edge(Transition::new("a0", "fork"));
    for w in 1..=width {
        ad = ad.with_edge(Transition::new("fork", &format!("b{w}_1")));
        for l in 1..len {
            ad = ad.with_edge(Transition::new(&format!("b{w}_{l}"), &format!("b{w}_{}", l + 1)));
        }
        ad = ad.with_edge(Transition::new(&format!("b{w}_{len}"), "join"));
    }
    ad.with_edge(Transition::new("join", FORK_END))
        .with_edge(Transition::new(FORK_END, "fin"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearVariant {
    /// The decision variable `d` is an input.
    Input,
    /// `d` is a local copied from the input `x` by the first action.
    Local,
}

/// Length of each arm between the decision and the merge.
pub const LINEAR_ARM: usize = 3;

/// `initial → p1..pL → decision on d → two arms of 3 actions → merge →
/// q1..qL → final`, with `d: 0..D-1` and guards `d < D/2` and `d >= D/2`.
/// Arm actions are `t1..t3` (true arm) and `f1..f3`.
pub fn gen_linear(len: usize, domain: usize, variant: LinearVariant) -> ActivityDiagram {
    assert!(len >= 1, "linear diagrams need L >= 1");
    assert!(domain >= 2 && domain.is_multiple_of(2), "the domain size must be even and at least 2");
    let d = Domain::Int {
        lo: 0,
        hi: domain as i64 - 1,
    };
    let name = format!(
        "linear_l{len}_d{domain}_{}",
        match variant {
            LinearVariant::Input => "input",
            LinearVariant::Local => "local",
        }
    );
    let mut ad = ActivityDiagram::new(&name);
    let mut first = Node::action("p1", "p1");
    match variant {
        LinearVariant::Input => ad = ad.with_input("d", d),
        LinearVariant::Local => {
            ad = ad.with_input("x", d.clone()).with_local("d", d);
            first = first.assign("d", Expr::var("x"));
        }
    }
    ad = ad.with_node(Node::pseudo("init", NodeKind::Initial)).with_node(first);
    for i in 2..=len {
        let id = format!("p{i}");
        ad = ad.with_node(Node::action(&id, &id));
    }
    ad = ad.with_node(Node::pseudo("dec", NodeKind::Decision));
    for arm in ["t", "f"] {
        for i in 1..=LINEAR_ARM {
            let id = format!("{arm}{i}");
            ad = ad.with_node(Node::action(&id, &id));
        }
    }
    ad = ad.with_node(Node::pseudo("merge", NodeKind::Merge));
    for i in 1..=len {
        let id = format!("q{i}");
        ad = ad.with_node(Node::action(&id, &id));
    }
    ad = ad.with_node(Node::pseudo("fin", NodeKind::Final));

    let half = Expr::int(domain as i64 / 2);
    let chain = |ad: ActivityDiagram, ids: &[String]| {
        ids.windows(2)
            .fold(ad, |ad, w| ad.with_edge(Transition::new(&w[0], &w[1])))
    };
    let ps: Vec<String> = (1..=len).map(|i| format!("p{i}")).collect();
    let ts: Vec<String> = (1..=LINEAR_ARM).map(|i| format!("t{i}")).collect();
    let fs: Vec<String> = (1..=LINEAR_ARM).map(|i| format!("f{i}")).collect();
    let qs: Vec<String> = (1..=len).map(|i| format!("q{i}")).collect();
    ad = ad.with_edge(Transition::new("init", "p1"));
    ad = chain(ad, &ps);
    ad = ad
        .with_edge(Transition::new(&ps[len - 1], "dec"))
        .with_edge(Transition::guarded("dec", "t1", Expr::bin(BinOp::Lt, Expr::var("d"), half.clone())))
        .with_edge(Transition::guarded("dec", "f1", Expr::bin(BinOp::Ge, Expr::var("d"), half)));
    ad = chain(ad, &ts);
    ad = chain(ad, &fs);
    ad = ad
        .with_edge(Transition::new(&ts[LINEAR_ARM - 1], "merge"))
        .with_edge(Transition::new(&fs[LINEAR_ARM - 1], "merge"))
        .with_edge(Transition::new("merge", "q1"));
    ad = chain(ad, &qs);
    ad.with_edge(Transition::new(&qs[len - 1], "fin"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MutationKind {
    /// Gives the action a new name.
    Rename { name: String },
    /// Removes the action and connects its predecessor to its successor.
    Delete,
    /// Removes the action and reinserts it right after `anchor`.
    Move { anchor: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationSpec {
    /// Id of the action node to mutate.
    pub target: String,
    #[serde(flatten)]
    pub kind: MutationKind,
}

impl MutationSpec {
    pub fn rename(target: &str, name: &str) -> MutationSpec {
        MutationSpec {
            target: target.into(),
            kind: MutationKind::Rename { name: name.into() },
        }
    }

    pub fn delete(target: &str) -> MutationSpec {
        MutationSpec {
            target: target.into(),
            kind: MutationKind::Delete,
        }
    }

    pub fn move_after(target: &str, anchor: &str) -> MutationSpec {
        MutationSpec {
            target: target.into(),
            kind: MutationKind::Move { anchor: anchor.into() },
        }
    }

    /// The standard mutation for forking diagrams: rename `a_end`.
    pub fn forking_default() -> MutationSpec {
        MutationSpec::rename(FORK_END, "a_end_renamed")
    }

    /// The standard mutation for linear diagrams: rename the second action
    /// of the true arm.
    pub fn linear_default() -> MutationSpec {
        MutationSpec::rename("t2", "t2_renamed")
    }
}

#[derive(Debug, Error)]
pub enum MutationError {
    #[error("`{0}` is not a mutable action node")]
    InvalidTarget(String),
    #[error("mutation yields an ill-formed diagram: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidResult(Vec<Diagnostic>),
}

fn is_action(ad: &ActivityDiagram, id: &str) -> bool {
    ad.node(id).is_some_and(|n| n.kind == NodeKind::Action)
}

/// Detaches a single-in, single-out action and bridges the gap.
fn unlink(ad: &mut ActivityDiagram, id: &str) -> Result<(), MutationError> {
    let ins: Vec<usize> = ad.incoming(id).map(|(i, _)| i).collect();
    let outs: Vec<usize> = ad.outgoing(id).map(|(i, _)| i).collect();
    let (&[i], &[o]) = (&ins[..], &outs[..]) else {
        return Err(MutationError::InvalidTarget(id.to_string()));
    };
    let trg = ad.transitions[o].trg.clone();
    ad.transitions[i].trg = trg;
    ad.transitions.remove(o);
    Ok(())
}

/// Applies `spec` to a copy of `ad`; the result must still be well formed.
pub fn mutate(ad: &ActivityDiagram, spec: &MutationSpec) -> Result<ActivityDiagram, MutationError> {
    if !is_action(ad, &spec.target) {
        return Err(MutationError::InvalidTarget(spec.target.clone()));
    }
    let mut out = ad.clone();
    match &spec.kind {
        MutationKind::Rename { name } => {
            let n = out.nodes.iter_mut().find(|n| n.id == spec.target).unwrap();
            n.action = Some(name.clone());
        }
        MutationKind::Delete => {
            unlink(&mut out, &spec.target)?;
            out.nodes.retain(|n| n.id != spec.target);
        }
        MutationKind::Move { anchor } => {
            if anchor == &spec.target || !is_action(ad, anchor) {
                return Err(MutationError::InvalidTarget(anchor.clone()));
            }
            unlink(&mut out, &spec.target)?;
            let (o, _) = out
                .outgoing(anchor)
                .next()
                .ok_or_else(|| MutationError::InvalidTarget(anchor.clone()))?;
            let next = std::mem::replace(&mut out.transitions[o].trg, spec.target.clone());
            out.transitions.push(Transition::new(&spec.target, &next));
        }
    }
    let mut diags = validate(&out);
    if diags.is_empty() {
        diags = check_guard_exclusivity(&out);
    }
    if !diags.is_empty() {
        return Err(MutationError::InvalidResult(diags));
    }
    Ok(out)
}
