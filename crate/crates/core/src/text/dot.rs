use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use thiserror::Error;

use crate::diff::DiffTrace;
use crate::model::{ActivityDiagram, NodeKind};

#[derive(Debug, Error)]
pub enum DotError {
    #[error("trace refers to node `{0}`, which is not in the diagram")]
    UnknownNode(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn shape(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::Initial => "shape=circle, style=filled, fillcolor=black, label=\"\", width=0.25",
        NodeKind::Final => "shape=doublecircle, style=filled, fillcolor=black, label=\"\", width=0.2",
        NodeKind::Action => "shape=box, style=rounded",
        NodeKind::Decision | NodeKind::Merge => "shape=diamond, label=\"\", width=0.3, height=0.3",
        NodeKind::Fork | NodeKind::Join => "shape=box, style=filled, fillcolor=black, label=\"\", width=0.6, height=0.05",
    }
}

/// Renders `ad` as a Graphviz digraph. With a trace, the nodes it visits are
/// highlighted and annotated with their step numbers (the initial state is
/// step 0 and is highlighted without a number). The trace side is chosen by
/// diagram name, defaulting to the first diagram.
pub fn export_dot(ad: &ActivityDiagram, trace: Option<&DiffTrace>) -> Result<String, DotError> {
    let mut steps: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut visited: Vec<&str> = Vec::new();
    if let Some(tr) = trace {
        let use_second = tr.ad1 != ad.name && tr.ad2 == ad.name;
        for (i, c) in tr.steps.iter().enumerate() {
            let s = if use_second {
                match &c.s2 {
                    Some(s) => s,
                    None => continue,
                }
            } else {
                &c.s1
            };
            if ad.node(&s.node).is_none() {
                return Err(DotError::UnknownNode(s.node.clone()));
            }
            visited.push(&s.node);
            if i > 0 {
                steps.entry(&s.node).or_default().push(i);
            }
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", escape(&ad.name));
    let _ = writeln!(out, "  rankdir=TB;");
    for n in &ad.nodes {
        let mut attrs = shape(n.kind).to_string();
        if let Some(a) = &n.action {
            let mut label = escape(a);
            for (v, e) in &n.assignments {
                let _ = write!(label, "\\n{v} := {}", escape(&e.to_string()));
            }
            let _ = write!(attrs, ", label=\"{label}\"");
        }
        if visited.contains(&n.id.as_str()) {
            attrs.push_str(", color=red, penwidth=2");
            if let Some(idx) = steps.get(n.id.as_str()) {
                let nums: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                let _ = write!(attrs, ", xlabel=\"{}\", fontcolor=red", nums.join(","));
            }
        }
        let _ = writeln!(out, "  \"{}\" [{attrs}];", escape(&n.id));
    }
    for t in &ad.transitions {
        let label = if t.guard.is_true() {
            String::new()
        } else {
            format!(" [label=\"[{}]\"]", escape(&t.guard.to_string()))
        };
        let _ = writeln!(out, "  \"{}\" -> \"{}\"{label};", escape(&t.src), escape(&t.trg));
    }
    out.push_str("}\n");
    Ok(out)
}

/// Writes [`export_dot`] output to `path`.
pub fn export_dot_path(ad: &ActivityDiagram, trace: Option<&DiffTrace>, path: &Path) -> Result<(), DotError> {
    std::fs::write(path, export_dot(ad, trace)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::{CombinedState, TraceState};
    use crate::expr::Env;
    use crate::semantics::Label;
    use crate::text::parse;

    fn ad() -> ActivityDiagram {
        parse(r#"activity a { initial i; action x "do \"it\""; final f; i -> x; x -> f; }"#).unwrap()
    }

    fn st(node: &str, label: Label) -> TraceState {
        TraceState {
            node: node.into(),
            label,
            env: Env::new(),
            marking: vec![],
        }
    }

    #[test]
    fn plain_has_no_highlight() {
        let plain = export_dot(&ad(), None).unwrap();
        assert!(!plain.contains("color=red"));
        assert!(plain.contains(r#"label="do \"it\"""#));
        let empty = DiffTrace {
            ad1: "a".into(),
            ad2: "b".into(),
            inputs: Env::new(),
            steps: vec![],
        };
        assert_eq!(export_dot(&ad(), Some(&empty)).unwrap(), plain);
    }

    #[test]
    fn numbers_repeated_visits() {
        let tr = DiffTrace {
            ad1: "a".into(),
            ad2: "b".into(),
            inputs: Env::new(),
            steps: vec![
                CombinedState { s1: st("i", Label::Init), s2: None },
                CombinedState { s1: st("x", Label::Action("do".into())), s2: None },
                CombinedState { s1: st("x", Label::Action("do".into())), s2: None },
            ],
        };
        let dot = export_dot(&ad(), Some(&tr)).unwrap();
        assert!(dot.contains(r#"xlabel="1,2""#));
        let bad = DiffTrace {
            steps: vec![CombinedState { s1: st("nope", Label::Init), s2: None }],
            ..tr
        };
        assert!(matches!(export_dot(&ad(), Some(&bad)), Err(DotError::UnknownNode(_))));
    }
}
