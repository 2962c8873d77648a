use std::fmt::Write;

use crate::model::{ActivityDiagram, NodeKind, VarKind};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Renders `ad` in the `.ad` text format. Declarations, nodes and edges are
/// written in their stored order, so `parse(serialize(ad)) == ad`.
pub fn serialize(ad: &ActivityDiagram) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "activity {} {{", ad.name);
    for v in ad.vars() {
        let kw = match v.kind {
            VarKind::Input => "input",
            VarKind::Local => "local",
        };
        let _ = writeln!(s, "    {kw} {}: {};", v.name, v.domain);
    }
    if !ad.input_vars.is_empty() || !ad.local_vars.is_empty() {
        s.push('\n');
    }
    for n in &ad.nodes {
        match n.kind {
            NodeKind::Action => {
                let _ = write!(
                    s,
                    "    action {} {}",
                    n.id,
                    quote(n.action.as_deref().unwrap_or(""))
                );
                if !n.assignments.is_empty() {
                    s.push_str(" {");
                    for (var, e) in &n.assignments {
                        let _ = write!(s, " {var} = {e};");
                    }
                    s.push_str(" }");
                }
                s.push_str(";\n");
            }
            kind => {
                let _ = writeln!(s, "    {} {};", kind.keyword(), n.id);
            }
        }
    }
    s.push('\n');
    for t in &ad.transitions {
        if t.guard.is_true() {
            let _ = writeln!(s, "    {} -> {};", t.src, t.trg);
        } else {
            let _ = writeln!(s, "    {} -> {} [{}];", t.src, t.trg, t.guard);
        }
    }
    s.push_str("}\n");
    s
}
