//! SMV text export of the token semantics.

use std::fmt::Write;

use crate::expr::Expr;
use crate::model::{ActivityDiagram, Domain, NodeKind, VarKind};
use crate::semantics::{Machine, Routing, SemanticsError};

fn smv_type(d: &Domain) -> String {
    match d {
        Domain::Bool => "boolean".into(),
        Domain::Int { lo, hi } => format!("{lo}..{hi}"),
        Domain::Enum(lits) => format!("{{{}}}", lits.join(", ")),
    }
}

fn node_const(id: &str) -> String {
    format!("n_{id}")
}

fn label_const(label: &str) -> String {
    let mut s = String::from("a_");
    for c in label.chars() {
        s.push(if c.is_ascii_alphanumeric() { c } else { '_' });
    }
    s
}

fn tok(t: usize) -> String {
    format!("tok_t{t}")
}

fn primed(e: &Expr) -> Expr {
    match e {
        Expr::Var(n) => Expr::Var(format!("next({n})")),
        Expr::Not(i) => Expr::not(primed(i)),
        Expr::Binary(op, l, r) => Expr::bin(*op, primed(l), primed(r)),
        c => c.clone(),
    }
}

/// Renders `ad` as an SMV module with one boolean per transition token,
/// an enumerated `acnode` over initial, action and final nodes, and frozen
/// inputs.
pub fn emit_smv(ad: &ActivityDiagram) -> Result<String, SemanticsError> {
    let m = Machine::new(ad)?;
    let mut s = String::new();
    let _ = writeln!(s, "MODULE main");
    let _ = writeln!(s, "-- activity {}", ad.name);
    if !ad.input_vars.is_empty() {
        let _ = writeln!(s, "FROZENVAR");
        for v in &ad.input_vars {
            let _ = writeln!(s, "  {} : {};", v.name, smv_type(&v.domain));
        }
    }
    let _ = writeln!(s, "VAR");
    for v in &ad.local_vars {
        let _ = writeln!(s, "  {} : {};", v.name, smv_type(&v.domain));
    }
    let visible: Vec<usize> = (0..ad.nodes.len())
        .filter(|&i| matches!(ad.nodes[i].kind, NodeKind::Initial | NodeKind::Action | NodeKind::Final))
        .collect();
    let consts: Vec<String> = visible.iter().map(|&i| node_const(&ad.nodes[i].id)).collect();
    let _ = writeln!(s, "  acnode : {{{}}};", consts.join(", "));
    for t in 0..ad.transitions.len() {
        let (a, b) = m.transition_ends(t);
        let _ = writeln!(
            s,
            "  {} : boolean; -- {} -> {}",
            tok(t),
            ad.nodes[a].id,
            ad.nodes[b].id
        );
    }

    let _ = writeln!(s, "DEFINE");
    let _ = writeln!(s, "  ac := case");
    for &i in &visible {
        let _ = writeln!(
            s,
            "    acnode = {} : {};",
            node_const(&ad.nodes[i].id),
            label_const(m.node_label(i as u32).as_str())
        );
    }
    let _ = writeln!(s, "  esac;");

    let init = m.initial_states()?;
    let mut conj = vec![format!("acnode = {}", node_const(&ad.nodes[m.initial_node() as usize].id))];
    for v in &ad.local_vars {
        conj.push(format!("{} = {}", v.name, v.domain.min_value()));
    }
    // the initial marking does not depend on inputs: the first step is an action
    let first = init.first().map(|s| s.marking.clone());
    for t in 0..ad.transitions.len() {
        let on = first.as_ref().is_some_and(|mk| mk.get(t));
        conj.push(format!("{}{}", if on { "" } else { "!" }, tok(t)));
    }
    let _ = writeln!(s, "INIT\n  {}", conj.join("\n  & "));

    let mut steps = Vec::new();
    let locals: Vec<&str> = ad
        .vars()
        .filter(|v| v.kind == VarKind::Local)
        .map(|v| v.name.as_str())
        .collect();
    for &n in m.steppers() {
        let node = &ad.nodes[n];
        let ins = m.in_edges(n);
        for (k, &t_in) in ins.iter().enumerate() {
            let mut c = vec![tok(t_in)];
            // the lowest marked incoming edge is consumed
            for &lower in &ins[..k] {
                c.push(format!("!{}", tok(lower)));
            }
            c.push(format!("next(acnode) = {}", node_const(&node.id)));
            if node.kind == NodeKind::Final {
                for v in &locals {
                    c.push(format!("next({v}) = {v}"));
                }
                for t in 0..ad.transitions.len() {
                    c.push(format!("!next({})", tok(t)));
                }
                steps.push(c);
                continue;
            }
            for v in &locals {
                match node.assignments.iter().find(|(name, _)| name == v) {
                    Some((_, e)) => c.push(format!("next({v}) = {e}")),
                    None => c.push(format!("next({v}) = {v}")),
                }
            }
            let (t_o, routing) = m.routing_after(n);
            let mut next_tok: Vec<String> = (0..ad.transitions.len()).map(tok).collect();
            next_tok[t_in] = "FALSE".into();
            match routing {
                Routing::Direct => next_tok[t_o] = "TRUE".into(),
                Routing::Merge(out) => next_tok[out] = "TRUE".into(),
                Routing::Fork(outs) => {
                    for o in outs {
                        next_tok[o] = "TRUE".into();
                    }
                }
                Routing::Decision(outs) => {
                    for (o, g) in outs {
                        next_tok[o] = format!("({})", primed(&g));
                    }
                }
                Routing::Join { others, out } => {
                    let all: Vec<String> = others.iter().map(|&o| tok(o)).collect();
                    let all = if all.is_empty() { "TRUE".to_string() } else { all.join(" & ") };
                    for &o in &others {
                        if o != t_in {
                            next_tok[o] = format!("({} & !({all}))", tok(o));
                        }
                    }
                    next_tok[t_o] = format!("!({all})");
                    next_tok[out] = format!("({all})");
                }
            }
            for (t, e) in next_tok.iter().enumerate() {
                c.push(format!("next({}) = {e}", tok(t)));
            }
            steps.push(c);
        }
    }
    // final states have no successors; SMV needs a total relation, so they stutter
    let mut stutter = vec![format!(
        "acnode in {{{}}}",
        visible
            .iter()
            .filter(|&&i| ad.nodes[i].kind == NodeKind::Final)
            .map(|&i| node_const(&ad.nodes[i].id))
            .collect::<Vec<_>>()
            .join(", ")
    )];
    stutter.push("next(acnode) = acnode".into());
    for v in &locals {
        stutter.push(format!("next({v}) = {v}"));
    }
    for t in 0..ad.transitions.len() {
        stutter.push(format!("next({0}) = {0}", tok(t)));
    }
    steps.push(stutter);
    let rendered: Vec<String> = steps
        .iter()
        .map(|c| format!("  ({})", c.join("\n     & ")))
        .collect();
    let _ = writeln!(s, "TRANS\n{}", rendered.join("\n  |\n"));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse;

    #[test]
    fn module_shape() {
        let ad = parse(
            r#"activity p { input kind: enum { small, large }; local c: 0..2;
               initial i; action a "get key" { c = 0; }; decision d;
               action b "b" { c = c + 1; }; action e "e"; final f;
               i -> a; a -> d; d -> b [kind = small]; d -> e [kind != small]; b -> f; e -> f; }"#,
        )
        .unwrap();
        let smv = emit_smv(&ad).unwrap();
        assert!(smv.starts_with("MODULE main"));
        assert!(smv.contains("FROZENVAR\n  kind : {small, large};"));
        assert!(smv.contains("VAR\n  c : 0..2;"));
        assert!(smv.contains("tok_t0 : boolean;"));
        assert!(smv.contains("a_get_key"));
        assert!(smv.contains("(next(kind) = small)"));
    }
}
