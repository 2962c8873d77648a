//! Recursive-descent parser for the `.ad` format.
//!
//! ```text
//! ad     := "activity" IDENT "{" decl* node* edge* "}"
//! decl   := ("input"|"local") IDENT ":" type ";"
//! type   := "bool" | INT ".." INT | "enum" "{" IDENT ("," IDENT)* "}"
//! node   := "initial" IDENT ";" | "final" IDENT ";"
//!         | "action" IDENT STRING ("{" (IDENT "=" expr ";")* "}")? ";"
//!         | "decision" IDENT ";" | "merge" IDENT ";"
//!         | "fork" IDENT ";" | "join" IDENT ";"
//! edge   := IDENT "->" IDENT ("[" expr "]")? ";"
//! ```
//!
//! Expression precedence, loosest first: `|`, `&`, comparisons, `+ -`, `!`.

use std::fmt;

use serde::Serialize;

use super::lexer::{tokenize, SourceSpan, Tok, Token};
use crate::expr::{BinOp, Expr, Value};
use crate::model::{ActivityDiagram, Domain, Node, NodeKind, Transition, VarDecl, VarKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

impl std::error::Error for ParseError {}

const NODE_KEYWORDS: [&str; 7] = ["initial", "final", "action", "decision", "merge", "fork", "join"];

/// Parses a complete `.ad` document. Semantic checks are left to
/// [`crate::model::validate`].
pub fn parse(text: &str) -> Result<ActivityDiagram, Vec<ParseError>> {
    let tokens = tokenize(text).map_err(|e| {
        vec![ParseError {
            span: e.span,
            message: e.message,
            expected: Vec::new(),
        }]
    })?;
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        errors: Vec::new(),
        decls: Vec::new(),
    };
    let ad = p.document();
    if p.errors.is_empty() {
        Ok(ad)
    } else {
        Err(p.errors)
    }
}

/// Parses a standalone expression; identifiers resolve against `decls`.
pub fn parse_expr(text: &str, decls: &[VarDecl]) -> Result<Expr, Vec<ParseError>> {
    let tokens = tokenize(text).map_err(|e| {
        vec![ParseError {
            span: e.span,
            message: e.message,
            expected: Vec::new(),
        }]
    })?;
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        errors: Vec::new(),
        decls: decls.to_vec(),
    };
    let e = p.expr();
    match e {
        Ok(e) if p.at(&Tok::Eof) => Ok(e),
        Ok(_) => {
            let t = p.peek().clone();
            Err(vec![p.error_at(&t, "unexpected trailing input", &["end of input"])])
        }
        Err(err) => Err(vec![err]),
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
    decls: Vec<VarDecl>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn at(&self, t: &Tok) -> bool {
        &self.peek().tok == t
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, t: &Token, msg: &str, expected: &[&str]) -> ParseError {
        ParseError {
            span: t.span,
            message: format!("{msg}, found {}", t.tok.describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<Token> {
        if self.at(&t) {
            Ok(self.bump())
        } else {
            let cur = self.peek().clone();
            Err(self.error_at(&cur, &format!("expected `{}`", t.symbol()), &[t.symbol()]))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.at_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            let cur = self.peek().clone();
            Err(self.error_at(&cur, &format!("expected `{kw}`"), &[kw]))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => {
                let cur = self.peek().clone();
                Err(self.error_at(&cur, "expected identifier", &["identifier"]))
            }
        }
    }

    fn int(&mut self) -> PResult<i64> {
        let neg = if self.at(&Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().tok {
            Tok::Int(i) => {
                self.bump();
                Ok(if neg { -i } else { i })
            }
            _ => {
                let cur = self.peek().clone();
                Err(self.error_at(&cur, "expected integer", &["integer"]))
            }
        }
    }

    /// Skips to just past the next `;` (or up to a `}`/EOF) after an error.
    fn recover(&mut self) {
        let mut depth = 0i32;
        loop {
            match self.peek().tok {
                Tok::Eof => return,
                Tok::Semi if depth <= 0 => {
                    self.bump();
                    return;
                }
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    if depth <= 0 {
                        return;
                    }
                    depth -= 1;
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn document(&mut self) -> ActivityDiagram {
        let mut ad = ActivityDiagram::default();
        let header = (|| -> PResult<String> {
            self.expect_keyword("activity")?;
            let name = self.ident()?;
            self.expect(Tok::LBrace)?;
            Ok(name)
        })();
        match header {
            Ok(name) => ad.name = name,
            Err(e) => {
                self.errors.push(e);
                return ad;
            }
        }

        while self.at_keyword("input") || self.at_keyword("local") {
            match self.decl() {
                Ok(d) => {
                    self.decls.push(d.clone());
                    match d.kind {
                        VarKind::Input => ad.input_vars.push(d),
                        VarKind::Local => ad.local_vars.push(d),
                    }
                }
                Err(e) => {
                    self.errors.push(e);
                    self.recover();
                }
            }
        }
        while let Tok::Ident(kw) = &self.peek().tok {
            if !NODE_KEYWORDS.contains(&kw.as_str()) || self.peek_at(1) == &Tok::Arrow {
                break;
            }
            match self.node() {
                Ok(n) => ad.nodes.push(n),
                Err(e) => {
                    self.errors.push(e);
                    self.recover();
                }
            }
        }
        while matches!(self.peek().tok, Tok::Ident(_)) {
            match self.edge() {
                Ok(t) => ad.transitions.push(t),
                Err(e) => {
                    self.errors.push(e);
                    self.recover();
                }
            }
        }
        if let Err(e) = self.expect(Tok::RBrace) {
            let e = ParseError {
                expected: vec![
                    "input".into(),
                    "local".into(),
                    "node declaration".into(),
                    "transition".into(),
                    "}".into(),
                ],
                ..e
            };
            self.errors.push(e);
            return ad;
        }
        if !self.at(&Tok::Eof) {
            let cur = self.peek().clone();
            let e = self.error_at(&cur, "expected end of input", &["end of input"]);
            self.errors.push(e);
        }
        ad
    }

    fn decl(&mut self) -> PResult<VarDecl> {
        let kind = if self.at_keyword("input") {
            VarKind::Input
        } else {
            VarKind::Local
        };
        self.bump();
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let domain = self.domain()?;
        self.expect(Tok::Semi)?;
        Ok(VarDecl { name, domain, kind })
    }

    fn domain(&mut self) -> PResult<Domain> {
        if self.at_keyword("bool") {
            self.bump();
            return Ok(Domain::Bool);
        }
        if self.at_keyword("enum") {
            self.bump();
            self.expect(Tok::LBrace)?;
            let mut lits = vec![self.ident()?];
            while self.at(&Tok::Comma) {
                self.bump();
                lits.push(self.ident()?);
            }
            self.expect(Tok::RBrace)?;
            return Ok(Domain::Enum(lits));
        }
        if matches!(self.peek().tok, Tok::Int(_) | Tok::Minus) {
            let lo = self.int()?;
            self.expect(Tok::DotDot)?;
            let hi = self.int()?;
            return Ok(Domain::Int { lo, hi });
        }
        let cur = self.peek().clone();
        Err(self.error_at(&cur, "expected a type", &["bool", "integer", "enum"]))
    }

    fn node(&mut self) -> PResult<Node> {
        let kw = self.ident()?;
        let kind = match kw.as_str() {
            "initial" => NodeKind::Initial,
            "final" => NodeKind::Final,
            "action" => NodeKind::Action,
            "decision" => NodeKind::Decision,
            "merge" => NodeKind::Merge,
            "fork" => NodeKind::Fork,
            _ => NodeKind::Join,
        };
        let id = self.ident()?;
        let mut node = Node::pseudo(&id, kind);
        if kind == NodeKind::Action {
            match &self.peek().tok {
                Tok::Str(s) => {
                    node.action = Some(s.clone());
                    self.bump();
                }
                _ => {
                    let cur = self.peek().clone();
                    return Err(self.error_at(&cur, "expected action name", &["string"]));
                }
            }
            if self.at(&Tok::LBrace) {
                self.bump();
                while !self.at(&Tok::RBrace) {
                    let var = self.ident()?;
                    self.expect(Tok::Assign)?;
                    let e = self.expr()?;
                    self.expect(Tok::Semi)?;
                    node.assignments.push((var, e));
                }
                self.bump();
            }
        }
        self.expect(Tok::Semi)?;
        Ok(node)
    }

    fn edge(&mut self) -> PResult<Transition> {
        let src = self.ident()?;
        self.expect(Tok::Arrow)?;
        let trg = self.ident()?;
        let guard = if self.at(&Tok::LBracket) {
            self.bump();
            let g = self.expr()?;
            self.expect(Tok::RBracket)?;
            g
        } else {
            Expr::tt()
        };
        self.expect(Tok::Semi)?;
        Ok(Transition { src, trg, guard })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary_level(1)
    }

    fn binop_at(&self, level: u8) -> Option<BinOp> {
        let op = match self.peek().tok {
            Tok::Pipe => BinOp::Or,
            Tok::Amp => BinOp::And,
            Tok::Assign => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            _ => return None,
        };
        (op.precedence() == level).then_some(op)
    }

    fn binary_level(&mut self, level: u8) -> PResult<Expr> {
        if level > 4 {
            return self.unary();
        }
        let mut lhs = self.binary_level(level + 1)?;
        while let Some(op) = self.binop_at(level) {
            self.bump();
            let rhs = self.binary_level(level + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
            if op.is_comparison() {
                // comparisons do not chain
                break;
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        match self.peek().tok.clone() {
            Tok::Bang => {
                self.bump();
                Ok(Expr::not(self.unary()?))
            }
            Tok::Minus => {
                self.bump();
                match self.peek().tok {
                    Tok::Int(i) => {
                        self.bump();
                        Ok(Expr::int(-i))
                    }
                    _ => {
                        let cur = self.peek().clone();
                        Err(self.error_at(&cur, "expected integer after `-`", &["integer"]))
                    }
                }
            }
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::int(i))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(self.resolve(&name))
            }
            _ => {
                let cur = self.peek().clone();
                Err(self.error_at(
                    &cur,
                    "expected expression",
                    &["identifier", "integer", "true", "false", "!", "("],
                ))
            }
        }
    }

    /// Identifiers are variables when declared, then booleans, then enum
    /// literals; anything else stays a variable for validation to report.
    fn resolve(&self, name: &str) -> Expr {
        if self.decls.iter().any(|d| d.name == name) {
            return Expr::Var(name.to_string());
        }
        match name {
            "true" => return Expr::Const(Value::Bool(true)),
            "false" => return Expr::Const(Value::Bool(false)),
            _ => {}
        }
        let is_lit = self
            .decls
            .iter()
            .any(|d| matches!(&d.domain, Domain::Enum(l) if l.iter().any(|x| x == name)));
        if is_lit {
            Expr::Const(Value::enum_lit(name))
        } else {
            Expr::Var(name.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_one_error_at_origin() {
        let errs = parse("").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!((errs[0].span.line, errs[0].span.column), (1, 1));
        assert_eq!(errs[0].expected, vec!["activity"]);
    }

    #[test]
    fn undeclared_guard_variable_parses() {
        let ad = parse(
            r#"activity a {
                initial i; action x "x"; decision d; action y "y"; action z "z"; final f;
                i -> x; x -> d; d -> y [ghost]; d -> z [!ghost]; y -> f; z -> f;
            }"#,
        )
        .unwrap();
        let diags = crate::model::validate(&ad);
        assert!(diags
            .iter()
            .any(|d| d.rule == crate::diag::Rule::UndeclaredVariable));
    }

    #[test]
    fn reports_several_errors_with_recovery() {
        let errs = parse(
            "activity a {\n input x bool;\n initial i;\n action q;\n final f;\n i -> ;\n}",
        )
        .unwrap_err();
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert_eq!(errs[0].span.line, 2);
        assert_eq!(errs[1].span.line, 4);
        assert_eq!(errs[2].span.line, 6);
    }

    #[test]
    fn enum_literals_resolve() {
        let ad = parse(
            r#"activity p {
                input kind: enum { small, large };
                initial i; action a "a"; decision d; action b "b"; action c "c"; final f;
                i -> a; a -> d; d -> b [kind = small]; d -> c [kind != small]; b -> f; c -> f;
            }"#,
        )
        .unwrap();
        assert_eq!(
            ad.transitions[2].guard,
            Expr::bin(BinOp::Eq, Expr::var("kind"), Expr::Const(Value::enum_lit("small")))
        );
    }

    #[test]
    fn negative_bounds_and_keywords_as_node_ids() {
        let ad = parse(
            r#"activity n { local v: -2..2;
                initial i; action fork2 "x" { v = -1; }; final join;
                i -> fork2; fork2 -> join; }"#,
        )
        .unwrap();
        assert_eq!(ad.local_vars[0].domain, Domain::Int { lo: -2, hi: 2 });
        assert_eq!(ad.transitions[1].trg, "join");
    }

    #[test]
    fn garbage_never_panics() {
        for s in ["activity", "activity a {", "activity a { action", "}}}", "activity a { x -> [ ; }",
                  "activity a { input x: 3..; }", "activity a {} trailing", "\"", "activity a { i -> j [1 +]; }"] {
            assert!(parse(s).is_err(), "{s}");
        }
    }
}
