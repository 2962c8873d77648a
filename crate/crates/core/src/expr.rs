//! Guard and assignment expressions over finite-domain variables.
//!
//! Expressions are small immutable trees. Typing is checked against a list
//! of variable declarations; evaluation is strict and total over any
//! valuation that binds every free variable.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::{Diagnostic, Location, Rule};
use crate::model::{Domain, VarDecl};

/// A runtime value of a diagram variable or expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Enum(Arc<str>),
}

impl Value {
    pub fn enum_lit(name: &str) -> Value {
        Value::Enum(Arc::from(name))
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn type_tag(&self) -> Type {
        match self {
            Value::Bool(_) => Type::Bool,
            Value::Int(_) => Type::Int,
            Value::Enum(_) => Type::Enum,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Enum(s) => f.write_str(s),
        }
    }
}

/// Type tag produced by [`type_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Bool,
    Int,
    Enum,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Bool => "bool",
            Type::Int => "int",
            Type::Enum => "enum",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    And,
    Or,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
        }
    }

    /// Binding strength; higher binds tighter. Unary `!` sits above all of these.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Const(Value),
    Var(String),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn tt() -> Expr {
        Expr::Const(Value::Bool(true))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn int(i: i64) -> Expr {
        Expr::Const(Value::Int(i))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Expr::Const(Value::Bool(true)))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Not(_) => 5,
            Expr::Const(Value::Int(i)) if *i < 0 => 5,
            _ => 6,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min {
            f.write_str("(")?;
        }
        match self {
            Expr::Const(v) => write!(f, "{v}")?,
            Expr::Var(n) => f.write_str(n)?,
            Expr::Not(e) => {
                f.write_str("!")?;
                e.write_prec(f, 6)?;
            }
            Expr::Binary(op, l, r) => {
                // comparisons are non-associative, everything else is left-associative
                let left_min = if op.is_comparison() { prec + 1 } else { prec };
                l.write_prec(f, left_min)?;
                write!(f, " {} ", op.symbol())?;
                r.write_prec(f, prec + 1)?;
            }
        }
        if prec < min {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

/// Anything that can resolve a variable name to its current value.
pub trait Valuation {
    fn value_of(&self, name: &str) -> Option<&Value>;
}

/// A total map from variable names to values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Env(pub BTreeMap<String, Value>);

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn with(mut self, name: &str, value: Value) -> Env {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn insert(&mut self, name: &str, value: Value) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }
}

impl FromIterator<(String, Value)> for Env {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        Env(iter.into_iter().collect())
    }
}

impl Valuation for Env {
    fn value_of(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }
}

impl Valuation for BTreeMap<String, Value> {
    fn value_of(&self, name: &str) -> Option<&Value> {
        self.get(name)
    }
}

impl Valuation for HashMap<String, Value> {
    fn value_of(&self, name: &str) -> Option<&Value> {
        self.get(name)
    }
}

/// Positional valuation: `names[i]` is bound to `values[i]`.
#[derive(Clone, Copy, Debug)]
pub struct Positional<'a> {
    pub names: &'a [String],
    pub values: &'a [Value],
}

impl Valuation for Positional<'_> {
    fn value_of(&self, name: &str) -> Option<&Value> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("operator `{op}` cannot be applied to {lhs} and {rhs}")]
    Mismatch { op: &'static str, lhs: Type, rhs: Type },
    #[error("`!` expects a bool, found {0}")]
    NotBool(Type),
    #[error("integer overflow in `{0}`")]
    Overflow(&'static str),
}

/// Evaluates `e` under `env`.
pub fn eval(e: &Expr, env: &impl Valuation) -> Result<Value, EvalError> {
    match e {
        Expr::Const(v) => Ok(v.clone()),
        Expr::Var(n) => env
            .value_of(n)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(n.clone())),
        Expr::Not(inner) => match eval(inner, env)? {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            other => Err(EvalError::NotBool(other.type_tag())),
        },
        Expr::Binary(op, l, r) => {
            let lv = eval(l, env)?;
            let rv = eval(r, env)?;
            apply_binop(*op, &lv, &rv)
        }
    }
}

/// Evaluates a boolean expression. Non-boolean results are a type error.
pub fn eval_bool(e: &Expr, env: &impl Valuation) -> Result<bool, EvalError> {
    match eval(e, env)? {
        Value::Bool(b) => Ok(b),
        other => Err(EvalError::NotBool(other.type_tag())),
    }
}

pub(crate) fn apply_binop(op: BinOp, lv: &Value, rv: &Value) -> Result<Value, EvalError> {
    let mismatch = || EvalError::Mismatch {
        op: op.symbol(),
        lhs: lv.type_tag(),
        rhs: rv.type_tag(),
    };
    match op {
        BinOp::And | BinOp::Or => match (lv, rv) {
            (Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(if op == BinOp::And {
                *a && *b
            } else {
                *a || *b
            })),
            _ => Err(mismatch()),
        },
        BinOp::Eq | BinOp::Ne => {
            if lv.type_tag() != rv.type_tag() {
                return Err(mismatch());
            }
            Ok(Value::Bool((lv == rv) == (op == BinOp::Eq)))
        }
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => match (lv, rv) {
            (Value::Int(a), Value::Int(b)) => Ok(Value::Bool(match op {
                BinOp::Lt => a < b,
                BinOp::Le => a <= b,
                BinOp::Gt => a > b,
                _ => a >= b,
            })),
            _ => Err(mismatch()),
        },
        BinOp::Add | BinOp::Sub => match (lv, rv) {
            (Value::Int(a), Value::Int(b)) => {
                let res = if op == BinOp::Add {
                    a.checked_add(*b)
                } else {
                    a.checked_sub(*b)
                };
                res.map(Value::Int).ok_or(EvalError::Overflow(op.symbol()))
            }
            _ => Err(mismatch()),
        },
    }
}

/// Syntactic free variables of `e`.
pub fn free_vars(e: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_vars(e, &mut out);
    out
}

fn collect_vars(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Const(_) => {}
        Expr::Var(n) => {
            out.insert(n.clone());
        }
        Expr::Not(inner) => collect_vars(inner, out),
        Expr::Binary(_, l, r) => {
            collect_vars(l, out);
            collect_vars(r, out);
        }
    }
}

/// Computes the type of `e` against `decls`, or reports every problem found.
pub fn type_check(e: &Expr, decls: &[VarDecl]) -> Result<Type, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let ty = check(e, decls, &mut diags);
    match ty {
        Some(t) if diags.is_empty() => Ok(t),
        _ => Err(diags),
    }
}

fn check(e: &Expr, decls: &[VarDecl], diags: &mut Vec<Diagnostic>) -> Option<Type> {
    match e {
        Expr::Const(v) => Some(v.type_tag()),
        Expr::Var(n) => match decls.iter().find(|d| &d.name == n) {
            Some(d) => Some(d.domain.type_tag()),
            None => {
                diags.push(Diagnostic::new(
                    Rule::UndeclaredVariable,
                    Location::Var(n.clone()),
                    format!("variable `{n}` is not declared"),
                ));
                None
            }
        },
        Expr::Not(inner) => {
            let t = check(inner, decls, diags)?;
            if t != Type::Bool {
                diags.push(Diagnostic::new(
                    Rule::TypeMismatch,
                    Location::Diagram,
                    format!("`!` expects bool, found {t} in `{e}`"),
                ));
                return None;
            }
            Some(Type::Bool)
        }
        Expr::Binary(op, l, r) => {
            let lt = check(l, decls, diags);
            let rt = check(r, decls, diags);
            let (lt, rt) = (lt?, rt?);
            let bad = |diags: &mut Vec<Diagnostic>| {
                diags.push(Diagnostic::new(
                    Rule::TypeMismatch,
                    Location::Diagram,
                    format!(
                        "operator `{}` cannot combine {lt} and {rt} in `{e}`",
                        op.symbol()
                    ),
                ));
                None
            };
            match op {
                BinOp::And | BinOp::Or => {
                    if lt == Type::Bool && rt == Type::Bool {
                        Some(Type::Bool)
                    } else {
                        bad(diags)
                    }
                }
                BinOp::Eq | BinOp::Ne => {
                    if lt != rt {
                        return bad(diags);
                    }
                    if lt == Type::Enum {
                        check_enum_literals(l, r, decls, diags);
                    }
                    Some(Type::Bool)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    if lt == Type::Int && rt == Type::Int {
                        Some(Type::Bool)
                    } else {
                        bad(diags)
                    }
                }
                BinOp::Add | BinOp::Sub => {
                    if lt == Type::Int && rt == Type::Int {
                        Some(Type::Int)
                    } else {
                        bad(diags)
                    }
                }
            }
        }
    }
}

/// `v = lit` must name a literal of `v`'s own enumeration.
fn check_enum_literals(l: &Expr, r: &Expr, decls: &[VarDecl], diags: &mut Vec<Diagnostic>) {
    let pairs = [(l, r), (r, l)];
    for (a, b) in pairs {
        if let (Expr::Var(n), Expr::Const(Value::Enum(lit))) = (a, b) {
            if let Some(Domain::Enum(lits)) = decls.iter().find(|d| &d.name == n).map(|d| &d.domain)
            {
                if !lits.iter().any(|x| x.as_str() == &**lit) {
                    diags.push(Diagnostic::new(
                        Rule::TypeMismatch,
                        Location::Var(n.clone()),
                        format!("`{lit}` is not a literal of the enumeration of `{n}`"),
                    ));
                }
            }
        }
        if let (Expr::Var(x), Expr::Var(y)) = (a, b) {
            let dx = decls.iter().find(|d| &d.name == x).map(|d| &d.domain);
            let dy = decls.iter().find(|d| &d.name == y).map(|d| &d.domain);
            if let (Some(dx), Some(dy)) = (dx, dy) {
                if dx != dy {
                    diags.push(Diagnostic::new(
                        Rule::TypeMismatch,
                        Location::Var(x.clone()),
                        format!("`{x}` and `{y}` range over different enumerations"),
                    ));
                }
            }
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VarKind;

    fn decls() -> Vec<VarDecl> {
        vec![
            VarDecl::new("isInternal", Domain::Bool, VarKind::Input),
            VarDecl::new("c", Domain::Int { lo: 0, hi: 3 }, VarKind::Local),
        ]
    }

    fn parse(s: &str) -> Expr {
        crate::text::parse_expr(s, &decls()).unwrap()
    }

    #[test]
    fn type_check_examples() {
        assert_eq!(type_check(&parse("isInternal & c = 0"), &decls()), Ok(Type::Bool));
        let errs = type_check(&parse("c + true"), &decls()).unwrap_err();
        assert_eq!(errs[0].rule, Rule::TypeMismatch);
        let errs = type_check(&parse("x"), &decls()).unwrap_err();
        assert_eq!(errs[0].rule, Rule::UndeclaredVariable);
    }

    #[test]
    fn eval_examples() {
        let env = Env::new().with("c", Value::Int(1));
        assert_eq!(eval(&parse("c + 1"), &env), Ok(Value::Int(2)));
        let env = Env::new().with("c", Value::Int(2));
        assert_eq!(eval(&parse("c <= 2 & c >= 2"), &env), Ok(Value::Bool(true)));
        let env = Env::new()
            .with("isInternal", Value::Bool(true))
            .with("c", Value::Int(0));
        assert_eq!(eval(&parse("!isInternal"), &env), Ok(Value::Bool(false)));
    }

    #[test]
    fn free_vars_examples() {
        let fv = free_vars(&parse("isInternal & c = 0"));
        assert_eq!(fv.into_iter().collect::<Vec<_>>(), vec!["c", "isInternal"]);
        assert!(free_vars(&Expr::tt()).is_empty());
        assert_eq!(free_vars(&parse("c < c")).len(), 1);
    }

    #[test]
    fn display_respects_precedence() {
        for src in [
            "!(a & b) | c",
            "a & (b | c)",
            "x + 1 - (y - 2) = 3",
            "!a = b",
            "(x < 1) = b",
            "x - -1 > 0",
        ] {
            let d = vec![
                VarDecl::new("a", Domain::Bool, VarKind::Input),
                VarDecl::new("b", Domain::Bool, VarKind::Input),
                VarDecl::new("c", Domain::Bool, VarKind::Input),
                VarDecl::new("x", Domain::Int { lo: 0, hi: 3 }, VarKind::Input),
                VarDecl::new("y", Domain::Int { lo: 0, hi: 3 }, VarKind::Input),
            ];
            let e = crate::text::parse_expr(src, &d).unwrap();
            let again = crate::text::parse_expr(&e.to_string(), &d).unwrap();
            assert_eq!(e, again, "{src} printed as {e}");
        }
    }

    #[test]
    fn unbound_and_mismatch_are_errors() {
        assert_eq!(
            eval(&Expr::var("q"), &Env::new()),
            Err(EvalError::Unbound("q".into()))
        );
        let e = Expr::bin(BinOp::Add, Expr::int(1), Expr::tt());
        assert!(matches!(eval(&e, &Env::new()), Err(EvalError::Mismatch { .. })));
    }
}
