//! Binary encodings of finite-domain variables and expressions as decision
//! diagrams.
//!
//! A variable with domain cardinality `n` occupies `ceil(log2 n)` decision
//! variables holding its domain index, most significant bit first. Codes at
//! or above `n` are invalid and excluded by [`FiniteVar::valid`].

use std::collections::BTreeMap;

use crate::dd::{Bdd, DdResult, Manager};
use crate::expr::{apply_binop, BinOp, Expr, Value};
use crate::model::{Domain, GuardFinding, VarDecl};

/// Bits needed to hold indices `0..card`.
pub fn width(card: u64) -> u32 {
    if card <= 1 {
        0
    } else {
        64 - (card - 1).leading_zeros()
    }
}

#[derive(Clone, Debug)]
pub struct FiniteVar {
    pub name: String,
    pub domain: Domain,
    /// Manager variables, most significant first.
    pub bits: Vec<u32>,
}

impl FiniteVar {
    pub fn new(name: &str, domain: Domain, bits: Vec<u32>) -> FiniteVar {
        debug_assert_eq!(bits.len() as u32, width(domain.cardinality()));
        FiniteVar {
            name: name.to_string(),
            domain,
            bits,
        }
    }

    pub fn cardinality(&self) -> u64 {
        self.domain.cardinality()
    }

    /// `self == idx` as a cube over the variable's bits.
    pub fn eq_index(&self, m: &mut Manager, idx: u64) -> DdResult<Bdd> {
        let k = self.bits.len();
        let mut acc = Bdd::TRUE;
        for (i, &b) in self.bits.iter().enumerate().rev() {
            let bit = (idx >> (k - 1 - i)) & 1 == 1;
            let lit = m.literal(b, bit)?;
            acc = m.and(lit, acc)?;
        }
        Ok(acc)
    }

    /// Codes that denote a domain value.
    pub fn valid(&self, m: &mut Manager) -> DdResult<Bdd> {
        let card = self.cardinality();
        if card == 1u64 << self.bits.len() {
            return Ok(Bdd::TRUE);
        }
        self.less_than(m, card)
    }

    /// `self < bound` over the raw code.
    fn less_than(&self, m: &mut Manager, bound: u64) -> DdResult<Bdd> {
        let k = self.bits.len();
        if bound >= 1u64 << k {
            return Ok(Bdd::TRUE);
        }
        // scan from the least significant bit upwards
        let mut acc = Bdd::FALSE;
        for (i, &b) in self.bits.iter().enumerate().rev() {
            let bit = (bound >> (k - 1 - i)) & 1 == 1;
            acc = if bit {
                let nb = m.nvar(b)?;
                m.or(nb, acc)?
            } else {
                let nb = m.nvar(b)?;
                m.and(nb, acc)?
            };
        }
        Ok(acc)
    }

    /// `self == other` bitwise; both must share a width.
    pub fn eq_var(&self, m: &mut Manager, other: &FiniteVar) -> DdResult<Bdd> {
        let mut acc = Bdd::TRUE;
        for (&a, &b) in self.bits.iter().zip(&other.bits).rev() {
            let va = m.var(a)?;
            let vb = m.var(b)?;
            let e = m.iff(va, vb)?;
            acc = m.and(e, acc)?;
        }
        Ok(acc)
    }

    /// Domain index encoded in `assignment`, indexed by manager variable.
    pub fn decode(&self, assignment: &[bool]) -> u64 {
        self.bits
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | assignment[b as usize] as u64)
    }

    /// Index from bits given in the same order as [`FiniteVar::bits`].
    pub fn decode_bits(bits: &[bool]) -> u64 {
        bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }
}

/// Translates expressions over a set of encoded variables.
pub struct ExprEncoder<'a> {
    pub lookup: &'a dyn Fn(&str) -> Option<&'a FiniteVar>,
}

/// Value-indexed partition of the valid code space: each entry is a value
/// and the (pairwise disjoint) condition under which the term takes it.
pub type Partition = BTreeMap<Value, Bdd>;

impl ExprEncoder<'_> {
    pub fn formula(&self, m: &mut Manager, e: &Expr) -> DdResult<Bdd> {
        match e {
            Expr::Const(Value::Bool(b)) => Ok(m.constant(*b)),
            Expr::Var(n) => {
                let v = (self.lookup)(n).unwrap_or_else(|| panic!("unencoded variable `{n}`"));
                if matches!(v.domain, Domain::Bool) {
                    m.var(v.bits[0])
                } else {
                    self.from_partition(m, e)
                }
            }
            Expr::Not(inner) => {
                let f = self.formula(m, inner)?;
                m.not(f)
            }
            Expr::Binary(BinOp::And, l, r) => {
                let a = self.formula(m, l)?;
                let b = self.formula(m, r)?;
                m.and(a, b)
            }
            Expr::Binary(BinOp::Or, l, r) => {
                let a = self.formula(m, l)?;
                let b = self.formula(m, r)?;
                m.or(a, b)
            }
            Expr::Binary(op @ (BinOp::Eq | BinOp::Ne), l, r) if self.is_bool(l) => {
                let a = self.formula(m, l)?;
                let b = self.formula(m, r)?;
                if *op == BinOp::Eq {
                    m.iff(a, b)
                } else {
                    m.xor(a, b)
                }
            }
            _ => self.from_partition(m, e),
        }
    }

    fn is_bool(&self, e: &Expr) -> bool {
        match e {
            Expr::Const(v) => matches!(v, Value::Bool(_)),
            Expr::Var(n) => (self.lookup)(n).is_some_and(|v| matches!(v.domain, Domain::Bool)),
            Expr::Not(_) => true,
            Expr::Binary(op, _, _) => !matches!(op, BinOp::Add | BinOp::Sub),
        }
    }

    fn from_partition(&self, m: &mut Manager, e: &Expr) -> DdResult<Bdd> {
        let p = self.term(m, e)?;
        Ok(p.get(&Value::Bool(true)).copied().unwrap_or(Bdd::FALSE))
    }

    pub fn term(&self, m: &mut Manager, e: &Expr) -> DdResult<Partition> {
        match e {
            Expr::Const(v) => Ok(BTreeMap::from([(v.clone(), Bdd::TRUE)])),
            Expr::Var(n) => {
                let v = (self.lookup)(n).unwrap_or_else(|| panic!("unencoded variable `{n}`"));
                let mut out = BTreeMap::new();
                for idx in 0..v.cardinality() {
                    let c = v.eq_index(m, idx)?;
                    out.insert(v.domain.value_at(idx), c);
                }
                Ok(out)
            }
            Expr::Not(_) | Expr::Binary(BinOp::And | BinOp::Or, _, _) => {
                let f = self.formula(m, e)?;
                let nf = m.not(f)?;
                Ok(BTreeMap::from([(Value::Bool(true), f), (Value::Bool(false), nf)]))
            }
            Expr::Binary(op, l, r) => {
                let pl = self.term(m, l)?;
                let pr = self.term(m, r)?;
                let mut out: Partition = BTreeMap::new();
                for (lv, lc) in &pl {
                    for (rv, rc) in &pr {
                        // type errors and overflow make the combination unreachable
                        let Ok(v) = apply_binop(*op, lv, rv) else { continue };
                        let c = m.and(*lc, *rc)?;
                        if c.is_false() {
                            continue;
                        }
                        let slot = out.entry(v).or_insert(Bdd::FALSE);
                        *slot = m.or(*slot, c)?;
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Guard exclusivity and exhaustiveness via decision diagrams. Witnesses
/// are the lexicographically smallest offending assignments, matching the
/// enumerating checker.
pub(crate) fn guard_findings_symbolic(vars: &[&VarDecl], guards: &[&Expr]) -> Vec<GuardFinding> {
    let mut next = 0u32;
    let mut encoded = Vec::new();
    for v in vars {
        let w = width(v.domain.cardinality());
        encoded.push(FiniteVar::new(&v.name, v.domain.clone(), (next..next + w).collect()));
        next += w;
    }
    let mut m = Manager::new(next);
    let all_bits: Vec<u32> = (0..next).collect();
    let lookup = |n: &str| encoded.iter().find(|v| v.name == n);
    let enc = ExprEncoder { lookup: &lookup };

    let run = |m: &mut Manager| -> DdResult<Vec<GuardFinding>> {
        let mut valid = Bdd::TRUE;
        for v in &encoded {
            let c = v.valid(m)?;
            valid = m.and(valid, c)?;
        }
        let mut gs = Vec::new();
        for g in guards {
            let f = enc.formula(m, g)?;
            gs.push(m.and(f, valid)?);
        }
        let witness = |m: &mut Manager, f: Bdd| -> DdResult<Vec<(String, Value)>> {
            let bits = m.pick_one(f, &all_bits)?;
            Ok(encoded
                .iter()
                .map(|v| {
                    let idx = v.bits.iter().fold(0u64, |acc, &b| (acc << 1) | bits[b as usize] as u64);
                    (v.name.clone(), v.domain.value_at(idx))
                })
                .collect())
        };
        let mut out = Vec::new();
        for i in 0..gs.len() {
            for j in i + 1..gs.len() {
                let both = m.and(gs[i], gs[j])?;
                if !both.is_false() {
                    out.push(GuardFinding::Overlap(i, j, witness(m, both)?));
                }
            }
        }
        let any = m.or_all(gs.iter().copied())?;
        let gap = m.diff(valid, any)?;
        if !gap.is_false() {
            out.push(GuardFinding::Gap(witness(m, gap)?));
        }
        Ok(out)
    };
    // guards are tiny next to the default budget; exhausting it is a bug
    run(&mut m).expect("guard check exceeded the decision diagram budget")
}
