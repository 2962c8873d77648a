//! Reduced ordered binary decision diagrams.
//!
//! A [`Manager`] owns every node; a [`Bdd`] is a plain handle into it. The
//! variable order is the numeric order of variable indices and never
//! changes. Nodes are hash-consed, so two handles from one manager are equal
//! exactly when they denote the same boolean function.
//!
//! Nothing is ever freed before the manager is dropped. Instead the manager
//! enforces a node budget and reports [`DdError::NodeBudget`] when it runs out.

use std::fmt::Write;

use rustc_hash::FxHashMap;
use thiserror::Error;

pub const DEFAULT_NODE_BUDGET: usize = 1 << 22;

/// Handle to a function (equivalently, a set of assignments) in a [`Manager`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bdd(u32);

/// The spec-level name for a state set represented as a decision diagram.
pub type SymbolicSet = Bdd;

impl Bdd {
    pub const FALSE: Bdd = Bdd(0);
    pub const TRUE: Bdd = Bdd(1);

    pub fn is_false(self) -> bool {
        self == Bdd::FALSE
    }

    pub fn is_true(self) -> bool {
        self == Bdd::TRUE
    }

    pub fn is_const(self) -> bool {
        self.0 < 2
    }

    /// Raw node index; stable for the lifetime of the manager.
    pub fn index(self) -> u32 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DdError {
    #[error("decision diagram node budget of {0} nodes exceeded")]
    NodeBudget(usize),
    #[error("cannot pick an element of the empty set")]
    Empty,
}

pub type DdResult<T> = Result<T, DdError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Node {
    var: u32,
    lo: Bdd,
    hi: Bdd,
}

const TERMINAL_VAR: u32 = u32::MAX;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    /// Marks an unused cache slot.
    Empty,
    Cofactor,
    AndCofactor,
    And,
    Or,
    Xor,
    Not,
    Ite,
    Exists,
    Forall,
    AndExists,
}

/// Direction for [`Manager::rename_primed`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prime {
    ToPrimed,
    ToUnprimed,
}

/// Direct-mapped computed table. Colliding entries overwrite each other, so
/// lookups can miss but never return a wrong result.
struct Cache {
    slots: Vec<(Op, Bdd, Bdd, Bdd, Bdd)>,
}

const CACHE_MIN: usize = 1 << 12;
const CACHE_MAX: usize = 1 << 16;

impl Cache {
    fn new() -> Cache {
        Cache {
            slots: vec![(Op::Empty, Bdd::FALSE, Bdd::FALSE, Bdd::FALSE, Bdd::FALSE); CACHE_MIN],
        }
    }

    fn slot(&self, (op, a, b, c): (Op, Bdd, Bdd, Bdd)) -> usize {
        let h = (op as u64)
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(a.0 as u64)
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(b.0 as u64)
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(c.0 as u64)
            .wrapping_mul(0x9e37_79b9_7f4a_7c15);
        (h >> 32) as usize & (self.slots.len() - 1)
    }

    fn clear(&mut self) {
        self.slots.fill((Op::Empty, Bdd::FALSE, Bdd::FALSE, Bdd::FALSE, Bdd::FALSE));
    }

    /// The cached result, or the slot a result for `key` goes into.
    #[inline]
    fn lookup(&self, key: (Op, Bdd, Bdd, Bdd)) -> Result<Bdd, usize> {
        let i = self.slot(key);
        let e = self.slots[i];
        if (e.0, e.1, e.2, e.3) == key {
            Ok(e.4)
        } else {
            Err(i)
        }
    }

    #[inline]
    fn store(&mut self, mut slot: usize, key: (Op, Bdd, Bdd, Bdd), r: Bdd, live_nodes: usize) {
        if live_nodes > self.slots.len() && self.slots.len() < CACHE_MAX {
            let n = (self.slots.len() * 4).min(CACHE_MAX);
            self.slots = vec![(Op::Empty, Bdd::FALSE, Bdd::FALSE, Bdd::FALSE, Bdd::FALSE); n];
            slot = self.slot(key);
        }
        self.slots[slot] = (key.0, key.1, key.2, key.3, r);
    }
}

/// Open-addressing set of node indices keyed by node contents. Slot value 0
/// is free; the terminals never need to be stored.
struct Unique {
    slots: Vec<u32>,
    len: usize,
}

impl Unique {
    fn new() -> Unique {
        Unique {
            slots: vec![0; 1 << 10],
            len: 0,
        }
    }

    fn with_capacity(n: usize) -> Unique {
        Unique {
            slots: vec![0; (n * 2 + 2).next_power_of_two().max(1 << 10)],
            len: 0,
        }
    }

    fn hash(n: Node) -> usize {
        let h = (n.var as u64)
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(n.lo.0 as u64)
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(n.hi.0 as u64)
            .wrapping_mul(0x9e37_79b9_7f4a_7c15);
        (h >> 32) as usize
    }

    /// The node's index, or the free slot where it belongs.
    fn find(&self, nodes: &[Node], n: Node) -> Result<Bdd, usize> {
        let mask = self.slots.len() - 1;
        let mut i = Self::hash(n) & mask;
        loop {
            match self.slots[i] {
                0 => return Err(i),
                b if nodes[b as usize] == n => return Ok(Bdd(b)),
                _ => i = (i + 1) & mask,
            }
        }
    }

    fn insert(&mut self, nodes: &[Node], slot: usize, b: Bdd) {
        self.slots[slot] = b.0;
        self.len += 1;
        if self.len * 2 > self.slots.len() {
            let mut slots = vec![0; self.slots.len() * 2];
            let mask = slots.len() - 1;
            for &b in self.slots.iter().filter(|&&b| b != 0) {
                let mut i = Self::hash(nodes[b as usize]) & mask;
                while slots[i] != 0 {
                    i = (i + 1) & mask;
                }
                slots[i] = b;
            }
            self.slots = slots;
        }
    }
}

pub struct Manager {
    nodes: Vec<Node>,
    unique: Unique,
    /// Indices of collected nodes, reused before the table grows.
    free: Vec<u32>,
    live: usize,
    cache: Cache,
    num_vars: u32,
    budget: usize,
    /// `primes[v]` is the primed partner of unprimed variable `v`.
    primes: Vec<Option<u32>>,
    names: Vec<Option<String>>,
}

impl Manager {
    pub fn new(num_vars: u32) -> Manager {
        Manager::with_budget(num_vars, DEFAULT_NODE_BUDGET)
    }

    pub fn with_budget(num_vars: u32, budget: usize) -> Manager {
        let term = |b| Node {
            var: TERMINAL_VAR,
            lo: Bdd(b),
            hi: Bdd(b),
        };
        Manager {
            nodes: vec![term(0), term(1)],
            unique: Unique::new(),
            free: Vec::new(),
            live: 2,
            cache: Cache::new(),
            num_vars,
            budget: budget.max(2),
            primes: vec![None; num_vars as usize],
            names: vec![None; num_vars as usize],
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Number of live nodes, terminals included.
    pub fn node_count(&self) -> usize {
        self.live
    }

    /// Frees every node not reachable from `roots`. Handles to freed nodes
    /// become invalid, so callers must list everything they still use.
    pub fn collect(&mut self, roots: &[Bdd]) {
        let mut mark = vec![false; self.nodes.len()];
        mark[0] = true;
        mark[1] = true;
        let mut stack: Vec<Bdd> = roots.to_vec();
        while let Some(f) = stack.pop() {
            if mark[f.0 as usize] {
                continue;
            }
            mark[f.0 as usize] = true;
            let n = self.nodes[f.0 as usize];
            stack.push(n.lo);
            stack.push(n.hi);
        }
        self.free.clear();
        let mut unique = Unique::with_capacity(mark.iter().filter(|&&m| m).count());
        for (i, &m) in mark.iter().enumerate().skip(2) {
            if m {
                let slot = unique.find(&self.nodes, self.nodes[i]).expect_err("nodes are unique");
                unique.insert(&self.nodes, slot, Bdd(i as u32));
            } else {
                self.nodes[i] = Node {
                    var: TERMINAL_VAR,
                    lo: Bdd::FALSE,
                    hi: Bdd::FALSE,
                };
                self.free.push(i as u32);
            }
        }
        // lowest indices first
        self.free.reverse();
        self.live = self.nodes.len() - self.free.len();
        self.unique = unique;
        self.cache.clear();
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn set_var_name(&mut self, v: u32, name: impl Into<String>) {
        self.names[v as usize] = Some(name.into());
    }

    pub fn var_name(&self, v: u32) -> String {
        self.names[v as usize].clone().unwrap_or_else(|| format!("x{v}"))
    }

    /// Declares `primed` as the next-state copy of `unprimed`.
    pub fn declare_primed(&mut self, unprimed: u32, primed: u32) {
        self.primes[unprimed as usize] = Some(primed);
    }

    /// Top variable of `f`; `None` for constants.
    pub fn top_var(&self, f: Bdd) -> Option<u32> {
        let v = self.nodes[f.0 as usize].var;
        (v != TERMINAL_VAR).then_some(v)
    }

    pub fn low(&self, f: Bdd) -> Bdd {
        self.nodes[f.0 as usize].lo
    }

    pub fn high(&self, f: Bdd) -> Bdd {
        self.nodes[f.0 as usize].hi
    }

    fn level(&self, f: Bdd) -> u32 {
        self.nodes[f.0 as usize].var
    }

    fn mk(&mut self, var: u32, lo: Bdd, hi: Bdd) -> DdResult<Bdd> {
        if lo == hi {
            return Ok(lo);
        }
        let n = Node { var, lo, hi };
        let slot = match self.unique.find(&self.nodes, n) {
            Ok(b) => return Ok(b),
            Err(slot) => slot,
        };
        if self.live >= self.budget {
            return Err(DdError::NodeBudget(self.budget));
        }
        self.live += 1;
        let b = match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = n;
                Bdd(i)
            }
            None => {
                self.nodes.push(n);
                Bdd(self.nodes.len() as u32 - 1)
            }
        };
        self.unique.insert(&self.nodes, slot, b);
        Ok(b)
    }

    pub fn constant(&self, b: bool) -> Bdd {
        if b {
            Bdd::TRUE
        } else {
            Bdd::FALSE
        }
    }

    pub fn var(&mut self, v: u32) -> DdResult<Bdd> {
        assert!(v < self.num_vars, "variable {v} out of range");
        self.mk(v, Bdd::FALSE, Bdd::TRUE)
    }

    pub fn nvar(&mut self, v: u32) -> DdResult<Bdd> {
        assert!(v < self.num_vars, "variable {v} out of range");
        self.mk(v, Bdd::TRUE, Bdd::FALSE)
    }

    /// `v` if `val`, else `!v`.
    pub fn literal(&mut self, v: u32, val: bool) -> DdResult<Bdd> {
        if val {
            self.var(v)
        } else {
            self.nvar(v)
        }
    }

    fn cofactors(&self, f: Bdd, var: u32) -> (Bdd, Bdd) {
        let n = self.nodes[f.0 as usize];
        if n.var == var {
            (n.lo, n.hi)
        } else {
            (f, f)
        }
    }

    pub fn not(&mut self, f: Bdd) -> DdResult<Bdd> {
        if f.is_const() {
            return Ok(Bdd(1 - f.0));
        }
        let key = (Op::Not, f, f, f);
        let slot = match self.cache.lookup(key) {
            Ok(r) => return Ok(r),
            Err(slot) => slot,
        };
        let n = self.nodes[f.0 as usize];
        let lo = self.not(n.lo)?;
        let hi = self.not(n.hi)?;
        let r = self.mk(n.var, lo, hi)?;
        self.cache.store(slot, key, r, self.live);
        Ok(r)
    }

    fn apply(&mut self, op: Op, a: Bdd, b: Bdd) -> DdResult<Bdd> {
        match op {
            Op::And => {
                if a.is_false() || b.is_false() {
                    return Ok(Bdd::FALSE);
                }
                if a.is_true() || a == b {
                    return Ok(b);
                }
                if b.is_true() {
                    return Ok(a);
                }
            }
            Op::Or => {
                if a.is_true() || b.is_true() {
                    return Ok(Bdd::TRUE);
                }
                if a.is_false() || a == b {
                    return Ok(b);
                }
                if b.is_false() {
                    return Ok(a);
                }
            }
            Op::Xor => {
                if a == b {
                    return Ok(Bdd::FALSE);
                }
                if a.is_false() {
                    return Ok(b);
                }
                if b.is_false() {
                    return Ok(a);
                }
                if a.is_true() {
                    return self.not(b);
                }
                if b.is_true() {
                    return self.not(a);
                }
            }
            _ => unreachable!(),
        }
        // all three are commutative
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let key = (op, a, b, Bdd::FALSE);
        let slot = match self.cache.lookup(key) {
            Ok(r) => return Ok(r),
            Err(slot) => slot,
        };
        let var = self.level(a).min(self.level(b));
        let (a0, a1) = self.cofactors(a, var);
        let (b0, b1) = self.cofactors(b, var);
        let lo = self.apply(op, a0, b0)?;
        let hi = self.apply(op, a1, b1)?;
        let r = self.mk(var, lo, hi)?;
        self.cache.store(slot, key, r, self.live);
        Ok(r)
    }

    pub fn and(&mut self, a: Bdd, b: Bdd) -> DdResult<Bdd> {
        self.apply(Op::And, a, b)
    }

    pub fn or(&mut self, a: Bdd, b: Bdd) -> DdResult<Bdd> {
        self.apply(Op::Or, a, b)
    }

    pub fn xor(&mut self, a: Bdd, b: Bdd) -> DdResult<Bdd> {
        self.apply(Op::Xor, a, b)
    }

    pub fn iff(&mut self, a: Bdd, b: Bdd) -> DdResult<Bdd> {
        let x = self.xor(a, b)?;
        self.not(x)
    }

    pub fn imp(&mut self, a: Bdd, b: Bdd) -> DdResult<Bdd> {
        let na = self.not(a)?;
        self.or(na, b)
    }

    /// `a & !b`.
    pub fn diff(&mut self, a: Bdd, b: Bdd) -> DdResult<Bdd> {
        let nb = self.not(b)?;
        self.and(a, nb)
    }

    pub fn and_all(&mut self, fs: impl IntoIterator<Item = Bdd>) -> DdResult<Bdd> {
        let mut acc = Bdd::TRUE;
        for f in fs {
            acc = self.and(acc, f)?;
        }
        Ok(acc)
    }

    pub fn or_all(&mut self, fs: impl IntoIterator<Item = Bdd>) -> DdResult<Bdd> {
        let mut acc = Bdd::FALSE;
        for f in fs {
            acc = self.or(acc, f)?;
        }
        Ok(acc)
    }

    pub fn ite(&mut self, c: Bdd, t: Bdd, e: Bdd) -> DdResult<Bdd> {
        if c.is_true() {
            return Ok(t);
        }
        if c.is_false() {
            return Ok(e);
        }
        if t == e {
            return Ok(t);
        }
        if t.is_true() && e.is_false() {
            return Ok(c);
        }
        if t.is_false() && e.is_true() {
            return self.not(c);
        }
        if t.is_true() {
            return self.or(c, e);
        }
        if e.is_false() {
            return self.and(c, t);
        }
        let key = (Op::Ite, c, t, e);
        let slot = match self.cache.lookup(key) {
            Ok(r) => return Ok(r),
            Err(slot) => slot,
        };
        let var = self.level(c).min(self.level(t)).min(self.level(e));
        let (c0, c1) = self.cofactors(c, var);
        let (t0, t1) = self.cofactors(t, var);
        let (e0, e1) = self.cofactors(e, var);
        let lo = self.ite(c0, t0, e0)?;
        let hi = self.ite(c1, t1, e1)?;
        let r = self.mk(var, lo, hi)?;
        self.cache.store(slot, key, r, self.live);
        Ok(r)
    }

    /// Conjunction of the positive literals of `vars`, used as a
    /// quantification set.
    pub fn cube(&mut self, vars: &[u32]) -> DdResult<Bdd> {
        let mut sorted = vars.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut acc = Bdd::TRUE;
        for &v in sorted.iter().rev() {
            acc = self.mk(v, Bdd::FALSE, acc)?;
        }
        Ok(acc)
    }

    /// Variables of a cube built by [`Manager::cube`], in order.
    pub fn cube_vars(&self, mut cube: Bdd) -> Vec<u32> {
        let mut out = Vec::new();
        while !cube.is_const() {
            let n = self.nodes[cube.0 as usize];
            out.push(n.var);
            cube = n.hi;
        }
        out
    }

    /// Drops cube variables above `level`.
    fn skip_cube(&self, mut cube: Bdd, level: u32) -> Bdd {
        while !cube.is_const() && self.level(cube) < level {
            cube = self.nodes[cube.0 as usize].hi;
        }
        cube
    }

    /// Drops the literals of a literal cube above `level`.
    fn skip_literals(&self, mut cube: Bdd, level: u32) -> Bdd {
        while !cube.is_const() && self.level(cube) < level {
            let c = self.nodes[cube.0 as usize];
            cube = if c.lo.is_false() { c.hi } else { c.lo };
        }
        cube
    }

    pub fn exists(&mut self, f: Bdd, cube: Bdd) -> DdResult<Bdd> {
        self.quant(Op::Exists, f, cube)
    }

    pub fn forall(&mut self, f: Bdd, cube: Bdd) -> DdResult<Bdd> {
        self.quant(Op::Forall, f, cube)
    }

    fn quant(&mut self, op: Op, f: Bdd, cube: Bdd) -> DdResult<Bdd> {
        if f.is_const() {
            return Ok(f);
        }
        let cube = self.skip_cube(cube, self.level(f));
        if cube.is_true() {
            return Ok(f);
        }
        let key = (op, f, cube, Bdd::FALSE);
        let slot = match self.cache.lookup(key) {
            Ok(r) => return Ok(r),
            Err(slot) => slot,
        };
        let n = self.nodes[f.0 as usize];
        let r = if self.level(cube) == n.var {
            let rest = self.nodes[cube.0 as usize].hi;
            let lo = self.quant(op, n.lo, rest)?;
            // short-circuit on the absorbing element
            if (op == Op::Exists && lo.is_true()) || (op == Op::Forall && lo.is_false()) {
                lo
            } else {
                let hi = self.quant(op, n.hi, rest)?;
                if op == Op::Exists {
                    self.or(lo, hi)?
                } else {
                    self.and(lo, hi)?
                }
            }
        } else {
            let lo = self.quant(op, n.lo, cube)?;
            let hi = self.quant(op, n.hi, cube)?;
            self.mk(n.var, lo, hi)?
        };
        self.cache.store(slot, key, r, self.live);
        Ok(r)
    }

    /// `exists cube. (f & g)` without building the conjunction.
    pub fn and_exists(&mut self, f: Bdd, g: Bdd, cube: Bdd) -> DdResult<Bdd> {
        if f.is_false() || g.is_false() {
            return Ok(Bdd::FALSE);
        }
        if f.is_true() {
            return self.exists(g, cube);
        }
        if g.is_true() || f == g {
            return self.exists(f, cube);
        }
        let (f, g) = if f <= g { (f, g) } else { (g, f) };
        let top = self.level(f).min(self.level(g));
        let cube = self.skip_cube(cube, top);
        if cube.is_true() {
            return self.and(f, g);
        }
        let key = (Op::AndExists, f, g, cube);
        let slot = match self.cache.lookup(key) {
            Ok(r) => return Ok(r),
            Err(slot) => slot,
        };
        let (f0, f1) = self.cofactors(f, top);
        let (g0, g1) = self.cofactors(g, top);
        let r = if self.level(cube) == top {
            let rest = self.nodes[cube.0 as usize].hi;
            let lo = self.and_exists(f0, g0, rest)?;
            if lo.is_true() {
                lo
            } else {
                let hi = self.and_exists(f1, g1, rest)?;
                self.or(lo, hi)?
            }
        } else {
            let lo = self.and_exists(f0, g0, cube)?;
            let hi = self.and_exists(f1, g1, cube)?;
            self.mk(top, lo, hi)?
        };
        self.cache.store(slot, key, r, self.live);
        Ok(r)
    }

    /// Cofactor of `f` with `var` fixed to `val`.
    pub fn restrict(&mut self, f: Bdd, var: u32, val: bool) -> DdResult<Bdd> {
        let mut memo = FxHashMap::default();
        self.restrict_rec(f, var, val, &mut memo)
    }

    fn restrict_rec(
        &mut self,
        f: Bdd,
        var: u32,
        val: bool,
        memo: &mut FxHashMap<Bdd, Bdd>,
    ) -> DdResult<Bdd> {
        let n = self.nodes[f.0 as usize];
        if f.is_const() || n.var > var {
            return Ok(f);
        }
        if n.var == var {
            return Ok(if val { n.hi } else { n.lo });
        }
        if let Some(&r) = memo.get(&f) {
            return Ok(r);
        }
        let lo = self.restrict_rec(n.lo, var, val, memo)?;
        let hi = self.restrict_rec(n.hi, var, val, memo)?;
        let r = self.mk(n.var, lo, hi)?;
        memo.insert(f, r);
        Ok(r)
    }

    /// Cofactor of `f` under several literals at once.
    pub fn restrict_all(&mut self, f: Bdd, lits: &[(u32, bool)]) -> DdResult<Bdd> {
        let cube = self.literal_cube(lits)?;
        self.cofactor(f, cube)
    }

    /// Conjunction of literals.
    pub fn literal_cube(&mut self, lits: &[(u32, bool)]) -> DdResult<Bdd> {
        let mut sorted = lits.to_vec();
        sorted.sort_unstable();
        let mut cube = Bdd::TRUE;
        for &(v, b) in sorted.iter().rev() {
            let l = self.literal(v, b)?;
            cube = self.and(l, cube)?;
        }
        Ok(cube)
    }

    /// Cofactor of `f` by a conjunction of literals `cube`.
    pub fn cofactor(&mut self, f: Bdd, cube: Bdd) -> DdResult<Bdd> {
        if f.is_const() || cube.is_true() {
            return Ok(f);
        }
        assert!(!cube.is_false(), "cofactor by an empty cube");
        let cv = self.level(cube);
        let fv = self.level(f);
        let c = self.nodes[cube.0 as usize];
        // the cube's child that is not FALSE carries the rest of it
        let (pos, rest) = if c.lo.is_false() { (true, c.hi) } else { (false, c.lo) };
        if fv > cv {
            return self.cofactor(f, rest);
        }
        let key = (Op::Cofactor, f, cube, Bdd::FALSE);
        let slot = match self.cache.lookup(key) {
            Ok(r) => return Ok(r),
            Err(slot) => slot,
        };
        let n = self.nodes[f.0 as usize];
        let r = if fv == cv {
            self.cofactor(if pos { n.hi } else { n.lo }, rest)?
        } else {
            let lo = self.cofactor(n.lo, cube)?;
            let hi = self.cofactor(n.hi, cube)?;
            self.mk(n.var, lo, hi)?
        };
        self.cache.store(slot, key, r, self.live);
        Ok(r)
    }

    /// `f & cofactor(g, cube)` without building the cofactor.
    pub fn and_cofactor(&mut self, f: Bdd, g: Bdd, mut cube: Bdd) -> DdResult<Bdd> {
        if f.is_false() || g.is_false() {
            return Ok(Bdd::FALSE);
        }
        if g.is_true() {
            return Ok(f);
        }
        if f.is_true() {
            return self.cofactor(g, cube);
        }
        let gv = self.level(g);
        cube = self.skip_literals(cube, gv);
        if cube.is_true() {
            return self.and(f, g);
        }
        let key = (Op::AndCofactor, f, g, cube);
        let slot = match self.cache.lookup(key) {
            Ok(r) => return Ok(r),
            Err(slot) => slot,
        };
        let cv = self.level(cube);
        let r = if gv == cv {
            let c = self.nodes[cube.0 as usize];
            let gn = self.nodes[g.0 as usize];
            let (next, rest) = if c.lo.is_false() { (gn.hi, c.hi) } else { (gn.lo, c.lo) };
            self.and_cofactor(f, next, rest)?
        } else {
            let var = self.level(f).min(gv);
            let (f0, f1) = self.cofactors(f, var);
            let (g0, g1) = self.cofactors(g, var);
            let lo = self.and_cofactor(f0, g0, cube)?;
            let hi = self.and_cofactor(f1, g1, cube)?;
            self.mk(var, lo, hi)?
        };
        self.cache.store(slot, key, r, self.live);
        Ok(r)
    }

    /// Simultaneous substitution: every variable `v` with `subst[v] = Some(g)`
    /// is replaced by `g`; the others are left alone.
    pub fn compose(&mut self, f: Bdd, subst: &[Option<Bdd>]) -> DdResult<Bdd> {
        let mut memo = FxHashMap::default();
        // lowest level at which anything changes; below it f is untouched
        let deepest = subst
            .iter()
            .rposition(|s| s.is_some())
            .map(|v| v as u32);
        match deepest {
            None => Ok(f),
            Some(d) => self.compose_rec(f, subst, d, &mut memo),
        }
    }

    fn compose_rec(
        &mut self,
        f: Bdd,
        subst: &[Option<Bdd>],
        deepest: u32,
        memo: &mut FxHashMap<Bdd, Bdd>,
    ) -> DdResult<Bdd> {
        if f.is_const() || self.level(f) > deepest {
            return Ok(f);
        }
        if let Some(&r) = memo.get(&f) {
            return Ok(r);
        }
        let n = self.nodes[f.0 as usize];
        let lo = self.compose_rec(n.lo, subst, deepest, memo)?;
        let hi = self.compose_rec(n.hi, subst, deepest, memo)?;
        let g = match subst.get(n.var as usize).copied().flatten() {
            Some(g) => g,
            None => self.var(n.var)?,
        };
        let r = self.ite(g, hi, lo)?;
        memo.insert(f, r);
        Ok(r)
    }

    /// Renames variables pairwise; a pair `(a, b)` replaces `a` by `b`.
    pub fn rename(&mut self, f: Bdd, pairs: &[(u32, u32)]) -> DdResult<Bdd> {
        let mut subst = vec![None; self.num_vars as usize];
        for &(from, to) in pairs {
            subst[from as usize] = Some(self.var(to)?);
        }
        self.compose(f, &subst)
    }

    /// Swaps every declared unprimed variable with its primed partner in the
    /// given direction. Applying both directions in turn is the identity on
    /// functions over one side.
    pub fn rename_primed(&mut self, f: Bdd, dir: Prime) -> DdResult<Bdd> {
        let pairs: Vec<(u32, u32)> = self
            .primes
            .iter()
            .enumerate()
            .filter_map(|(u, p)| p.map(|p| (u as u32, p)))
            .map(|(u, p)| match dir {
                Prime::ToPrimed => (u, p),
                Prime::ToUnprimed => (p, u),
            })
            .collect();
        if pairs.iter().all(|&(a, b)| a < b) || pairs.iter().all(|&(a, b)| a > b) {
            // order-preserving when each partner is adjacent; rebuild directly
            if let Some(r) = self.shift_rename(f, &pairs)? {
                return Ok(r);
            }
        }
        self.rename(f, &pairs)
    }

    /// Fast path for renamings that keep the relative order of the support.
    fn shift_rename(&mut self, f: Bdd, pairs: &[(u32, u32)]) -> DdResult<Option<Bdd>> {
        let mut map: Vec<u32> = (0..self.num_vars).collect();
        for &(a, b) in pairs {
            map[a as usize] = b;
        }
        let support = self.support(f);
        let mapped: Vec<u32> = support.iter().map(|&v| map[v as usize]).collect();
        if mapped.windows(2).any(|w| w[0] >= w[1]) {
            return Ok(None);
        }
        let mut memo = FxHashMap::default();
        self.shift_rec(f, &map, &mut memo).map(Some)
    }

    fn shift_rec(&mut self, f: Bdd, map: &[u32], memo: &mut FxHashMap<Bdd, Bdd>) -> DdResult<Bdd> {
        if f.is_const() {
            return Ok(f);
        }
        if let Some(&r) = memo.get(&f) {
            return Ok(r);
        }
        let n = self.nodes[f.0 as usize];
        let lo = self.shift_rec(n.lo, map, memo)?;
        let hi = self.shift_rec(n.hi, map, memo)?;
        let r = self.mk(map[n.var as usize], lo, hi)?;
        memo.insert(f, r);
        Ok(r)
    }

    /// Variables `f` depends on, in order.
    pub fn support(&self, f: Bdd) -> Vec<u32> {
        let mut seen = vec![false; self.nodes.len()];
        let mut vars = vec![false; self.num_vars as usize];
        let mut stack = vec![f];
        while let Some(g) = stack.pop() {
            if g.is_const() || seen[g.0 as usize] {
                continue;
            }
            seen[g.0 as usize] = true;
            let n = self.nodes[g.0 as usize];
            vars[n.var as usize] = true;
            stack.push(n.lo);
            stack.push(n.hi);
        }
        (0..self.num_vars).filter(|&v| vars[v as usize]).collect()
    }

    /// Number of distinct nodes reachable from `f`, terminals excluded.
    pub fn size(&self, f: Bdd) -> usize {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut stack = vec![f];
        while let Some(g) = stack.pop() {
            if g.is_const() || !seen.insert(g) {
                continue;
            }
            let n = self.nodes[g.0 as usize];
            stack.push(n.lo);
            stack.push(n.hi);
        }
        seen.len()
    }

    /// Evaluates `f` under a total assignment indexed by variable.
    pub fn eval(&self, f: Bdd, assignment: &[bool]) -> bool {
        let mut g = f;
        while !g.is_const() {
            let n = self.nodes[g.0 as usize];
            g = if assignment[n.var as usize] { n.hi } else { n.lo };
        }
        g.is_true()
    }

    /// Existentially removes every variable outside `block`.
    pub fn project(&mut self, f: Bdd, block: &[u32]) -> DdResult<Bdd> {
        let mut keep = vec![false; self.num_vars as usize];
        for &v in block {
            keep[v as usize] = true;
        }
        let others: Vec<u32> = self
            .support(f)
            .into_iter()
            .filter(|&v| !keep[v as usize])
            .collect();
        let cube = self.cube(&others)?;
        self.exists(f, cube)
    }

    /// The lexicographically smallest assignment to `block` (in variable
    /// order, `false < true`) that extends to a satisfying assignment of `f`.
    /// The result lists values for `block` sorted by variable index.
    pub fn pick_one(&mut self, f: Bdd, block: &[u32]) -> DdResult<Vec<bool>> {
        let g = self.project(f, block)?;
        if g.is_false() {
            return Err(DdError::Empty);
        }
        let mut vars = block.to_vec();
        vars.sort_unstable();
        vars.dedup();
        let mut out = Vec::with_capacity(vars.len());
        let mut cur = g;
        for &v in &vars {
            let n = self.nodes[cur.0 as usize];
            if cur.is_const() || n.var != v {
                // v is free here
                out.push(false);
            } else if !n.lo.is_false() {
                out.push(false);
                cur = n.lo;
            } else {
                out.push(true);
                cur = n.hi;
            }
        }
        Ok(out)
    }

    /// Number of assignments to `block` that extend to a model of `f`.
    /// Saturates at `u128::MAX`.
    pub fn sat_count(&mut self, f: Bdd, block: &[u32]) -> DdResult<u128> {
        let g = self.project(f, block)?;
        let mut vars = block.to_vec();
        vars.sort_unstable();
        vars.dedup();
        let mut pos = vec![0u32; self.num_vars as usize + 1];
        for (i, &v) in vars.iter().enumerate() {
            pos[v as usize] = i as u32;
        }
        let total = vars.len() as u32;
        let level_pos = |m: &Manager, h: Bdd| -> u32 {
            if h.is_const() {
                total
            } else {
                pos[m.level(h) as usize]
            }
        };
        let mut memo: FxHashMap<Bdd, u128> = FxHashMap::default();
        fn rec(
            m: &Manager,
            h: Bdd,
            memo: &mut FxHashMap<Bdd, u128>,
            level_pos: &dyn Fn(&Manager, Bdd) -> u32,
        ) -> u128 {
            if h.is_false() {
                return 0;
            }
            if h.is_true() {
                return 1;
            }
            if let Some(&c) = memo.get(&h) {
                return c;
            }
            let n = m.nodes[h.0 as usize];
            let here = level_pos(m, h);
            let sub = |c: Bdd, memo: &mut FxHashMap<Bdd, u128>| -> u128 {
                let gap = level_pos(m, c) - here - 1;
                rec(m, c, memo, level_pos).saturating_mul(pow2(gap))
            };
            let r = sub(n.lo, memo).saturating_add(sub(n.hi, memo));
            memo.insert(h, r);
            r
        }
        let top = level_pos(self, g);
        Ok(rec(self, g, &mut memo, &level_pos).saturating_mul(pow2(top)))
    }

    /// All assignments to `block` extending to a model of `f`, in
    /// lexicographic order.
    pub fn enumerate(&mut self, f: Bdd, block: &[u32]) -> DdResult<impl Iterator<Item = Vec<bool>>> {
        let g = self.project(f, block)?;
        let mut vars = block.to_vec();
        vars.sort_unstable();
        vars.dedup();
        let mut out = Vec::new();
        let mut prefix = Vec::with_capacity(vars.len());
        self.enum_rec(g, &vars, 0, &mut prefix, &mut out);
        Ok(out.into_iter())
    }

    fn enum_rec(&self, g: Bdd, vars: &[u32], i: usize, prefix: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if g.is_false() {
            return;
        }
        if i == vars.len() {
            out.push(prefix.clone());
            return;
        }
        let (lo, hi) = self.cofactors(g, vars[i]);
        for (val, child) in [(false, lo), (true, hi)] {
            prefix.push(val);
            self.enum_rec(child, vars, i + 1, prefix, out);
            prefix.pop();
        }
    }

    /// The backward image used by the fixpoint: all `(s1, s2)` such that some
    /// `t1`-successor `s1'` of `s1` satisfies `z(s1', s2')` for every
    /// `t2`-successor `s2'` of `s2`. `z` ranges over unprimed variables; the
    /// cubes list the primed variables of each side.
    pub fn rel_image_pre(
        &mut self,
        z: Bdd,
        t1: Bdd,
        t2: Bdd,
        primed1: Bdd,
        primed2: Bdd,
    ) -> DdResult<Bdd> {
        let zp = self.rename_primed(z, Prime::ToPrimed)?;
        let all2 = self.imp(t2, zp)?;
        let all2 = self.forall(all2, primed2)?;
        self.and_exists(t1, all2, primed1)
    }

    /// Graphviz rendering of the diagram rooted at `f`.
    pub fn to_dot(&self, f: Bdd) -> String {
        let mut s = String::from("digraph bdd {\n  node [shape=circle];\n");
        let _ = writeln!(s, "  n0 [shape=box, label=\"0\"];\n  n1 [shape=box, label=\"1\"];");
        let mut seen = rustc_hash::FxHashSet::default();
        let mut stack = vec![f];
        let mut order = Vec::new();
        while let Some(g) = stack.pop() {
            if g.is_const() || !seen.insert(g) {
                continue;
            }
            order.push(g);
            let n = self.nodes[g.0 as usize];
            stack.push(n.hi);
            stack.push(n.lo);
        }
        order.sort();
        for g in order {
            let n = self.nodes[g.0 as usize];
            let _ = writeln!(s, "  n{} [label=\"{}\"];", g.0, self.var_name(n.var));
            let _ = writeln!(s, "  n{} -> n{} [style=dashed];", g.0, n.lo.0);
            let _ = writeln!(s, "  n{} -> n{};", g.0, n.hi.0);
        }
        s.push_str("}\n");
        s
    }
}

fn pow2(k: u32) -> u128 {
    if k >= 128 {
        u128::MAX
    } else {
        1u128 << k
    }
}
