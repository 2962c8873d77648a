//! Decision-diagram differencing: a backward fixpoint over pairs of states
//! followed by forward witness extraction.
//!
//! `z0` holds the non-corresponding pairs and `z(i+1) = z(i) ∪ pre(z(i))`,
//! where `pre(z)` contains `(s1, s2)` if some successor `s1'` of `s1` is
//! paired by `z` with every successor of `s2`. A pair first enters at
//! iteration `i` exactly when the shortest witness from it has `i + 1`
//! states, which is what the extraction relies on.

use std::collections::BTreeMap;
use std::time::Instant;

use super::{input_env, sort_traces, Algorithm, CombinedState, Correspondence, DiffError, DiffOptions, DiffOutcome, DiffTrace, TraceState};
use crate::dd::{Bdd, DdResult, Manager};
use crate::encode::{width, ExprEncoder, FiniteVar};
use crate::model::{Domain, NodeKind};
use crate::semantics::{AdState, Label, Machine, Marking, Routing};

/// One way of taking a step: the enabling condition over current-state
/// bits and the new value of every bit it changes.
#[derive(Clone, Debug)]
struct Step {
    label: Label,
    guard: Bdd,
    updates: Vec<(u32, Bdd)>,
    /// The updates that set a bit to a constant.
    lits: Vec<(u32, bool)>,
    /// The remaining updates.
    rest: Vec<(u32, Bdd)>,
}

/// A side-one step paired with a side-two step of the same label.
#[derive(Clone, Debug)]
struct Move {
    not_guard: Bdd,
    image: Image,
}

/// How to move a state set backwards through a pair of steps.
#[derive(Clone, Debug)]
enum Image {
    /// Disjoint cases, each restricted to both guards, with constant updates.
    Cases(Vec<(Bdd, Bdd)>),
    /// Cofactor by the constant updates, then substitute the others.
    Compose { cube: Bdd, subst: Vec<Option<Bdd>> },
}

/// Encoding of one diagram's state space.
#[derive(Clone, Debug)]
struct Side {
    node: FiniteVar,
    /// Code to node index.
    visible: Vec<usize>,
    /// Node index to code.
    code: Vec<Option<u64>>,
    /// Indexed like the machine's valuation.
    vars: Vec<FiniteVar>,
    /// Bit holding the token of each transition; transitions into merge,
    /// fork and decision nodes are empty in every stable marking.
    tok: Vec<Option<u32>>,
    steps: Vec<Step>,
    /// Unprimed bits owned by this side (shared inputs belong to side one).
    bits: Vec<u32>,
    /// `(unprimed, primed)` for the bits in `bits`.
    primes: Vec<(u32, u32)>,
}

impl Side {
    fn set(&self, s: &AdState, a: &mut [bool]) {
        let put = |v: &FiniteVar, idx: u64, a: &mut [bool]| {
            let k = v.bits.len();
            for (i, &b) in v.bits.iter().enumerate() {
                a[b as usize] = (idx >> (k - 1 - i)) & 1 == 1;
            }
        };
        put(&self.node, self.code[s.node as usize].expect("visible node"), a);
        for (v, &idx) in self.vars.iter().zip(s.env.iter()) {
            put(v, idx as u64, a);
        }
        for (t, b) in self.tok.iter().enumerate() {
            if let Some(b) = b {
                a[*b as usize] = s.marking.get(t);
            } else {
                debug_assert!(!s.marking.get(t), "unstable marking");
            }
        }
    }

    fn decode(&self, a: &[bool]) -> AdState {
        let node = self.visible[self.node.decode(a) as usize] as u32;
        let env: Vec<u32> = self.vars.iter().map(|v| v.decode(a) as u32).collect();
        let mut marking = Marking::empty(self.tok.len());
        for (t, b) in self.tok.iter().enumerate() {
            if b.is_some_and(|b| a[b as usize]) {
                marking.set(t);
            }
        }
        AdState {
            node,
            env: env.into_boxed_slice(),
            marking,
        }
    }

    /// Successor assignments of the side's part of `a`; the rest is copied.
    fn successors(&self, mgr: &Manager, a: &[bool]) -> Vec<Vec<bool>> {
        let mut out = Vec::new();
        for st in &self.steps {
            if mgr.eval(st.guard, a) {
                let mut b = a.to_vec();
                for &(v, f) in &st.updates {
                    b[v as usize] = mgr.eval(f, a);
                }
                out.push(b);
            }
        }
        out
    }

    fn code_in(&self, mgr: &mut Manager, nodes: &[usize]) -> DdResult<Bdd> {
        let mut acc = Bdd::FALSE;
        for &n in nodes {
            if let Some(c) = self.code[n] {
                let e = self.node.eq_index(mgr, c)?;
                acc = mgr.or(acc, e)?;
            }
        }
        Ok(acc)
    }
}

struct Alloc {
    next: u32,
    names: Vec<String>,
}

impl Alloc {
    fn bits(&mut self, name: &str, k: u32) -> (Vec<u32>, Vec<(u32, u32)>) {
        let mut bits = Vec::new();
        let mut pairs = Vec::new();
        for i in 0..k {
            bits.push(self.next);
            pairs.push((self.next, self.next + 1));
            self.names.push(format!("{name}.{i}"));
            self.names.push(format!("{name}.{i}'"));
            self.next += 2;
        }
        (bits, pairs)
    }
}

/// Paired state spaces of two diagrams over one manager.
pub struct SymbolicEncoding<'m> {
    m1: &'m Machine,
    m2: &'m Machine,
    pub mgr: Manager,
    sides: [Side; 2],
    /// Side-two steps sharing the label of each side-one step.
    /// For each side-one step, the side-two steps with the same label.
    moves: Vec<Vec<Move>>,
    /// Pairs that leave `z` regardless of `z`, from steps with at most one partner.
    fixed: Bdd,
    corr: Bdd,
    initials: Bdd,
}

fn tracked(m: &Machine, t: usize) -> bool {
    let (_, trg) = m.transition_ends(t);
    matches!(m.node_kind(trg as u32), NodeKind::Action | NodeKind::Final | NodeKind::Join)
}

fn visible_nodes(m: &Machine) -> Vec<usize> {
    (0..m.ad().nodes.len())
        .filter(|&n| matches!(m.node_kind(n as u32), NodeKind::Initial | NodeKind::Action | NodeKind::Final))
        .collect()
}

impl<'m> SymbolicEncoding<'m> {
    pub fn new(m1: &'m Machine, m2: &'m Machine, node_budget: usize) -> Result<SymbolicEncoding<'m>, DiffError> {
        let corr_info = Correspondence::new(m1, m2)?;
        let ms = [m1, m2];
        let mut alloc = Alloc {
            next: 0,
            names: Vec::new(),
        };
        let mut vars: [Vec<Option<FiniteVar>>; 2] = [vec![None; m1.vars().len()], vec![None; m2.vars().len()]];
        let mut own: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        let mut primes: [Vec<(u32, u32)>; 2] = [Vec::new(), Vec::new()];

        for &(i, j) in &corr_info.shared {
            let d = &m1.vars()[i];
            let (bits, pairs) = alloc.bits(&d.name, width(d.domain.cardinality()));
            vars[0][i] = Some(FiniteVar::new(&d.name, d.domain.clone(), bits.clone()));
            vars[1][j] = Some(FiniteVar::new(&d.name, d.domain.clone(), bits.clone()));
            own[0].extend(&bits);
            primes[0].extend(pairs);
        }

        let visible = [visible_nodes(m1), visible_nodes(m2)];
        let node_w = [width(visible[0].len() as u64), width(visible[1].len() as u64)];
        let mut node_bits: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        for b in 0..node_w[0].max(node_w[1]) {
            for s in 0..2 {
                if b < node_w[s] {
                    let (bits, pairs) = alloc.bits(&format!("acnode{}", s + 1), 1);
                    node_bits[s].extend(&bits);
                    own[s].extend(&bits);
                    primes[s].extend(pairs);
                }
            }
        }

        let rest: [Vec<usize>; 2] = [0, 1].map(|s| (0..ms[s].vars().len()).filter(|&v| vars[s][v].is_none()).collect());
        for k in 0..rest[0].len().max(rest[1].len()) {
            for s in 0..2 {
                if let Some(&v) = rest[s].get(k) {
                    let d = &ms[s].vars()[v];
                    let (bits, pairs) = alloc.bits(&format!("{}{}", d.name, s + 1), width(d.domain.cardinality()));
                    vars[s][v] = Some(FiniteVar::new(&d.name, d.domain.clone(), bits.clone()));
                    own[s].extend(&bits);
                    primes[s].extend(pairs);
                }
            }
        }

        let toks: [Vec<usize>; 2] = [0, 1].map(|s| (0..ms[s].num_transitions()).filter(|&t| tracked(ms[s], t)).collect());
        let mut tok: [Vec<Option<u32>>; 2] = [vec![None; m1.num_transitions()], vec![None; m2.num_transitions()]];
        for k in 0..toks[0].len().max(toks[1].len()) {
            for s in 0..2 {
                if let Some(&t) = toks[s].get(k) {
                    let (bits, pairs) = alloc.bits(&format!("tok{}_t{t}", s + 1), 1);
                    tok[s][t] = Some(bits[0]);
                    own[s].extend(&bits);
                    primes[s].extend(pairs);
                }
            }
        }

        let mut mgr = Manager::with_budget(alloc.next, node_budget);
        for (v, n) in alloc.names.iter().enumerate() {
            mgr.set_var_name(v as u32, n.clone());
        }
        for &(u, p) in primes[0].iter().chain(&primes[1]) {
            mgr.declare_primed(u, p);
        }

        let [vars1, vars2] = vars;
        let [own1, own2] = own;
        let [primes1, primes2] = primes;
        let [tok1, tok2] = tok;
        let [vis1, vis2] = visible;
        let [nb1, nb2] = node_bits;
        let mk_side = |m: &Machine, vars: Vec<Option<FiniteVar>>, vis: Vec<usize>, nb: Vec<u32>, tok, bits, primes| {
            let mut code = vec![None; m.ad().nodes.len()];
            for (c, &n) in vis.iter().enumerate() {
                code[n] = Some(c as u64);
            }
            let hi = vis.len() as i64 - 1;
            Side {
                node: FiniteVar::new("acnode", Domain::Int { lo: 0, hi }, nb),
                visible: vis,
                code,
                vars: vars.into_iter().map(|v| v.expect("every variable is encoded")).collect(),
                tok,
                steps: Vec::new(),
                bits,
                primes,
            }
        };
        let side1 = mk_side(m1, vars1, vis1, nb1, tok1, own1, primes1);
        let side2 = mk_side(m2, vars2, vis2, nb2, tok2, own2, primes2);

        let mut enc = SymbolicEncoding {
            m1,
            m2,
            mgr,
            sides: [side1, side2],
            moves: Vec::new(),
            fixed: Bdd::FALSE,
            corr: Bdd::FALSE,
            initials: Bdd::FALSE,
        };
        for s in 0..2 {
            let steps = enc.build_steps(s)?;
            enc.sides[s].steps = steps;
        }
        enc.build_moves()?;
        enc.corr = enc.build_corr()?;
        enc.initials = enc.build_initials(&corr_info)?;
        Ok(enc)
    }

    fn machine(&self, s: usize) -> &'m Machine {
        if s == 0 {
            self.m1
        } else {
            self.m2
        }
    }

    fn build_steps(&mut self, s: usize) -> Result<Vec<Step>, DiffError> {
        let m = self.machine(s);
        let side = self.sides[s].clone();
        let mgr = &mut self.mgr;
        let nv = mgr.num_vars() as usize;
        let lookup = |name: &str| side.vars.iter().find(|v| v.name == name);
        let enc = ExprEncoder { lookup: &lookup };
        let tok = |mgr: &mut Manager, t: usize| mgr.var(side.tok[t].expect("tracked transition"));
        let mut steps = Vec::new();
        for &n in m.steppers() {
            let ins = m.in_edges(n);
            for (k, &t_in) in ins.iter().enumerate() {
                let mut guard = tok(mgr, t_in)?;
                for &lower in &ins[..k] {
                    let l = tok(mgr, lower)?;
                    guard = mgr.diff(guard, l)?;
                }
                let mut updates: Vec<(u32, Bdd)> = Vec::new();
                let code = side.code[n].expect("steppers are visible");
                let w = side.node.bits.len();
                for (i, &b) in side.node.bits.iter().enumerate() {
                    updates.push((b, mgr.constant((code >> (w - 1 - i)) & 1 == 1)));
                }
                if m.node_kind(n as u32) == NodeKind::Final {
                    for b in side.tok.iter().flatten() {
                        updates.push((*b, Bdd::FALSE));
                    }
                    steps.push(make_step(m.node_label(n as u32), guard, updates));
                    continue;
                }
                let mut env_subst: Vec<Option<Bdd>> = vec![None; nv];
                for (pos, e) in m.assignments_of(n) {
                    let v = &side.vars[pos];
                    let part = enc.term(mgr, e)?;
                    let mut in_dom = Bdd::FALSE;
                    let mut bitf = vec![Bdd::FALSE; v.bits.len()];
                    for (val, c) in part {
                        let Some(idx) = v.domain.index_of(&val) else { continue };
                        in_dom = mgr.or(in_dom, c)?;
                        let kb = v.bits.len();
                        for (i, f) in bitf.iter_mut().enumerate() {
                            if (idx >> (kb - 1 - i)) & 1 == 1 {
                                *f = mgr.or(*f, c)?;
                            }
                        }
                    }
                    guard = mgr.and(guard, in_dom)?;
                    for (&b, f) in v.bits.iter().zip(bitf) {
                        env_subst[b as usize] = Some(f);
                        updates.push((b, f));
                    }
                }
                let mut toks: BTreeMap<usize, Bdd> = BTreeMap::new();
                toks.insert(t_in, Bdd::FALSE);
                let (t_o, routing) = m.routing_after(n);
                match routing {
                    Routing::Direct => {
                        toks.insert(t_o, Bdd::TRUE);
                    }
                    Routing::Merge(out) => {
                        toks.insert(out, Bdd::TRUE);
                    }
                    Routing::Fork(outs) => {
                        for o in outs {
                            toks.insert(o, Bdd::TRUE);
                        }
                    }
                    Routing::Decision(outs) => {
                        for (o, g) in outs {
                            let f = enc.formula(mgr, &g)?;
                            let f = mgr.compose(f, &env_subst)?;
                            toks.insert(o, f);
                        }
                    }
                    Routing::Join { others, out } => {
                        let mut all = Bdd::TRUE;
                        for &o in &others {
                            let x = tok(mgr, o)?;
                            all = mgr.and(all, x)?;
                        }
                        for &o in &others {
                            if o != t_in {
                                let x = tok(mgr, o)?;
                                let y = mgr.diff(x, all)?;
                                toks.insert(o, y);
                            }
                        }
                        let na = mgr.not(all)?;
                        toks.insert(t_o, na);
                        toks.insert(out, all);
                    }
                }
                for (t, f) in toks {
                    updates.push((side.tok[t].expect("tracked transition"), f));
                }
                steps.push(make_step(m.node_label(n as u32), guard, updates));
            }
        }
        Ok(steps)
    }

    fn build_corr(&mut self) -> DdResult<Bdd> {
        let mut groups: BTreeMap<String, [Vec<usize>; 2]> = BTreeMap::new();
        for s in 0..2 {
            let m = self.machine(s);
            for &n in &self.sides[s].visible {
                let key = match m.node_label(n as u32) {
                    Label::Init => "\u{0}init".to_string(),
                    Label::Fin => "\u{0}fin".to_string(),
                    Label::Action(a) => a.clone(),
                };
                groups.entry(key).or_default()[s].push(n);
            }
        }
        let mut corr = Bdd::FALSE;
        for [n1, n2] in groups.values() {
            if n1.is_empty() || n2.is_empty() {
                continue;
            }
            let a = self.sides[0].code_in(&mut self.mgr, n1)?;
            let b = self.sides[1].code_in(&mut self.mgr, n2)?;
            let both = self.mgr.and(a, b)?;
            corr = self.mgr.or(corr, both)?;
        }
        Ok(corr)
    }

    fn state_cube(&mut self, s: usize, st: &AdState) -> DdResult<Bdd> {
        let mut a = vec![false; self.mgr.num_vars() as usize];
        self.sides[s].set(st, &mut a);
        let mut bits = self.sides[s].bits.clone();
        if s == 1 {
            // shared inputs are fixed through side one
            for v in &self.sides[1].vars {
                bits.extend(&v.bits);
            }
            bits.sort_unstable();
            bits.dedup();
        }
        let mut acc = Bdd::TRUE;
        for &b in bits.iter().rev() {
            let l = self.mgr.literal(b, a[b as usize])?;
            acc = self.mgr.and(l, acc)?;
        }
        Ok(acc)
    }

    fn build_initials(&mut self, corr: &Correspondence) -> Result<Bdd, DiffError> {
        let i1 = self.m1.initial_states()?;
        let i2 = self.m2.initial_states()?;
        let mut acc = Bdd::FALSE;
        for a in &i1 {
            for b in &i2 {
                if corr.holds(a, b) {
                    let ca = self.state_cube(0, a)?;
                    let cb = self.state_cube(1, b)?;
                    let both = self.mgr.and(ca, cb)?;
                    acc = self.mgr.or(acc, both)?;
                }
            }
        }
        Ok(acc)
    }

    /// Pairs with equal labels (shared inputs agree by construction).
    pub fn corr(&self) -> Bdd {
        self.corr
    }

    /// Pairs of corresponding initial states.
    pub fn initials(&self) -> Bdd {
        self.initials
    }

    fn build_moves(&mut self) -> DdResult<()> {
        let nv = self.mgr.num_vars() as usize;
        let (side1, side2) = (self.sides[0].clone(), self.sides[1].clone());
        for a in &side1.steps {
            let mut moves = Vec::new();
            for b in &side2.steps {
                if b.label != a.label {
                    continue;
                }
                let guard = self.mgr.and(a.guard, b.guard)?;
                let updates: Vec<(u32, Bdd)> = a.updates.iter().chain(&b.updates).copied().collect();
                let image = match split_cases(&mut self.mgr, guard, &updates)? {
                    Some(cases) => {
                        let mut out = Vec::with_capacity(cases.len());
                        for (c, lits) in cases {
                            out.push((c, self.mgr.literal_cube(&lits)?));
                        }
                        Image::Cases(out)
                    }
                    None => {
                        let lits: Vec<(u32, bool)> = a.lits.iter().chain(&b.lits).copied().collect();
                        let mut subst = vec![None; nv];
                        for &(v, f) in a.rest.iter().chain(&b.rest) {
                            subst[v as usize] = Some(f);
                        }
                        Image::Compose {
                            cube: self.mgr.literal_cube(&lits)?,
                            subst,
                        }
                    }
                };
                let not_guard = self.mgr.not(b.guard)?;
                moves.push(Move { not_guard, image });
            }
            if moves.len() < 2 {
                let out = match moves.first() {
                    Some(m) => self.mgr.and(a.guard, m.not_guard)?,
                    None => a.guard,
                };
                self.fixed = self.mgr.or(self.fixed, out)?;
            }
            self.moves.push(moves);
        }
        Ok(())
    }

    /// Pairs enabling both steps of `mv` whose successor lies in `z`.
    fn step_image(&mut self, z: Bdd, n: usize, mv: &Move) -> DdResult<Bdd> {
        match &mv.image {
            Image::Cases(cases) => {
                let mut r = Bdd::FALSE;
                for &(c, cube) in cases {
                    let t = self.mgr.and_cofactor(c, z, cube)?;
                    r = self.mgr.or(r, t)?;
                }
                Ok(r)
            }
            Image::Compose { cube, subst } => {
                let r = self.mgr.cofactor(z, *cube)?;
                let r = self.mgr.compose(r, subst)?;
                let g = self.sides[0].steps[n].guard;
                let r = self.mgr.and(g, r)?;
                self.mgr.diff(r, mv.not_guard)
            }
        }
    }

    /// Backward image through the step functions, for `z` containing every
    /// non-corresponding pair. Under that assumption a side-one step only
    /// has to be checked against the side-two steps with the same label,
    /// since any other combination lands in `z` regardless.
    pub fn pre(&mut self, z: Bdd) -> DdResult<Bdd> {
        let mut terms = vec![self.fixed];
        for n in 0..self.moves.len() {
            match self.moves[n].len() {
                0 => {}
                1 => {
                    let mv = self.moves[n][0].clone();
                    terms.push(self.step_image(z, n, &mv)?);
                }
                _ => {
                    let mut acc = self.sides[0].steps[n].guard;
                    for i in 0..self.moves[n].len() {
                        let mv = self.moves[n][i].clone();
                        let moved = self.step_image(z, n, &mv)?;
                        let c = self.mgr.or(mv.not_guard, moved)?;
                        acc = self.mgr.and(acc, c)?;
                        if acc.is_false() {
                            break;
                        }
                    }
                    terms.push(acc);
                }
            }
        }
        // balanced disjunction keeps the intermediate results small
        while terms.len() > 1 {
            let mut next = Vec::with_capacity(terms.len().div_ceil(2));
            for pair in terms.chunks(2) {
                next.push(match pair {
                    [a, b] => self.mgr.or(*a, *b)?,
                    [a] => *a,
                    _ => unreachable!(),
                });
            }
            terms = next;
        }
        Ok(terms[0])
    }

    /// Every handle the encoding keeps between fixpoint iterations.
    fn roots(&self) -> Vec<Bdd> {
        let mut out = vec![self.fixed, self.corr, self.initials];
        for side in &self.sides {
            for st in &side.steps {
                out.push(st.guard);
                out.extend(st.updates.iter().map(|&(_, f)| f));
            }
        }
        for mv in self.moves.iter().flatten() {
            out.push(mv.not_guard);
            match &mv.image {
                Image::Cases(cases) => out.extend(cases.iter().flat_map(|&(c, cube)| [c, cube])),
                Image::Compose { cube, subst } => {
                    out.push(*cube);
                    out.extend(subst.iter().flatten());
                }
            }
        }
        out
    }

    /// Transition relation of one side over unprimed and primed bits.
    pub fn relation(&mut self, s: usize) -> DdResult<Bdd> {
        let side = self.sides[s].clone();
        let mut rel = Bdd::FALSE;
        for st in &side.steps {
            let mut conj = st.guard;
            for &(u, p) in &side.primes {
                let f = match st.updates.iter().find(|(b, _)| *b == u) {
                    Some(&(_, f)) => f,
                    None => self.mgr.var(u)?,
                };
                let pv = self.mgr.var(p)?;
                let e = self.mgr.iff(pv, f)?;
                conj = self.mgr.and(conj, e)?;
            }
            rel = self.mgr.or(rel, conj)?;
        }
        Ok(rel)
    }

    /// [`SymbolicEncoding::pre`] computed from the monolithic relations.
    pub fn pre_relational(&mut self, z: Bdd) -> DdResult<Bdd> {
        let t1 = self.relation(0)?;
        let t2 = self.relation(1)?;
        let p1: Vec<u32> = self.sides[0].primes.iter().map(|&(_, p)| p).collect();
        let p2: Vec<u32> = self.sides[1].primes.iter().map(|&(_, p)| p).collect();
        let c1 = self.mgr.cube(&p1)?;
        let c2 = self.mgr.cube(&p2)?;
        self.mgr.rel_image_pre(z, t1, t2, c1, c2)
    }

    /// Unprimed bits describing states of the given side.
    pub fn state_bits(&self, s: usize) -> Vec<u32> {
        let mut bits = self.sides[s].bits.clone();
        for v in &self.sides[s].vars {
            bits.extend(&v.bits);
        }
        bits.sort_unstable();
        bits.dedup();
        bits
    }

    /// Full assignment for a pair; shared inputs take their value from `s1`.
    pub fn encode_pair(&self, s1: &AdState, s2: &AdState) -> Vec<bool> {
        let mut a = vec![false; self.mgr.num_vars() as usize];
        self.sides[1].set(s2, &mut a);
        self.sides[0].set(s1, &mut a);
        a
    }

    pub fn contains(&self, f: Bdd, s1: &AdState, s2: &AdState) -> bool {
        self.mgr.eval(f, &self.encode_pair(s1, s2))
    }
}

/// Most cases a pair of steps may be split into before falling back to
/// composition.
const MAX_CASES: usize = 16;

type Case = (Bdd, Vec<(u32, bool)>);

/// Splits `guard` into disjoint cases on each of which every update sets its
/// bit to a constant. Updates that leave their bit unchanged are dropped.
/// Returns `None` when more than [`MAX_CASES`] cases would be needed.
fn split_cases(mgr: &mut Manager, guard: Bdd, updates: &[(u32, Bdd)]) -> DdResult<Option<Vec<Case>>> {
    let mut done = Vec::new();
    let mut work: Vec<(Bdd, Vec<(u32, bool)>, usize)> = vec![(guard, Vec::new(), 0)];
    while let Some((g, mut lits, mut i)) = work.pop() {
        if g.is_false() {
            continue;
        }
        let mut open = None;
        while i < updates.len() {
            let (b, f) = updates[i];
            i += 1;
            if f.is_const() {
                lits.push((b, f.is_true()));
                continue;
            }
            if mgr.and(g, f)?.is_false() {
                lits.push((b, false));
                continue;
            }
            let nf = mgr.not(f)?;
            if mgr.and(g, nf)?.is_false() {
                lits.push((b, true));
                continue;
            }
            let v = mgr.var(b)?;
            let changed = mgr.xor(f, v)?;
            if mgr.and(g, changed)?.is_false() {
                continue;
            }
            open = Some((b, f, nf));
            break;
        }
        match open {
            None => done.push((g, lits)),
            Some((b, f, nf)) => {
                let neg = mgr.and(g, nf)?;
                let pos = mgr.and(g, f)?;
                let mut neg_lits = lits.clone();
                neg_lits.push((b, false));
                lits.push((b, true));
                work.push((neg, neg_lits, i));
                work.push((pos, lits, i));
            }
        }
        if done.len() + work.len() > MAX_CASES {
            return Ok(None);
        }
    }
    Ok(Some(done))
}

fn make_step(label: &Label, guard: Bdd, updates: Vec<(u32, Bdd)>) -> Step {
    let mut lits = Vec::new();
    let mut rest = Vec::new();
    for &(b, f) in &updates {
        if f.is_const() {
            lits.push((b, f.is_true()));
        } else {
            rest.push((b, f));
        }
    }
    Step {
        label: label.clone(),
        guard,
        updates,
        lits,
        rest,
    }
}

/// Lexicographically least assignment over `bits` (in variable order).
fn lex_min(cands: Vec<Vec<bool>>, bits: &[u32]) -> Option<Vec<bool>> {
    cands
        .into_iter()
        .min_by(|a, b| bits.iter().map(|&v| a[v as usize]).cmp(bits.iter().map(|&v| b[v as usize])))
}

/// Live node count below which the fixpoint never collects garbage.
const GC_MIN: usize = 1 << 17;

pub(crate) fn run(m1: &Machine, m2: &Machine, opts: &DiffOptions, decide_only: bool) -> Result<DiffOutcome, DiffError> {
    let start = Instant::now();
    let mut enc = SymbolicEncoding::new(m1, m2, opts.node_budget)?;
    let initials = enc.initials;
    let z0 = enc.mgr.not(enc.corr)?;
    let mut mem = vec![z0];
    let mut gc_at = GC_MIN;
    let mut decide = None;
    if !enc.mgr.and(z0, initials)?.is_false() {
        decide = Some(start.elapsed());
    }
    while !(decide_only && decide.is_some()) {
        let z = *mem.last().unwrap();
        let p = enc.pre(z)?;
        let next = enc.mgr.or(z, p)?;
        if next == z {
            break;
        }
        mem.push(next);
        if enc.mgr.node_count() > gc_at {
            let mut roots = enc.roots();
            roots.extend(&mem);
            enc.mgr.collect(&roots);
            gc_at = (enc.mgr.node_count() * 4).max(GC_MIN);
        }
        if decide.is_none() && !enc.mgr.and(next, initials)?.is_false() {
            decide = Some(start.elapsed());
        }
    }
    let limit = if decide_only { Some(1) } else { opts.max_traces };
    let traces = extract(&mut enc, &mem, limit)?;
    let total = start.elapsed();
    let mut traces = traces;
    sort_traces(m1, &mut traces);
    Ok(DiffOutcome {
        algorithm: Algorithm::Symbolic,
        traces,
        decide: decide.unwrap_or(total),
        total,
    })
}

fn extract(enc: &mut SymbolicEncoding, mem: &[Bdd], limit: Option<usize>) -> Result<Vec<DiffTrace>, DiffError> {
    let (m1, m2) = (enc.m1, enc.m2);
    let corr_info = Correspondence::new(m1, m2)?;
    let bits1 = enc.state_bits(0);
    let bits2 = enc.sides[1].bits.clone();
    let ini2 = m2.initial_states()?;
    let last = *mem.last().unwrap();
    let mut out = Vec::new();
    for ini1 in m1.initial_states()? {
        if limit.is_some_and(|n| out.len() >= n) {
            break;
        }
        let partners: Vec<&AdState> = ini2.iter().filter(|s2| corr_info.holds(&ini1, s2)).collect();
        let trace_of = |steps| DiffTrace {
            ad1: m1.ad().name.clone(),
            ad2: m2.ad().name.clone(),
            inputs: input_env(m1, &ini1),
            steps,
        };
        if partners.is_empty() {
            out.push(trace_of(vec![CombinedState {
                s1: TraceState::from_state(m1, &ini1),
                s2: None,
            }]));
            continue;
        }
        if !partners.iter().any(|s2| enc.contains(last, &ini1, s2)) {
            continue;
        }
        let j = (0..mem.len())
            .find(|&j| partners.iter().any(|s2| enc.contains(mem[j], &ini1, s2)))
            .expect("pair is in the fixpoint");
        let cands: Vec<Vec<bool>> = partners
            .iter()
            .filter(|s2| enc.contains(mem[j], &ini1, s2))
            .map(|s2| enc.encode_pair(&ini1, s2))
            .collect();
        let mut cur = lex_min(cands, &bits2).unwrap();
        let mut steps = vec![CombinedState {
            s1: TraceState::from_state(m1, &ini1),
            s2: Some(TraceState::from_state(m2, &enc.sides[1].decode(&cur))),
        }];
        for i in (1..=j).rev() {
            let succ1 = enc.sides[0].successors(&enc.mgr, &cur);
            let succ2 = enc.sides[1].successors(&enc.mgr, &cur);
            let combine = |a1: &[bool], a2: &[bool]| -> Vec<bool> {
                let mut b = a1.to_vec();
                for &v in &bits2 {
                    b[v as usize] = a2[v as usize];
                }
                b
            };
            // next1: some successor all of whose pairings with succ2 lie in mem[i-1]
            let c1: Vec<Vec<bool>> = succ1
                .into_iter()
                .filter(|a1| succ2.iter().all(|a2| enc.mgr.eval(mem[i - 1], &combine(a1, a2))))
                .collect();
            let next1 = lex_min(c1, &bits1).expect("pre-image member has a witness successor");
            // next2: a corresponding successor that stays in mem[i-1]
            let c2: Vec<Vec<bool>> = succ2
                .iter()
                .map(|a2| combine(&next1, a2))
                .filter(|b| enc.mgr.eval(enc.corr, b) && enc.mgr.eval(mem[i - 1], b))
                .collect();
            let next2 = lex_min(c2, &bits2);
            let s1 = enc.sides[0].decode(&next1);
            steps.push(CombinedState {
                s1: TraceState::from_state(m1, &s1),
                s2: next2.as_ref().map(|b| TraceState::from_state(m2, &enc.sides[1].decode(b))),
            });
            match next2 {
                Some(b) => cur = b,
                None => {
                    debug_assert_eq!(i, 1);
                    break;
                }
            }
        }
        out.push(trace_of(steps));
    }
    Ok(out)
}
