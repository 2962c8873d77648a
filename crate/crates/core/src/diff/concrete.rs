//! Explicit-state differencing: breadth-first search over pairs of
//! corresponding states.

use std::collections::VecDeque;
use std::hash::{Hash, Hasher};
use std::time::Instant;

use rustc_hash::FxHashSet;

use super::{input_env, sort_traces, Algorithm, CombinedState, Correspondence, DiffError, DiffOutcome, DiffTrace, TraceState};
use crate::semantics::{AdState, Machine, SemanticsError};

/// A search node. Equality and hashing look only at the current states, so
/// a set of pairs doubles as a map from current states to predecessors.
#[derive(Clone, Debug)]
pub struct Pair {
    pub pre1: Option<AdState>,
    pub cur1: AdState,
    pub pre2: Option<AdState>,
    pub cur2: Option<AdState>,
}

impl Pair {
    fn key(cur1: AdState, cur2: Option<AdState>) -> Pair {
        Pair {
            pre1: None,
            cur1,
            pre2: None,
            cur2,
        }
    }
}

impl PartialEq for Pair {
    fn eq(&self, other: &Pair) -> bool {
        self.cur1 == other.cur1 && self.cur2 == other.cur2
    }
}

impl Eq for Pair {}

impl Hash for Pair {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.cur1.hash(h);
        self.cur2.hash(h);
    }
}

pub(crate) fn run(m1: &Machine, m2: &Machine, max_traces: Option<usize>, decide_only: bool) -> Result<DiffOutcome, DiffError> {
    let start = Instant::now();
    let corr = Correspondence::new(m1, m2)?;
    let limit = if decide_only { Some(1) } else { max_traces };
    let mut search = Search {
        m1,
        m2,
        corr: &corr,
        visited: FxHashSet::default(),
        queue: VecDeque::new(),
        rejects: Vec::new(),
        rejected_inputs: FxHashSet::default(),
        limit,
    };
    let mut decide = None;
    search.init()?;
    if !search.rejects.is_empty() {
        decide = Some(start.elapsed());
    }
    if !search.full() {
        search.traverse(&mut || {
            if decide.is_none() {
                decide = Some(start.elapsed());
            }
        })?;
    }
    let mut traces: Vec<DiffTrace> = search.rejects.iter().map(|r| search.build_trace(r)).collect();
    sort_traces(m1, &mut traces);
    let total = start.elapsed();
    Ok(DiffOutcome {
        algorithm: Algorithm::Concrete,
        traces,
        decide: decide.unwrap_or(total),
        total,
    })
}

struct Search<'a> {
    m1: &'a Machine,
    m2: &'a Machine,
    corr: &'a Correspondence,
    visited: FxHashSet<Pair>,
    queue: VecDeque<Pair>,
    rejects: Vec<Pair>,
    /// Inputs of `ad1` that already have a witness.
    rejected_inputs: FxHashSet<Box<[u32]>>,
    limit: Option<usize>,
}

impl Search<'_> {
    fn full(&self) -> bool {
        self.limit.is_some_and(|n| self.rejects.len() >= n)
    }

    fn budget_check(&self) -> Result<(), DiffError> {
        let budget = self.m1.state_budget();
        if self.visited.len() >= budget {
            return Err(SemanticsError::StateBudget(budget).into());
        }
        Ok(())
    }

    fn init(&mut self) -> Result<(), DiffError> {
        let ini2 = self.m2.initial_states()?;
        for ini1 in self.m1.initial_states()? {
            let mut matched = false;
            for s2 in &ini2 {
                if self.corr.holds(&ini1, s2) {
                    matched = true;
                    let p = Pair::key(ini1.clone(), Some(s2.clone()));
                    self.budget_check()?;
                    if self.visited.insert(p.clone()) {
                        self.queue.push_back(p);
                    }
                }
            }
            if !matched {
                self.reject(Pair::key(ini1, None));
                if self.full() {
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    fn reject(&mut self, r: Pair) {
        let inputs: Box<[u32]> = self.m1.inputs(&r.cur1).into();
        if !self.rejected_inputs.insert(inputs.clone()) {
            return;
        }
        let n = self.m1.num_inputs();
        self.queue.retain(|p| p.cur1.env[..n] != inputs[..]);
        self.rejects.push(r);
    }

    fn traverse(&mut self, on_reject: &mut dyn FnMut()) -> Result<(), DiffError> {
        let mut succ1 = Vec::new();
        let mut succ2 = Vec::new();
        while let Some(p) = self.queue.pop_front() {
            let cur2 = p.cur2.as_ref().expect("queued pairs are complete");
            succ1.clear();
            succ2.clear();
            self.m1.successors_into(&p.cur1, &mut succ1)?;
            self.m2.successors_into(cur2, &mut succ2)?;
            for s1 in succ1.drain(..) {
                if self.rejected_inputs.contains(self.m1.inputs(&s1)) {
                    break;
                }
                match succ2.iter().find(|s2| self.corr.holds(&s1, s2)) {
                    Some(s2) => {
                        let np = Pair {
                            pre1: Some(p.cur1.clone()),
                            cur1: s1,
                            pre2: Some(cur2.clone()),
                            cur2: Some(s2.clone()),
                        };
                        if !self.visited.contains(&np) {
                            self.budget_check()?;
                            self.visited.insert(np.clone());
                            self.queue.push_back(np);
                        }
                    }
                    None => {
                        self.reject(Pair {
                            pre1: Some(p.cur1.clone()),
                            cur1: s1,
                            pre2: Some(cur2.clone()),
                            cur2: None,
                        });
                        on_reject();
                        if self.full() {
                            return Ok(());
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn build_trace(&self, reject: &Pair) -> DiffTrace {
        let mut steps = Vec::new();
        let mut cur = reject.clone();
        loop {
            steps.push(CombinedState {
                s1: TraceState::from_state(self.m1, &cur.cur1),
                s2: cur.cur2.as_ref().map(|s| TraceState::from_state(self.m2, s)),
            });
            let (Some(pre1), Some(pre2)) = (&cur.pre1, &cur.pre2) else { break };
            cur = self
                .visited
                .get(&Pair::key(pre1.clone(), Some(pre2.clone())))
                .expect("predecessor pair was visited")
                .clone();
        }
        steps.reverse();
        DiffTrace {
            ad1: self.m1.ad().name.clone(),
            ad2: self.m2.ad().name.clone(),
            inputs: input_env(self.m1, &reject.cur1),
            steps,
        }
    }
}
