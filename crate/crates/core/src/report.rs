//! Serializable reports for diff results, version histories and benchmarks.

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diff::{self, Algorithm, CompareResult, DiffError, DiffOptions, DiffOutcome, DiffTrace, HistoryEntry, TraceState};
use crate::expr::Env;
use crate::model::ActivityDiagram;
use crate::semantics::Machine;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Direction {
    pub from: String,
    pub to: String,
}

/// One side of a witness step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateReport {
    pub node: String,
    pub action: String,
    pub vars: Env,
}

impl From<&TraceState> for StateReport {
    fn from(s: &TraceState) -> StateReport {
        StateReport {
            node: s.node.clone(),
            action: s.label.as_str().to_string(),
            vars: s.env.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepReport {
    pub index: usize,
    pub ad1: StateReport,
    /// Absent on the last step.
    pub ad2: Option<StateReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub length: usize,
    pub inputs: Env,
    pub steps: Vec<StepReport>,
}

impl From<&DiffTrace> for WitnessReport {
    fn from(t: &DiffTrace) -> WitnessReport {
        WitnessReport {
            length: t.len(),
            inputs: t.inputs.clone(),
            steps: t
                .steps
                .iter()
                .enumerate()
                .map(|(index, c)| StepReport {
                    index,
                    ad1: (&c.s1).into(),
                    ad2: c.s2.as_ref().map(Into::into),
                })
                .collect(),
        }
    }
}

/// Wall-clock milliseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub decide_ms: f64,
    pub total_ms: f64,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub direction: Direction,
    pub algorithm: Algorithm,
    /// Set when the search stopped at the first witness.
    pub decide_only: bool,
    pub witness_count: usize,
    pub witnesses: Vec<WitnessReport>,
    pub timings: Timings,
}

impl DiffReport {
    pub fn new(ad1: &str, ad2: &str, outcome: &DiffOutcome, decide_only: bool) -> DiffReport {
        DiffReport {
            direction: Direction {
                from: ad1.to_string(),
                to: ad2.to_string(),
            },
            algorithm: outcome.algorithm,
            decide_only,
            witness_count: outcome.traces.len(),
            witnesses: outcome.traces.iter().map(Into::into).collect(),
            timings: Timings {
                decide_ms: ms(outcome.decide),
                total_ms: ms(outcome.total),
            },
        }
    }

    pub fn has_difference(&self) -> bool {
        !self.witnesses.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(s: &str) -> Result<DiffReport, serde_json::Error> {
        serde_json::from_str(s)
    }
}

fn fmt_env(env: &Env) -> String {
    let parts: Vec<String> = env.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
    parts.join(", ")
}

/// The action with every variable not in `skip`.
fn fmt_state(s: &StateReport, skip: &Env) -> String {
    let vars: Vec<String> = s
        .vars
        .0
        .iter()
        .filter(|(k, _)| !skip.0.contains_key(*k))
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    if vars.is_empty() {
        s.action.clone()
    } else {
        format!("{} [{}]", s.action, vars.join(", "))
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.witness_count;
        writeln!(
            f,
            "addiff({}, {}) [{}{}]: {} witness{}",
            self.direction.from,
            self.direction.to,
            self.algorithm,
            if self.decide_only { ", decide only" } else { "" },
            n,
            if n == 1 { "" } else { "es" }
        )?;
        for (i, w) in self.witnesses.iter().enumerate() {
            write!(f, "witness {} (length {})", i + 1, w.length)?;
            if !w.inputs.0.is_empty() {
                write!(f, ", inputs: {}", fmt_env(&w.inputs))?;
            }
            writeln!(f)?;
            let left: Vec<String> = w.steps.iter().map(|s| fmt_state(&s.ad1, &w.inputs)).collect();
            let width = left.iter().map(|s| s.chars().count()).max().unwrap_or(0);
            for (s, l) in w.steps.iter().zip(&left) {
                let right = s.ad2.as_ref().map_or_else(|| "-".to_string(), |r| fmt_state(r, &w.inputs));
                writeln!(f, "  {:>3}  {:<width$}  | {}", s.index, l, right)?;
            }
        }
        write!(
            f,
            "timings: decide {:.3} ms, total {:.3} ms",
            self.timings.decide_ms, self.timings.total_ms
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub steps: Vec<HistoryEntry>,
}

impl EvolutionReport {
    pub fn results(&self) -> Vec<CompareResult> {
        self.steps.iter().map(|e| e.result).collect()
    }

    /// Whether every version is equivalent to its successor.
    pub fn all_equivalent(&self) -> bool {
        self.steps.iter().all(|e| e.result == CompareResult::Equivalent)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

impl fmt::Display for EvolutionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.steps.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{} {} {}", e.from, e.result, e.to)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("the algorithms disagree on `{0}`")]
    Disagreement(String),
}

/// Timings of one algorithm in a benchmark row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoTimings {
    pub decide_ms: f64,
    pub all_ms: f64,
}

/// One row of the benchmark table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    pub nodes: (usize, usize),
    pub reachable: (usize, usize),
    pub witnesses: usize,
    pub shortest: usize,
    pub longest: usize,
    pub concrete: AlgoTimings,
    pub symbolic: AlgoTimings,
}

impl BenchRow {
    /// Runs both algorithms on `addiff(ad1, ad2)`. Decide times come from
    /// separate early-exit runs. Fails if the algorithms disagree on the
    /// witness lengths.
    pub fn measure(name: &str, ad1: &ActivityDiagram, ad2: &ActivityDiagram, opts: &DiffOptions) -> Result<BenchRow, BenchError> {
        let reach = |ad: &ActivityDiagram| -> Result<usize, DiffError> {
            let m = Machine::new(ad)?.with_state_budget(opts.state_budget);
            Ok(m.reachable_states()?.len())
        };
        let mut timings = [None, None];
        let mut lengths = [Vec::new(), Vec::new()];
        for (i, algo) in [Algorithm::Concrete, Algorithm::Symbolic].into_iter().enumerate() {
            let o = DiffOptions {
                algorithm: algo,
                ..opts.clone()
            };
            let d = diff::decide(ad1, ad2, &o)?;
            let all = diff::addiff(ad1, ad2, &o)?;
            lengths[i] = all.traces.iter().map(DiffTrace::len).collect();
            timings[i] = Some(AlgoTimings {
                decide_ms: ms(d.decide),
                all_ms: ms(all.total),
            });
        }
        let [l1, l2] = lengths;
        if l1 != l2 {
            return Err(BenchError::Disagreement(name.to_string()));
        }
        Ok(BenchRow {
            name: name.to_string(),
            nodes: (ad1.nodes.len(), ad2.nodes.len()),
            reachable: (reach(ad1)?, reach(ad2)?),
            witnesses: l1.len(),
            shortest: l1.iter().copied().min().unwrap_or(0),
            longest: l1.iter().copied().max().unwrap_or(0),
            concrete: timings[0].expect("measured"),
            symbolic: timings[1].expect("measured"),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

impl fmt::Display for BenchTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = [
            "AD names",
            "# Nodes",
            "Reachable",
            "# Wit.",
            "Shortest/Longest",
            "Concrete decide/all (ms)",
            "Symbolic decide/all (ms)",
        ];
        let rows: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.name.clone(),
                    format!("{}/{}", r.nodes.0, r.nodes.1),
                    format!("{}/{}", r.reachable.0, r.reachable.1),
                    r.witnesses.to_string(),
                    format!("{}/{}", r.shortest, r.longest),
                    format!("{:.1}/{:.1}", r.concrete.decide_ms, r.concrete.all_ms),
                    format!("{:.1}/{:.1}", r.symbolic.decide_ms, r.symbolic.all_ms),
                ]
            })
            .collect();
        let mut width = head.map(str::len);
        for r in &rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, cells: &[&str]| -> fmt::Result {
            let padded: Vec<String> = cells.iter().zip(width).map(|(c, w)| format!("{c:<w$}")).collect();
            writeln!(f, "{}", padded.join("  ").trim_end())
        };
        line(f, &head)?;
        for r in &rows {
            let cells: Vec<&str> = r.iter().map(String::as_str).collect();
            line(f, &cells)?;
        }
        Ok(())
    }
}
