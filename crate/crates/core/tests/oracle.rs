//! The brute-force enumerator used by the acceptance run must itself tell
//! diff traces apart from near misses.

mod common;

use addiff::diff::{addiff, DiffOptions};
use addiff::fixtures;
use addiff::parse;
use addiff::semantics::Machine;
use common::*;

const AB: &str = "activity ab { initial i; action a \"a\"; action b \"b\"; final f; i -> a; a -> b; b -> f; }";
const AC: &str = "activity ac { initial i; action a \"a\"; action c \"c\"; final f; i -> a; a -> c; c -> f; }";

#[test]
fn finds_the_first_divergence() {
    let (ab, ac) = (parse(AB).unwrap(), parse(AC).unwrap());
    let (m1, m2) = (Machine::new(&ab).unwrap(), Machine::new(&ac).unwrap());
    let bf = brute_force(&m1, &m2, 100).unwrap();
    let lens: Vec<Option<usize>> = bf.shortest.values().copied().collect();
    assert_eq!(lens, [Some(3)]);

    let s0 = m1.initial_states().unwrap().remove(0);
    let s1 = m1.successors(&s0).unwrap().remove(0);
    let s2 = m1.successors(&s1).unwrap().remove(0);
    assert!(is_diff_trace(&m1, &m2, &[s0.clone(), s1.clone(), s2.clone()]));
    assert!(!is_diff_trace(&m1, &m2, &[s0.clone(), s1.clone()]));
    assert!(!is_diff_trace(&m1, &m2, &[s1, s2]), "must start at an initial state");
}

#[test]
fn equal_diagrams_have_no_diff_traces() {
    let ab = parse(AB).unwrap();
    let m = Machine::new(&ab).unwrap();
    let bf = brute_force(&m, &m, 100).unwrap();
    assert!(bf.shortest.values().all(Option::is_none));
}

#[test]
fn agrees_with_the_hiring_witness() {
    let (h2, h3) = (fixtures::hire(2), fixtures::hire(3));
    let (m1, m2) = (Machine::new(&h2).unwrap(), Machine::new(&h3).unwrap());
    let bf = brute_force(&m1, &m2, 10_000).unwrap();
    let found: Vec<usize> = bf.shortest.values().flatten().copied().collect();
    assert_eq!(found, [4]);

    let trace = &addiff(&h2, &h3, &DiffOptions::default()).unwrap().traces[0];
    let states: Vec<_> = trace.steps.iter().map(|c| c.s1.to_state(&m1).unwrap()).collect();
    assert!(is_diff_trace(&m1, &m2, &states));
    assert!(!is_diff_trace(&m1, &m2, &states[..3]));
}

#[test]
fn gives_up_past_the_cap() {
    let (h1, h2) = (fixtures::hire(1), fixtures::hire(2));
    let (m1, m2) = (Machine::new(&h1).unwrap(), Machine::new(&h2).unwrap());
    assert!(brute_force(&m1, &m2, 1).is_none());
}

#[test]
fn generated_diagrams_are_well_formed_and_small() {
    let mut r = rng(3);
    for i in 0..200 {
        let (a, b) = random_pair(&mut r, i);
        for ad in [&a, &b] {
            assert!(well_formed(ad), "{}", addiff::serialize(ad));
            assert!(ad.nodes.len() <= MAX_NODES);
            assert!(ad.input_vars.len() + ad.local_vars.len() <= 2);
        }
    }
}
