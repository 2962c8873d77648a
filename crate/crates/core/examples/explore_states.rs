//! Enumerate the state space and the short traces of a fixture.

use addiff::fixtures;
use addiff::semantics::Machine;

fn main() {
    let ad = fixtures::proj(2);
    let m = Machine::new(&ad).expect("fixtures compile");
    let states = m.reachable_states().unwrap();
    println!("{}: {} reachable states", ad.name, states.len());
    for s in states.iter().take(8) {
        let tokens: Vec<usize> = s.marking.iter().collect();
        let env: Vec<String> = m.env(s).iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("  {:<22} {:<16} tokens {:?}", m.label(s).to_string(), env.join(" "), tokens);
    }

    let traces = m.enumerate_traces(5).unwrap();
    let full: Vec<_> = traces.iter().filter(|t| t.len() == 5).collect();
    println!("{} traces of up to 5 states, {} of exactly 5", traces.len(), full.len());
    for t in full.iter().take(2) {
        let labels: Vec<String> = t.iter().map(|s| m.label(s).to_string()).collect();
        println!("  {}", labels.join(" -> "));
    }
}
