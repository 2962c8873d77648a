//! Classify consecutive versions as equivalent, refining or incomparable.

use addiff::diff::{analyze_history, compare, DiffOptions};
use addiff::fixtures;
use addiff::report::EvolutionReport;

fn main() {
    let opts = DiffOptions::default();
    for history in [fixtures::hire_history(), fixtures::proj_history()] {
        let report = EvolutionReport {
            steps: analyze_history(&history, &opts).unwrap(),
        };
        println!("{report}");
        println!("all equivalent: {}\n", report.all_equivalent());
    }
    let r = compare(&fixtures::hire(1), &fixtures::hire(4), &opts).unwrap();
    println!("hire_v1 {r} hire_v4");
}
