//! Compute the diff witnesses between two versions of the hiring workflow
//! with both algorithms.

use addiff::diff::{addiff, Algorithm, DiffOptions};
use addiff::fixtures;
use addiff::report::DiffReport;

fn main() {
    let (v1, v2) = (fixtures::hire(1), fixtures::hire(2));
    for algo in [Algorithm::Concrete, Algorithm::Symbolic] {
        let out = addiff(&v1, &v2, &DiffOptions::with_algorithm(algo)).expect("fixtures are comparable");
        let report = DiffReport::new(&v1.name, &v2.name, &out, false);
        println!("{report}\n");
    }
    let out = addiff(&v2, &v1, &DiffOptions::default()).unwrap();
    let report = DiffReport::new(&v2.name, &v1.name, &out, false);
    println!("{}", report.to_json());
}
